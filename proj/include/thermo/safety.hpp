#pragma once

#include "thermo/power_model.hpp"
#include "thermo/stability.hpp"
#include "thermo/thermal_sim.hpp"

namespace thermo {

struct SafePowerResult {
    double pc_star_w = 0.0;     // largest steady pc that parks T at t_star
    double alpha_star = 0.0;    // auxiliary loop gain realized at t_star
    double t_tilde_star = 0.0;  // -kappa2 / t_star
};

/// Inverts the fixed-point condition: the pc whose stable fixed point lands
/// exactly on t_star. alpha* = (1/T~*)(1 - e^(-T~*) / (beta T~*)),
/// pc* = ((a-1)/b) alpha* kappa2. Throws UnreachableTemperatureError when
/// alpha* <= 0 (t_star beyond what zero power already exceeds) or when t_star
/// falls on the unstable branch (beyond the tangency temperature).
[[nodiscard]] SafePowerResult safe_power(double t_star_k, const SisoParams& siso,
                                         double voltage_v, const LeakageParams& lp);

/// Exponential time constant from two samples of a converging trajectory:
///   tau = (t_last - t_prev) / ln((T_prev - t_fix) / (T_last - t_fix)),
/// using the final sample and the one `d` steps earlier. Throws
/// EstimationUndefinedError unless both errors share a sign and shrink
/// strictly in magnitude.
[[nodiscard]] double estimate_tau(const Trajectory& traj, int hotspot, double t_fix_k, int d);

/// Remaining time until |T - t_fix| <= epsilon under exponential settling:
/// tau * ln(|t_fix - t_init| / epsilon), clamped at zero inside the band.
[[nodiscard]] double time_to_fixed_point(double t_init_k, double t_fix_k, double tau_s,
                                         double epsilon_k);

}  // namespace thermo
