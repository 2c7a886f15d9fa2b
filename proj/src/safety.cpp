#include "thermo/safety.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "thermo/errors.hpp"

namespace thermo {

namespace {

void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

SafePowerResult safe_power(double t_star_k, const SisoParams& siso, double voltage_v,
                           const LeakageParams& lp) {
    require(std::isfinite(t_star_k) && t_star_k > 0.0, "t_star must be > 0");
    const double beta = beta_of(siso, voltage_v, lp);

    SafePowerResult res;
    res.t_tilde_star = temp_to_aux(t_star_k, lp.kappa2);
    res.alpha_star =
        (1.0 - std::exp(-res.t_tilde_star) / (beta * res.t_tilde_star)) / res.t_tilde_star;
    if (!(res.alpha_star > 0.0)) {
        throw UnreachableTemperatureError(
            UnreachableTemperatureError::Reason::below_zero_power_fixed_point,
            "t_star " + std::to_string(t_star_k) +
                " K is already exceeded with zero steady power (alpha* <= 0)");
    }
    // A realizable target must sit on the stable branch: T~* at or above the
    // tangency point of the loop gain it induces.
    if (res.t_tilde_star < t_tilde_m(res.alpha_star)) {
        throw UnreachableTemperatureError(
            UnreachableTemperatureError::Reason::beyond_tangency,
            "t_star " + std::to_string(t_star_k) +
                " K exceeds the tangency temperature (unstable branch)");
    }
    res.pc_star_w = (siso.a - 1.0) / siso.b * res.alpha_star * lp.kappa2;
    return res;
}

double estimate_tau(const Trajectory& traj, int hotspot, double t_fix_k, int d) {
    traj.validate();
    require(d >= 1, "d must be >= 1");
    require(hotspot >= 0 && hotspot < traj.hotspot_count(), "hotspot index out of range");
    require(std::isfinite(t_fix_k), "t_fix must be finite");
    require(traj.size() > static_cast<std::size_t>(d),
            "trajectory must hold more than d samples");

    const std::size_t last = traj.size() - 1;
    const std::size_t prev = last - static_cast<std::size_t>(d);
    const double e_prev = traj.temps_k[prev][hotspot] - t_fix_k;
    const double e_last = traj.temps_k[last][hotspot] - t_fix_k;
    if (e_prev == 0.0 || e_last == 0.0) {
        throw EstimationUndefinedError("a sample coincides with the fixed point");
    }
    if (e_prev * e_last < 0.0) {
        throw EstimationUndefinedError("samples straddle the fixed point");
    }
    if (!(std::abs(e_prev) > std::abs(e_last))) {
        throw EstimationUndefinedError("samples are not converging toward the fixed point");
    }
    return (traj.times_s[last] - traj.times_s[prev]) / std::log(e_prev / e_last);
}

double time_to_fixed_point(double t_init_k, double t_fix_k, double tau_s, double epsilon_k) {
    require(std::isfinite(t_init_k) && std::isfinite(t_fix_k), "temperatures must be finite");
    require(std::isfinite(tau_s) && tau_s > 0.0, "tau must be > 0");
    require(std::isfinite(epsilon_k) && epsilon_k > 0.0, "epsilon must be > 0");
    const double gap = std::abs(t_fix_k - t_init_k);
    if (gap <= epsilon_k) return 0.0;
    return tau_s * std::log(gap / epsilon_k);
}

}  // namespace thermo
