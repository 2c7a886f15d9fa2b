#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "thermo/stability.hpp"
#include "thermo/thermal_sim.hpp"

namespace thermo {

/// One steady-state calibration point: total power drawn at a held temperature.
struct CalibrationSample {
    double temp_k = 0.0;
    double power_w = 0.0;
};

struct LeakageFit {
    double lump_w = 0.0;   // temperature-independent power (dynamic + gate)
    double kappa1 = 0.0;
    double kappa2 = 0.0;
    std::optional<double> i_gate_a;  // only when the dynamic share is known
    bool degenerate = false;         // no temperature dependence in the data
    bool converged = false;
    int iterations = 0;
    double residual_rms_w = 0.0;
};

/// Fits P = lump + V kappa1 T^2 exp(kappa2 / T) to steady-state measurements
/// by Levenberg-Marquardt in (lump, ln kappa1, ln(-kappa2)), seeded from the
/// log-slope of the extreme sample pairs. Needs at least 4 samples spanning
/// 20 K or more. When the measured dynamic power is supplied, the gate current
/// is split out of the lump.
[[nodiscard]] LeakageFit fit_leakage(const std::vector<CalibrationSample>& samples,
                                     double voltage_v,
                                     std::optional<double> known_p_dyn_w = std::nullopt);

struct StateSpaceFit {
    Eigen::MatrixXd a;
    Eigen::MatrixXd b;
    std::vector<double> residual_rms_k;  // per hotspot
    std::vector<std::string> warnings;
};

/// Least-squares fit of T[k+1] = A T[k] + B P[k] over one or more recorded
/// trajectories, solved by column-pivoted orthogonal factorization (never via
/// normal equations). Throws IdentifiabilityError naming the unexcited
/// columns when the regressor is rank deficient. Warns, without failing, when
/// the fitted A is not stable.
[[nodiscard]] StateSpaceFit fit_state_space(const std::vector<Trajectory>& traces, int hotspots,
                                            int sources);

/// Collapses one hotspot of a recorded trajectory onto the scalar model
/// T[k+1] = a T[k] + b P_tot[k], with P_tot the sum over all sources. Throws
/// ModelMismatchError when the fitted pair leaves 0 < a < 1, b > 0.
[[nodiscard]] SisoParams reduce_to_siso(const Trajectory& traj, int hotspot);

/// 16-bit Fibonacci LFSR over taps 16, 14, 13, 11 (one maximal-length choice):
/// feedback bit = ((reg >> 0) ^ (reg >> 2) ^ (reg >> 3) ^ (reg >> 5)) & 1,
/// next = (reg >> 1) | (bit << 15). Period 65535 over nonzero states.
[[nodiscard]] std::uint16_t lfsr_next(std::uint16_t reg);

struct PrbsSchedule {
    Schedule entries;                       // step-major, source-minor order
    std::vector<std::vector<int>> indices;  // indices[source][step], into levels
};

/// Pseudo-random excitation schedule: at every step each source is switched to
/// levels[source][register mod levels], consuming one register state per
/// (step, source) pair in step-major order. The register is emitted before it
/// advances, so the first value depends only on the seed. Seed must be nonzero.
[[nodiscard]] PrbsSchedule generate_prbs(const std::vector<std::vector<double>>& levels_per_source,
                                         long length, std::uint16_t seed);

}  // namespace thermo
