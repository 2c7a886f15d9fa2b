#pragma once

#include <Eigen/Dense>

#include <utility>
#include <vector>

#include "thermo/power_model.hpp"

namespace thermo {

/// Spectral radius estimate via normalized power iteration. The growth rate is
/// averaged geometrically over the second half of the run, which also handles
/// complex-pair dominant eigenvalues. Deterministic start vector.
[[nodiscard]] double spectral_radius(const Eigen::MatrixXd& m, int iterations = 800);

/// Discrete thermal model T[k+1] = A T[k] + B P[k] (+ offset) over N hotspot
/// temperatures and M power sources. Validated at construction: A must be
/// stable (spectral radius < 1), B entries nonnegative, the source map in
/// range, and the sample period positive.
///
/// Temperatures are absolute (Kelvin). A model calibrated against
/// ambient-referenced data carries the constant offset (I - A) * t_ambient * 1
/// so that zero power settles at ambient instead of absolute zero.
class ThermalStateSpace {
public:
    ThermalStateSpace(Eigen::MatrixXd a, Eigen::MatrixXd b, double sample_period_s,
                      std::vector<int> source_hotspot_map);

    static ThermalStateSpace ambient_referenced(Eigen::MatrixXd a, Eigen::MatrixXd b,
                                                double sample_period_s,
                                                std::vector<int> source_hotspot_map,
                                                double t_ambient_k);

    const Eigen::MatrixXd& a() const noexcept { return a_; }
    const Eigen::MatrixXd& b() const noexcept { return b_; }
    double sample_period_s() const noexcept { return sample_period_s_; }
    const std::vector<int>& source_hotspot_map() const noexcept { return map_; }
    const Eigen::VectorXd& offset_k() const noexcept { return offset_k_; }

    int hotspot_count() const noexcept { return static_cast<int>(a_.rows()); }
    int source_count() const noexcept { return static_cast<int>(b_.cols()); }

private:
    Eigen::MatrixXd a_;
    Eigen::MatrixXd b_;
    double sample_period_s_;
    std::vector<int> map_;
    Eigen::VectorXd offset_k_;
};

/// One persistent change to a source's temperature-independent power: from
/// `step` onward source `source` dissipates pc_w + subthreshold leakage.
struct ScheduleEntry {
    long step = 0;
    int source = 0;
    double pc_w = 0.0;
};
using Schedule = std::vector<ScheduleEntry>;

/// Simulation output. Row k holds the state at time k * sample_period and the
/// power drawn at that state, so powers[k] produced temps[k+1].
struct Trajectory {
    std::vector<double> times_s;
    std::vector<Eigen::VectorXd> temps_k;
    std::vector<Eigen::VectorXd> powers_w;
    bool runaway = false;

    std::size_t size() const noexcept { return times_s.size(); }
    int hotspot_count() const;
    int source_count() const;
    void validate() const;
};

struct SimulateOptions {
    double runaway_bound_k = 2000.0;
};

/// One linear update A * temp + B * power (+ offset). Power is held external.
[[nodiscard]] Eigen::VectorXd linear_step(const ThermalStateSpace& model,
                                          const Eigen::VectorXd& temp_k,
                                          const Eigen::VectorXd& power_w);

/// One coupled update: every source draws total_power at its hotspot's current
/// temperature, then the linear update is applied. Returns (next temp, power).
[[nodiscard]] std::pair<Eigen::VectorXd, Eigen::VectorXd> coupled_step(
    const ThermalStateSpace& model, const std::vector<SourceParams>& sources,
    const Eigen::VectorXd& temp_k);

/// Iterates the coupled dynamics for `steps` updates and records every state.
/// Schedule entries override pc_component per source, persistently from their
/// step. Stops early (runaway flag set, trajectory truncated) if any hotspot
/// exceeds the runaway bound.
[[nodiscard]] Trajectory simulate(const ThermalStateSpace& model,
                                  const std::vector<SourceParams>& sources,
                                  const Eigen::VectorXd& temp0_k, long steps,
                                  const Schedule& schedule = {},
                                  const SimulateOptions& options = {});

/// Steady state of the linear dynamics under constant power:
/// solves (I - A) T = B P (+ offset).
[[nodiscard]] Eigen::VectorXd linear_steady_state(const ThermalStateSpace& model,
                                                  const Eigen::VectorXd& power_w);

}  // namespace thermo
