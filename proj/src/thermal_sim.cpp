#include "thermo/thermal_sim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace thermo {

namespace {

void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

void require_same_size(const Eigen::VectorXd& v, int n, const char* name) {
    if (static_cast<int>(v.size()) != n) {
        throw std::invalid_argument(std::string(name) + " has size " +
                                    std::to_string(v.size()) + ", expected " +
                                    std::to_string(n));
    }
}

void require_positive_temps(const Eigen::VectorXd& temp_k) {
    for (Eigen::Index i = 0; i < temp_k.size(); ++i) {
        if (!(temp_k[i] > 0.0)) {
            throw std::invalid_argument("temperature " + std::to_string(i + 1) +
                                        " must be positive, got " + std::to_string(temp_k[i]));
        }
    }
}

// Power vector for the coupled dynamics. pc_now overrides pc_component when
// a schedule is active; sized 0 means "use each source's own pc_component".
Eigen::VectorXd power_vector(const ThermalStateSpace& model,
                             const std::vector<SourceParams>& sources,
                             const Eigen::VectorXd& temp_k,
                             const Eigen::VectorXd& pc_now) {
    const auto& map = model.source_hotspot_map();
    Eigen::VectorXd power(model.source_count());
    for (int m = 0; m < model.source_count(); ++m) {
        const double t = temp_k[map[m]];
        if (pc_now.size() > 0) {
            power[m] = pc_now[m] + subthreshold_power(sources[m], t);
        } else {
            power[m] = total_power(sources[m], t);
        }
    }
    return power;
}

}  // namespace

double spectral_radius(const Eigen::MatrixXd& m, int iterations) {
    require(m.rows() == m.cols() && m.rows() > 0, "spectral_radius needs a nonempty square matrix");
    require(iterations >= 2, "spectral_radius needs at least 2 iterations");
    require(m.allFinite(), "spectral_radius needs finite entries");

    const Eigen::Index n = m.rows();
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = 1.0 + 1e-3 * static_cast<double>(i);
    v /= v.norm();

    double log_growth = 0.0;
    int counted = 0;
    const int burn_in = iterations / 2;
    for (int it = 0; it < iterations; ++it) {
        Eigen::VectorXd w = m * v;
        const double norm = w.norm();
        if (norm == 0.0) return 0.0;  // v in the kernel; nilpotent-like case
        if (it >= burn_in) {
            log_growth += std::log(norm);
            ++counted;
        }
        v = w / norm;
    }
    return std::exp(log_growth / counted);
}

ThermalStateSpace::ThermalStateSpace(Eigen::MatrixXd a, Eigen::MatrixXd b,
                                     double sample_period_s, std::vector<int> source_hotspot_map)
    : a_(std::move(a)),
      b_(std::move(b)),
      sample_period_s_(sample_period_s),
      map_(std::move(source_hotspot_map)),
      offset_k_(Eigen::VectorXd::Zero(a_.rows())) {
    require(a_.rows() > 0 && a_.rows() == a_.cols(), "A must be square and nonempty");
    require(a_.allFinite(), "A must have finite entries");
    require(b_.rows() == a_.rows() && b_.cols() > 0, "B must be N x M with M >= 1");
    require(b_.allFinite(), "B must have finite entries");
    require((b_.array() >= 0.0).all(), "B entries must be nonnegative");
    require(std::isfinite(sample_period_s_) && sample_period_s_ > 0.0,
            "sample period must be positive");
    require(static_cast<int>(map_.size()) == source_count(),
            "source_hotspot_map must have one entry per source");
    for (int h : map_) {
        require(h >= 0 && h < hotspot_count(), "source_hotspot_map entry out of range");
    }
    const double rho = spectral_radius(a_);
    require(rho < 1.0, "A is not stable: spectral radius estimate " + std::to_string(rho));
}

ThermalStateSpace ThermalStateSpace::ambient_referenced(Eigen::MatrixXd a, Eigen::MatrixXd b,
                                                        double sample_period_s,
                                                        std::vector<int> source_hotspot_map,
                                                        double t_ambient_k) {
    require(std::isfinite(t_ambient_k) && t_ambient_k > 0.0, "ambient temperature must be positive");
    ThermalStateSpace model(std::move(a), std::move(b), sample_period_s,
                            std::move(source_hotspot_map));
    const Eigen::Index n = model.a_.rows();
    model.offset_k_ = (Eigen::MatrixXd::Identity(n, n) - model.a_) *
                      Eigen::VectorXd::Constant(n, t_ambient_k);
    return model;
}

int Trajectory::hotspot_count() const {
    return temps_k.empty() ? 0 : static_cast<int>(temps_k.front().size());
}

int Trajectory::source_count() const {
    return powers_w.empty() ? 0 : static_cast<int>(powers_w.front().size());
}

void Trajectory::validate() const {
    require(times_s.size() == temps_k.size() && times_s.size() == powers_w.size(),
            "trajectory columns must have equal length");
    require(!times_s.empty(), "trajectory must not be empty");
    for (std::size_t k = 0; k < size(); ++k) {
        require(temps_k[k].size() == temps_k.front().size(),
                "trajectory temperature rows must have equal width");
        require(powers_w[k].size() == powers_w.front().size(),
                "trajectory power rows must have equal width");
        if (k > 0) require(times_s[k] > times_s[k - 1], "trajectory times must increase");
    }
}

Eigen::VectorXd linear_step(const ThermalStateSpace& model, const Eigen::VectorXd& temp_k,
                            const Eigen::VectorXd& power_w) {
    require_same_size(temp_k, model.hotspot_count(), "temperature vector");
    require_same_size(power_w, model.source_count(), "power vector");
    return model.a() * temp_k + model.b() * power_w + model.offset_k();
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> coupled_step(const ThermalStateSpace& model,
                                                         const std::vector<SourceParams>& sources,
                                                         const Eigen::VectorXd& temp_k) {
    require(static_cast<int>(sources.size()) == model.source_count(),
            "need one SourceParams per model source");
    require_same_size(temp_k, model.hotspot_count(), "temperature vector");
    require_positive_temps(temp_k);
    Eigen::VectorXd power = power_vector(model, sources, temp_k, Eigen::VectorXd());
    return {linear_step(model, temp_k, power), std::move(power)};
}

Trajectory simulate(const ThermalStateSpace& model, const std::vector<SourceParams>& sources,
                    const Eigen::VectorXd& temp0_k, long steps, const Schedule& schedule,
                    const SimulateOptions& options) {
    require(static_cast<int>(sources.size()) == model.source_count(),
            "need one SourceParams per model source");
    require_same_size(temp0_k, model.hotspot_count(), "initial temperature vector");
    require_positive_temps(temp0_k);
    require(steps >= 1, "steps must be >= 1");
    require(std::isfinite(options.runaway_bound_k) && options.runaway_bound_k > 0.0,
            "runaway bound must be positive");
    for (const auto& e : schedule) {
        require(e.step >= 0, "schedule step must be >= 0");
        require(e.source >= 0 && e.source < model.source_count(),
                "schedule source index out of range");
        require(std::isfinite(e.pc_w) && e.pc_w >= 0.0, "schedule pc_W must be >= 0");
    }
    Schedule ordered = schedule;
    std::stable_sort(ordered.begin(), ordered.end(),
                     [](const ScheduleEntry& x, const ScheduleEntry& y) { return x.step < y.step; });

    Eigen::VectorXd pc_now(model.source_count());
    for (int m = 0; m < model.source_count(); ++m) pc_now[m] = pc_component(sources[m]);

    Trajectory traj;
    traj.times_s.reserve(static_cast<std::size_t>(steps) + 1);
    traj.temps_k.reserve(static_cast<std::size_t>(steps) + 1);
    traj.powers_w.reserve(static_cast<std::size_t>(steps) + 1);

    Eigen::VectorXd temp = temp0_k;
    std::size_t next_override = 0;
    for (long k = 0; k <= steps; ++k) {
        while (next_override < ordered.size() && ordered[next_override].step <= k) {
            pc_now[ordered[next_override].source] = ordered[next_override].pc_w;
            ++next_override;
        }
        require_positive_temps(temp);
        Eigen::VectorXd power = power_vector(model, sources, temp, pc_now);
        traj.times_s.push_back(static_cast<double>(k) * model.sample_period_s());
        traj.temps_k.push_back(temp);
        traj.powers_w.push_back(power);
        if (temp.maxCoeff() > options.runaway_bound_k) {
            traj.runaway = true;
            break;
        }
        if (k < steps) temp = linear_step(model, temp, power);
    }
    return traj;
}

Eigen::VectorXd linear_steady_state(const ThermalStateSpace& model,
                                    const Eigen::VectorXd& power_w) {
    require_same_size(power_w, model.source_count(), "power vector");
    const Eigen::Index n = model.a().rows();
    const Eigen::MatrixXd system = Eigen::MatrixXd::Identity(n, n) - model.a();
    Eigen::FullPivLU<Eigen::MatrixXd> lu(system);
    // Cannot trigger once the stability invariant holds; kept as a guard for
    // near-singular fitted models that squeak past the radius estimate.
    require(lu.isInvertible(), "I - A is singular; no unique steady state");
    return lu.solve(model.b() * power_w + model.offset_k());
}

}  // namespace thermo
