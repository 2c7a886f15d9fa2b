#include "thermo/sysid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "thermo/errors.hpp"

namespace thermo {

namespace {

void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

double leak_term(double lump_w, double kappa1, double kappa2, double voltage_v, double temp_k) {
    return lump_w + voltage_v * kappa1 * temp_k * temp_k * std::exp(kappa2 / temp_k);
}

struct LeakageInit {
    double lump = 0.0;
    double kappa1 = 0.0;
    double kappa2 = 0.0;
};

// Seeds the nonlinear fit from the slope of the power curve at both ends of
// the temperature range: the exponent follows from the log ratio of the two
// slopes, everything else by back substitution.
LeakageInit initial_guess(const std::vector<CalibrationSample>& s, double voltage_v) {
    const std::size_t n = s.size();
    const double d_bot = (s[1].power_w - s[0].power_w) / (s[1].temp_k - s[0].temp_k);
    const double d_top =
        (s[n - 1].power_w - s[n - 2].power_w) / (s[n - 1].temp_k - s[n - 2].temp_k);
    const double t_bot = 0.5 * (s[0].temp_k + s[1].temp_k);
    const double t_top = 0.5 * (s[n - 2].temp_k + s[n - 1].temp_k);

    LeakageInit init;
    init.kappa2 = -800.0;
    if (d_bot > 0.0 && d_top > 0.0) {
        const double inv_span = 1.0 / t_top - 1.0 / t_bot;  // negative
        double k2 = (std::log(d_top) - std::log(d_bot)) / inv_span;
        for (int pass = 0; pass < 2 && k2 < 0.0; ++pass) {
            k2 = (std::log(d_top / (2.0 * t_top - k2)) - std::log(d_bot / (2.0 * t_bot - k2))) /
                 inv_span;
        }
        if (std::isfinite(k2) && k2 < -1e-3 && k2 > -1e6) init.kappa2 = k2;
    }

    const double top_slope_factor =
        voltage_v * std::exp(init.kappa2 / t_top) * (2.0 * t_top - init.kappa2);
    init.kappa1 = d_top > 0.0 ? d_top / top_slope_factor : 0.0;
    if (!(std::isfinite(init.kappa1) && init.kappa1 > 0.0)) {
        const double spread =
            std::max(s[n - 1].power_w - s[0].power_w, 1e-9 * std::abs(s[n - 1].power_w) + 1e-12);
        init.kappa1 = spread / (voltage_v * s[n - 1].temp_k * s[n - 1].temp_k *
                                std::exp(init.kappa2 / s[n - 1].temp_k));
    }

    double acc = 0.0;
    for (const auto& p : s) acc += p.power_w - leak_term(0.0, init.kappa1, init.kappa2, voltage_v, p.temp_k);
    init.lump = acc / static_cast<double>(n);
    return init;
}

}  // namespace

LeakageFit fit_leakage(const std::vector<CalibrationSample>& samples_in, double voltage_v,
                       std::optional<double> known_p_dyn_w) {
    require(std::isfinite(voltage_v) && voltage_v > 0.0, "voltage must be > 0");
    require(samples_in.size() >= 4, "need at least 4 calibration samples");
    for (const auto& p : samples_in) {
        require(std::isfinite(p.temp_k) && p.temp_k > 0.0, "sample temperatures must be > 0");
        require(std::isfinite(p.power_w), "sample powers must be finite");
    }
    std::vector<CalibrationSample> s = samples_in;
    std::sort(s.begin(), s.end(),
              [](const CalibrationSample& x, const CalibrationSample& y) {
                  return x.temp_k < y.temp_k;
              });
    for (std::size_t j = 1; j < s.size(); ++j) {
        require(s[j].temp_k > s[j - 1].temp_k, "sample temperatures must be distinct");
    }
    const double span = s.back().temp_k - s.front().temp_k;
    require(span >= 20.0, "ill-conditioned temperature span (need >= 20 K), got " +
                              std::to_string(span) + " K");

    const std::size_t n = s.size();
    LeakageFit fit;

    double p_min = s[0].power_w;
    double p_max = s[0].power_w;
    for (const auto& p : s) {
        p_min = std::min(p_min, p.power_w);
        p_max = std::max(p_max, p.power_w);
    }
    const double p_scale = std::max(std::abs(p_min), std::abs(p_max));
    if (p_max - p_min <= std::max(1e-12, 1e-9 * p_scale)) {
        // No usable temperature dependence: report the lump alone. kappa2 is a
        // placeholder made inert by kappa1 = 0.
        double mean = 0.0;
        for (const auto& p : s) mean += p.power_w;
        mean /= static_cast<double>(n);
        fit.lump_w = mean;
        fit.kappa1 = 0.0;
        fit.kappa2 = -1.0;
        fit.degenerate = true;
        fit.converged = true;
        double sse = 0.0;
        for (const auto& p : s) sse += (p.power_w - mean) * (p.power_w - mean);
        fit.residual_rms_w = std::sqrt(sse / static_cast<double>(n));
        if (known_p_dyn_w) fit.i_gate_a = (fit.lump_w - *known_p_dyn_w) / voltage_v;
        return fit;
    }

    const LeakageInit init = initial_guess(s, voltage_v);
    // theta = (lump, ln kappa1, ln(-kappa2)) keeps the sign constraints built in.
    Eigen::Vector3d theta(init.lump, std::log(std::max(init.kappa1, 1e-300)),
                          std::log(-init.kappa2));

    const auto sse_of = [&](const Eigen::Vector3d& th, Eigen::VectorXd* res) {
        const double k1 = std::exp(th[1]);
        const double k2 = -std::exp(th[2]);
        double sse = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double r = leak_term(th[0], k1, k2, voltage_v, s[j].temp_k) - s[j].power_w;
            if (res) (*res)[static_cast<Eigen::Index>(j)] = r;
            sse += r * r;
        }
        return sse;
    };

    Eigen::VectorXd resid(static_cast<Eigen::Index>(n));
    double sse = sse_of(theta, &resid);
    require(std::isfinite(sse), "initial leakage guess is not finite");

    double lambda = 1e-3;
    int rejects_in_a_row = 0;
    for (fit.iterations = 1; fit.iterations <= 500; ++fit.iterations) {
        const double k1 = std::exp(theta[1]);
        const double k2 = -std::exp(theta[2]);
        Eigen::MatrixXd jac(static_cast<Eigen::Index>(n), 3);
        for (std::size_t j = 0; j < n; ++j) {
            const double t = s[j].temp_k;
            const double leak = voltage_v * k1 * t * t * std::exp(k2 / t);
            jac(static_cast<Eigen::Index>(j), 0) = 1.0;
            jac(static_cast<Eigen::Index>(j), 1) = leak;           // d/d(ln k1)
            jac(static_cast<Eigen::Index>(j), 2) = leak * k2 / t;  // d/d(ln(-k2))
        }
        const Eigen::Matrix3d h = jac.transpose() * jac;
        const Eigen::Vector3d g = jac.transpose() * resid;
        Eigen::Matrix3d damped = h;
        for (int d = 0; d < 3; ++d) damped(d, d) += lambda * std::max(h(d, d), 1e-300);
        const Eigen::Vector3d delta = damped.ldlt().solve(-g);

        const Eigen::Vector3d cand = theta + delta;
        Eigen::VectorXd cand_resid(static_cast<Eigen::Index>(n));
        const double cand_sse =
            delta.allFinite() ? sse_of(cand, &cand_resid) : std::numeric_limits<double>::infinity();
        if (std::isfinite(cand_sse) && cand_sse < sse) {
            const double drop = sse - cand_sse;
            theta = cand;
            resid = cand_resid;
            sse = cand_sse;
            lambda = std::max(lambda / 3.0, 1e-12);
            rejects_in_a_row = 0;
            if (delta.lpNorm<Eigen::Infinity>() <
                    1e-12 * (1.0 + theta.lpNorm<Eigen::Infinity>()) ||
                drop <= 1e-24 + 1e-15 * sse) {
                fit.converged = true;
                break;
            }
        } else {
            lambda = std::min(lambda * 10.0, 1e12);
            if (++rejects_in_a_row > 60) break;  // stuck at a numerical floor
        }
        if (sse <= 1e-24 * static_cast<double>(n)) {
            fit.converged = true;
            break;
        }
    }
    fit.iterations = std::min(fit.iterations, 500);

    fit.lump_w = theta[0];
    fit.kappa1 = std::exp(theta[1]);
    fit.kappa2 = -std::exp(theta[2]);
    fit.residual_rms_w = std::sqrt(sse / static_cast<double>(n));
    if (!std::isfinite(fit.lump_w) || !std::isfinite(fit.kappa1) || !std::isfinite(fit.kappa2)) {
        throw FitError("leakage fit produced non-finite parameters");
    }
    if (known_p_dyn_w) fit.i_gate_a = (fit.lump_w - *known_p_dyn_w) / voltage_v;
    return fit;
}

StateSpaceFit fit_state_space(const std::vector<Trajectory>& traces, int hotspots, int sources) {
    require(hotspots >= 1 && sources >= 1, "need at least one hotspot and one source");
    require(!traces.empty(), "need at least one trajectory");
    long rows = 0;
    for (const auto& traj : traces) {
        traj.validate();
        require(traj.hotspot_count() == hotspots, "trajectory hotspot count mismatch");
        require(traj.source_count() == sources, "trajectory source count mismatch");
        rows += static_cast<long>(traj.size()) - 1;
    }
    const long needed = 10L * (hotspots + sources);
    require(rows >= needed, "need at least " + std::to_string(needed) +
                                " transitions to identify the model, got " + std::to_string(rows));

    const int cols = hotspots + sources;
    Eigen::MatrixXd x(rows, cols);
    Eigen::MatrixXd y(rows, hotspots);
    long r = 0;
    for (const auto& traj : traces) {
        for (std::size_t k = 0; k + 1 < traj.size(); ++k, ++r) {
            x.block(r, 0, 1, hotspots) = traj.temps_k[k].transpose();
            x.block(r, hotspots, 1, sources) = traj.powers_w[k].transpose();
            y.row(r) = traj.temps_k[k + 1].transpose();
        }
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
    if (qr.rank() < cols) {
        const auto perm = qr.colsPermutation().indices();
        std::vector<std::string> deficient;
        for (Eigen::Index j = qr.rank(); j < perm.size(); ++j) {
            const int col = perm[j];
            deficient.push_back(col < hotspots ? "T" + std::to_string(col + 1)
                                               : "P" + std::to_string(col - hotspots + 1));
        }
        std::string what = "regressor is rank deficient; unexcited directions:";
        for (const auto& name : deficient) what += " " + name;
        throw IdentifiabilityError(std::move(deficient), what);
    }

    const Eigen::MatrixXd w = qr.solve(y);
    StateSpaceFit fit;
    fit.a = w.topRows(hotspots).transpose();
    fit.b = w.bottomRows(sources).transpose();

    const Eigen::MatrixXd err = x * w - y;
    fit.residual_rms_k.resize(static_cast<std::size_t>(hotspots));
    for (int i = 0; i < hotspots; ++i) {
        fit.residual_rms_k[static_cast<std::size_t>(i)] =
            std::sqrt(err.col(i).squaredNorm() / static_cast<double>(rows));
    }

    const double rho = spectral_radius(fit.a);
    if (rho >= 1.0) {
        fit.warnings.push_back("fitted A is not stable: spectral radius estimate " +
                               std::to_string(rho));
    }
    if ((fit.b.array() < 0.0).any()) {
        fit.warnings.push_back("fitted B has negative entries");
    }
    return fit;
}

SisoParams reduce_to_siso(const Trajectory& traj, int hotspot) {
    traj.validate();
    require(hotspot >= 0 && hotspot < traj.hotspot_count(), "hotspot index out of range");
    require(traj.size() >= 3, "need at least two transitions to fit the scalar model");

    const long rows = static_cast<long>(traj.size()) - 1;
    Eigen::MatrixXd x(rows, 2);
    Eigen::VectorXd y(rows);
    for (long k = 0; k < rows; ++k) {
        x(k, 0) = traj.temps_k[static_cast<std::size_t>(k)][hotspot];
        x(k, 1) = traj.powers_w[static_cast<std::size_t>(k)].sum();
        y[k] = traj.temps_k[static_cast<std::size_t>(k) + 1][hotspot];
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
    if (qr.rank() < 2) {
        const auto perm = qr.colsPermutation().indices();
        std::vector<std::string> deficient;
        for (Eigen::Index j = qr.rank(); j < perm.size(); ++j) {
            deficient.push_back(perm[j] == 0 ? "T" : "P_tot");
        }
        throw IdentifiabilityError(deficient, "scalar regressor is rank deficient");
    }
    const Eigen::Vector2d w = qr.solve(y);
    if (!(w[0] > 0.0 && w[0] < 1.0 && w[1] > 0.0)) {
        throw ModelMismatchError(w[0], w[1],
                                 "fitted scalar model is not admissible: a = " +
                                     std::to_string(w[0]) + ", b = " + std::to_string(w[1]));
    }
    return SisoParams{w[0], w[1]};
}

std::uint16_t lfsr_next(std::uint16_t reg) {
    const std::uint16_t bit =
        static_cast<std::uint16_t>(((reg >> 0) ^ (reg >> 2) ^ (reg >> 3) ^ (reg >> 5)) & 1u);
    return static_cast<std::uint16_t>((reg >> 1) | static_cast<std::uint16_t>(bit << 15));
}

PrbsSchedule generate_prbs(const std::vector<std::vector<double>>& levels_per_source, long length,
                           std::uint16_t seed) {
    require(seed != 0, "seed must be nonzero");
    require(length >= 1, "length must be >= 1");
    require(!levels_per_source.empty(), "need at least one source");
    for (const auto& levels : levels_per_source) {
        require(levels.size() >= 2, "each source needs at least 2 levels");
        for (double v : levels) {
            require(std::isfinite(v) && v >= 0.0, "levels must be finite and >= 0");
        }
    }

    const std::size_t m = levels_per_source.size();
    PrbsSchedule out;
    out.entries.reserve(static_cast<std::size_t>(length) * m);
    out.indices.assign(m, {});
    for (auto& ix : out.indices) ix.reserve(static_cast<std::size_t>(length));

    std::uint16_t reg = seed;
    for (long k = 0; k < length; ++k) {
        for (std::size_t src = 0; src < m; ++src) {
            const int idx = static_cast<int>(reg % levels_per_source[src].size());
            out.entries.push_back({k, static_cast<int>(src), levels_per_source[src][idx]});
            out.indices[src].push_back(idx);
            reg = lfsr_next(reg);
        }
    }
    return out;
}

}  // namespace thermo
