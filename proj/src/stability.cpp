#include "thermo/stability.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "thermo/errors.hpp"

namespace thermo {

namespace {

constexpr double k_degenerate_margin = 1e-9;

void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

void require_domain(double t_tilde, double alpha) {
    if (!(t_tilde > 0.0) || !(t_tilde < 1.0 / alpha)) {
        throw std::invalid_argument("t_tilde must lie in (0, 1/alpha), got " +
                                    std::to_string(t_tilde));
    }
}

}  // namespace

void SisoParams::validate() const {
    require(std::isfinite(a) && a > 0.0 && a < 1.0, "SISO a must lie in (0, 1)");
    require(std::isfinite(b) && b > 0.0, "SISO b must be > 0");
}

void AuxiliaryForm::validate() const {
    require(std::isfinite(alpha) && alpha > 0.0, "alpha must be > 0");
    require(std::isfinite(beta) && beta > 0.0, "beta must be > 0");
    require(std::isfinite(kappa2) && kappa2 < 0.0, "kappa2 must be < 0");
}

double beta_of(const SisoParams& siso, double voltage_v, const LeakageParams& lp) {
    siso.validate();
    lp.validate();
    require(voltage_v > 0.0 && std::isfinite(voltage_v), "voltage must be > 0");
    require(lp.kappa1 > 0.0, "beta is undefined for kappa1 = 0 (no leakage feedback)");
    return (siso.a - 1.0) / siso.b / (voltage_v * lp.kappa1 * lp.kappa2);
}

AuxiliaryForm to_auxiliary(const SisoParams& siso, double pc_w, double voltage_v,
                           const LeakageParams& lp) {
    require(std::isfinite(pc_w) && pc_w > 0.0, "pc must be > 0");
    AuxiliaryForm aux;
    aux.beta = beta_of(siso, voltage_v, lp);
    aux.alpha = siso.b / (siso.a - 1.0) * (pc_w / lp.kappa2);
    aux.kappa2 = lp.kappa2;
    aux.validate();
    return aux;
}

double aux_to_temp(double t_tilde, double kappa2) {
    require(std::isfinite(t_tilde) && t_tilde > 0.0, "t_tilde must be > 0");
    require(std::isfinite(kappa2) && kappa2 < 0.0, "kappa2 must be < 0");
    return -kappa2 / t_tilde;
}

double temp_to_aux(double temp_k, double kappa2) {
    require(std::isfinite(temp_k) && temp_k > 0.0, "temperature must be > 0");
    require(std::isfinite(kappa2) && kappa2 < 0.0, "kappa2 must be < 0");
    return -kappa2 / temp_k;
}

double f_of(double t_tilde, const AuxiliaryForm& aux) {
    aux.validate();
    require_domain(t_tilde, aux.alpha);
    return std::log(aux.beta) + std::log(t_tilde) + std::log1p(-aux.alpha * t_tilde) + t_tilde;
}

double f_prime(double t_tilde, const AuxiliaryForm& aux) {
    aux.validate();
    require_domain(t_tilde, aux.alpha);
    return 1.0 / t_tilde - aux.alpha / (1.0 - aux.alpha * t_tilde) + 1.0;
}

double f_double_prime(double t_tilde, const AuxiliaryForm& aux) {
    aux.validate();
    require_domain(t_tilde, aux.alpha);
    const double g = aux.alpha / (1.0 - aux.alpha * t_tilde);
    return -1.0 / (t_tilde * t_tilde) - g * g;
}

double t_tilde_m(double alpha) {
    require(std::isfinite(alpha) && alpha > 0.0, "alpha must be > 0");
    // Equals 1/(2 alpha) - 1 + sqrt(1/(4 alpha^2) + 1) without the subtraction
    // that cancels for large alpha.
    const double x = 0.5 / alpha;
    return x + x * x / (1.0 + std::sqrt(1.0 + x * x));
}

ExistenceResult existence(const AuxiliaryForm& aux) {
    aux.validate();
    const double tm = t_tilde_m(aux.alpha);
    const double margin = std::log(aux.beta) + tm - std::log1p(2.0 / tm);
    return {margin >= 0.0, margin};
}

FixedPointPair find_fixed_points(const AuxiliaryForm& aux) {
    const ExistenceResult ex = existence(aux);
    const double tm = t_tilde_m(aux.alpha);
    if (std::abs(ex.margin) < k_degenerate_margin) {
        return {tm, tm, true};
    }
    if (ex.margin < 0.0) {
        throw NoFixedPointError(ex.margin, "no fixed point: existence margin " +
                                               std::to_string(ex.margin) + " < 0");
    }

    const auto f = [&aux](double t) { return f_of(t, aux); };
    const double nudge = std::max(1e-12, 1e-9 / aux.alpha);

    // F -> -inf at both ends of (0, 1/alpha); walk the bracket ends inward
    // until the sign change is captured.
    double lo = std::min(nudge, 0.5 * tm);
    while (f(lo) >= 0.0 && lo > 1e-300) lo *= 0.1;
    require(f(lo) < 0.0, "unstable root below the representable auxiliary range");
    const double t_u = bracketed_root(f, lo, tm);

    // The stable root approaches the domain edge to within e^(-t) when the
    // leakage feedback is weak (small alpha), which can land inside the last
    // ulp before 1/alpha. The nearest interior double is then the root at
    // machine precision.
    const double edge = 1.0 / aux.alpha;
    const double interior_max = std::nextafter(edge, 0.0);
    double t_s;
    if (f(interior_max) >= 0.0) {
        t_s = interior_max;
    } else {
        double hi = edge - std::min(nudge, 0.5 * (edge - tm));
        while (hi < edge && f(hi) >= 0.0) {
            double next_hi = edge - 0.1 * (edge - hi);
            if (next_hi <= hi) next_hi = std::nextafter(hi, edge);
            if (next_hi >= edge) {
                next_hi = interior_max;
                hi = next_hi;
                break;
            }
            hi = next_hi;
        }
        t_s = bracketed_root(f, tm, hi);
    }

    return {t_u, t_s, false};
}

double iterate_aux(double t_tilde, const AuxiliaryForm& aux, double a) {
    aux.validate();
    require_domain(t_tilde, aux.alpha);
    require(std::isfinite(a) && a > 0.0 && a < 1.0, "a must lie in (0, 1)");
    const double drive =
        aux.beta * (1.0 - aux.alpha * t_tilde) * t_tilde - std::exp(-t_tilde);
    const double inv_next =
        1.0 / t_tilde - (1.0 - a) / (aux.beta * t_tilde * t_tilde) * drive;
    if (!(inv_next > 0.0)) {
        throw NoFixedPointError(0.0,
                                "auxiliary iterate left the admissible domain (runaway step)");
    }
    return 1.0 / inv_next;
}

StabilityReport analyze(const SisoParams& siso, double pc_w, double voltage_v,
                        const LeakageParams& lp) {
    StabilityReport report;
    report.aux = to_auxiliary(siso, pc_w, voltage_v, lp);
    report.t_tilde_m = t_tilde_m(report.aux.alpha);
    const ExistenceResult ex = existence(report.aux);
    report.margin = ex.margin;
    if (!ex.has_fixed_points) {
        report.outcome = RunawayOutcome{ex.margin};
        return report;
    }
    const FixedPointPair roots = find_fixed_points(report.aux);
    FixedPointsOutcome out;
    out.t_tilde_u = roots.t_tilde_u;
    out.t_tilde_s = roots.t_tilde_s;
    out.degenerate = roots.degenerate;
    out.temp_unstable_k = aux_to_temp(roots.t_tilde_u, report.aux.kappa2);
    out.temp_stable_k = aux_to_temp(roots.t_tilde_s, report.aux.kappa2);
    out.roc_aux_lo = roots.t_tilde_u;
    out.roc_aux_hi = 1.0 / report.aux.alpha;
    out.roc_temp_lo_k = -report.aux.kappa2 * report.aux.alpha;
    out.roc_temp_hi_k = out.temp_unstable_k;
    report.outcome = out;
    return report;
}

}  // namespace thermo
