#pragma once

#include <cmath>
#include <stdexcept>
#include <variant>

#include "thermo/power_model.hpp"

namespace thermo {

/// Reduced scalar thermal model T[k+1] = a T[k] + b P[k] with 0 < a < 1, b > 0.
struct SisoParams {
    double a = 0.0;
    double b = 0.0;

    void validate() const;
};

/// Auxiliary coordinates of the scalar power-temperature loop. With
/// T~ = -kappa2 / T the fixed points of the coupled dynamics are the zeros of
///   F(T~) = ln(beta) + ln(T~) + ln(1 - alpha T~) + T~   on (0, 1/alpha),
/// where alpha = (b/(a-1)) * (pc/kappa2) and
/// beta = ((a-1)/b) * 1/(V kappa1 kappa2). Both are positive.
struct AuxiliaryForm {
    double alpha = 0.0;
    double beta = 0.0;
    double kappa2 = 0.0;  // kept for mapping back to Kelvin

    void validate() const;
};

[[nodiscard]] AuxiliaryForm to_auxiliary(const SisoParams& siso, double pc_w, double voltage_v,
                                         const LeakageParams& lp);

/// beta depends on the model and source but not on the power setting.
[[nodiscard]] double beta_of(const SisoParams& siso, double voltage_v, const LeakageParams& lp);

/// T = -kappa2 / T~. Order-reversing: larger T~ means colder.
[[nodiscard]] double aux_to_temp(double t_tilde, double kappa2);
[[nodiscard]] double temp_to_aux(double temp_k, double kappa2);

[[nodiscard]] double f_of(double t_tilde, const AuxiliaryForm& aux);
[[nodiscard]] double f_prime(double t_tilde, const AuxiliaryForm& aux);
[[nodiscard]] double f_double_prime(double t_tilde, const AuxiliaryForm& aux);

/// Argmax of F: T~_m = 1/(2 alpha) - 1 + sqrt(1/(4 alpha^2) + 1), evaluated in
/// a cancellation-free form. F is strictly concave, so this is the unique
/// interior maximum.
[[nodiscard]] double t_tilde_m(double alpha);

struct ExistenceResult {
    bool has_fixed_points = false;
    double margin = 0.0;  // F(T~_m); fixed points exist iff margin >= 0
};

/// Closed-form existence test: margin = ln(beta) + T~_m - ln(2 / T~_m + 1).
[[nodiscard]] ExistenceResult existence(const AuxiliaryForm& aux);

struct FixedPointPair {
    double t_tilde_u = 0.0;  // smaller root, unstable branch (hotter in Kelvin)
    double t_tilde_s = 0.0;  // larger root, stable branch
    bool degenerate = false;  // margin within 1e-9 of zero: both roots at T~_m
};

/// Bracketed scalar root finder: keeps a sign-changing interval, tries the
/// secant point through the bracket ends, and falls back to bisection whenever
/// the secant point leaves the bracket or progress stalls. Terminates when
/// |f| <= f_tol or the bracket collapses to machine resolution.
template <typename F>
[[nodiscard]] double bracketed_root(F&& f, double lo, double hi, double f_tol = 1e-10,
                                    int max_iterations = 200) {
    if (!(lo < hi)) throw std::invalid_argument("bracketed_root needs lo < hi");
    double flo = f(lo);
    double fhi = f(hi);
    if (!std::isfinite(flo) || !std::isfinite(fhi)) {
        throw std::invalid_argument("bracketed_root needs finite endpoint values");
    }
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if (flo * fhi > 0.0) throw std::invalid_argument("bracketed_root needs a sign change");

    double best = std::abs(flo) < std::abs(fhi) ? lo : hi;
    double fbest = std::abs(flo) < std::abs(fhi) ? flo : fhi;
    double prev_width = hi - lo;
    for (int it = 0; it < max_iterations; ++it) {
        double x = hi - fhi * (hi - lo) / (fhi - flo);
        // Insist on real progress: reject secant points outside or hugging the
        // bracket, and bisect every other step if the width is not shrinking.
        const double width = hi - lo;
        const double fringe = 0.01 * width;
        if (!std::isfinite(x) || x <= lo + fringe || x >= hi - fringe ||
            (it % 2 == 1 && width > 0.5 * prev_width)) {
            x = lo + 0.5 * width;
        }
        prev_width = width;
        if (x <= lo || x >= hi) return best;  // bracket at machine resolution
        const double fx = f(x);
        if (std::abs(fx) < std::abs(fbest)) {
            best = x;
            fbest = fx;
        }
        if (std::abs(fx) <= f_tol) return x;
        if (flo * fx < 0.0) {
            hi = x;
            fhi = fx;
        } else {
            lo = x;
            flo = fx;
        }
    }
    return best;
}

/// Solves F = 0 on both sides of T~_m. Throws NoFixedPointError when the
/// margin is negative; degenerate within 1e-9 of zero.
[[nodiscard]] FixedPointPair find_fixed_points(const AuxiliaryForm& aux);

/// Auxiliary-domain image of one coupled thermal step under the scalar model:
///   1/T~[k+1] = 1/T~[k] - ((1-a) / (beta T~[k]^2)) (beta (1 - alpha T~[k]) T~[k] - e^(-T~[k])).
/// Moves toward T~_s where F > 0 and away from it (runaway, decreasing T~)
/// where F < 0.
[[nodiscard]] double iterate_aux(double t_tilde, const AuxiliaryForm& aux, double a);

struct RunawayOutcome {
    double margin = 0.0;  // negative
};

struct FixedPointsOutcome {
    double t_tilde_u = 0.0;
    double t_tilde_s = 0.0;
    double temp_unstable_k = 0.0;
    double temp_stable_k = 0.0;
    bool degenerate = false;
    // Region of convergence of the stable point, open intervals.
    double roc_aux_lo = 0.0;   // t_tilde_u
    double roc_aux_hi = 0.0;   // 1/alpha
    double roc_temp_lo_k = 0.0;  // -kappa2 * alpha
    double roc_temp_hi_k = 0.0;  // temp_unstable_k
};

struct StabilityReport {
    AuxiliaryForm aux;
    double t_tilde_m = 0.0;
    double margin = 0.0;
    std::variant<RunawayOutcome, FixedPointsOutcome> outcome;

    bool stable() const noexcept {
        return std::holds_alternative<FixedPointsOutcome>(outcome);
    }
};

/// Full scalar stability analysis of one operating point.
[[nodiscard]] StabilityReport analyze(const SisoParams& siso, double pc_w, double voltage_v,
                                      const LeakageParams& lp);

}  // namespace thermo
