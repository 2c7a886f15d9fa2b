#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace thermo {

/// No fixed point exists for the analyzed operating point; the system is in
/// the runaway regime. Carries the (negative) existence margin.
class NoFixedPointError : public std::runtime_error {
public:
    NoFixedPointError(double margin, const std::string& what)
        : std::runtime_error(what), margin_(margin) {}
    double margin() const noexcept { return margin_; }

private:
    double margin_;
};

/// A requested temperature cap cannot be met by any positive power setting.
class UnreachableTemperatureError : public std::runtime_error {
public:
    enum class Reason {
        below_zero_power_fixed_point,  // alpha* <= 0
        beyond_tangency,               // T~* falls on the unstable branch
    };

    UnreachableTemperatureError(Reason reason, const std::string& what)
        : std::runtime_error(what), reason_(reason) {}
    Reason reason() const noexcept { return reason_; }

private:
    Reason reason_;
};

/// The two-sample time-constant formula is undefined for the given pair
/// (equal to the fixed point, non-monotone, or on opposite sides of it).
/// Callers are expected to retry on the next sampling interval.
class EstimationUndefinedError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Newton iteration failure; carries the last iterate for diagnostics.
class NewtonError : public std::runtime_error {
public:
    enum class Kind { singular_jacobian, no_convergence };

    NewtonError(Kind kind, Eigen::VectorXd last_iterate, int iterations,
                const std::string& what)
        : std::runtime_error(what),
          kind_(kind),
          last_iterate_(std::move(last_iterate)),
          iterations_(iterations) {}

    Kind kind() const noexcept { return kind_; }
    const Eigen::VectorXd& last_iterate() const noexcept { return last_iterate_; }
    int iterations() const noexcept { return iterations_; }

private:
    Kind kind_;
    Eigen::VectorXd last_iterate_;
    int iterations_;
};

/// Regression data does not excite all model directions; names the columns
/// that cannot be identified.
class IdentifiabilityError : public std::runtime_error {
public:
    IdentifiabilityError(std::vector<std::string> deficient, const std::string& what)
        : std::runtime_error(what), deficient_(std::move(deficient)) {}
    const std::vector<std::string>& deficient_directions() const noexcept {
        return deficient_;
    }

private:
    std::vector<std::string> deficient_;
};

/// A fitted reduced model violates its admissibility constraints
/// (a outside (0,1) or b <= 0). Carries the offending fit.
class ModelMismatchError : public std::runtime_error {
public:
    ModelMismatchError(double a, double b, const std::string& what)
        : std::runtime_error(what), a_(a), b_(b) {}
    double fitted_a() const noexcept { return a_; }
    double fitted_b() const noexcept { return b_; }

private:
    double a_;
    double b_;
};

/// Nonlinear fit produced an unusable result (non-finite parameters or no
/// acceptable step could be found).
class FitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace thermo
