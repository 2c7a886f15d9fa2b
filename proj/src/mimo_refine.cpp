#include "thermo/mimo_refine.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "thermo/errors.hpp"

namespace thermo {

namespace {

void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

void check_inputs(const ThermalStateSpace& model, const std::vector<SourceParams>& sources,
                  const Eigen::VectorXd& temp_k) {
    require(static_cast<int>(sources.size()) == model.source_count(),
            "need one SourceParams per model source");
    require(static_cast<int>(temp_k.size()) == model.hotspot_count(),
            "temperature vector size mismatch");
    for (Eigen::Index i = 0; i < temp_k.size(); ++i) {
        require(temp_k[i] > 0.0, "temperatures must be positive");
    }
}

}  // namespace

Eigen::VectorXd mimo_residual(const ThermalStateSpace& model,
                              const std::vector<SourceParams>& sources,
                              const Eigen::VectorXd& temp_k) {
    check_inputs(model, sources, temp_k);
    const auto& map = model.source_hotspot_map();
    Eigen::VectorXd power(model.source_count());
    for (int m = 0; m < model.source_count(); ++m) {
        power[m] = total_power(sources[m], temp_k[map[m]]);
    }
    return model.a() * temp_k + model.b() * power + model.offset_k() - temp_k;
}

Eigen::MatrixXd mimo_jacobian(const ThermalStateSpace& model,
                              const std::vector<SourceParams>& sources,
                              const Eigen::VectorXd& temp_k) {
    check_inputs(model, sources, temp_k);
    const auto& map = model.source_hotspot_map();
    const Eigen::Index n = model.hotspot_count();
    Eigen::MatrixXd sens = Eigen::MatrixXd::Zero(model.source_count(), n);
    for (int m = 0; m < model.source_count(); ++m) {
        sens(m, map[m]) = power_dtemp(sources[m], temp_k[map[m]]);
    }
    return model.a() - Eigen::MatrixXd::Identity(n, n) + model.b() * sens;
}

NewtonResult newton_refine(const ThermalStateSpace& model,
                           const std::vector<SourceParams>& sources,
                           const Eigen::VectorXd& initial_temp_k, const NewtonOptions& options) {
    check_inputs(model, sources, initial_temp_k);
    require(options.tolerance_k > 0.0, "tolerance must be > 0");
    require(options.max_iterations >= 1, "max_iterations must be >= 1");

    Eigen::VectorXd x = initial_temp_k;
    Eigen::VectorXd r = mimo_residual(model, sources, x);
    for (int it = 0; it < options.max_iterations; ++it) {
        if (r.lpNorm<Eigen::Infinity>() < options.tolerance_k) {
            return {x, it, r.lpNorm<Eigen::Infinity>()};
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(mimo_jacobian(model, sources, x));
        if (!lu.isInvertible()) {
            throw NewtonError(NewtonError::Kind::singular_jacobian, x, it,
                              "singular Jacobian at iteration " + std::to_string(it));
        }
        const Eigen::VectorXd dx = lu.solve(-r);

        // Halve the step until the residual actually shrinks and the iterate
        // stays at positive temperatures.
        double scale = 1.0;
        bool accepted = false;
        for (int h = 0; h <= options.max_halvings; ++h) {
            Eigen::VectorXd cand = x + scale * dx;
            if ((cand.array() > 0.0).all()) {
                Eigen::VectorXd rc = mimo_residual(model, sources, cand);
                if (rc.lpNorm<Eigen::Infinity>() < r.lpNorm<Eigen::Infinity>()) {
                    x = std::move(cand);
                    r = std::move(rc);
                    accepted = true;
                    break;
                }
            }
            scale *= 0.5;
        }
        if (!accepted) {
            throw NewtonError(NewtonError::Kind::no_convergence, x, it,
                              "no residual decrease after " +
                                  std::to_string(options.max_halvings) + " halvings");
        }
    }
    if (r.lpNorm<Eigen::Infinity>() < options.tolerance_k) {
        return {x, options.max_iterations, r.lpNorm<Eigen::Infinity>()};
    }
    throw NewtonError(NewtonError::Kind::no_convergence, x, options.max_iterations,
                      "residual above tolerance after " +
                          std::to_string(options.max_iterations) + " iterations");
}

}  // namespace thermo
