#pragma once

#include <Eigen/Dense>

#include <vector>

#include "thermo/power_model.hpp"
#include "thermo/thermal_sim.hpp"

namespace thermo {

/// Fixed-point residual of the coupled dynamics: A T + B P(T) + offset - T.
/// Zero exactly at a self-consistent temperature field.
[[nodiscard]] Eigen::VectorXd mimo_residual(const ThermalStateSpace& model,
                                            const std::vector<SourceParams>& sources,
                                            const Eigen::VectorXd& temp_k);

/// Residual Jacobian A - I + B S, where S holds each source's dP/dT in the
/// column of the hotspot it reads.
[[nodiscard]] Eigen::MatrixXd mimo_jacobian(const ThermalStateSpace& model,
                                            const std::vector<SourceParams>& sources,
                                            const Eigen::VectorXd& temp_k);

struct NewtonResult {
    Eigen::VectorXd temp_k;
    int iterations = 0;
    double residual_inf = 0.0;
};

struct NewtonOptions {
    double tolerance_k = 1e-9;  // infinity norm of the residual
    int max_iterations = 50;
    int max_halvings = 10;
};

/// Damped Newton refinement of a coupled fixed point from per-hotspot scalar
/// seeds. Each step is halved until the residual norm decreases. Throws
/// NewtonError on a singular Jacobian or when no progress is possible, with
/// the last iterate attached.
[[nodiscard]] NewtonResult newton_refine(const ThermalStateSpace& model,
                                         const std::vector<SourceParams>& sources,
                                         const Eigen::VectorXd& initial_temp_k,
                                         const NewtonOptions& options = {});

}  // namespace thermo
