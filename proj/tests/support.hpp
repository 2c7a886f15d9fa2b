#pragma once

// Shared fixtures for the test suites: one well-studied scalar reference
// system (a = 0.95, b = 0.5 K/W, V = 1 V, kappa1 = 1.25e-4, kappa2 = -800 K,
// pc = 40 W) plus its independently computed landmark values, frozen here.

#include <Eigen/Dense>

#include "thermo/power_model.hpp"
#include "thermo/stability.hpp"
#include "thermo/thermal_sim.hpp"

namespace testsup {

inline constexpr double k_ref_voltage = 1.0;
inline constexpr double k_ref_pc = 40.0;

// Landmarks of the reference system, high-precision external computation.
inline constexpr double k_ref_alpha = 0.5;
inline constexpr double k_ref_beta = 1.0;
inline constexpr double k_ref_t_tilde_m = 1.414213562373095;
inline constexpr double k_ref_margin = 0.53283997535355202;
inline constexpr double k_ref_t_tilde_u = 0.7550323288889075;
inline constexpr double k_ref_t_tilde_s = 1.8226901430860826;
inline constexpr double k_ref_temp_unstable = 1059.5572790601777;
inline constexpr double k_ref_temp_stable = 438.9116839384901;

inline thermo::LeakageParams reference_leakage() {
    thermo::LeakageParams lp;
    lp.i_gate = 0.0;
    lp.kappa1 = 1.25e-4;
    lp.kappa2 = -800.0;
    return lp;
}

inline thermo::SisoParams reference_siso() { return {0.95, 0.5}; }

inline thermo::SourceParams reference_source() {
    thermo::SourceParams sp;
    sp.c_sw = 4e-8;  // with V = 1, f = 1e9: pc_component = 40 W
    sp.voltage = k_ref_voltage;
    sp.frequency = 1e9;
    sp.leakage = reference_leakage();
    return sp;
}

inline thermo::ThermalStateSpace reference_model() {
    Eigen::MatrixXd a(1, 1);
    a << 0.95;
    Eigen::MatrixXd b(1, 1);
    b << 0.5;
    return thermo::ThermalStateSpace(a, b, 1.0, {0});
}

inline Eigen::VectorXd scalar_vec(double v) {
    Eigen::VectorXd x(1);
    x << v;
    return x;
}

}  // namespace testsup
