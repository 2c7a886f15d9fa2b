#pragma once

#include <optional>
#include <utility>

namespace thermo {

// CODATA 2018 exact values.
inline constexpr double k_boltzmann_j_per_k = 1.380649e-23;
inline constexpr double q_electron_c = 1.602177e-19;

/// Temperature-dependent leakage description of one power source.
/// kappa2 is negative by construction (it encodes v_gs below threshold);
/// kappa1 = 0 models a source with subthreshold leakage disabled.
struct LeakageParams {
    double i_gate = 0.0;  // gate leakage current, A
    double kappa1 = 0.0;  // subthreshold scale, A/K^2
    double kappa2 = 0.0;  // exponent constant, K (< 0)

    void validate() const;
};

/// Full electrical description of one power source.
struct SourceParams {
    double c_sw = 0.0;       // switching capacitance, F
    double voltage = 0.0;    // supply voltage, V
    double frequency = 0.0;  // clock frequency, Hz
    LeakageParams leakage;

    void validate() const;
};

/// Transistor-level constants from which the lumped leakage pair
/// (kappa1, kappa2) is derived.
struct TechnologyParams {
    double a_s = 0.0;       // technology scale factor
    double w_over_l = 0.0;  // aggregate width/length ratio
    double v_gs = 0.0;      // gate-source voltage, V
    double v_th = 0.0;      // threshold voltage, V
    double n_swing = 0.0;   // subthreshold swing coefficient

    void validate() const;
};

/// Lumps transistor constants into (kappa1, kappa2).
/// kappa1 = a_s * (W/L) * k/q, kappa2 = q * (v_gs - v_th) / (n * k).
/// Requires v_gs < v_th so that kappa2 < 0.
[[nodiscard]] std::pair<double, double> kappa_from_technology(const TechnologyParams& tech);

/// I_leak(T) = i_gate + kappa1 * T^2 * exp(kappa2 / T), in A. Requires T > 0.
[[nodiscard]] double leakage_current(const LeakageParams& lp, double temp_k);

/// dI_leak/dT = kappa1 * exp(kappa2 / T) * (2T - kappa2), in A/K.
[[nodiscard]] double leakage_current_dtemp(const LeakageParams& lp, double temp_k);

/// Temperature-independent power component: c_sw * V^2 * f + V * i_gate, in W.
[[nodiscard]] double pc_component(const SourceParams& sp);

/// Temperature-dependent power component: V * kappa1 * T^2 * exp(kappa2 / T), in W.
[[nodiscard]] double subthreshold_power(const SourceParams& sp, double temp_k);

/// Total dissipated power pc_component + subthreshold_power, in W. Requires T > 0.
[[nodiscard]] double total_power(const SourceParams& sp, double temp_k);

/// dP/dT = V * dI_leak/dT, in W/K.
[[nodiscard]] double power_dtemp(const SourceParams& sp, double temp_k);

}  // namespace thermo
