#include "thermo/power_model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace thermo {

namespace {

void require(bool cond, const char* msg) {
    if (!cond) throw std::invalid_argument(msg);
}

void require_temp(double temp_k) {
    if (!(temp_k > 0.0)) {
        throw std::invalid_argument("temperature must be positive (absolute scale), got " +
                                    std::to_string(temp_k));
    }
}

}  // namespace

void LeakageParams::validate() const {
    require(std::isfinite(i_gate) && i_gate >= 0.0, "i_gate must be finite and >= 0");
    require(std::isfinite(kappa1) && kappa1 >= 0.0, "kappa1 must be finite and >= 0");
    require(std::isfinite(kappa2) && kappa2 < 0.0, "kappa2 must be finite and < 0");
}

void SourceParams::validate() const {
    require(std::isfinite(c_sw) && c_sw >= 0.0, "c_sw must be finite and >= 0");
    require(std::isfinite(voltage) && voltage > 0.0, "voltage must be finite and > 0");
    require(std::isfinite(frequency) && frequency >= 0.0, "frequency must be finite and >= 0");
    leakage.validate();
}

void TechnologyParams::validate() const {
    require(std::isfinite(a_s) && a_s > 0.0, "a_s must be finite and > 0");
    require(std::isfinite(w_over_l) && w_over_l > 0.0, "w_over_l must be finite and > 0");
    require(std::isfinite(n_swing) && n_swing > 0.0, "n_swing must be finite and > 0");
    require(std::isfinite(v_gs) && std::isfinite(v_th), "v_gs and v_th must be finite");
    require(v_gs < v_th, "v_gs must be strictly below v_th (subthreshold operation)");
}

std::pair<double, double> kappa_from_technology(const TechnologyParams& tech) {
    tech.validate();
    const double kappa1 = tech.a_s * tech.w_over_l * k_boltzmann_j_per_k / q_electron_c;
    const double kappa2 =
        q_electron_c * (tech.v_gs - tech.v_th) / (tech.n_swing * k_boltzmann_j_per_k);
    return {kappa1, kappa2};
}

double leakage_current(const LeakageParams& lp, double temp_k) {
    lp.validate();
    require_temp(temp_k);
    return lp.i_gate + lp.kappa1 * temp_k * temp_k * std::exp(lp.kappa2 / temp_k);
}

double leakage_current_dtemp(const LeakageParams& lp, double temp_k) {
    lp.validate();
    require_temp(temp_k);
    return lp.kappa1 * std::exp(lp.kappa2 / temp_k) * (2.0 * temp_k - lp.kappa2);
}

double pc_component(const SourceParams& sp) {
    sp.validate();
    return sp.c_sw * sp.voltage * sp.voltage * sp.frequency + sp.voltage * sp.leakage.i_gate;
}

double subthreshold_power(const SourceParams& sp, double temp_k) {
    sp.validate();
    require_temp(temp_k);
    return sp.voltage * sp.leakage.kappa1 * temp_k * temp_k * std::exp(sp.leakage.kappa2 / temp_k);
}

double total_power(const SourceParams& sp, double temp_k) {
    return pc_component(sp) + subthreshold_power(sp, temp_k);
}

double power_dtemp(const SourceParams& sp, double temp_k) {
    sp.validate();
    return sp.voltage * leakage_current_dtemp(sp.leakage, temp_k);
}

}  // namespace thermo
