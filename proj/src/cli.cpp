#include "thermo/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "thermo/errors.hpp"
#include "thermo/io.hpp"
#include "thermo/mimo_refine.hpp"
#include "thermo/power_model.hpp"
#include "thermo/safety.hpp"
#include "thermo/stability.hpp"
#include "thermo/sysid.hpp"
#include "thermo/thermal_sim.hpp"

namespace thermo::cli {

namespace {

using nlohmann::json;

constexpr int k_exit_ok = 0;
constexpr int k_exit_error = 1;
constexpr int k_exit_negative = 2;

struct Options {
    std::string config_path;
    std::string out_path;
    std::string schedule_path;
    std::vector<std::string> traj_paths;
    double pc = 0.0;
    bool pc_set = false;
    double tmax = 0.0;
    double tfix = 0.0;
    double epsilon = 0.0;
    bool epsilon_set = false;
    double voltage = 0.0;
    bool voltage_set = false;
    double pdyn = 0.0;
    bool pdyn_set = false;
    long steps = 0;
    int hotspot = 1;  // 1-based on the command line
    int d = 10;
    int sources = 1;
    long length = 0;
    std::string seed = "0xACE1";
    std::string levels;
    std::string mode;
    int reps = 200;
};

void put_temp(json& j, const std::string& base, double kelvin, io::Units units) {
    j[base + "_K"] = kelvin;
    if (units == io::Units::celsius) j[base + "_C"] = io::kelvin_to_celsius(kelvin);
}

void write_report(const json& report, const std::string& out_path, std::ostream& out) {
    if (out_path.empty()) {
        out << report.dump(2) << "\n";
        return;
    }
    std::ofstream file(out_path);
    if (!file.good()) throw std::invalid_argument("cannot open output file: " + out_path);
    file << report.dump(2) << "\n";
}

void write_text(const std::string& text, const std::string& out_path, std::ostream& out) {
    if (out_path.empty()) {
        out << text;
        return;
    }
    std::ofstream file(out_path);
    if (!file.good()) throw std::invalid_argument("cannot open output file: " + out_path);
    file << text;
}

int hotspot_index(const Options& opt, const io::ModelConfig& config) {
    if (opt.hotspot < 1 || opt.hotspot > config.thermal.hotspot_count()) {
        throw std::invalid_argument("--hotspot must be in [1, " +
                                    std::to_string(config.thermal.hotspot_count()) + "]");
    }
    return opt.hotspot - 1;
}

const SourceParams& source_for_hotspot(const io::ModelConfig& config, int hotspot) {
    const auto& map = config.thermal.source_hotspot_map();
    for (std::size_t m = 0; m < map.size(); ++m) {
        if (map[m] == hotspot) return config.sources[m];
    }
    throw std::invalid_argument("no power source drives hotspot " + std::to_string(hotspot + 1));
}

const SisoParams& siso_for_hotspot(const io::ModelConfig& config, int hotspot) {
    const auto& siso = config.siso[static_cast<std::size_t>(hotspot)];
    if (!siso) {
        throw std::invalid_argument("config has no reduced (siso) model for hotspot " +
                                    std::to_string(hotspot + 1));
    }
    return *siso;
}

double total_pc(const io::ModelConfig& config) {
    double pc = 0.0;
    for (const auto& sp : config.sources) pc += pc_component(sp);
    return pc;
}

Trajectory load_trajectory(const std::string& path) {
    std::ifstream in(path);
    if (!in.good()) throw std::invalid_argument("cannot open trajectory file: " + path);
    return io::read_trajectory_csv(in);
}

std::uint16_t parse_seed(const std::string& raw) {
    unsigned long value = 0;
    try {
        std::size_t used = 0;
        value = std::stoul(raw, &used, 0);
        if (used != raw.size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
        throw std::invalid_argument("--seed must be a decimal or 0x-prefixed integer, got '" +
                                    raw + "'");
    }
    if (value == 0 || value > 0xFFFF) {
        throw std::invalid_argument("--seed must be a nonzero 16-bit value");
    }
    return static_cast<std::uint16_t>(value);
}

std::vector<double> parse_levels(const std::string& raw) {
    std::vector<double> levels;
    std::stringstream ss(raw);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            levels.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument("trailing characters");
        } catch (const std::exception&) {
            throw std::invalid_argument("--levels must be a comma-separated number list, got '" +
                                        raw + "'");
        }
    }
    if (levels.size() < 2) throw std::invalid_argument("--levels needs at least 2 values");
    return levels;
}

json stability_report_json(const StabilityReport& report, double pc_w, int hotspot_1based,
                           io::Units units) {
    json j;
    j["schema_version"] = 1;
    j["command"] = "analyze";
    j["hotspot"] = hotspot_1based;
    j["pc_W"] = pc_w;
    j["alpha"] = report.aux.alpha;
    j["beta"] = report.aux.beta;
    j["kappa2_K"] = report.aux.kappa2;
    j["t_tilde_m"] = report.t_tilde_m;
    j["margin"] = report.margin;
    j["stable"] = report.stable();
    if (const auto* fixed = std::get_if<FixedPointsOutcome>(&report.outcome)) {
        j["degenerate"] = fixed->degenerate;
        j["t_tilde_u"] = fixed->t_tilde_u;
        j["t_tilde_s"] = fixed->t_tilde_s;
        put_temp(j, "temp_stable", fixed->temp_stable_k, units);
        put_temp(j, "temp_unstable", fixed->temp_unstable_k, units);
        j["roc_aux_lo"] = fixed->roc_aux_lo;
        j["roc_aux_hi"] = fixed->roc_aux_hi;
        put_temp(j, "roc_temp_lo", fixed->roc_temp_lo_k, units);
        put_temp(j, "roc_temp_hi", fixed->roc_temp_hi_k, units);
    } else {
        j["outcome"] = "runaway";
    }
    return j;
}

int cmd_analyze(const Options& opt, std::ostream& out) {
    const io::ModelConfig config = io::load_model_config(opt.config_path);
    const int h = hotspot_index(opt, config);
    const SisoParams& siso = siso_for_hotspot(config, h);
    const SourceParams& sp = source_for_hotspot(config, h);
    const double pc = opt.pc_set ? opt.pc : total_pc(config);

    const StabilityReport report = analyze(siso, pc, sp.voltage, sp.leakage);
    write_report(stability_report_json(report, pc, opt.hotspot, config.units), opt.out_path, out);
    return report.stable() ? k_exit_ok : k_exit_negative;
}

int cmd_simulate(const Options& opt, std::ostream& out, std::ostream& err) {
    const io::ModelConfig config = io::load_model_config(opt.config_path);
    if (opt.steps < 1) throw std::invalid_argument("--steps must be >= 1");
    if (!config.t_initial_k) {
        throw std::invalid_argument("simulate needs t_initial in the config");
    }

    Schedule schedule;
    if (opt.pc_set) schedule.push_back({0, 0, opt.pc});
    if (!opt.schedule_path.empty()) {
        std::ifstream in(opt.schedule_path);
        if (!in.good()) {
            throw std::invalid_argument("cannot open schedule file: " + opt.schedule_path);
        }
        for (const auto& e : io::read_schedule_csv(in)) {
            if (e.source >= config.thermal.source_count()) {
                throw std::invalid_argument("schedule source " + std::to_string(e.source + 1) +
                                            " exceeds the model's source count");
            }
            schedule.push_back(e);
        }
    }

    SimulateOptions sim_options;
    sim_options.runaway_bound_k = config.runaway_bound_k;
    const Trajectory traj = simulate(config.thermal, config.sources, *config.t_initial_k,
                                     opt.steps, schedule, sim_options);

    std::ostringstream csv;
    io::write_trajectory_csv(csv, traj);
    write_text(csv.str(), opt.out_path, out);

    if (!opt.out_path.empty()) {
        json summary;
        summary["schema_version"] = 1;
        summary["command"] = "simulate";
        summary["rows"] = traj.size();
        summary["runaway"] = traj.runaway;
        json finals = json::array();
        for (Eigen::Index i = 0; i < traj.temps_k.back().size(); ++i) {
            finals.push_back(traj.temps_k.back()[i]);
        }
        summary["final_temps_K"] = finals;
        out << summary.dump(2) << "\n";
    }
    if (traj.runaway) {
        err << "thermal runaway: bound " << io::format_double(config.runaway_bound_k)
            << " K exceeded at t = " << io::format_double(traj.times_s.back()) << " s\n";
        return k_exit_negative;
    }
    return k_exit_ok;
}

int cmd_safe_power(const Options& opt, std::ostream& out) {
    const io::ModelConfig config = io::load_model_config(opt.config_path);
    const int h = hotspot_index(opt, config);
    const SisoParams& siso = siso_for_hotspot(config, h);
    const SourceParams& sp = source_for_hotspot(config, h);
    const double t_star_k =
        config.units == io::Units::celsius ? io::celsius_to_kelvin(opt.tmax) : opt.tmax;

    json j;
    j["schema_version"] = 1;
    j["command"] = "safe-power";
    j["hotspot"] = opt.hotspot;
    put_temp(j, "t_star", t_star_k, config.units);
    try {
        const SafePowerResult res = safe_power(t_star_k, siso, sp.voltage, sp.leakage);
        j["pc_star_W"] = res.pc_star_w;
        j["alpha_star"] = res.alpha_star;
        j["t_tilde_star"] = res.t_tilde_star;
        // Round trip through the forward analysis as a self-check.
        const StabilityReport check = analyze(siso, res.pc_star_w, sp.voltage, sp.leakage);
        if (const auto* fixed = std::get_if<FixedPointsOutcome>(&check.outcome)) {
            put_temp(j, "roundtrip_temp_stable", fixed->temp_stable_k, config.units);
        }
        write_report(j, opt.out_path, out);
        return k_exit_ok;
    } catch (const UnreachableTemperatureError& e) {
        j["error"] = e.what();
        j["reason"] = e.reason() == UnreachableTemperatureError::Reason::beyond_tangency
                          ? "beyond_tangency"
                          : "below_zero_power_fixed_point";
        write_report(j, opt.out_path, out);
        return k_exit_negative;
    }
}

int cmd_ttfp(const Options& opt, std::ostream& out) {
    if (opt.traj_paths.size() != 1) {
        throw std::invalid_argument("ttfp needs exactly one --traj file");
    }
    const Trajectory traj = load_trajectory(opt.traj_paths.front());
    const int h = opt.hotspot - 1;
    if (h < 0 || h >= traj.hotspot_count()) {
        throw std::invalid_argument("--hotspot must be in [1, " +
                                    std::to_string(traj.hotspot_count()) + "]");
    }

    json j;
    j["schema_version"] = 1;
    j["command"] = "ttfp";
    j["hotspot"] = opt.hotspot;
    j["t_fix_K"] = opt.tfix;
    j["d"] = opt.d;
    try {
        const double tau = estimate_tau(traj, h, opt.tfix, opt.d);
        const double t_now = traj.temps_k.back()[h];
        const double t_first = traj.temps_k.front()[h];
        double epsilon = opt.epsilon;
        if (!opt.epsilon_set) {
            epsilon = 0.01 * std::abs(opt.tfix - t_first);
            if (epsilon <= 0.0) {
                throw std::invalid_argument(
                    "cannot derive a default --epsilon: the trajectory starts at t_fix");
            }
        }
        j["tau_s"] = tau;
        j["epsilon_K"] = epsilon;
        j["t_now_K"] = t_now;
        j["time_to_epsilon_s"] = time_to_fixed_point(t_now, opt.tfix, tau, epsilon);
        write_report(j, opt.out_path, out);
        return k_exit_ok;
    } catch (const EstimationUndefinedError& e) {
        j["error"] = e.what();
        j["reason"] = "estimation_undefined";
        write_report(j, opt.out_path, out);
        return k_exit_negative;
    }
}

int cmd_identify(const Options& opt, std::ostream& out) {
    if (opt.traj_paths.empty()) throw std::invalid_argument("identify needs --traj");
    json j;
    j["schema_version"] = 1;
    j["command"] = "identify";
    j["mode"] = opt.mode;

    if (opt.mode == "leakage") {
        if (opt.traj_paths.size() != 1) {
            throw std::invalid_argument("identify leakage needs exactly one --traj file");
        }
        if (!opt.voltage_set) throw std::invalid_argument("identify leakage needs --voltage");
        std::ifstream in(opt.traj_paths.front());
        if (!in.good()) {
            throw std::invalid_argument("cannot open calibration file: " +
                                        opt.traj_paths.front());
        }
        const auto samples = io::read_calibration_csv(in);
        const auto fit = fit_leakage(samples, opt.voltage,
                                     opt.pdyn_set ? std::optional<double>(opt.pdyn)
                                                  : std::nullopt);
        j["lump_W"] = fit.lump_w;
        j["kappa1"] = fit.kappa1;
        j["kappa2_K"] = fit.kappa2;
        if (fit.i_gate_a) j["i_gate_A"] = *fit.i_gate_a;
        j["degenerate"] = fit.degenerate;
        j["converged"] = fit.converged;
        j["iterations"] = fit.iterations;
        j["residual_rms_W"] = fit.residual_rms_w;
        write_report(j, opt.out_path, out);
        return k_exit_ok;
    }
    if (opt.mode == "statespace") {
        std::vector<Trajectory> traces;
        for (const auto& path : opt.traj_paths) traces.push_back(load_trajectory(path));
        const auto fit =
            fit_state_space(traces, traces.front().hotspot_count(), traces.front().source_count());
        json a = json::array();
        for (Eigen::Index r = 0; r < fit.a.rows(); ++r) {
            json rowj = json::array();
            for (Eigen::Index c = 0; c < fit.a.cols(); ++c) rowj.push_back(fit.a(r, c));
            a.push_back(rowj);
        }
        json b = json::array();
        for (Eigen::Index r = 0; r < fit.b.rows(); ++r) {
            json rowj = json::array();
            for (Eigen::Index c = 0; c < fit.b.cols(); ++c) rowj.push_back(fit.b(r, c));
            b.push_back(rowj);
        }
        j["a"] = a;
        j["b"] = b;
        j["residual_rms_K"] = fit.residual_rms_k;
        j["warnings"] = fit.warnings;
        write_report(j, opt.out_path, out);
        return k_exit_ok;
    }
    if (opt.mode == "siso") {
        if (opt.traj_paths.size() != 1) {
            throw std::invalid_argument("identify siso needs exactly one --traj file");
        }
        const Trajectory traj = load_trajectory(opt.traj_paths.front());
        const int h = opt.hotspot - 1;
        if (h < 0 || h >= traj.hotspot_count()) {
            throw std::invalid_argument("--hotspot must be in [1, " +
                                        std::to_string(traj.hotspot_count()) + "]");
        }
        const SisoParams siso = reduce_to_siso(traj, h);
        j["hotspot"] = opt.hotspot;
        j["a"] = siso.a;
        j["b"] = siso.b;
        write_report(j, opt.out_path, out);
        return k_exit_ok;
    }
    throw std::invalid_argument("identify mode must be leakage, statespace, or siso");
}

int cmd_prbs(const Options& opt, std::ostream& out) {
    const std::uint16_t seed = parse_seed(opt.seed);
    const std::vector<double> levels = parse_levels(opt.levels);
    if (opt.sources < 1) throw std::invalid_argument("--sources must be >= 1");
    if (opt.length < 1) throw std::invalid_argument("--length must be >= 1");
    const std::vector<std::vector<double>> per_source(static_cast<std::size_t>(opt.sources),
                                                      levels);
    const PrbsSchedule schedule = generate_prbs(per_source, opt.length, seed);
    std::ostringstream csv;
    io::write_schedule_csv(csv, schedule.entries);
    write_text(csv.str(), opt.out_path, out);
    return k_exit_ok;
}

int cmd_mimo(const Options& opt, std::ostream& out) {
    const io::ModelConfig config = io::load_model_config(opt.config_path);
    const int n = config.thermal.hotspot_count();
    const double pc = opt.pc_set ? opt.pc : total_pc(config);

    // Seed each hotspot from its own scalar analysis; a runaway verdict on any
    // hotspot is a negative outcome for the refinement as a whole.
    Eigen::VectorXd seed(n);
    for (int h = 0; h < n; ++h) {
        const SisoParams& siso = siso_for_hotspot(config, h);
        const SourceParams& sp = source_for_hotspot(config, h);
        const StabilityReport report = analyze(siso, pc, sp.voltage, sp.leakage);
        if (const auto* fixed = std::get_if<FixedPointsOutcome>(&report.outcome)) {
            seed[h] = fixed->temp_stable_k;
        } else {
            throw NoFixedPointError(report.margin,
                                    "scalar seed analysis reports runaway at hotspot " +
                                        std::to_string(h + 1));
        }
    }

    const NewtonResult res = newton_refine(config.thermal, config.sources, seed);
    json j;
    j["schema_version"] = 1;
    j["command"] = "mimo";
    j["iterations"] = res.iterations;
    j["residual_inf_K"] = res.residual_inf;
    json seeds = json::array();
    json temps = json::array();
    for (int h = 0; h < n; ++h) {
        seeds.push_back(seed[h]);
        temps.push_back(res.temp_k[h]);
    }
    j["seeds_K"] = seeds;
    j["temps_K"] = temps;
    if (config.units == io::Units::celsius) {
        json temps_c = json::array();
        for (int h = 0; h < n; ++h) temps_c.push_back(io::kelvin_to_celsius(res.temp_k[h]));
        j["temps_C"] = temps_c;
    }
    write_report(j, opt.out_path, out);
    return k_exit_ok;
}

int cmd_bench(const Options& opt, std::ostream& out) {
    const io::ModelConfig config = io::load_model_config(opt.config_path);
    const int h = hotspot_index(opt, config);
    const SisoParams& siso = siso_for_hotspot(config, h);
    const SourceParams& sp = source_for_hotspot(config, h);
    const double pc = opt.pc_set ? opt.pc : total_pc(config);
    if (opt.reps < 1) throw std::invalid_argument("--reps must be >= 1");

    const auto median_us = [&](const std::function<void()>& body) {
        std::vector<double> us(static_cast<std::size_t>(opt.reps));
        for (auto& sample : us) {
            const auto begin = std::chrono::steady_clock::now();
            body();
            const auto end = std::chrono::steady_clock::now();
            sample = std::chrono::duration<double, std::micro>(end - begin).count();
        }
        std::nth_element(us.begin(), us.begin() + static_cast<long>(us.size() / 2), us.end());
        return us[us.size() / 2];
    };

    const StabilityReport base = analyze(siso, pc, sp.voltage, sp.leakage);
    const auto* fixed = std::get_if<FixedPointsOutcome>(&base.outcome);
    if (fixed == nullptr) {
        throw NoFixedPointError(base.margin, "bench needs a stable operating point");
    }
    const double t_star = opt.tmax > 0.0
                              ? (config.units == io::Units::celsius
                                     ? io::celsius_to_kelvin(opt.tmax)
                                     : opt.tmax)
                              : fixed->temp_stable_k;

    json j;
    j["schema_version"] = 1;
    j["command"] = "bench";
    j["reps"] = opt.reps;
    double total = 0.0;

    volatile double sink = 0.0;
    const double analyze_us = median_us([&] {
        const StabilityReport r = analyze(siso, pc, sp.voltage, sp.leakage);
        sink = r.margin;
    });
    j["analyze_us"] = analyze_us;
    total += analyze_us;

    const double safe_us = median_us([&] {
        const SafePowerResult r = safe_power(t_star, siso, sp.voltage, sp.leakage);
        sink = r.pc_star_w;
    });
    j["safe_power_us"] = safe_us;
    total += safe_us;

    // Synthetic exponential settle for the estimator cost; fixed shape.
    Trajectory synth;
    const double tau_true = 30.0;
    for (int k = 0; k <= 20; ++k) {
        synth.times_s.push_back(static_cast<double>(k));
        Eigen::VectorXd t(1);
        t[0] = 340.0 - 40.0 * std::exp(-static_cast<double>(k) / tau_true);
        synth.temps_k.push_back(t);
        synth.powers_w.push_back(Eigen::VectorXd::Zero(1));
    }
    const double ttfp_us = median_us([&] {
        const double tau = estimate_tau(synth, 0, 340.0, opt.d);
        sink = time_to_fixed_point(synth.temps_k.back()[0], 340.0, tau, 0.4);
    });
    j["ttfp_us"] = ttfp_us;
    total += ttfp_us;

    bool all_siso = true;
    for (const auto& s : config.siso) all_siso = all_siso && s.has_value();
    if (all_siso) {
        Eigen::VectorXd seed(config.thermal.hotspot_count());
        for (int i = 0; i < config.thermal.hotspot_count(); ++i) {
            const StabilityReport r = analyze(siso_for_hotspot(config, i), pc,
                                              source_for_hotspot(config, i).voltage,
                                              source_for_hotspot(config, i).leakage);
            const auto* f = std::get_if<FixedPointsOutcome>(&r.outcome);
            if (f == nullptr) {
                all_siso = false;
                break;
            }
            seed[i] = f->temp_stable_k;
        }
        if (all_siso) {
            const double newton_us = median_us([&] {
                const NewtonResult r = newton_refine(config.thermal, config.sources, seed);
                sink = r.residual_inf;
            });
            j["newton_us"] = newton_us;
            total += newton_us;
        }
    }
    (void)sink;

    j["total_us"] = total;
    write_report(j, opt.out_path, out);
    return k_exit_ok;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"power-temperature stability and safety analysis for multiprocessor systems"};
    app.require_subcommand(1);

    Options opt;

    const auto add_config = [&](CLI::App* sub) {
        sub->add_option("--config", opt.config_path, "model config JSON")->required();
    };
    const auto add_out = [&](CLI::App* sub) {
        sub->add_option("--out", opt.out_path, "output file (default: stdout)");
    };
    const auto add_hotspot = [&](CLI::App* sub) {
        sub->add_option("--hotspot", opt.hotspot, "1-based hotspot index (default 1)");
    };

    CLI::App* analyze_cmd =
        app.add_subcommand("analyze", "scalar stability analysis of one operating point");
    add_config(analyze_cmd);
    add_out(analyze_cmd);
    add_hotspot(analyze_cmd);
    analyze_cmd->add_option("--pc", opt.pc, "steady power override, W")
        ->check(CLI::PositiveNumber);

    CLI::App* simulate_cmd =
        app.add_subcommand("simulate", "coupled power-temperature simulation");
    add_config(simulate_cmd);
    add_out(simulate_cmd);
    simulate_cmd->add_option("--steps", opt.steps, "number of updates to run")->required();
    simulate_cmd->add_option("--schedule", opt.schedule_path, "power schedule CSV");
    simulate_cmd->add_option("--pc", opt.pc, "steady power override for source 1, W");

    CLI::App* safe_cmd =
        app.add_subcommand("safe-power", "largest steady power that parks below a cap");
    add_config(safe_cmd);
    add_out(safe_cmd);
    add_hotspot(safe_cmd);
    safe_cmd->add_option("--tmax", opt.tmax, "temperature cap (config units)")->required();

    CLI::App* ttfp_cmd =
        app.add_subcommand("ttfp", "time constant and time to fixed point from a trajectory");
    add_out(ttfp_cmd);
    add_hotspot(ttfp_cmd);
    ttfp_cmd->add_option("--traj", opt.traj_paths, "trajectory CSV")->required();
    ttfp_cmd->add_option("--tfix", opt.tfix, "fixed-point temperature, K")->required();
    ttfp_cmd->add_option("--d", opt.d, "sample spacing for the estimate (default 10)");
    ttfp_cmd->add_option("--epsilon", opt.epsilon, "settling band, K")
        ->check(CLI::PositiveNumber);

    CLI::App* identify_cmd = app.add_subcommand("identify", "fit model parameters from data");
    add_out(identify_cmd);
    add_hotspot(identify_cmd);
    identify_cmd->add_option("mode", opt.mode, "leakage | statespace | siso")->required();
    identify_cmd->add_option("--traj", opt.traj_paths,
                             "input CSV (calibration for leakage, trajectory otherwise); "
                             "repeatable for statespace");
    identify_cmd->add_option("--voltage", opt.voltage, "supply voltage for leakage fits, V");
    identify_cmd->add_option("--pdyn", opt.pdyn, "known dynamic power to split the lump, W");

    CLI::App* prbs_cmd =
        app.add_subcommand("prbs", "pseudo-random excitation schedule for identification");
    add_out(prbs_cmd);
    prbs_cmd->add_option("--levels", opt.levels, "comma-separated power levels, W")->required();
    prbs_cmd->add_option("--length", opt.length, "schedule length in steps")->required();
    prbs_cmd->add_option("--seed", opt.seed, "nonzero 16-bit register seed (default 0xACE1)");
    prbs_cmd->add_option("--sources", opt.sources, "number of sources (default 1)");

    CLI::App* mimo_cmd =
        app.add_subcommand("mimo", "refine scalar fixed points on the coupled model");
    add_config(mimo_cmd);
    add_out(mimo_cmd);
    mimo_cmd->add_option("--pc", opt.pc, "steady power override for seeding, W")
        ->check(CLI::PositiveNumber);

    CLI::App* bench_cmd = app.add_subcommand("bench", "median runtime of the analysis kernels");
    add_config(bench_cmd);
    add_out(bench_cmd);
    add_hotspot(bench_cmd);
    bench_cmd->add_option("--pc", opt.pc, "steady power override, W")->check(CLI::PositiveNumber);
    bench_cmd->add_option("--tmax", opt.tmax, "safe-power target (config units)");
    bench_cmd->add_option("--reps", opt.reps, "repetitions per kernel (default 200)");
    bench_cmd->add_option("--d", opt.d, "sample spacing for the estimator kernel");

    std::vector<const char*> argv;
    argv.reserve(args.size() + 1);
    argv.push_back("thermotool");
    for (const auto& a : args) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? k_exit_ok : k_exit_error;
    }

    opt.pc_set = analyze_cmd->count("--pc") > 0 || simulate_cmd->count("--pc") > 0 ||
                 mimo_cmd->count("--pc") > 0 || bench_cmd->count("--pc") > 0;
    opt.epsilon_set = ttfp_cmd->count("--epsilon") > 0;
    opt.voltage_set = identify_cmd->count("--voltage") > 0;
    opt.pdyn_set = identify_cmd->count("--pdyn") > 0;

    try {
        if (analyze_cmd->parsed()) return cmd_analyze(opt, out);
        if (simulate_cmd->parsed()) return cmd_simulate(opt, out, err);
        if (safe_cmd->parsed()) return cmd_safe_power(opt, out);
        if (ttfp_cmd->parsed()) return cmd_ttfp(opt, out);
        if (identify_cmd->parsed()) return cmd_identify(opt, out);
        if (prbs_cmd->parsed()) return cmd_prbs(opt, out);
        if (mimo_cmd->parsed()) return cmd_mimo(opt, out);
        if (bench_cmd->parsed()) return cmd_bench(opt, out);
        err << "error: no command selected\n";
        return k_exit_error;
    } catch (const NoFixedPointError& e) {
        json j{{"schema_version", 1}, {"error", e.what()}, {"margin", e.margin()}};
        out << j.dump(2) << "\n";
        err << "error: " << e.what() << "\n";
        return k_exit_negative;
    } catch (const UnreachableTemperatureError& e) {
        json j{{"schema_version", 1}, {"error", e.what()}};
        out << j.dump(2) << "\n";
        err << "error: " << e.what() << "\n";
        return k_exit_negative;
    } catch (const EstimationUndefinedError& e) {
        json j{{"schema_version", 1}, {"error", e.what()}};
        out << j.dump(2) << "\n";
        err << "error: " << e.what() << "\n";
        return k_exit_negative;
    } catch (const NewtonError& e) {
        json j{{"schema_version", 1}, {"error", e.what()}, {"iterations", e.iterations()}};
        j["kind"] = e.kind() == NewtonError::Kind::singular_jacobian ? "singular_jacobian"
                                                                     : "no_convergence";
        json last = json::array();
        for (Eigen::Index i = 0; i < e.last_iterate().size(); ++i) {
            last.push_back(e.last_iterate()[i]);
        }
        j["last_iterate_K"] = last;
        out << j.dump(2) << "\n";
        err << "error: " << e.what() << "\n";
        return k_exit_negative;
    } catch (const ModelMismatchError& e) {
        json j{{"schema_version", 1},
               {"error", e.what()},
               {"fitted_a", e.fitted_a()},
               {"fitted_b", e.fitted_b()}};
        out << j.dump(2) << "\n";
        err << "error: " << e.what() << "\n";
        return k_exit_negative;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return k_exit_error;
    }
}

}  // namespace thermo::cli
