#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "thermo/stability.hpp"
#include "thermo/sysid.hpp"
#include "thermo/thermal_sim.hpp"

namespace thermo::io {

enum class Units { kelvin, celsius };

[[nodiscard]] double celsius_to_kelvin(double temp_c);
[[nodiscard]] double kelvin_to_celsius(double temp_k);

/// Parsed and validated model description. Internal state is always absolute
/// Kelvin; the units field only governs how temperature points were read and
/// how reports are annotated.
struct ModelConfig {
    Units units = Units::kelvin;
    ThermalStateSpace thermal;
    std::vector<SourceParams> sources;
    std::vector<std::optional<SisoParams>> siso;  // per hotspot, may be absent
    std::optional<Eigen::VectorXd> t_initial_k;
    double runaway_bound_k = 2000.0;
};

[[nodiscard]] ModelConfig parse_model_config(const nlohmann::json& j);
[[nodiscard]] ModelConfig load_model_config(const std::filesystem::path& path);

/// Shortest decimal form that parses back to the same double; locale-free.
[[nodiscard]] std::string format_double(double v);

// Trajectory tables: header t_s,T1_K..TN_K,P1_W..PM_W, one row per sample.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);
[[nodiscard]] Trajectory read_trajectory_csv(std::istream& in);

// Power schedules: header step,source,pc_W. Source indices are 1-based in the
// file, 0-based in memory.
void write_schedule_csv(std::ostream& out, const Schedule& schedule);
[[nodiscard]] Schedule read_schedule_csv(std::istream& in);

// Steady-state calibration points: header T_K,P_W.
void write_calibration_csv(std::ostream& out, const std::vector<CalibrationSample>& samples);
[[nodiscard]] std::vector<CalibrationSample> read_calibration_csv(std::istream& in);

}  // namespace thermo::io
