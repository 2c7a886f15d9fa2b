#include "thermo/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace thermo::io {

namespace {

void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

std::string strip(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

double parse_double(const std::string& raw, const std::string& context) {
    const std::string s = strip(raw);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    require(ec == std::errc() && ptr == s.data() + s.size(),
            context + ": cannot parse number from '" + raw + "'");
    return value;
}

long parse_long(const std::string& raw, const std::string& context) {
    const std::string s = strip(raw);
    long value = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    require(ec == std::errc() && ptr == s.data() + s.size(),
            context + ": cannot parse integer from '" + raw + "'");
    return value;
}

// Reads nonempty lines; returns false at EOF.
bool next_line(std::istream& in, std::string& line) {
    while (std::getline(in, line)) {
        line = strip(line);
        if (!line.empty()) return true;
    }
    return false;
}

Eigen::MatrixXd parse_matrix(const nlohmann::json& j, const std::string& key) {
    require(j.is_array() && !j.empty(), "config." + key + " must be a nonempty array of rows");
    const std::size_t rows = j.size();
    std::size_t cols = 0;
    Eigen::MatrixXd m;
    for (std::size_t r = 0; r < rows; ++r) {
        const auto& row = j[r];
        require(row.is_array() && !row.empty(),
                "config." + key + " rows must be nonempty arrays");
        if (r == 0) {
            cols = row.size();
            m.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
        }
        require(row.size() == cols, "config." + key + " rows must have equal length");
        for (std::size_t c = 0; c < cols; ++c) {
            require(row[c].is_number(), "config." + key + " entries must be numbers");
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                row[c].get<double>();
        }
    }
    return m;
}

void reject_unknown_keys(const nlohmann::json& j, const std::set<std::string>& known,
                         const std::string& where) {
    for (const auto& item : j.items()) {
        require(known.count(item.key()) > 0, where + ": unknown key '" + item.key() + "'");
    }
}

double get_number(const nlohmann::json& j, const std::string& key, const std::string& where) {
    require(j.contains(key), where + ": missing key '" + key + "'");
    require(j.at(key).is_number(), where + "." + key + " must be a number");
    return j.at(key).get<double>();
}

double get_number_or(const nlohmann::json& j, const std::string& key, double fallback,
                     const std::string& where) {
    if (!j.contains(key)) return fallback;
    require(j.at(key).is_number(), where + "." + key + " must be a number");
    return j.at(key).get<double>();
}

}  // namespace

double celsius_to_kelvin(double temp_c) { return temp_c + 273.15; }
double kelvin_to_celsius(double temp_k) { return temp_k - 273.15; }

ModelConfig parse_model_config(const nlohmann::json& j) {
    require(j.is_object(), "config must be a JSON object");
    reject_unknown_keys(j, {"schema_version", "units", "sample_period_s", "a", "b",
                            "source_hotspot_map", "t_ambient", "t_initial", "runaway_bound",
                            "sources", "siso"},
                        "config");

    require(j.contains("schema_version"), "config: missing key 'schema_version'");
    require(j.at("schema_version").is_number_integer() && j.at("schema_version").get<int>() == 1,
            "config: unsupported schema_version (expected 1)");

    Units units = Units::kelvin;
    if (j.contains("units")) {
        const std::string u = j.at("units").get<std::string>();
        if (u == "celsius") {
            units = Units::celsius;
        } else {
            require(u == "kelvin", "config.units must be 'kelvin' or 'celsius'");
        }
    }
    const auto to_kelvin = [units](double point) {
        return units == Units::celsius ? celsius_to_kelvin(point) : point;
    };

    require(j.contains("a"), "config: missing key 'a'");
    require(j.contains("b"), "config: missing key 'b'");
    const Eigen::MatrixXd a = parse_matrix(j.at("a"), "a");
    const Eigen::MatrixXd b = parse_matrix(j.at("b"), "b");
    const int n = static_cast<int>(a.rows());
    const int m = static_cast<int>(b.cols());

    std::vector<int> map;
    if (j.contains("source_hotspot_map")) {
        require(j.at("source_hotspot_map").is_array(),
                "config.source_hotspot_map must be an array");
        for (const auto& e : j.at("source_hotspot_map")) {
            require(e.is_number_integer(), "config.source_hotspot_map entries must be integers");
            map.push_back(e.get<int>());
        }
    } else {
        require(n == m,
                "config: source_hotspot_map is required when source and hotspot counts differ");
        map.resize(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) map[static_cast<std::size_t>(i)] = i;
    }

    const double period = get_number_or(j, "sample_period_s", 1.0, "config");

    std::optional<ThermalStateSpace> thermal;
    try {
        if (j.contains("t_ambient")) {
            require(j.at("t_ambient").is_number(), "config.t_ambient must be a number");
            thermal = ThermalStateSpace::ambient_referenced(
                a, b, period, map, to_kelvin(j.at("t_ambient").get<double>()));
        } else {
            thermal = ThermalStateSpace(a, b, period, map);
        }
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(std::string("config: ") + e.what());
    }

    ModelConfig config{units, std::move(*thermal), {}, {}, std::nullopt, 2000.0};

    require(j.contains("sources") && j.at("sources").is_array(),
            "config: missing 'sources' array");
    require(static_cast<int>(j.at("sources").size()) == m,
            "config.sources must have one entry per B column");
    for (std::size_t i = 0; i < j.at("sources").size(); ++i) {
        const auto& js = j.at("sources")[i];
        const std::string where = "config.sources[" + std::to_string(i) + "]";
        require(js.is_object(), where + " must be an object");
        reject_unknown_keys(js, {"c_sw_f", "voltage_v", "frequency_hz", "i_gate_a", "kappa1",
                                 "kappa2_k"},
                            where);
        SourceParams sp;
        sp.c_sw = get_number_or(js, "c_sw_f", 0.0, where);
        sp.voltage = get_number(js, "voltage_v", where);
        sp.frequency = get_number_or(js, "frequency_hz", 0.0, where);
        sp.leakage.i_gate = get_number_or(js, "i_gate_a", 0.0, where);
        sp.leakage.kappa1 = get_number_or(js, "kappa1", 0.0, where);
        sp.leakage.kappa2 = get_number_or(js, "kappa2_k", -1.0, where);
        if (sp.leakage.kappa1 > 0.0) {
            require(js.contains("kappa2_k"), where + ": kappa2_k is required when kappa1 > 0");
        }
        try {
            sp.validate();
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument(where + ": " + e.what());
        }
        config.sources.push_back(sp);
    }

    config.siso.assign(static_cast<std::size_t>(n), std::nullopt);
    if (j.contains("siso")) {
        require(j.at("siso").is_array() && static_cast<int>(j.at("siso").size()) == n,
                "config.siso must have one entry per hotspot");
        for (int i = 0; i < n; ++i) {
            const auto& je = j.at("siso")[static_cast<std::size_t>(i)];
            if (je.is_null()) continue;
            const std::string where = "config.siso[" + std::to_string(i) + "]";
            require(je.is_object(), where + " must be an object or null");
            reject_unknown_keys(je, {"a", "b"}, where);
            SisoParams sp{get_number(je, "a", where), get_number(je, "b", where)};
            try {
                sp.validate();
            } catch (const std::invalid_argument& e) {
                throw std::invalid_argument(where + ": " + e.what());
            }
            config.siso[static_cast<std::size_t>(i)] = sp;
        }
    }

    if (j.contains("t_initial")) {
        require(j.at("t_initial").is_array() && static_cast<int>(j.at("t_initial").size()) == n,
                "config.t_initial must have one entry per hotspot");
        Eigen::VectorXd t0(n);
        for (int i = 0; i < n; ++i) {
            const auto& e = j.at("t_initial")[static_cast<std::size_t>(i)];
            require(e.is_number(), "config.t_initial entries must be numbers");
            t0[i] = to_kelvin(e.get<double>());
            require(t0[i] > 0.0, "config.t_initial must be positive in Kelvin");
        }
        config.t_initial_k = t0;
    }

    if (j.contains("runaway_bound")) {
        config.runaway_bound_k = to_kelvin(get_number(j, "runaway_bound", "config"));
    }
    require(config.runaway_bound_k > 0.0, "config.runaway_bound must be positive in Kelvin");

    return config;
}

ModelConfig load_model_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    require(in.good(), "cannot open config file: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument("config " + path.string() + ": " + e.what());
    }
    return parse_model_config(j);
}

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    require(ec == std::errc(), "number formatting failed");
    return std::string(buf, ptr);
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
    traj.validate();
    out << "t_s";
    for (int i = 0; i < traj.hotspot_count(); ++i) out << ",T" << (i + 1) << "_K";
    for (int i = 0; i < traj.source_count(); ++i) out << ",P" << (i + 1) << "_W";
    out << "\n";
    for (std::size_t k = 0; k < traj.size(); ++k) {
        out << format_double(traj.times_s[k]);
        for (Eigen::Index i = 0; i < traj.temps_k[k].size(); ++i) {
            out << "," << format_double(traj.temps_k[k][i]);
        }
        for (Eigen::Index i = 0; i < traj.powers_w[k].size(); ++i) {
            out << "," << format_double(traj.powers_w[k][i]);
        }
        out << "\n";
    }
}

Trajectory read_trajectory_csv(std::istream& in) {
    std::string line;
    require(next_line(in, line), "trajectory: empty input");
    const auto header = split_csv_line(line);
    require(!header.empty() && strip(header[0]) == "t_s",
            "trajectory: header must start with t_s");
    int n = 0;
    std::size_t pos = 1;
    while (pos < header.size() &&
           strip(header[pos]) == "T" + std::to_string(n + 1) + "_K") {
        ++n;
        ++pos;
    }
    int m = 0;
    while (pos < header.size() &&
           strip(header[pos]) == "P" + std::to_string(m + 1) + "_W") {
        ++m;
        ++pos;
    }
    require(n >= 1, "trajectory: expected at least one T<i>_K column");
    require(m >= 1, "trajectory: expected at least one P<i>_W column");
    if (pos != header.size()) {
        throw std::invalid_argument("trajectory: unexpected header column '" + header[pos] + "'");
    }

    Trajectory traj;
    long row = 1;
    while (next_line(in, line)) {
        ++row;
        const auto fields = split_csv_line(line);
        const std::string where = "trajectory row " + std::to_string(row);
        require(static_cast<int>(fields.size()) == 1 + n + m,
                where + ": expected " + std::to_string(1 + n + m) + " fields");
        traj.times_s.push_back(parse_double(fields[0], where));
        Eigen::VectorXd temps(n);
        for (int i = 0; i < n; ++i) {
            temps[i] = parse_double(fields[static_cast<std::size_t>(1 + i)], where);
        }
        Eigen::VectorXd powers(m);
        for (int i = 0; i < m; ++i) {
            powers[i] = parse_double(fields[static_cast<std::size_t>(1 + n + i)], where);
        }
        traj.temps_k.push_back(std::move(temps));
        traj.powers_w.push_back(std::move(powers));
    }
    traj.validate();
    return traj;
}

void write_schedule_csv(std::ostream& out, const Schedule& schedule) {
    out << "step,source,pc_W\n";
    for (const auto& e : schedule) {
        out << e.step << "," << (e.source + 1) << "," << format_double(e.pc_w) << "\n";
    }
}

Schedule read_schedule_csv(std::istream& in) {
    std::string line;
    require(next_line(in, line), "schedule: empty input");
    {
        const auto header = split_csv_line(line);
        require(header.size() == 3 && strip(header[0]) == "step" &&
                    strip(header[1]) == "source" && strip(header[2]) == "pc_W",
                "schedule: header must be step,source,pc_W");
    }
    Schedule schedule;
    long row = 1;
    while (next_line(in, line)) {
        ++row;
        const auto fields = split_csv_line(line);
        const std::string where = "schedule row " + std::to_string(row);
        require(fields.size() == 3, where + ": expected 3 fields");
        ScheduleEntry e;
        e.step = parse_long(fields[0], where);
        e.source = static_cast<int>(parse_long(fields[1], where)) - 1;
        e.pc_w = parse_double(fields[2], where);
        require(e.step >= 0, where + ": step must be >= 0");
        require(e.source >= 0, where + ": source must be >= 1");
        schedule.push_back(e);
    }
    return schedule;
}

void write_calibration_csv(std::ostream& out, const std::vector<CalibrationSample>& samples) {
    out << "T_K,P_W\n";
    for (const auto& s : samples) {
        out << format_double(s.temp_k) << "," << format_double(s.power_w) << "\n";
    }
}

std::vector<CalibrationSample> read_calibration_csv(std::istream& in) {
    std::string line;
    require(next_line(in, line), "calibration: empty input");
    {
        const auto header = split_csv_line(line);
        require(header.size() == 2 && strip(header[0]) == "T_K" && strip(header[1]) == "P_W",
                "calibration: header must be T_K,P_W");
    }
    std::vector<CalibrationSample> samples;
    long row = 1;
    while (next_line(in, line)) {
        ++row;
        const auto fields = split_csv_line(line);
        const std::string where = "calibration row " + std::to_string(row);
        require(fields.size() == 2, where + ": expected 2 fields");
        samples.push_back(
            {parse_double(fields[0], where), parse_double(fields[1], where)});
    }
    return samples;
}

}  // namespace thermo::io
