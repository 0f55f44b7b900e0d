#include "entangle/cli/artifacts.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace entangle::cli {

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc()) return "nan";
    return std::string(buf, ptr);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
    if (!out) throw Error("write failed for " + path.string());
}

std::string trajectory_csv(const Trajectory& traj, const SwitchRecord& sw) {
    const ControlSchedule& sched = traj.schedule;
    const int n = sched.n_steps();
    const int m = sched.n_controls();
    std::string out = "t";
    for (int k = 1; k <= m; ++k) out += ",u" + std::to_string(k);
    out += ",concurrence";
    for (int k = 1; k <= m; ++k) out += ",phi" + std::to_string(k);
    out += '\n';
    for (int i = 0; i <= n; ++i) {
        const int row = std::min(i, n - 1);
        out += format_double(traj.times[static_cast<std::size_t>(i)]);
        for (int k = 0; k < m; ++k) out += ',' + format_double(sched.value(row, k));
        out += ',' + format_double(traj.concurrences[static_cast<std::size_t>(i)]);
        for (int k = 0; k < m; ++k) out += ',' + format_double(sw.phi(row, k));
        out += '\n';
    }
    return out;
}

std::string schedule_csv(const ControlSchedule& sched) {
    std::string out = "t";
    for (int k = 1; k <= sched.n_controls(); ++k) out += ",u" + std::to_string(k);
    out += '\n';
    for (int i = 0; i < sched.n_steps(); ++i) {
        out += format_double(sched.time(i));
        for (int k = 0; k < sched.n_controls(); ++k) out += ',' + format_double(sched.value(i, k));
        out += '\n';
    }
    return out;
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) {
        const auto b = field.find_first_not_of(" \t\r");
        const auto e = field.find_last_not_of(" \t\r");
        fields.push_back(b == std::string::npos ? std::string() : field.substr(b, e - b + 1));
    }
    return fields;
}

double parse_field(const std::string& s, const std::string& where) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) throw InvalidSchedule(where + ": '" + s + "' is not a number");
    return v;
}

}  // namespace

ControlSchedule parse_schedule_csv(const std::string& text, const ScenarioConfig& cfg, int n_controls,
                                   const std::string& source) {
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    std::string expected_header = "t";
    for (int k = 1; k <= n_controls; ++k) expected_header += ",u" + std::to_string(k);

    bool have_header = false;
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        const std::string where = source + ":" + std::to_string(line_no);
        if (!have_header) {
            std::string joined;
            for (const auto& f : split_fields(line)) joined += (joined.empty() ? "" : ",") + f;
            if (joined != expected_header) throw InvalidSchedule(where + ": expected header '" + expected_header + "'");
            have_header = true;
            continue;
        }
        const auto fields = split_fields(line);
        if (fields.size() != static_cast<std::size_t>(n_controls) + 1) {
            throw InvalidSchedule(where + ": expected " + std::to_string(n_controls + 1) + " fields");
        }
        std::vector<double> row;
        for (const auto& f : fields) row.push_back(parse_field(f, where));
        rows.push_back(std::move(row));
    }
    if (!have_header) throw InvalidSchedule(source + ": empty schedule file");
    if (rows.size() != static_cast<std::size_t>(cfg.n_steps)) {
        throw InvalidSchedule(source + ": grid mismatch, " + std::to_string(rows.size()) + " rows for n_steps = " +
                              std::to_string(cfg.n_steps));
    }

    Eigen::MatrixXd values(cfg.n_steps, n_controls);
    for (int i = 0; i < cfg.n_steps; ++i) {
        const auto& row = rows[static_cast<std::size_t>(i)];
        for (int k = 0; k < n_controls; ++k) values(i, k) = row[static_cast<std::size_t>(k) + 1];
    }
    ControlSchedule sched(cfg.t_start, cfg.t_end, std::move(values), cfg.u_max);
    for (int i = 0; i < cfg.n_steps; ++i) {
        const double t = rows[static_cast<std::size_t>(i)][0];
        if (std::abs(t - sched.time(i)) > 1e-9 * std::max(1.0, std::abs(sched.time(i)))) {
            throw InvalidSchedule(source + ": grid mismatch at row " + std::to_string(i + 1) + ", t = " +
                                  format_double(t) + " but the grid has " + format_double(sched.time(i)));
        }
    }
    return sched;
}

ControlSchedule load_schedule_csv(const std::filesystem::path& path, const ScenarioConfig& cfg, int n_controls) {
    std::ifstream in(path);
    if (!in) throw InvalidSchedule("cannot open schedule file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_schedule_csv(buf.str(), cfg, n_controls, path.string());
}

nlohmann::ordered_json solve_summary(const ScenarioConfig& cfg, const SolveReport& report) {
    nlohmann::ordered_json j;
    j["command"] = "solve";
    j["name"] = cfg.name;
    j["terminal_concurrence"] = report.terminal_concurrence;
    j["iterations"] = report.iterations;
    j["converged"] = report.converged;
    j["stop_reason"] = std::string(to_string(report.stop_reason));
    j["mode"] = std::string(to_string(report.mode));
    j["config"] = cfg.to_json();
    auto history = nlohmann::ordered_json::array();
    for (const auto& h : report.history) {
        history.push_back({{"iteration", h.iteration},
                           {"cost", h.cost},
                           {"terminal_concurrence", -h.cost},
                           {"flips", h.flips}});
    }
    j["history"] = std::move(history);
    const auto& d = report.diagnostics;
    j["diagnostics"] = {{"degenerate_terminal_gradient", d.degenerate_terminal_gradient},
                        {"max_imag_hamiltonian", d.max_imag_hamiltonian},
                        {"max_imag_switching", d.max_imag_switching},
                        {"singular_entries", d.singular_entries},
                        {"pmp_violations", d.pmp_violations}};
    return j;
}

nlohmann::ordered_json simulate_summary(const ScenarioConfig& cfg, const Trajectory& traj,
                                        const CostateTrajectory& costate, const SwitchRecord& sw) {
    nlohmann::ordered_json j;
    j["command"] = "simulate";
    j["name"] = cfg.name;
    j["terminal_concurrence"] = traj.terminal_concurrence();
    j["mode"] = std::string(to_string(costate.mode));
    j["config"] = cfg.to_json();
    const Eigen::MatrixXd& u = traj.schedule.values();
    j["diagnostics"] = {{"degenerate_terminal_gradient", costate.degenerate},
                        {"max_imag_switching", sw.max_imag},
                        {"singular_entries", sw.singular},
                        {"pmp_violations", static_cast<int>((sw.controls.array() != u.array()).count())}};
    return j;
}

}  // namespace entangle::cli
