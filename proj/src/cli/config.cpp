#include "entangle/cli/config.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace entangle::cli {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(std::string_view text, const std::string& source, int line, std::string_view key) {
    T value{};
    const char* begin = text.data();
    const char* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end) {
        throw ConfigError(source, line, "value '" + std::string(text) + "' for '" + std::string(key) + "' is not a valid number");
    }
    return value;
}

bool parse_bool(std::string_view text, const std::string& source, int line, std::string_view key) {
    if (text == "true" || text == "yes" || text == "1") return true;
    if (text == "false" || text == "no" || text == "0") return false;
    throw ConfigError(source, line, "value '" + std::string(text) + "' for '" + std::string(key) + "' is not a boolean");
}

}  // namespace

ConfigError::ConfigError(const std::string& source, int line, const std::string& what)
    : Error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

ScenarioConfig parse_config(std::string_view text, const std::string& source) {
    ScenarioConfig cfg;
    std::set<std::string, std::less<>> seen;
    int explicit_line = 0;  // first line naming sep_basis or bell
    int preset_line = 0;
    int t_end_line = 0;

    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;

        if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
        const std::string_view line = trim(raw);
        if (line.empty()) continue;

        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ConfigError(source, line_no, "expected 'key = value'");
        const std::string key(trim(line.substr(0, eq)));
        const std::string_view value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError(source, line_no, "missing key before '='");
        if (value.empty()) throw ConfigError(source, line_no, "missing value for '" + key + "'");
        if (!seen.insert(key).second) throw ConfigError(source, line_no, "duplicate key '" + key + "'");

        try {
            if (key == "name") {
                cfg.name = std::string(value);
            } else if (key == "preset") {
                initial_state_preset(value);  // validates the name
                cfg.preset = std::string(value);
                preset_line = line_no;
            } else if (key == "sep_basis") {
                basis_index(value);
                cfg.sep_basis = std::string(value);
                if (!explicit_line) explicit_line = line_no;
            } else if (key == "bell") {
                cfg.bell = parse_bell_kind(value);
                if (!explicit_line) explicit_line = line_no;
            } else if (key == "epsilon") {
                cfg.epsilon = parse_number<double>(value, source, line_no, key);
                if (!(cfg.epsilon >= 0.0 && cfg.epsilon <= 1.0)) throw InvalidParameter("epsilon must lie in [0, 1]");
            } else if (key == "t_start") {
                cfg.t_start = parse_number<double>(value, source, line_no, key);
            } else if (key == "T") {
                cfg.t_end = parse_number<double>(value, source, line_no, key);
                t_end_line = line_no;
            } else if (key == "n_steps") {
                cfg.n_steps = parse_number<int>(value, source, line_no, key);
                if (cfg.n_steps < 1) throw InvalidParameter("n_steps must be >= 1");
            } else if (key == "u_max") {
                cfg.u_max = parse_number<double>(value, source, line_no, key);
                if (!(cfg.u_max > 0.0)) throw InvalidParameter("u_max must be positive");
            } else if (key == "mode") {
                cfg.mode = parse_adjoint_mode(value);
            } else if (key == "max_iters") {
                cfg.max_iters = parse_number<int>(value, source, line_no, key);
                if (cfg.max_iters < 1) throw InvalidParameter("max_iters must be >= 1");
            } else if (key == "cost_tol") {
                cfg.cost_tol = parse_number<double>(value, source, line_no, key);
            } else if (key == "reg") {
                cfg.reg = parse_number<double>(value, source, line_no, key);
                if (!(cfg.reg > 0.0)) throw InvalidParameter("reg must be positive");
            } else if (key == "seed") {
                cfg.seed = parse_number<std::uint64_t>(value, source, line_no, key);
            } else if (key == "substeps") {
                cfg.substeps = parse_number<int>(value, source, line_no, key);
                if (cfg.substeps < 1) throw InvalidParameter("substeps must be >= 1");
            } else if (key == "relaxation") {
                cfg.relaxation = parse_bool(value, source, line_no, key);
            } else if (key == "flip_threshold") {
                cfg.flip_threshold = parse_number<double>(value, source, line_no, key);
            } else if (key == "max_flips_per_iter") {
                cfg.max_flips_per_iter = parse_number<int>(value, source, line_no, key);
            } else if (key == "output_dir") {
                cfg.output_dir = std::string(value);
            } else if (key == "plots") {
                cfg.plots = parse_bool(value, source, line_no, key);
            } else {
                throw ConfigError(source, line_no, "unknown key '" + key + "'");
            }
        } catch (const ConfigError&) {
            throw;
        } catch (const Error& e) {
            throw ConfigError(source, line_no, e.what());
        }
    }

    if (cfg.preset && explicit_line) {
        throw ConfigError(source, explicit_line,
                          "sep_basis/bell conflict with 'preset' on line " + std::to_string(preset_line));
    }
    try {
        cfg.solve_params().validate();
    } catch (const Error& e) {
        throw ConfigError(source, t_end_line ? t_end_line : line_no, e.what());
    }
    return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path.string(), 0, "cannot open config file");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path.string());
}

DensityMatrix ScenarioConfig::initial_state() const {
    if (preset) return initial_state_preset(*preset, epsilon);
    return make_initial_state(sep_basis, bell, epsilon);
}

SolveParams ScenarioConfig::solve_params() const {
    SolveParams p;
    p.t_start = t_start;
    p.t_end = t_end;
    p.n_steps = n_steps;
    p.u_max = u_max;
    p.mode = mode;
    p.reg = reg;
    p.max_iters = max_iters;
    p.cost_tol = cost_tol;
    p.relaxation = relaxation;
    p.flip_threshold = flip_threshold;
    p.max_flips_per_iter = max_flips_per_iter;
    p.substeps = substeps;
    if (seed) {
        p.init = InitialGuess::Random;
        p.seed = *seed;
    }
    return p;
}

nlohmann::ordered_json ScenarioConfig::to_json() const {
    nlohmann::ordered_json j;
    j["name"] = name;
    if (preset) {
        j["initial"] = {{"preset", *preset}, {"epsilon", epsilon}};
    } else {
        j["initial"] = {{"sep_basis", sep_basis}, {"bell", std::string(to_string(bell))}, {"epsilon", epsilon}};
    }
    j["t_start"] = t_start;
    j["T"] = t_end;
    j["n_steps"] = n_steps;
    j["u_max"] = u_max;
    j["mode"] = std::string(to_string(mode));
    j["max_iters"] = max_iters;
    j["cost_tol"] = cost_tol;
    j["reg"] = reg;
    j["seed"] = seed ? nlohmann::ordered_json(*seed) : nlohmann::ordered_json(nullptr);
    j["substeps"] = substeps;
    j["relaxation"] = relaxation;
    j["flip_threshold"] = flip_threshold;
    j["max_flips_per_iter"] = max_flips_per_iter;
    j["output_dir"] = output_dir.generic_string();
    j["plots"] = plots;
    return j;
}

}  // namespace entangle::cli
