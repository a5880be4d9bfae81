#include "doim/sim/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "doim/channel.hpp"

namespace doim::sim {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

template <typename T>
std::string join(const std::vector<T>& v) {
    std::string out;
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        if constexpr (std::is_same_v<T, double>)
            out += fmt_double(v[i]);
        else
            out += std::to_string(v[i]);
    }
    return out;
}

double to_double(const std::string& s) {
    size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw ConfigError("bad numeric value: '" + s + "'");
    return v;
}

long to_long(const std::string& s) {
    size_t pos = 0;
    long v = std::stol(s, &pos);
    if (pos != s.size()) throw ConfigError("bad integer value: '" + s + "'");
    return v;
}

bool to_bool(const std::string& s) {
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
    throw ConfigError("bad boolean value: '" + s + "' (use true/false)");
}

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(static_cast<int>(to_long(trim(tok))));
    if (out.empty()) throw ConfigError("empty list value");
    return out;
}

// One setter per config key; parse and emit stay in sync through this table.
using Setter = std::function<void(ExperimentConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = {
        {"m", [](ExperimentConfig& c, const std::string& v) { c.m = static_cast<int>(to_long(v)); }},
        {"n", [](ExperimentConfig& c, const std::string& v) { c.n = static_cast<int>(to_long(v)); }},
        {"m_hat", [](ExperimentConfig& c, const std::string& v) { c.m_hat = static_cast<int>(to_long(v)); }},
        {"n_hat", [](ExperimentConfig& c, const std::string& v) { c.n_hat = static_cast<int>(to_long(v)); }},
        {"k_hat", [](ExperimentConfig& c, const std::string& v) { c.k_hat = static_cast<int>(to_long(v)); }},
        {"mc", [](ExperimentConfig& c, const std::string& v) { c.mc = static_cast<int>(to_long(v)); }},
        {"carrier_hz", [](ExperimentConfig& c, const std::string& v) { c.carrier_hz = to_double(v); }},
        {"delta_f_hz", [](ExperimentConfig& c, const std::string& v) { c.delta_f_hz = to_double(v); }},
        {"rolloff", [](ExperimentConfig& c, const std::string& v) { c.rolloff = to_double(v); }},
        {"paths", [](ExperimentConfig& c, const std::string& v) { c.paths = static_cast<int>(to_long(v)); }},
        {"velocity_kmh", [](ExperimentConfig& c, const std::string& v) { c.velocity_kmh = to_double(v); }},
        {"tau_max_samples", [](ExperimentConfig& c, const std::string& v) { c.tau_max_samples = to_double(v); }},
        {"on_grid_delays", [](ExperimentConfig& c, const std::string& v) { c.on_grid_delays = to_bool(v); }},
        {"damping", [](ExperimentConfig& c, const std::string& v) { c.damping = to_double(v); }},
        {"rho", [](ExperimentConfig& c, const std::string& v) { c.rho = to_double(v); }},
        {"max_iterations", [](ExperimentConfig& c, const std::string& v) { c.max_iterations = static_cast<int>(to_long(v)); }},
        {"energy_keep", [](ExperimentConfig& c, const std::string& v) { c.energy_keep = to_double(v); }},
        {"power_reallocation", [](ExperimentConfig& c, const std::string& v) { c.power_reallocation = to_bool(v); }},
        {"snr_db", [](ExperimentConfig& c, const std::string& v) { c.snr_db = parse_grid(v); }},
        {"epsilon", [](ExperimentConfig& c, const std::string& v) { c.epsilon = parse_grid(v); }},
        {"path_sweep", [](ExperimentConfig& c, const std::string& v) { c.path_sweep = parse_int_list(v); }},
        {"velocities", [](ExperimentConfig& c, const std::string& v) { c.velocities = parse_grid(v); }},
        {"min_frames", [](ExperimentConfig& c, const std::string& v) { c.min_frames = to_long(v); }},
        {"min_bit_errors", [](ExperimentConfig& c, const std::string& v) { c.min_bit_errors = to_long(v); }},
        {"max_frames", [](ExperimentConfig& c, const std::string& v) { c.max_frames = to_long(v); }},
        {"batch_frames", [](ExperimentConfig& c, const std::string& v) { c.batch_frames = to_long(v); }},
        {"converge_iterations", [](ExperimentConfig& c, const std::string& v) { c.converge_iterations = static_cast<int>(to_long(v)); }},
        {"converge_frames", [](ExperimentConfig& c, const std::string& v) { c.converge_frames = to_long(v); }},
        {"seed", [](ExperimentConfig& c, const std::string& v) { c.seed = static_cast<uint64_t>(std::stoull(v)); }},
        {"threads", [](ExperimentConfig& c, const std::string& v) { c.threads = static_cast<int>(to_long(v)); }},
        {"mode", [](ExperimentConfig& c, const std::string& v) {
             if (v != "doim" && v != "plain-otfs")
                 throw ConfigError("mode must be 'doim' or 'plain-otfs'");
             c.mode = v;
         }},
    };
    return table;
}

}  // namespace

std::vector<double> parse_grid(const std::string& text) {
    const std::string t = trim(text);
    if (t.empty()) throw ConfigError("empty grid value");
    std::vector<double> out;
    if (t.find(':') != std::string::npos) {
        std::stringstream ss(t);
        std::string a, b, c;
        if (!std::getline(ss, a, ':') || !std::getline(ss, b, ':') ||
            !std::getline(ss, c))
            throw ConfigError("grid must be lo:step:hi, got '" + text + "'");
        const double lo = to_double(trim(a));
        const double step = to_double(trim(b));
        const double hi = to_double(trim(c));
        if (step <= 0.0) throw ConfigError("grid step must be positive");
        for (double v = lo; v <= hi + 1e-9; v += step) out.push_back(v);
        return out;
    }
    std::stringstream ss(t);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(to_double(trim(tok)));
    return out;
}

FrameLayout ExperimentConfig::layout() const {
    FrameLayout l;
    l.M = m;
    l.N = n;
    l.M_hat = m_hat;
    l.N_hat = n_hat;
    l.k_hat = k_hat;
    l.Mc = mc;
    return l;
}

double ExperimentConfig::v_max_hz() const {
    return max_doppler_hz(carrier_hz, velocity_kmh);
}

void ExperimentConfig::validate() const {
    layout().validate();
    if (carrier_hz <= 0 || delta_f_hz <= 0)
        throw ConfigError("config: carrier_hz and delta_f_hz must be positive");
    if (rolloff < 0.0 || rolloff > 1.0)
        throw ConfigError("config: rolloff must be in [0, 1]");
    if (paths < 1) throw ConfigError("config: paths must be >= 1");
    if (velocity_kmh < 0) throw ConfigError("config: velocity_kmh must be >= 0");
    if (tau_max_samples < 0) throw ConfigError("config: tau_max_samples must be >= 0");
    if (snr_db.empty()) throw ConfigError("config: snr_db grid must be nonempty");
    if (!std::is_sorted(snr_db.begin(), snr_db.end()))
        throw ConfigError("config: snr_db grid must be sorted");
    for (double e : epsilon)
        if (e < 0) throw ConfigError("config: epsilon values must be >= 0");
    for (int l : path_sweep)
        if (l < 1) throw ConfigError("config: path_sweep values must be >= 1");
    if (min_frames < 1 || min_bit_errors < 0 || batch_frames < 1)
        throw ConfigError("config: trial budget must be positive");
    if (max_frames < min_frames)
        throw ConfigError("config: max_frames must be >= min_frames");
    if (converge_iterations < 1 || converge_frames < 1)
        throw ConfigError("config: convergence budget must be positive");
    if (damping <= 0.0 || damping > 1.0)
        throw ConfigError("config: damping must be in (0, 1]");
    if (rho <= 0.0 || rho >= 1.0) throw ConfigError("config: rho must be in (0, 1)");
    if (max_iterations < 1) throw ConfigError("config: max_iterations must be >= 1");
    if (energy_keep <= 0.0 || energy_keep > 1.0)
        throw ConfigError("config: energy_keep must be in (0, 1]");
    if (threads < 0) throw ConfigError("config: threads must be >= 0");
    if (tap_count() > m)
        throw ConfigError("config: tap count (tau_max_samples + filter tail) exceeds M");
    if (cp_len() >= m * n)
        throw ConfigError("config: CP length would reach the frame length");
}

nlohmann::json ExperimentConfig::to_json() const {
    nlohmann::json j;
    j["m"] = m;
    j["n"] = n;
    j["m_hat"] = m_hat;
    j["n_hat"] = n_hat;
    j["k_hat"] = k_hat;
    j["mc"] = mc;
    j["carrier_hz"] = carrier_hz;
    j["delta_f_hz"] = delta_f_hz;
    j["rolloff"] = rolloff;
    j["paths"] = paths;
    j["velocity_kmh"] = velocity_kmh;
    j["tau_max_samples"] = tau_max_samples;
    j["on_grid_delays"] = on_grid_delays;
    j["damping"] = damping;
    j["rho"] = rho;
    j["max_iterations"] = max_iterations;
    j["energy_keep"] = energy_keep;
    j["power_reallocation"] = power_reallocation;
    j["snr_db"] = snr_db;
    j["epsilon"] = epsilon;
    j["path_sweep"] = path_sweep;
    j["velocities"] = velocities;
    j["min_frames"] = min_frames;
    j["min_bit_errors"] = min_bit_errors;
    j["max_frames"] = max_frames;
    j["batch_frames"] = batch_frames;
    j["converge_iterations"] = converge_iterations;
    j["converge_frames"] = converge_frames;
    j["seed"] = seed;
    j["threads"] = threads;
    j["mode"] = mode;
    return j;
}

std::string ExperimentConfig::digest() const {
    // Canonical key=value serialization hashed with FNV-1a 64.
    std::string s;
    s += "m=" + std::to_string(m) + ";n=" + std::to_string(n);
    s += ";m_hat=" + std::to_string(m_hat) + ";n_hat=" + std::to_string(n_hat);
    s += ";k_hat=" + std::to_string(k_hat) + ";mc=" + std::to_string(mc);
    s += ";carrier_hz=" + fmt_double(carrier_hz);
    s += ";delta_f_hz=" + fmt_double(delta_f_hz);
    s += ";rolloff=" + fmt_double(rolloff);
    s += ";paths=" + std::to_string(paths);
    s += ";velocity_kmh=" + fmt_double(velocity_kmh);
    s += ";tau_max_samples=" + fmt_double(tau_max_samples);
    s += ";on_grid_delays=" + std::string(on_grid_delays ? "true" : "false");
    s += ";damping=" + fmt_double(damping) + ";rho=" + fmt_double(rho);
    s += ";max_iterations=" + std::to_string(max_iterations);
    s += ";energy_keep=" + fmt_double(energy_keep);
    s += ";power_reallocation=" + std::string(power_reallocation ? "true" : "false");
    s += ";snr_db=" + join(snr_db) + ";epsilon=" + join(epsilon);
    s += ";path_sweep=" + join(path_sweep) + ";velocities=" + join(velocities);
    s += ";min_frames=" + std::to_string(min_frames);
    s += ";min_bit_errors=" + std::to_string(min_bit_errors);
    s += ";max_frames=" + std::to_string(max_frames);
    s += ";batch_frames=" + std::to_string(batch_frames);
    s += ";converge_iterations=" + std::to_string(converge_iterations);
    s += ";converge_frames=" + std::to_string(converge_frames);
    s += ";seed=" + std::to_string(seed);
    s += ";mode=" + mode;
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void apply_override(ExperimentConfig& cfg, const std::string& key,
                    const std::string& value) {
    const auto& table = setters();
    const auto it = table.find(key);
    if (it == table.end()) throw ConfigError("unknown config key: '" + key + "'");
    it->second(cfg, value);
}

namespace {

ExperimentConfig from_json(const nlohmann::json& j) {
    ExperimentConfig cfg;
    std::vector<std::string> unknown;
    for (const auto& [key, val] : j.items()) {
        if (setters().find(key) == setters().end()) {
            unknown.push_back(key);
            continue;
        }
        std::string text;
        if (val.is_string())
            text = val.get<std::string>();
        else if (val.is_boolean())
            text = val.get<bool>() ? "true" : "false";
        else if (val.is_array()) {
            for (size_t i = 0; i < val.size(); ++i) {
                if (i) text += ',';
                text += fmt_double(val[i].get<double>());
            }
        } else
            text = fmt_double(val.get<double>());
        apply_override(cfg, key, text);
    }
    if (!unknown.empty()) {
        std::string msg = "unknown config keys:";
        for (const auto& k : unknown) msg += " '" + k + "'";
        throw ConfigError(msg);
    }
    return cfg;
}

}  // namespace

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    std::string text = buf.str();
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
        // JSON sidecar: the resolved config lives under "config".
        const auto j = nlohmann::json::parse(text);
        return from_json(j.contains("config") ? j["config"] : j);
    }
    ExperimentConfig cfg;
    std::vector<std::string> unknown;
    std::stringstream lines(text);
    std::string line;
    int lineno = 0;
    while (std::getline(lines, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) +
                              ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (setters().find(key) == setters().end()) {
            unknown.push_back(key);
            continue;
        }
        apply_override(cfg, key, value);
    }
    if (!unknown.empty()) {
        std::string msg = "unknown config keys:";
        for (const auto& k : unknown) msg += " '" + k + "'";
        throw ConfigError(msg);
    }
    return cfg;
}

}  // namespace doim::sim
