#include "tsa/harness/config.hpp"

#include <fmt/format.h>
#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "tsa/errors.hpp"
#include "tsa/rng.hpp"

namespace tsa::harness {

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        double d = std::stod(v, &pos);
        if (pos != v.size() || !std::isfinite(d)) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': expected a number, got '" + v + "'");
    }
}

long to_long(const std::string& key, const std::string& v) {
    long out = 0;
    auto r = std::from_chars(v.data(), v.data() + v.size(), out);
    if (r.ec != std::errc() || r.ptr != v.data() + v.size())
        throw ConfigError("config key '" + key + "': expected an integer, got '" + v + "'");
    return out;
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("config key '" + key + "': expected a boolean, got '" + v + "'");
}

// shortest text that parses back to d
std::string fmt_double(double d) { return fmt::format("{}", d); }

struct Field {
    std::function<void(ScenarioConfig&, const std::string&, const std::string&)> set;
    std::function<std::string(const ScenarioConfig&)> get;
};

template <class T>
Field num(T ScenarioConfig::*m) {
    Field f;
    f.set = [m](ScenarioConfig& c, const std::string& k, const std::string& v) {
        if constexpr (std::is_floating_point_v<T>)
            c.*m = to_double(k, v);
        else if constexpr (std::is_same_v<T, bool>)
            c.*m = to_bool(k, v);
        else {
            long x = to_long(k, v);
            if constexpr (std::is_unsigned_v<T>) {
                if (x < 0) throw ConfigError("config key '" + k + "' must be non-negative");
            }
            c.*m = static_cast<T>(x);
        }
    };
    f.get = [m](const ScenarioConfig& c) {
        if constexpr (std::is_floating_point_v<T>)
            return fmt_double(c.*m);
        else if constexpr (std::is_same_v<T, bool>)
            return std::string(c.*m ? "true" : "false");
        else
            return std::to_string(c.*m);
    };
    return f;
}

Field str(std::string ScenarioConfig::*m, std::vector<std::string> allowed = {}) {
    Field f;
    f.set = [m, allowed](ScenarioConfig& c, const std::string& k, const std::string& v) {
        if (!allowed.empty() && std::find(allowed.begin(), allowed.end(), v) == allowed.end())
            throw ConfigError("config key '" + k + "': unsupported value '" + v + "'");
        c.*m = v;
    };
    f.get = [m](const ScenarioConfig& c) { return c.*m; };
    return f;
}

const std::map<std::string, Field>& fields() {
    static const std::map<std::string, Field> f = {
        {"run.scenario", str(&ScenarioConfig::scenario, registered_scenarios())},
        {"run.K", num(&ScenarioConfig::K)},
        {"run.replicates", num(&ScenarioConfig::replicates)},
        {"run.seed", num(&ScenarioConfig::seed)},
        {"run.p", num(&ScenarioConfig::p)},
        {"run.threads", num(&ScenarioConfig::threads)},
        {"gain.policy", str(&ScenarioConfig::policy, {"mix", "midpoint", "explicit", "fixed"})},
        {"gain.a", num(&ScenarioConfig::a)},
        {"gain.q", num(&ScenarioConfig::q)},
        {"noise.sigma1", num(&ScenarioConfig::sigma1)},
        {"noise.sigma2", num(&ScenarioConfig::sigma2)},
        {"noise.truncation", num(&ScenarioConfig::truncation)},
        {"drift.jump_prob", num(&ScenarioConfig::jump_prob)},
        {"drift.jump_magnitude", num(&ScenarioConfig::jump_magnitude)},
        {"drift.B", num(&ScenarioConfig::B)},
        {"drift.B_rule", str(&ScenarioConfig::B_rule, {"nominal", "moment"})},
        {"drift.M", num(&ScenarioConfig::M)},
        {"drift.burn_in", num(&ScenarioConfig::burn_in)},
        {"hessian.kind", str(&ScenarioConfig::hessian, {"sim", "identity"})},
        {"hessian.d1", num(&ScenarioConfig::d1)},
        {"hessian.d2", num(&ScenarioConfig::d2)},
        {"detect.window", num(&ScenarioConfig::window)},
        {"detect.alpha", num(&ScenarioConfig::alpha)},
        {"detect.dof", str(&ScenarioConfig::dof, {"kn", "yao"})},
        {"adapt.eta_plus", num(&ScenarioConfig::eta_plus)},
        {"adapt.eta_minus", num(&ScenarioConfig::eta_minus)},
        {"adapt.a_mult", num(&ScenarioConfig::a_mult)},
        {"adapt.c", num(&ScenarioConfig::c)},
        {"adapt.min_samples", num(&ScenarioConfig::min_samples)},
        {"adapt.recenter", num(&ScenarioConfig::recenter)},
        {"adapt.theta0", num(&ScenarioConfig::theta0)},
        {"agents.targets", num(&ScenarioConfig::targets)},
        {"agents.agents", num(&ScenarioConfig::agents)},
        {"agents.j_star", num(&ScenarioConfig::j_star)},
        {"agents.vx_max", num(&ScenarioConfig::vx_max)},
        {"agents.vy_max", num(&ScenarioConfig::vy_max)},
        {"agents.dt", num(&ScenarioConfig::dt)},
        {"agents.meas_var", num(&ScenarioConfig::meas_var)},
        {"agents.gain_scale", num(&ScenarioConfig::gain_scale)},
        {"second.kind", str(&ScenarioConfig::kind, {"2spsa", "e2spsa", "2sg", "e2sg"})},
        {"second.a", num(&ScenarioConfig::so_a)},
        {"second.A", num(&ScenarioConfig::so_A)},
        {"second.c", num(&ScenarioConfig::so_c)},
        {"second.w", num(&ScenarioConfig::so_w)},
        {"second.noise", num(&ScenarioConfig::so_noise)},
        {"second.blocking", num(&ScenarioConfig::blocking)},
        {"second.retries", num(&ScenarioConfig::retries)},
        {"bench.p_list", str(&ScenarioConfig::p_list)},
        {"bench.iterations", num(&ScenarioConfig::bench_iterations)},
        {"bench.dense_max_p", num(&ScenarioConfig::dense_max_p)},
    };
    return f;
}

}  // namespace

KeyValues parse_config_text(const std::string& text) {
    KeyValues kv;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError("line " + std::to_string(lineno) + ": unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty section name");
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
        kv.entries.emplace_back(section.empty() ? key : section + "." + key, value);
    }
    return kv;
}

KeyValues load_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config_text(ss.str());
}

const std::vector<std::string>& registered_scenarios() {
    static const std::vector<std::string> s = {"evolution1", "evolution2", "lms",       "jump",      "model1", "model2",
                                               "adapt",      "multiagent", "singleagent", "soquartic", "bench"};
    return s;
}

bool is_registered(const std::string& scenario) {
    const auto& s = registered_scenarios();
    return std::find(s.begin(), s.end(), scenario) != s.end();
}

std::uint64_t scenario_hash(const std::string& scenario) {
    // FNV-1a
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : scenario) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return mix64(h);
}

ScenarioConfig ScenarioConfig::defaults_for(const std::string& scenario) {
    if (!is_registered(scenario)) throw ConfigError("unknown scenario '" + scenario + "'");
    ScenarioConfig c;
    c.scenario = scenario;
    if (scenario == "evolution2") {
        c.jump_magnitude = 200.0;
        c.sigma2 = 0.0;
    } else if (scenario == "lms") {
        c.policy = "fixed";
        c.a = 0.1;
        c.sigma1 = 1.0;
        c.sigma2 = 0.01;
        c.hessian = "identity";
    } else if (scenario == "jump") {
        c.K = 5000;
        c.replicates = 500;
        c.policy = "fixed";
        c.a = 0.1;
        c.sigma1 = 1.0;
        c.sigma2 = 0.0;
        c.jump_prob = 0.0005;
        c.jump_magnitude = 50.0;
        c.hessian = "identity";
    } else if (scenario == "model1" || scenario == "model2") {
        c.K = 5000;
        c.replicates = 50;
        c.policy = "fixed";
        c.a = 1.0 / 30.0;
        c.sigma2 = 0.0;
        c.jump_prob = 0.001;
        c.jump_magnitude = 500.0;
    } else if (scenario == "adapt") {
        c.c = 0.1;
        c.K = 5000;
        c.replicates = 10;
        c.sigma2 = 0.0;
    } else if (scenario == "multiagent") {
        c.replicates = 20;
    } else if (scenario == "singleagent") {
        c.replicates = 1;
        c.targets = 1;
        c.agents = 1;
        c.vy_max = 30.0;
    } else if (scenario == "soquartic") {
        c.p = 20;
        c.K = 20000;
        c.replicates = 5;
    } else if (scenario == "bench") {
        c.replicates = 1;
    }
    return c;
}

void ScenarioConfig::set(const std::string& key, const std::string& value) {
    auto it = fields().find(key);
    if (it == fields().end()) throw ConfigError("unknown config key '" + key + "'");
    it->second.set(*this, key, value);
}

void ScenarioConfig::apply(const KeyValues& kv) {
    for (const auto& [k, v] : kv.entries) set(k, v);
}

std::map<std::string, std::string> ScenarioConfig::echo() const {
    std::map<std::string, std::string> out;
    for (const auto& [k, f] : fields()) out[k] = f.get(*this);
    return out;
}

std::string ScenarioConfig::canonical() const {
    std::string s;
    for (const auto& [k, v] : echo()) s += k + " = " + v + "\n";
    return s;
}

std::string ScenarioConfig::content_hash() const { return git_blob_hash(canonical()); }

std::string git_blob_hash(const std::string& text) {
    std::string blob = "blob " + std::to_string(text.size());
    blob.push_back('\0');
    blob += text;
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(blob.data(), blob.size(), md, &len, EVP_sha1(), nullptr);
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[md[i] >> 4]);
        out.push_back(hex[md[i] & 15]);
    }
    return out;
}

std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        tok = trim(tok);
        if (tok.empty()) continue;
        out.push_back(static_cast<int>(to_long("list", tok)));
    }
    return out;
}

}  // namespace tsa::harness
