#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace tsa::harness {

// flat "section.key" -> raw value, in file order
struct KeyValues {
    std::vector<std::pair<std::string, std::string>> entries;
};

// `[section]` headers, `key = value` lines, `#` comments
KeyValues parse_config_text(const std::string& text);
KeyValues load_config_file(const std::string& path);

struct ScenarioConfig {
    // [run]
    std::string scenario = "evolution1";
    long K = 1000;
    int replicates = 25;
    std::uint64_t seed = 20240611;
    int p = 2;
    int threads = 1;

    // [gain]
    std::string policy = "mix";  // mix | midpoint | explicit | fixed (no bound)
    double a = 0.0;                // explicit gain, or 0 for the policy default
    double q = 0.0;                // explicit slack, or 0 for the default slack

    // [noise]
    double sigma1 = 10.0;
    double sigma2 = 10.0;
    double truncation = 3.0;

    // [drift]
    double jump_prob = 0.0;
    double jump_magnitude = 0.0;
    double B = -1.0;  // drift bound; negative selects the scenario default
    std::string B_rule = "nominal";  // nominal | moment
    double M = -1.0;  // noise bound; negative selects the scenario default
    long burn_in = 20;

    // [hessian]
    std::string hessian = "sim";  // sim | identity
    double d1 = 30.0, d2 = 5.0;

    // [detect]
    int window = 25;
    double alpha = 0.01;
    std::string dof = "kn";  // kn | yao

    // [adapt]
    double eta_plus = 1.1;
    double eta_minus = 0.9;
    double a_mult = 3.0;  // initial gain a0 = a_mult / L
    double c = 1.0;
    int min_samples = 3;
    bool recenter = true;
    double theta0 = 100.0;

    // [agents]
    int targets = 2;
    int agents = 4;
    int j_star = 1;
    double vx_max = 15.0;
    double vy_max = 15.0;
    double dt = 0.3;
    double meas_var = 10.0;
    double gain_scale = 1.15;

    // [second]
    std::string kind = "2spsa";
    double so_a = 0.04, so_A = 1000.0, so_c = 0.05, so_w = 0.01;
    double so_noise = 0.05;
    double blocking = 1.0;
    int retries = 5;
    std::string p_list = "250,500,1000,2000";
    int bench_iterations = 3;
    int dense_max_p = 512;

    static ScenarioConfig defaults_for(const std::string& scenario);

    // unknown keys and malformed values throw ConfigError
    void apply(const KeyValues& kv);
    void set(const std::string& key, const std::string& value);

    std::map<std::string, std::string> echo() const;
    std::string canonical() const;
    std::string content_hash() const;
};

const std::vector<std::string>& registered_scenarios();
bool is_registered(const std::string& scenario);
std::uint64_t scenario_hash(const std::string& scenario);

// git-style blob id: sha1("blob <len>\0" + text)
std::string git_blob_hash(const std::string& text);

std::vector<int> parse_int_list(const std::string& s);

}  // namespace tsa::harness
