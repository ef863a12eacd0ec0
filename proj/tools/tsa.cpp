#include <CLI11.hpp>
#include <chrono>
#include <filesystem>
#include <iostream>

#include "tsa/errors.hpp"
#include "tsa/harness/checks.hpp"
#include "tsa/harness/emit.hpp"

using namespace tsa::harness;
using nlohmann::json;

namespace {

struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<int> replicates;
    std::optional<int> threads;
    std::string scenario;
    std::string out = ".";
    std::string format = "csv";
    std::vector<std::string> overrides;
    bool no_checks = false;
};

void add_common(CLI::App* sub, Options& o, const std::vector<std::string>& scenarios) {
    sub->add_option("--config", o.config, "scenario config file")->check(CLI::ExistingFile);
    sub->add_option("--seed", o.seed, "base seed");
    sub->add_option("--replicates", o.replicates, "replicate count");
    sub->add_option("--threads", o.threads, "worker threads");
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--set", o.overrides, "section.key=value override (repeatable)");
    sub->add_flag("--no-checks", o.no_checks, "skip the acceptance checks");
    if (scenarios.size() > 1) sub->add_option("--scenario", o.scenario, "scenario id")->check(CLI::IsMember(scenarios));
}

ScenarioConfig build_config(const Options& o, const std::string& fallback, const std::vector<std::string>& allowed) {
    KeyValues kv;
    if (!o.config.empty()) kv = load_config_file(o.config);
    std::string scenario = fallback;
    for (const auto& [k, v] : kv.entries)
        if (k == "run.scenario") scenario = v;
    if (!o.scenario.empty()) scenario = o.scenario;
    if (std::find(allowed.begin(), allowed.end(), scenario) == allowed.end())
        throw tsa::ConfigError("scenario '" + scenario + "' does not belong to this subcommand");
    ScenarioConfig cfg = ScenarioConfig::defaults_for(scenario);
    cfg.apply(kv);
    cfg.scenario = scenario;
    for (const auto& s : o.overrides) {
        auto eq = s.find('=');
        if (eq == std::string::npos) throw tsa::ConfigError("--set expects key=value, got '" + s + "'");
        cfg.set(s.substr(0, eq), s.substr(eq + 1));
    }
    if (o.seed) cfg.seed = *o.seed;
    if (o.replicates) cfg.replicates = *o.replicates;
    if (o.threads) cfg.threads = *o.threads;
    return cfg;
}

json table_json(const Table& t) {
    json rows = json::array();
    for (const auto& r : t.rows) {
        json row = json::array();
        for (double x : r) row.push_back(std::isfinite(x) ? json(x) : json(nullptr));
        rows.push_back(row);
    }
    return {{"header", t.header}, {"rows", rows}};
}

int finish(const Options& o, const ScenarioConfig& cfg, const json& metrics,
           const std::vector<std::pair<std::string, Table>>& tables, const std::vector<Check>& checks) {
    std::filesystem::create_directories(o.out);
    json summary = summary_json(cfg, metrics, checks);
    const std::string stem = (std::filesystem::path(o.out) / cfg.scenario).string();
    if (o.format == "csv") {
        for (const auto& [suffix, t] : tables) write_csv(t, stem + suffix + ".csv");
        write_json(summary, stem + ".summary.json");
    } else {
        json data;
        for (const auto& [suffix, t] : tables) data[suffix.empty() ? "main" : suffix.substr(1)] = table_json(t);
        summary["data"] = data;
        write_json(summary, stem + ".json");
    }
    std::cout << cfg.scenario << " config " << cfg.content_hash() << "\n";
    bool ok = true;
    for (const auto& c : checks) {
        std::cout << format_check(c) << "\n";
        ok = ok && c.pass;
    }
    return ok ? 0 : 1;
}

double since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tracking stochastic approximation experiments"};
    app.require_subcommand(1);
    Options o;
    int rc = 0;

    const std::vector<std::string> track_ids{"evolution1", "evolution2", "lms"}, detect_ids{"model1", "model2"},
        agent_ids{"multiagent", "singleagent"};

    auto* track = app.add_subcommand("track", "tracking error against the recursive bounds");
    add_common(track, o, track_ids);
    track->callback([&] {
        auto cfg = build_config(o, "evolution1", track_ids);
        auto t0 = std::chrono::steady_clock::now();
        auto s = run_track(cfg);
        std::vector<Check> checks;
        if (!o.no_checks && cfg.scenario == "evolution1") checks.push_back(check_bound_dominance(s, cfg.burn_in, since(t0)));
        rc = finish(o, cfg, metrics_json(s),
                    {{"", track_table(s)}, {"_rms_plot", bound_plot_table(s, true)}, {"_mad_plot", bound_plot_table(s, false)}},
                    checks);
    });

    auto* jump = app.add_subcommand("jump", "jump-process tracking and ODE deviation");
    add_common(jump, o, {"jump"});
    jump->callback([&] {
        auto cfg = build_config(o, "jump", {"jump"});
        auto t0 = std::chrono::steady_clock::now();
        auto s = run_jump(cfg);
        std::vector<Check> checks;
        if (!o.no_checks) checks.push_back(check_jump(s, since(t0)));
        rc = finish(o, cfg, metrics_json(s), {{"", jump_table(s)}}, checks);
    });

    auto* detect = app.add_subcommand("detect", "windowed change detection");
    add_common(detect, o, detect_ids);
    detect->callback([&] {
        auto cfg = build_config(o, "model1", detect_ids);
        auto t0 = std::chrono::steady_clock::now();
        auto s = run_detect(cfg);
        std::vector<Check> checks;
        if (!o.no_checks && cfg.scenario == "model1") checks.push_back(check_detection(s, since(t0)));
        rc = finish(o, cfg, metrics_json(s), {{"", detect_table(s)}}, checks);
    });

    auto* adapt = app.add_subcommand("adapt", "adaptive gain against a constant-gain baseline");
    add_common(adapt, o, {"adapt"});
    adapt->callback([&] {
        auto cfg = build_config(o, "adapt", {"adapt"});
        auto t0 = std::chrono::steady_clock::now();
        auto s = run_adapt(cfg);
        std::vector<Check> checks;
        if (!o.no_checks) checks.push_back(check_adaptive(s, since(t0)));
        rc = finish(o, cfg, metrics_json(s), {{"", adapt_table(s)}}, checks);
    });

    auto* agents = app.add_subcommand("agents", "Kalman-filter agents tracking moving targets");
    add_common(agents, o, agent_ids);
    agents->callback([&] {
        auto cfg = build_config(o, "multiagent", agent_ids);
        auto t0 = std::chrono::steady_clock::now();
        if (cfg.scenario == "singleagent") {
            auto s = run_single_agent(cfg);
            rc = finish(o, cfg, metrics_json(s), {{"", single_agent_table(s)}}, {});
            return;
        }
        auto s = run_agents(cfg);
        std::vector<Check> checks;
        if (!o.no_checks) checks.push_back(check_partition(s, since(t0)));
        rc = finish(o, cfg, metrics_json(s), {{"", agents_table(s)}}, checks);
    });

    auto* soq = app.add_subcommand("soquartic", "second-order descent on the skewed quartic");
    add_common(soq, o, {"soquartic"});
    soq->callback([&] {
        auto cfg = build_config(o, "soquartic", {"soquartic"});
        auto t0 = std::chrono::steady_clock::now();
        auto s = run_soquartic(cfg);
        std::vector<Check> checks;
        if (!o.no_checks) checks.push_back(check_soquartic(s, since(t0)));
        rc = finish(o, cfg, metrics_json(s), {{"", soquartic_table(s)}}, checks);
    });

    auto* bench = app.add_subcommand("bench", "per-iteration FLOPs and wall time");
    add_common(bench, o, {"bench"});
    bench->callback([&] {
        auto cfg = build_config(o, "bench", {"bench"});
        auto t0 = std::chrono::steady_clock::now();
        auto s = run_bench(cfg);
        std::vector<Check> checks;
        if (!o.no_checks) checks.push_back(check_complexity(s, since(t0)));
        rc = finish(o, cfg, metrics_json(s), {{"", bench_table(s)}}, checks);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return rc;
}
