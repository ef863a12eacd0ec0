#include "tsa/harness/emit.hpp"

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "tsa/errors.hpp"

namespace tsa::harness {

using nlohmann::json;

std::string format_double(double x) {
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

void write_csv(const Table& t, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open '" + path + "' for writing: " + std::strerror(errno));
    for (std::size_t i = 0; i < t.header.size(); ++i) f << (i ? "," : "") << t.header[i];
    f << '\n';
    for (const auto& row : t.rows) {
        if (row.size() != t.header.size()) throw Error("row width does not match the header for '" + path + "'");
        for (std::size_t i = 0; i < row.size(); ++i) f << (i ? "," : "") << format_double(row[i]);
        f << '\n';
    }
    f.flush();
    if (!f) throw Error("write failed for '" + path + "'");
}

Table read_csv(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open '" + path + "' for reading");
    Table t;
    std::string line;
    if (!std::getline(f, line)) throw Error("'" + path + "' has no header");
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) t.header.push_back(cell);
    }
    long lineno = 1;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            double x = 0.0;
            auto r = std::from_chars(cell.data(), cell.data() + cell.size(), x);
            if (r.ec != std::errc() || r.ptr != cell.data() + cell.size())
                throw Error("'" + path + "' line " + std::to_string(lineno) + ": bad number '" + cell + "'");
            row.push_back(x);
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

void write_json(const json& j, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open '" + path + "' for writing: " + std::strerror(errno));
    f << j.dump(2) << '\n';
    f.flush();
    if (!f) throw Error("write failed for '" + path + "'");
}

Table track_table(const TrackSummary& s) {
    Table t{{"k", "emp_mad", "emp_rms", "mad_bound", "rms_bound", "B"}, {}};
    for (std::size_t k = 0; k < s.emp_mad.size(); ++k) {
        double nan = std::numeric_limits<double>::quiet_NaN();
        bool b = s.has_bound;
        t.rows.push_back({static_cast<double>(k), s.emp_mad[k], s.emp_rms[k], b ? s.mad_bound[k] : nan,
                          b ? s.rms_bound[k] : nan, b && k < s.B.size() ? s.B[k] : nan});
    }
    return t;
}

Table bound_plot_table(const TrackSummary& s, bool rms) {
    Table t{{"k", "empirical", "bound"}, {}};
    if (!s.has_bound) return t;
    const auto& e = rms ? s.emp_rms : s.emp_mad;
    const auto& b = rms ? s.rms_bound : s.mad_bound;
    for (std::size_t k = 0; k < e.size(); ++k) t.rows.push_back({static_cast<double>(k), e[k], b[k]});
    return t;
}

Table jump_table(const JumpSummary& s) {
    Table t{{"replicate", "jumps", "reentered", "worst_reentry", "max_dev"}, {}};
    for (std::size_t r = 0; r < s.runs.size(); ++r) {
        const auto& run = s.runs[r];
        // -1 marks a regime that ended before re-entry
        long worst = 0;
        for (long st : run.reentry_steps) worst = (st < 0 || worst < 0) ? -1 : std::max(worst, st);
        t.rows.push_back({static_cast<double>(r), static_cast<double>(run.jumps), static_cast<double>(run.reentered),
                          static_cast<double>(worst), run.max_dev});
    }
    return t;
}

Table detect_table(const DetectSummary& s) {
    Table t{{"replicate", "jumps", "eligible", "detected", "announcements", "false_alarms"}, {}};
    for (std::size_t r = 0; r < s.runs.size(); ++r) {
        const auto& run = s.runs[r];
        t.rows.push_back({static_cast<double>(r), static_cast<double>(run.jumps.size()),
                          static_cast<double>(run.eligible), static_cast<double>(run.detected),
                          static_cast<double>(run.announce.size()), static_cast<double>(run.false_alarms)});
    }
    return t;
}

Table adapt_table(const AdaptSummary& s) {
    Table t{{"replicate", "initial", "adaptive", "constant", "final_gain", "increases", "decreases"}, {}};
    for (std::size_t r = 0; r < s.runs.size(); ++r) {
        const auto& run = s.runs[r];
        t.rows.push_back({static_cast<double>(r), run.initial, run.adaptive, run.constant, run.final_gain,
                          static_cast<double>(run.increases), static_cast<double>(run.decreases)});
    }
    return t;
}

Table agents_table(const AgentsSummary& s) {
    Table t{{"replicate", "agent", "role", "target", "distance"}, {}};
    for (std::size_t r = 0; r < s.runs.size(); ++r) {
        const auto& run = s.runs[r];
        for (Eigen::Index j = 0; j < run.final_dist.rows(); ++j)
            for (Eigen::Index i = 0; i < run.final_dist.cols(); ++i)
                t.rows.push_back({static_cast<double>(r), static_cast<double>(j), static_cast<double>(run.roles[j]),
                                  static_cast<double>(i), run.final_dist(j, i)});
    }
    return t;
}

Table single_agent_table(const SingleAgentSummary& s) {
    Table t{{"k", "distance", "loose_bound", "theta_error"}, {}};
    for (std::size_t i = 0; i < s.k.size(); ++i)
        t.rows.push_back({static_cast<double>(s.k[i]), s.distance[i], s.loose_bound[i], s.theta_error[i]});
    return t;
}

Table soquartic_table(const SoquarticSummary& s) {
    Table t{{"k", "mean_norm_loss"}, {}};
    for (std::size_t k = 0; k < s.mean_norm_loss.size(); ++k)
        t.rows.push_back({static_cast<double>(k), s.mean_norm_loss[k]});
    return t;
}

// wall times stay out of the CSV so the file is reproducible
Table bench_table(const BenchSummary& s) {
    Table t{{"p", "efficient_flops", "dense_flops"}, {}};
    for (const auto& r : s.rows) t.rows.push_back({static_cast<double>(r.p), r.efficient_flops, r.dense_flops});
    return t;
}

namespace {

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

}  // namespace

json metrics_json(const TrackSummary& s) {
    json j = {{"a", s.a}, {"M", s.M}, {"has_bound", s.has_bound}};
    if (s.has_bound) {
        j["q"] = s.q;
        j["u"] = s.u;
        j["v"] = s.v;
        j["terminal_rms_bound"] = s.rms_bound.back();
        j["terminal_mad_bound"] = s.mad_bound.back();
    }
    j["terminal_emp_rms"] = finite_or_null(s.emp_rms.back());
    j["terminal_emp_mad"] = finite_or_null(s.emp_mad.back());
    return j;
}

json metrics_json(const JumpSummary& s) {
    return {{"jumps", s.jumps},       {"reentered", s.reentered}, {"frac_reentered", s.frac_reentered},
            {"p_dev_gt4", s.p_gt4},   {"p_dev_gt7", s.p_gt7},     {"max_dev", s.max_dev},
            {"worst_reentry", s.worst_reentry}};
}

json metrics_json(const DetectSummary& s) {
    return {{"eligible", s.eligible},
            {"detected", s.detected},
            {"false_alarms", s.false_alarms},
            {"mean_false_per_run", s.mean_false},
            {"mean_delay", s.mean_delay}};
}

json metrics_json(const AdaptSummary& s) {
    json terminal = json::array();
    for (const auto& r : s.runs)
        terminal.push_back({{"adaptive", finite_or_null(r.adaptive)}, {"constant", finite_or_null(r.constant)}});
    return {{"adaptive_ok", s.adaptive_ok},
            {"baseline_diverged", s.baseline_diverged},
            {"both", s.both},
            {"terminal", terminal}};
}

json metrics_json(const AgentsSummary& s) {
    return {{"seeds", s.runs.size()}, {"partitioned", s.partitioned}};
}

json metrics_json(const SingleAgentSummary& s) {
    double worst = 0.0;
    long covered = 0;
    for (std::size_t i = 0; i < s.k.size(); ++i) {
        worst = std::max(worst, s.distance[i]);
        covered += s.distance[i] <= s.loose_bound[i];
    }
    return {{"steps", s.k.size()},
            {"max_distance", worst},
            {"terminal_distance", s.distance.empty() ? 0.0 : s.distance.back()},
            {"steps_within_loose_bound", covered}};
}

json metrics_json(const SoquarticSummary& s) {
    long blocked = 0, retries = 0;
    for (const auto& r : s.runs) blocked += r.blocked, retries += r.retries;
    return {{"terminal_norm_loss", s.terminal},
            {"smoothed_nonincreasing", s.nonincreasing},
            {"smoothed", s.smoothed},
            {"blocked_steps", blocked},
            {"retries", retries}};
}

json metrics_json(const BenchSummary& s) {
    json rows = json::array();
    for (const auto& r : s.rows)
        rows.push_back({{"p", r.p},
                        {"efficient_flops", r.efficient_flops},
                        {"efficient_seconds", r.efficient_seconds},
                        {"dense_flops", r.dense_flops},
                        {"dense_seconds", r.dense_seconds}});
    return {{"rows", rows},
            {"efficient_slope", s.efficient_slope},
            {"dense_slope", s.dense_slope},
            {"ratio_grows", s.ratio_grows}};
}

json check_json(const Check& c) {
    return {{"criterion", c.id}, {"name", c.name},       {"pass", c.pass},
            {"detail", c.detail}, {"seconds", c.seconds}, {"limit", c.limit}};
}

json summary_json(const ScenarioConfig& cfg, const json& metrics, const std::vector<Check>& checks) {
    json j;
    j["scenario"] = cfg.scenario;
    j["config"] = cfg.echo();
    j["config_hash"] = cfg.content_hash();
    j["metrics"] = metrics;
    j["checks"] = json::array();
    bool all = true;
    for (const auto& c : checks) {
        j["checks"].push_back(check_json(c));
        all = all && c.pass;
    }
    j["pass"] = all;
    return j;
}

}  // namespace tsa::harness
