#pragma once

#include <json.hpp>
#include <string>
#include <vector>

#include "tsa/harness/checks.hpp"

namespace tsa::harness {

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

// shortest text that parses back to the same double
std::string format_double(double x);

// I/O failures throw tsa::Error naming the path
void write_csv(const Table& t, const std::string& path);
Table read_csv(const std::string& path);
void write_json(const nlohmann::json& j, const std::string& path);

// one fixed header per scenario family
Table track_table(const TrackSummary& s);
Table bound_plot_table(const TrackSummary& s, bool rms);  // k, empirical, bound
Table jump_table(const JumpSummary& s);
Table detect_table(const DetectSummary& s);
Table adapt_table(const AdaptSummary& s);
Table agents_table(const AgentsSummary& s);
Table single_agent_table(const SingleAgentSummary& s);
Table soquartic_table(const SoquarticSummary& s);
Table bench_table(const BenchSummary& s);

nlohmann::json metrics_json(const TrackSummary& s);
nlohmann::json metrics_json(const JumpSummary& s);
nlohmann::json metrics_json(const DetectSummary& s);
nlohmann::json metrics_json(const AdaptSummary& s);
nlohmann::json metrics_json(const AgentsSummary& s);
nlohmann::json metrics_json(const SingleAgentSummary& s);
nlohmann::json metrics_json(const SoquarticSummary& s);
nlohmann::json metrics_json(const BenchSummary& s);

nlohmann::json check_json(const Check& c);

// config echo, content hash, metrics and per-criterion results
nlohmann::json summary_json(const ScenarioConfig& cfg, const nlohmann::json& metrics, const std::vector<Check>& checks);

}  // namespace tsa::harness
