#pragma once

#include <atomic>
#include <string>
#include <thread>
#include <vector>

#include "tsa/harness/config.hpp"
#include "tsa/sa_core.hpp"

namespace tsa::harness {

// H = P D P^T with the fixed rotation used by the tracking examples
Mat sim_hessian(double d1, double d2);

Stream replicate_base(const ScenarioConfig& cfg, int r);

// results land in replicate-id order whatever the thread count
template <class F>
auto parallel_map(int n, int threads, F fn) -> std::vector<decltype(fn(0))> {
    std::vector<decltype(fn(0))> out(n);
    if (threads <= 1 || n <= 1) {
        for (int r = 0; r < n; ++r) out[r] = fn(r);
        return out;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < std::min(threads, n); ++t)
        pool.emplace_back([&] {
            for (int r; (r = next++) < n;) out[r] = fn(r);
        });
    for (auto& th : pool) th.join();
    return out;
}

// evolution1 / evolution2 / lms
struct TrackRun {
    std::vector<double> err;  // |theta-hat_k - theta*_k|, k = 0..K
};

struct TrackSummary {
    double a = 0.0, q = 0.0, u = 0.0, v = 0.0, M = 0.0;
    bool has_bound = false;
    std::vector<double> B;  // per-step drift bound
    std::vector<double> emp_mad, emp_rms, mad_bound, rms_bound;
    std::vector<TrackRun> runs;
};

TrackRun run_track_replicate(const ScenarioConfig& cfg, double a, int r);
TrackSummary run_track(const ScenarioConfig& cfg);

// jump process and its noiseless ODE companion
struct JumpRun {
    long jumps = 0;
    long reentered = 0;  // within 40 steps
    std::vector<long> reentry_steps;  // -1 when the regime ends first
    double max_dev = 0.0;
};

struct JumpSummary {
    std::vector<JumpRun> runs;
    long jumps = 0, reentered = 0;
    long worst_reentry = 0;
    double frac_reentered = 0.0;
    double p_gt4 = 0.0, p_gt7 = 0.0, max_dev = 0.0;
};

inline constexpr double kReentryRadius = 2.0;
inline constexpr long kReentrySteps = 40;

JumpRun run_jump_replicate(const ScenarioConfig& cfg, int r);
JumpSummary run_jump(const ScenarioConfig& cfg);

// change detection on model1 / model2
struct DetectRun {
    std::vector<long> jumps;     // first sample index carrying the new regime
    std::vector<long> announce;  // announcement times (sample index when known)
    long eligible = 0, detected = 0, false_alarms = 0;
    std::vector<long> delays;
};

struct DetectSummary {
    std::vector<DetectRun> runs;
    long eligible = 0, detected = 0, false_alarms = 0;
    double mean_false = 0.0, mean_delay = 0.0;
};

DetectRun run_detect_replicate(const ScenarioConfig& cfg, int r);
DetectSummary run_detect(const ScenarioConfig& cfg);

// adaptive gain against the constant-gain baseline
struct AdaptRun {
    double initial = 0.0, adaptive = 0.0, constant = 0.0, final_gain = 0.0;
    long increases = 0, decreases = 0;
    std::vector<double> adaptive_curve, constant_curve;
};

struct AdaptSummary {
    std::vector<AdaptRun> runs;
    int adaptive_ok = 0, baseline_diverged = 0, both = 0;
};

AdaptRun run_adapt_replicate(const ScenarioConfig& cfg, int r);
AdaptSummary run_adapt(const ScenarioConfig& cfg);

// multi-agent tracking and spreading
struct AgentsRun {
    Eigen::MatrixXd final_dist;  // agents x targets
    std::vector<int> roles;
    bool partitioned = false;
};

struct AgentsSummary {
    std::vector<AgentsRun> runs;
    int partitioned = 0;
};

bool partition_ok(const Eigen::MatrixXd& dist, double near = 30.0, double far = 100.0);
AgentsRun run_agents_replicate(const ScenarioConfig& cfg, int r);
AgentsSummary run_agents(const ScenarioConfig& cfg);

struct SingleAgentSummary {
    std::vector<long> k;
    std::vector<double> distance, loose_bound, theta_error;
};

SingleAgentSummary run_single_agent(const ScenarioConfig& cfg, int r = 0);

// skewed quartic
struct SkewedQuartic {
    int p;
    double loss(const Vec& theta) const;
    Vec gradient(const Vec& theta) const;
};

struct SoquarticRun {
    std::vector<double> norm_loss;  // k = 0..K
    long blocked = 0, retries = 0;
};

struct SoquarticSummary {
    std::vector<SoquarticRun> runs;
    std::vector<double> mean_norm_loss;
    std::vector<double> smoothed;  // 500-step block means
    double terminal = 0.0;
    bool nonincreasing = false;
};

inline constexpr int kSmoothWindow = 500;

SoquarticRun run_soquartic_replicate(const ScenarioConfig& cfg, int r);
SoquarticSummary run_soquartic(const ScenarioConfig& cfg);

// per-iteration cost of the factored path against a dense oracle
struct BenchRow {
    int p = 0;
    double efficient_flops = 0.0, efficient_seconds = 0.0;
    double dense_flops = 0.0, dense_seconds = 0.0;  // zero when skipped
};

struct BenchSummary {
    std::vector<BenchRow> rows;
    double efficient_slope = 0.0, dense_slope = 0.0;
    bool ratio_grows = false;
};

double dense_iteration_flops(int p);
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);
BenchSummary run_bench(const ScenarioConfig& cfg);

}  // namespace tsa::harness
