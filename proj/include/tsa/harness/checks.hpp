#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tsa/harness/scenarios.hpp"

namespace tsa::harness {

struct Check {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
    double limit = 0.0;  // runtime budget in seconds, 0 for none
};

std::string format_check(const Check& c);

// pure checks on finished runs; `seconds` is the time the run took
Check check_bound_dominance(const TrackSummary& s, long burn_in, double seconds);
Check check_jump(const JumpSummary& s, double seconds);
Check check_detection(const DetectSummary& s, double seconds);
Check check_complexity(const BenchSummary& s, double seconds);
Check check_soquartic(const SoquarticSummary& s, double seconds);
Check check_partition(const AgentsSummary& s, double seconds);
Check check_adaptive(const AdaptSummary& s, double seconds);

// self-contained experiments
Check check_gain_region(std::uint64_t seed, int samples = 10000);
Check check_pvalue_calibration(std::uint64_t seed, int trials = 2000);
Check check_factorization(std::uint64_t seed, int matrices = 200, int updates = 200);
Check check_dense_equivalence(std::uint64_t seed, int p = 10, int iterations = 200);

// runs criterion `id` at its default scenario
Check run_criterion(int id, std::uint64_t seed, int threads = 1);

inline constexpr int kCriteria = 11;

}  // namespace tsa::harness
