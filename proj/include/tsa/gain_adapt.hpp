#pragma once

#include <optional>

#include "tsa/sa_core.hpp"

namespace tsa {

struct HessianEstimate {
    Mat H;
    long k = 0;
};

struct NoiseCovEstimate {
    Mat V;
    long k = 0;
};

struct AdaptConfig {
    double eta_plus = 1.1;
    double eta_minus = 0.9;
    double a0 = 0.1;
    double c = 1.0;             // constant differencing magnitude
    double hessian_scale = 1.0; // initial H-hat = scale * I
    int min_samples = 3;        // post-anchor products required before a gain change
    bool recenter = true;       // measure theta relative to the post-anchor mean
};

struct PhaseStats {
    long anchor = 0;
    double sum = 0.0;
    long count = 0;
    double mean() const { return count ? sum / count : 0.0; }
};

struct PhaseThresholds {
    double steady = 0.0;
    double transient = 0.0;
};

struct GainEvent {
    long step = 0;
    double old_a = 0.0, new_a = 0.0;
    int direction = 0;  // +1 increase, -1 decrease
    double mean = 0.0;
};

HessianEstimate hessian_update(const HessianEstimate& prev, double c, const Vec& delta, const Vec& g_plus,
                               const Vec& g_minus);
NoiseCovEstimate noisecov_update(const NoiseCovEstimate& prev, const Vec& g_plus, const Vec& g_minus);

// tr(A B) for symmetric B without forming the product
double trace_product(const Mat& A, const Mat& B);

PhaseThresholds phase_thresholds(double a, const Mat& H, const Mat& V, const Vec& theta);

struct AdaptState {
    long k = 0;
    Vec theta;
    double a = 0.0;
    HessianEstimate H;
    NoiseCovEstimate V;
    PhaseStats phase;
    Vec prev_g;          // averaged gradient from the previous step
    bool have_prev = false;
    Vec anchor_sum;      // running sum of theta since the anchor
    long anchor_n = 0;
};

AdaptState make_adapt_state(const Vec& theta0, const AdaptConfig& cfg);

// one iteration of the adaptive scheme given the two gradient observations
// taken at theta +- c*delta
std::optional<GainEvent> adapt_step(AdaptState& s, const AdaptConfig& cfg, const Vec& delta, const Vec& g_plus,
                                    const Vec& g_minus);

}  // namespace tsa
