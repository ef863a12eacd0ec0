#pragma once

#include <utility>
#include <vector>

#include "tsa/sa_core.hpp"

namespace tsa {

struct NoiseDriftParams {
    double M = 0.0;
    double B = 0.0;
};

struct BoundTrace {
    std::vector<double> mad_bound, rms_bound, realized_error, u, v;
    void push(double mad, double rms, double u_k, double v_k, double err = 0.0) {
        mad_bound.push_back(mad);
        rms_bound.push_back(rms);
        u.push_back(u_k);
        v.push_back(v_k);
        realized_error.push_back(err);
    }
    std::size_t size() const { return mad_bound.size(); }
};

struct DeviationBoundParams {
    int p = 1;
    double M = 1.0;
    double C = 1.0;
    double a = 0.1;
    double T = 1.0;
    double eps = 1.0;
};

struct ProbabilityBound {
    double raw = 0.0;
    double clipped = 0.0;
};

struct Interval {
    double lower = 0.0;
    double upper = 0.0;
};

double mad_bound_step(double prev, double u, double v, double M, double B);
double rms_bound_step(double prev, double u, double v, double M, double B);
double asymptotic_bound(double u, double v, double M, double B);

// constant-parameter recursion of both bounds over K steps starting at `init`
BoundTrace bound_trace(double init, double u, double v, double M, double B, int K);

Interval conditional_mad_bounds(double grad_norm, double C, double L, double M);

Interval drift_bound_two_meas(double g_next_norm, double g_cur_norm, double C_cur, double C_next, double L_cur,
                              double L_next, double M_cur, double M_next);

Interval cond_loss_gap_bounds(const Vec& g_next, const Vec& g_cur, double a, double C_next, double L_next, double M_next);

ProbabilityBound noise_sum_tail(int p, double M, double a, double T, double delta);
ProbabilityBound deviation_probability(const DeviationBoundParams& prm);

double loose_per_path_bound(double prev_err, double u, double v, double M_k, double B_k);

}  // namespace tsa
