#include "tsa/error_bounds.hpp"

#include <algorithm>
#include <cmath>

namespace tsa {

double mad_bound_step(double prev, double u, double v, double M, double B) {
    return std::sqrt(u) * prev + M * std::sqrt(v) + B;
}

double rms_bound_step(double prev, double u, double v, double M, double B) {
    return std::sqrt(u * prev * prev) + M * std::sqrt(v) + B;
}

double asymptotic_bound(double u, double v, double M, double B) {
    return (M * std::sqrt(v) + B) / (1.0 - std::sqrt(u));
}

BoundTrace bound_trace(double init, double u, double v, double M, double B, int K) {
    BoundTrace t;
    double mad = init, rms = init;
    t.push(mad, rms, u, v);
    for (int k = 0; k < K; ++k) {
        mad = mad_bound_step(mad, u, v, M, B);
        rms = rms_bound_step(rms, u, v, M, B);
        t.push(mad, rms, u, v);
    }
    return t;
}

Interval conditional_mad_bounds(double grad_norm, double C, double L, double M) {
    return {std::abs(grad_norm - M) / L, (grad_norm + M) / C};
}

Interval drift_bound_two_meas(double g_next_norm, double g_cur_norm, double C_cur, double C_next, double L_cur,
                              double L_next, double M_cur, double M_next) {
    Interval r;
    r.upper = (g_next_norm + M_next) / C_next + (g_cur_norm + M_cur) / C_cur;
    double a = std::abs(g_next_norm - M_next) / L_next - (g_cur_norm + M_cur) / C_cur;
    double b = std::abs(g_cur_norm - M_cur) / L_cur - (g_next_norm + M_next) / C_next;
    r.lower = std::max({a, b, 0.0});
    return r;
}

Interval cond_loss_gap_bounds(const Vec& g_next, const Vec& g_cur, double a, double C_next, double L_next, double M_next) {
    double n1 = g_next.squaredNorm(), n0 = g_cur.squaredNorm(), cross = g_next.dot(g_cur);
    Interval r;
    r.upper = (n1 + M_next * M_next) / (2.0 * C_next) + 0.5 * a * a * L_next * n0 - a * cross;
    r.lower = n1 / (2.0 * L_next) + 0.5 * a * a * C_next * n0 - a * cross;
    return r;
}

static ProbabilityBound make_prob(double raw) { return {raw, std::clamp(raw, 0.0, 1.0)}; }

ProbabilityBound noise_sum_tail(int p, double M, double a, double T, double delta) {
    double expo = -delta * delta / (a * M * (T * M / 2.0 + delta / 3.0));
    return make_prob((p + 1) * std::exp(expo));
}

ProbabilityBound deviation_probability(const DeviationBoundParams& prm) {
    double e = prm.eps * std::exp(prm.C);
    double expo = -(e / 2.0) * (e / 2.0) / (prm.a * prm.M * (prm.T * prm.M / 2.0 + e / 6.0));
    return make_prob((prm.p + 1) * std::exp(expo));
}

double loose_per_path_bound(double prev_err, double u, double v, double M_k, double B_k) {
    return mad_bound_step(prev_err, u, v, M_k, B_k);
}

}  // namespace tsa
