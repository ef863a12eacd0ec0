#pragma once

#include <deque>
#include <optional>
#include <vector>

#include "tsa/sa_core.hpp"

namespace tsa {

enum class DofMethod { Yao, KN };

struct PooledStats {
    Vec mean_pre, mean_post;
    Mat W_pre, W_post, W;
    int n_pre = 0, n_post = 0;
};

struct TestResult {
    double T2 = 0.0;
    double nu = 0.0;
    double p_value = 1.0;
    long split = 0;
};

struct ChangeEvent {
    long announce = 0;  // index k-1 of the elbow
    long split = 0;     // last index of the pre-change half at the elbow
    double T2 = 0.0, nu = 0.0, p_value = 1.0;
};

// samples are the rows of `pre` and `post`
PooledStats pooled_stats(const Mat& pre, const Mat& post);
PooledStats pooled_stats(const std::vector<Vec>& pre, const std::vector<Vec>& post);

double t2_statistic(const PooledStats& s);
double dof_estimate(const PooledStats& s, DofMethod method);
double p_value(double T2, double nu, int p);

TestResult split_test(const Mat& pre, const Mat& post, DofMethod method);

long min_window(int p, double jump_prob);

class ChangeDetector {
public:
    ChangeDetector(int p, int w, double alpha = 0.01, DofMethod method = DofMethod::KN);

    // feed the next estimate; returns an announcement when the previous
    // p-value is an elbow below alpha
    std::optional<ChangeEvent> push(const Vec& theta);

    long samples() const { return n_; }
    int window() const { return w_; }
    const std::vector<double>& p_values() const { return h_hist_; }
    bool keep_history = false;

private:
    int p_, w_;
    double alpha_;
    DofMethod method_;
    std::deque<Vec> buf_;
    long n_ = 0;
    // h_{k-2}, h_{k-1}, h_k with NaN for "no decision"
    double h2_ = 0.0, h1_ = 0.0, h0_ = 0.0;
    TestResult last1_, last0_;
    long have_ = 0;
    std::vector<double> h_hist_;
};

long single_change_estimate(const std::vector<Vec>& samples);

}  // namespace tsa
