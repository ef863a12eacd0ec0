#include "tsa/change_detect.hpp"

#include <boost/math/distributions/fisher_f.hpp>
#include <cmath>
#include <limits>

#include "tsa/errors.hpp"

namespace tsa {

namespace {

Mat scaled_scatter(const Mat& X, const Vec& mean) {
    const double n = static_cast<double>(X.rows());
    Mat c = X.rowwise() - mean.transpose();
    return (c.transpose() * c) / (n * (n - 1.0));
}

Eigen::LDLT<Mat> factor_pooled(const Mat& W) {
    const int p = static_cast<int>(W.rows());
    double tr = W.trace();
    Eigen::LDLT<Mat> f(W);
    double tol = 1e-12 * tr / p;
    if (!(tr > 0.0) || f.info() != Eigen::Success || f.vectorD().minCoeff() <= tol)
        throw SingularCovariance("pooled covariance is singular");
    return f;
}

Mat rows_of(const std::vector<Vec>& v) {
    if (v.empty()) return Mat();
    Mat m(v.size(), v.front().size());
    for (std::size_t i = 0; i < v.size(); ++i) m.row(i) = v[i].transpose();
    return m;
}

}  // namespace

PooledStats pooled_stats(const Mat& pre, const Mat& post) {
    if (pre.rows() < 2 || post.rows() < 2) throw DomainViolation("pooled_stats: each half needs at least two samples");
    PooledStats s;
    s.n_pre = static_cast<int>(pre.rows());
    s.n_post = static_cast<int>(post.rows());
    s.mean_pre = pre.colwise().mean().transpose();
    s.mean_post = post.colwise().mean().transpose();
    s.W_pre = scaled_scatter(pre, s.mean_pre);
    s.W_post = scaled_scatter(post, s.mean_post);
    s.W = s.W_pre + s.W_post;
    return s;
}

PooledStats pooled_stats(const std::vector<Vec>& pre, const std::vector<Vec>& post) {
    return pooled_stats(rows_of(pre), rows_of(post));
}

double t2_statistic(const PooledStats& s) {
    Vec d = s.mean_pre - s.mean_post;
    auto f = factor_pooled(s.W);
    return d.dot(f.solve(d));
}

double dof_estimate(const PooledStats& s, DofMethod method) {
    const int p = static_cast<int>(s.W.rows());
    auto f = factor_pooled(s.W);
    if (method == DofMethod::Yao) {
        Vec d = s.mean_pre - s.mean_post;
        Vec y = f.solve(d);
        double q = d.dot(y);
        if (!(q > 0.0)) return s.n_pre + s.n_post - 2.0;
        double r1 = y.dot(s.W_pre * y) / q;
        double r2 = y.dot(s.W_post * y) / q;
        return 1.0 / (r1 * r1 / s.n_pre + r2 * r2 / s.n_post);
    }
    // W^{-1} W_i is similar to W_i W^{-1}, so traces agree
    Mat X1 = f.solve(s.W_pre);
    Mat X2 = f.solve(s.W_post);
    double t1 = X1.trace(), t2 = X2.trace();
    double star = ((X1 * X1).trace() + t1 * t1) / (s.n_pre - 1.0) + ((X2 * X2).trace() + t2 * t2) / (s.n_post - 1.0);
    return (p + static_cast<double>(p) * p) / star;
}

double p_value(double T2, double nu, int p) {
    double d2 = nu - p + 1.0;
    if (!(d2 > 0.0)) throw DofTooSmall("degrees of freedom too small for an F reference");
    if (T2 <= 0.0) return 1.0;
    double x = d2 * T2 / (nu * p);
    boost::math::fisher_f_distribution<double> F(p, d2);
    return boost::math::cdf(boost::math::complement(F, x));
}

TestResult split_test(const Mat& pre, const Mat& post, DofMethod method) {
    PooledStats s = pooled_stats(pre, post);
    TestResult r;
    r.T2 = t2_statistic(s);
    r.nu = dof_estimate(s, method);
    r.p_value = p_value(r.T2, r.nu, static_cast<int>(pre.cols()));
    r.split = pre.rows();
    return r;
}

long min_window(int p, double jump_prob) {
    long w = p + 1;
    if (jump_prob > 0.0) w = std::max<long>(w, static_cast<long>(std::ceil(1.0 / jump_prob / 10.0 - 1e-9)));
    return w;
}

ChangeDetector::ChangeDetector(int p, int w, double alpha, DofMethod method)
    : p_(p), w_(w), alpha_(alpha), method_(method) {
    if (w < p + 1) throw DomainViolation("window must be at least p + 1");
}

std::optional<ChangeEvent> ChangeDetector::push(const Vec& theta) {
    buf_.push_back(theta);
    if (static_cast<int>(buf_.size()) > 2 * w_) buf_.pop_front();
    long k = n_++;
    if (static_cast<int>(buf_.size()) < 2 * w_) return std::nullopt;

    Mat pre(w_, p_), post(w_, p_);
    for (int i = 0; i < w_; ++i) {
        pre.row(i) = buf_[i].transpose();
        post.row(i) = buf_[w_ + i].transpose();
    }
    double h = std::numeric_limits<double>::quiet_NaN();
    TestResult r;
    try {
        r = split_test(pre, post, method_);
        r.split = k - w_;
        h = r.p_value;
    } catch (const SingularCovariance&) {
    } catch (const DofTooSmall&) {
    }
    h2_ = h1_;
    h1_ = h0_;
    h0_ = h;
    last1_ = last0_;
    last0_ = r;
    ++have_;
    if (keep_history) h_hist_.push_back(h);

    // NaN compares false, so undecided neighbours never yield an elbow
    if (have_ >= 3 && h1_ < alpha_ && h1_ < h2_ && h1_ < h0_) {
        ChangeEvent e;
        e.announce = k - 1;
        e.split = k - 1 - w_;
        e.T2 = last1_.T2;
        e.nu = last1_.nu;
        e.p_value = last1_.p_value;
        return e;
    }
    return std::nullopt;
}

long single_change_estimate(const std::vector<Vec>& samples) {
    const long K = static_cast<long>(samples.size());
    Mat all = rows_of(samples);
    long best = 2;
    double best_t2 = -1.0;
    for (long k = 2; k <= K - 2; ++k) {
        try {
            PooledStats s = pooled_stats(all.topRows(k), all.bottomRows(K - k));
            double t2 = t2_statistic(s);
            if (t2 > best_t2) {
                best_t2 = t2;
                best = k;
            }
        } catch (const SingularCovariance&) {
        }
    }
    return best;
}

}  // namespace tsa
