#include <doctest.h>

#include <cmath>

#include "tsa/errors.hpp"
#include "tsa/gain_adapt.hpp"
#include "tsa/rng.hpp"

using namespace tsa;

namespace {

Vec vec2(double a, double b) {
    Vec v(2);
    v << a, b;
    return v;
}

Vec rademacher(Stream& rng, int p) {
    Vec d(p);
    for (int i = 0; i < p; ++i) d(i) = rng.bit() ? 1.0 : -1.0;
    return d;
}

struct Quadratic {
    Mat H;
    double sigma = 0.0;
    // the two observations share one noise draw
    std::pair<Vec, Vec> observe(const Vec& theta, double c, const Vec& delta, Stream& rng) const {
        Vec e(theta.size());
        for (Eigen::Index i = 0; i < e.size(); ++i) e(i) = sigma * rng.normal();
        return {H * (theta + c * delta) + e, H * (theta - c * delta) + e};
    }
};

}  // namespace

TEST_CASE("first Hessian update") {
    HessianEstimate h0{Mat::Identity(2, 2), 0};
    HessianEstimate h1 = hessian_update(h0, 1.0, vec2(1, -1), vec2(1, -1), vec2(-1, 1));
    CHECK(h1.k == 1);
    CHECK(h1.H(0, 0) == doctest::Approx(1.0));
    CHECK(h1.H(1, 1) == doctest::Approx(1.0));
    CHECK(h1.H(0, 1) == doctest::Approx(-0.5));
    CHECK(h1.H(1, 0) == doctest::Approx(-0.5));
    CHECK_THROWS_AS(hessian_update(h0, 0.0, vec2(1, 1), vec2(0, 0), vec2(0, 0)), DomainViolation);
}

TEST_CASE("averaging over all sign patterns recovers the Hessian") {
    const Mat H = Mat::Identity(2, 2);
    HessianEstimate h{Mat::Zero(2, 2), 0};
    Mat avg = Mat::Zero(2, 2);
    const double c = 0.5;
    for (double s0 : {1.0, -1.0})
        for (double s1 : {1.0, -1.0}) {
            Vec d = vec2(s0, s1);
            HessianEstimate one = hessian_update(HessianEstimate{Mat::Zero(2, 2), 0}, c, d, H * (c * d), H * (-c * d));
            avg += one.H * 2.0 / 4.0;  // undo the k/(k+1) weighting of a single step
        }
    CHECK((avg - H).norm() < 1e-14);
}

TEST_CASE("Hessian estimate converges") {
    Mat H(2, 2);
    H << 2.0, 0.5, 0.5, 1.0;
    Quadratic f{H, 0.1};
    Stream rng(4);
    HessianEstimate h{Mat::Identity(2, 2), 0};
    Vec theta = vec2(0.3, -0.2);
    for (int k = 0; k < 10000; ++k) {
        Vec d = rademacher(rng, 2);
        auto [gp, gm] = f.observe(theta, 0.1, d, rng);
        h = hessian_update(h, 0.1, d, gp, gm);
    }
    CHECK((h.H - H).norm() < 0.05 * H.norm());
}

TEST_CASE("Hessian estimate is exactly symmetric") {
    Stream rng(5);
    HessianEstimate h{Mat::Identity(3, 3), 0};
    for (int k = 0; k < 200; ++k) {
        Vec d = rademacher(rng, 3), gp(3), gm(3);
        for (int i = 0; i < 3; ++i) gp(i) = rng.normal(), gm(i) = rng.normal();
        h = hessian_update(h, 0.37, d, gp, gm);
        CHECK(h.H == h.H.transpose());
    }
}

TEST_CASE("noise covariance estimate stays positive semidefinite") {
    Stream rng(6);
    NoiseCovEstimate v{Mat::Zero(3, 3), 0};
    for (int k = 0; k < 300; ++k) {
        Vec gp(3), gm(3);
        for (int i = 0; i < 3; ++i) gp(i) = rng.normal(), gm(i) = rng.normal();
        v = noisecov_update(v, gp, gm);
    }
    Eigen::SelfAdjointEigenSolver<Mat> es(v.V);
    CHECK(es.eigenvalues().minCoeff() >= -1e-12);
    CHECK(v.k == 300);
}

TEST_CASE("phase thresholds") {
    const double a = 0.1, s2 = 0.25;
    Mat H = Mat::Identity(2, 2), V = s2 * Mat::Identity(2, 2);
    PhaseThresholds t0 = phase_thresholds(a, H, V, Vec::Zero(2));
    CHECK(t0.steady == doctest::Approx(-2 * a * s2));
    CHECK(t0.transient == doctest::Approx(t0.steady));
    PhaseThresholds t1 = phase_thresholds(a, H, V, vec2(3, 4));
    CHECK(t1.transient == doctest::Approx(25.0 - a * (25.0 + 2 * s2)));
    Mat A(2, 2), B(2, 2);
    A << 1, 2, 3, 4;
    B << 2, -1, -1, 5;
    CHECK(trace_product(A, B) == doctest::Approx((A * B).trace()));
}

TEST_CASE("gain grows far from a noiseless optimum") {
    Quadratic f{Mat::Identity(2, 2), 0.0};
    AdaptConfig cfg;
    cfg.a0 = 0.01;
    cfg.c = 0.01;
    Stream rng(7);
    AdaptState s = make_adapt_state(vec2(100, -80), cfg);
    int up = 0, down = 0;
    for (int k = 0; k < 200; ++k) {
        Vec d = rademacher(rng, 2);
        auto [gp, gm] = f.observe(s.theta, cfg.c, d, rng);
        if (auto e = adapt_step(s, cfg, d, gp, gm)) (e->direction > 0 ? up : down)++;
    }
    CHECK(up > 0);
    CHECK(s.a > cfg.a0);
}

TEST_CASE("gain shrinks at the optimum under noise") {
    Quadratic f{Mat::Identity(2, 2), 1.0};
    AdaptConfig cfg;
    cfg.a0 = 0.5;
    cfg.c = 0.01;
    Stream rng(8);
    AdaptState s = make_adapt_state(Vec::Zero(2), cfg);
    for (int k = 0; k < 2000; ++k) {
        Vec d = rademacher(rng, 2);
        auto [gp, gm] = f.observe(s.theta, cfg.c, d, rng);
        adapt_step(s, cfg, d, gp, gm);
    }
    CHECK(s.a < cfg.a0);
}

TEST_CASE("unit multipliers give constant-gain descent") {
    Mat H(2, 2);
    H << 1.5, 0.2, 0.2, 0.7;
    Quadratic f{H, 0.3};
    AdaptConfig cfg;
    cfg.eta_plus = cfg.eta_minus = 1.0;
    cfg.a0 = 0.2;
    Stream rng(9), rng2(9);
    AdaptState s = make_adapt_state(vec2(1, 2), cfg);
    Vec theta = vec2(1, 2);
    for (int k = 0; k < 500; ++k) {
        Vec d = rademacher(rng, 2);
        auto [gp, gm] = f.observe(s.theta, cfg.c, d, rng);
        Vec d2 = rademacher(rng2, 2);
        auto [hp, hm] = f.observe(theta, cfg.c, d2, rng2);
        adapt_step(s, cfg, d, gp, gm);
        theta -= 0.2 * (0.5 * (hp + hm));
    }
    CHECK(s.a == 0.2);
    CHECK(s.theta == theta);
}
