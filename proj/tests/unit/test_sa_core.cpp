#include <doctest.h>

#include <cmath>

#include "tsa/errors.hpp"
#include "tsa/sa_core.hpp"

using namespace tsa;

namespace {

Vec v2(double a, double b) {
    Vec x(2);
    x << a, b;
    return x;
}

double half_sq(const Vec& t) { return 0.5 * t.squaredNorm(); }

}  // namespace

TEST_CASE("two-measurement SP gradient on a quadratic") {
    GradientSample g = spsa2_estimate(half_sq, v2(1, 0), 0.1, v2(1, 1));
    CHECK(g.count == 2);
    CHECK(g.g[0] == doctest::Approx(1.0));
    CHECK(g.g[1] == doctest::Approx(1.0));

    GradientSample z = spsa2_estimate([](const Vec&) { return 3.0; }, v2(1, 2), 0.1, v2(1, -1));
    CHECK(z.g.norm() == 0.0);
}

TEST_CASE("two-measurement estimate averages to the exact gradient over all sign patterns") {
    for (int p = 1; p <= 4; ++p) {
        Mat A = Mat::Random(p, p);
        Mat H = A * A.transpose() + Mat::Identity(p, p);
        Vec b = Vec::Random(p), theta = Vec::Random(p);
        LossOracle loss = [&](const Vec& t) { return 0.5 * t.dot(H * t) + b.dot(t); };
        Vec mean = Vec::Zero(p);
        for (int mask = 0; mask < (1 << p); ++mask) {
            Vec d(p);
            for (int i = 0; i < p; ++i) d[i] = (mask >> i) & 1 ? 1.0 : -1.0;
            mean += spsa2_estimate(loss, theta, 0.3, d).g;
        }
        mean /= (1 << p);
        CHECK((mean - (H * theta + b)).norm() < 1e-10);
    }
}

TEST_CASE("one-measurement SP gradient") {
    GradientSample z = spsa1_estimate([](const Vec&) { return 0.0; }, v2(1, 0), 0.1, v2(1, -1));
    CHECK(z.count == 1);
    CHECK(z.g.norm() == 0.0);

    GradientSample g = spsa1_estimate(half_sq, v2(1, 0), 0.1, v2(1, -1));
    CHECK(g.g[0] == doctest::Approx(6.1));
    CHECK(g.g[1] == doctest::Approx(-6.1));

    // p = 1, theta = 1: mean over both signs is 1 + O(c^2)
    Vec th = Vec::Constant(1, 1.0);
    double m = 0.5 * (spsa1_estimate(half_sq, th, 0.1, Vec::Constant(1, 1.0)).g[0] +
                      spsa1_estimate(half_sq, th, 0.1, Vec::Constant(1, -1.0)).g[0]);
    CHECK(std::abs(m - 1.0) < 1e-12);
}

TEST_CASE("non-finite measurements are errors") {
    LossOracle bad = [](const Vec&) { return std::nan(""); };
    CHECK_THROWS_AS(spsa2_estimate(bad, v2(0, 0), 0.1, v2(1, 1)), MeasurementFailure);
    CHECK_THROWS_AS(spsa1_estimate(bad, v2(0, 0), 0.1, v2(1, 1)), MeasurementFailure);
    GradientOracle badg = [](const Vec&) { return v2(INFINITY, 0); };
    CHECK_THROWS_AS(sg_estimate(badg, v2(0, 0)), MeasurementFailure);
}

TEST_CASE("stochastic gradient pass-through and sample mean") {
    GradientOracle exact = [](const Vec& t) -> Vec { return 2.0 * t; };
    CHECK(sg_estimate(exact, v2(1, -2)).g == v2(2, -4));

    Stream rng(7);
    const double sigma = 10.0;
    GradientOracle noisy = [&](const Vec& t) -> Vec { return t + v2(sigma * rng.normal(), sigma * rng.normal()); };
    Vec mean = Vec::Zero(2);
    const int n = 10000;
    for (int i = 0; i < n; ++i) mean += sg_estimate(noisy, v2(1, 1)).g;
    mean /= n;
    CHECK((mean - v2(1, 1)).cwiseAbs().maxCoeff() < 3 * sigma / 100);
}

TEST_CASE("basic SA step") {
    SAState s{0, v2(0, 0), Vec()};
    SAState t = sa_step(s, 0.5, {v2(2, -2), 1});
    CHECK(t.theta == v2(-1, 1));
    CHECK(t.k == 1);
    SAState u = sa_step(s, 0.0, {v2(2, -2), 1});
    CHECK(u.theta == s.theta);
    CHECK(u.k == 1);

    SAState q{0, Vec::Constant(1, 1.0), Vec()};
    for (int i = 0; i < 10; ++i) q = sa_step(q, 0.5, {q.theta, 1});
    CHECK(q.theta[0] == std::ldexp(1.0, -10));
}

TEST_CASE("projected SA step") {
    auto ball = ConstraintRegion::ball(v2(0, 0), 1.0);
    SAState s{0, v2(0, 0), Vec()};
    SAState t = projected_sa_step(s, 1.0, {v2(-2, 0), 1}, ball);
    CHECK(t.theta.isApprox(v2(1, 0)));
    CHECK(t.correction.isApprox(v2(-1, 0)));

    SAState in = projected_sa_step(s, 1.0, {v2(-0.2, 0.1), 1}, ball);
    CHECK(in.correction.norm() == 0.0);

    auto box = ConstraintRegion::box(v2(-1, -1), v2(1, 1));
    SAState b = projected_sa_step(s, 1.0, {v2(-1.5, 3), 1}, box);
    CHECK(b.theta == v2(1, -1));
}

TEST_CASE("projection is non-expansive") {
    Stream rng(11);
    auto ball = ConstraintRegion::ball(v2(0.5, -0.5), 2.0);
    auto box = ConstraintRegion::box(v2(-1, -2), v2(1, 0.5));
    for (int i = 0; i < 2000; ++i) {
        Vec x = v2(rng.uniform(-6, 6), rng.uniform(-6, 6)), y = v2(rng.uniform(-6, 6), rng.uniform(-6, 6));
        CHECK((ball.project(x) - ball.project(y)).norm() <= (x - y).norm() + 1e-12);
        CHECK((box.project(x) - box.project(y)).norm() <= (x - y).norm() + 1e-12);
    }
}

TEST_CASE("identical seeds give identical perturbations") {
    Stream a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(rademacher_perturbation(5, a) == rademacher_perturbation(5, b));
    Vec d = rademacher_perturbation(1000, a);
    CHECK((d.array().abs() == 1.0).all());
}
