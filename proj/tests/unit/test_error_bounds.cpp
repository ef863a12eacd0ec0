#include <doctest.h>

#include <cmath>

#include "tsa/error_bounds.hpp"
#include "tsa/rng.hpp"

using namespace tsa;

TEST_CASE("MAD bound recursion") {
    CHECK(mad_bound_step(2.0, 0.25, 0.01, 1.0, 0.5) == doctest::Approx(1.6));
    CHECK(mad_bound_step(2.0, 0.25, 0.01, 0.0, 0.0) == doctest::Approx(1.0));
    CHECK(mad_bound_step(1.2, 0.25, 0.01, 1.0, 0.5) == doctest::Approx(1.2));
}

TEST_CASE("RMS bound recursion and its limit") {
    CHECK(rms_bound_step(2.0, 0.25, 0.01, 1.0, 0.5) == doctest::Approx(1.6));
    CHECK(rms_bound_step(123.0, 0.0, 0.01, 1.0, 0.5) == doctest::Approx(0.6));
    double b = 5.0;
    for (int k = 0; k < 1000; ++k) b = rms_bound_step(b, 0.25, 0.01, 1.0, 0.5);
    CHECK(b == doctest::Approx(asymptotic_bound(0.25, 0.01, 1.0, 0.5)));
}

TEST_CASE("asymptotic bound") {
    CHECK(asymptotic_bound(0.25, 0.01, 1.0, 0.5) == doctest::Approx(1.2));
    CHECK(asymptotic_bound(0.5, 0.3, 0.0, 0.0) == 0.0);
    BoundTrace t = bound_trace(0.0, 0.81, 0.02, 3.0, 0.7, 10000);
    CHECK(t.size() == 10001);
    CHECK(std::abs(t.rms_bound.back() - asymptotic_bound(0.81, 0.02, 3.0, 0.7)) < 1e-9);
    CHECK(std::abs(t.mad_bound.back() - asymptotic_bound(0.81, 0.02, 3.0, 0.7)) < 1e-9);
}

TEST_CASE("bounds are monotone in M, B and the previous value") {
    Stream rng(3);
    for (int i = 0; i < 500; ++i) {
        double prev = rng.uniform(0, 10), u = rng.uniform(0, 0.99), v = rng.uniform(0, 1);
        double M = rng.uniform(0, 5), B = rng.uniform(0, 5), d = rng.uniform(0, 1);
        for (auto f : {mad_bound_step, rms_bound_step}) {
            CHECK(f(prev + d, u, v, M, B) >= f(prev, u, v, M, B));
            CHECK(f(prev, u, v, M + d, B) >= f(prev, u, v, M, B));
            CHECK(f(prev, u, v, M, B + d) >= f(prev, u, v, M, B));
        }
    }
}

TEST_CASE("conditional MAD bounds") {
    Interval z = conditional_mad_bounds(3.0, 5.0, 30.0, 3.0);
    CHECK(z.lower == 0.0);
    Interval e = conditional_mad_bounds(10.0, 5.0, 30.0, 2.0);
    CHECK(e.lower == doctest::Approx(4.0 / 15.0));
    CHECK(e.upper == doctest::Approx(12.0 / 5.0));
    Interval q = conditional_mad_bounds(7.0, 2.0, 2.0, 0.0);
    CHECK(q.lower == doctest::Approx(3.5));
    CHECK(q.upper == doctest::Approx(3.5));
}

TEST_CASE("two-measurement drift bounds") {
    Interval z = drift_bound_two_meas(0, 0, 1, 1, 2, 2, 0, 0);
    CHECK(z.lower == 0.0);
    CHECK(z.upper == 0.0);
    const double M = std::sqrt(2.0) * 10.0;
    Interval e = drift_bound_two_meas(10, 10, 5, 5, 30, 30, M, M);
    CHECK(e.upper == doctest::Approx(9.6569).epsilon(1e-4));
    Stream rng(5);
    for (int i = 0; i < 1000; ++i) {
        double C0 = rng.uniform(0.1, 5), C1 = rng.uniform(0.1, 5);
        Interval r = drift_bound_two_meas(rng.uniform(0, 20), rng.uniform(0, 20), C0, C1, C0 * rng.uniform(1, 10),
                                          C1 * rng.uniform(1, 10), rng.uniform(0, 5), rng.uniform(0, 5));
        CHECK(r.lower <= r.upper);
    }
}

TEST_CASE("conditional loss-gap bounds") {
    Vec zero = Vec::Zero(2);
    Interval z = cond_loss_gap_bounds(zero, zero, 0.1, 1, 2, 0);
    CHECK(z.lower == 0.0);
    CHECK(z.upper == 0.0);

    Vec g(2);
    g << 3.0, -4.0;
    const double C = 5, L = 30;
    Interval s = cond_loss_gap_bounds(g, g, 1.0 / L, C, L, 1.0);
    CHECK(s.lower == doctest::Approx(25.0 * (1 / (2 * L) + C / (2 * L * L) - 1 / L)));

    Stream rng(9);
    for (int i = 0; i < 1000; ++i) {
        Vec a(2), b(2);
        a << rng.normal(), rng.normal();
        b << rng.normal(), rng.normal();
        double Cn = rng.uniform(0.1, 3);
        Interval r = cond_loss_gap_bounds(a, b, rng.uniform(0, 1), Cn, Cn * rng.uniform(1, 5), rng.uniform(0, 3));
        CHECK(r.lower <= r.upper + 1e-12);
    }
}

TEST_CASE("noise tail bound") {
    CHECK(noise_sum_tail(2, 1.0, 0.1, 10.0, 1e6).raw == doctest::Approx(0.0));
    CHECK(noise_sum_tail(2, 1.0, 1e-9, 10.0, 1.0).raw == doctest::Approx(0.0));
    // 2 e^{-1200}: below the smallest normal double
    ProbabilityBound t = noise_sum_tail(1, 1.0, 0.001, 1.0, 1.0);
    CHECK(t.raw <= 1e-300);
    CHECK(std::log(noise_sum_tail(1, 1.0, 0.1, 1.0, 1.0).raw) ==
          doctest::Approx(std::log(2.0) - 1.0 / (0.1 * (0.5 + 1.0 / 3.0))));

    double prev = 2.0;
    for (double d = 0.5; d < 20; d += 0.5) {
        double x = noise_sum_tail(2, 1.0, 0.1, 10.0, d).raw;
        CHECK(x < prev);
        prev = x;
    }
}

TEST_CASE("deviation probability bound") {
    DeviationBoundParams big{1, 1.0, 1.0, 0.001, 1.0, 1e6};
    CHECK(deviation_probability(big).raw == doctest::Approx(0.0));

    DeviationBoundParams ex{1, 1.0, 1.0, 0.001, 1.0, 1.0};
    const double e = std::exp(1.0);
    double expo = -(e / 2) * (e / 2) / (0.001 * (0.5 + e / 6));
    CHECK(expo == doctest::Approx(-1938).epsilon(1e-3));
    CHECK(deviation_probability(ex).raw <= 1e-300);

    DeviationBoundParams jp{2, 3.0 * std::sqrt(2.0), 1.0, 0.1, 5000.0, 4.0};
    ProbabilityBound j = deviation_probability(jp);
    CHECK(j.raw > 1.0);
    CHECK(j.clipped == 1.0);

    double prev_a = 0.0, prev_T = 0.0;
    for (double a = 0.01; a < 0.5; a += 0.01) {
        DeviationBoundParams q{2, 1.0, 1.0, a, 10.0, 2.0};
        CHECK(deviation_probability(q).raw > prev_a);
        prev_a = deviation_probability(q).raw;
    }
    for (double T = 1; T < 50; T += 1) {
        DeviationBoundParams q{2, 1.0, 1.0, 0.05, T, 2.0};
        CHECK(deviation_probability(q).raw > prev_T);
        prev_T = deviation_probability(q).raw;
    }
}

TEST_CASE("loose per-path bound shares the MAD kernel") {
    CHECK(loose_per_path_bound(2.0, 0.25, 0.01, 1.0, 0.5) == mad_bound_step(2.0, 0.25, 0.01, 1.0, 0.5));
    CHECK(std::sqrt(25.0 / 3 + 25.0 / 3) == doctest::Approx(4.0825).epsilon(1e-4));
}
