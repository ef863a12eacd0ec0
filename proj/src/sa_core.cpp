#include "tsa/sa_core.hpp"

#include <cmath>

#include "tsa/errors.hpp"

namespace tsa {

ConstraintRegion ConstraintRegion::box(Vec lo, Vec hi) {
    if (lo.size() != hi.size() || (lo.array() > hi.array()).any()) throw DomainViolation("box: lower must not exceed upper");
    ConstraintRegion r;
    r.kind = Kind::Box;
    r.lower = std::move(lo);
    r.upper = std::move(hi);
    return r;
}

ConstraintRegion ConstraintRegion::ball(Vec c, double radius) {
    if (!(radius > 0)) throw DomainViolation("ball: radius must be positive");
    ConstraintRegion r;
    r.kind = Kind::Ball;
    r.center = std::move(c);
    r.radius = radius;
    return r;
}

bool ConstraintRegion::contains(const Vec& x) const {
    switch (kind) {
        case Kind::Unbounded: return true;
        case Kind::Box: return (x.array() >= lower.array()).all() && (x.array() <= upper.array()).all();
        case Kind::Ball: return (x - center).norm() <= radius;
    }
    return true;
}

Vec ConstraintRegion::project(const Vec& x) const {
    switch (kind) {
        case Kind::Unbounded: return x;
        case Kind::Box: return x.cwiseMax(lower).cwiseMin(upper);
        case Kind::Ball: {
            Vec d = x - center;
            double n = d.norm();
            if (n <= radius) return x;
            return center + d * (radius / n);
        }
    }
    return x;
}

Vec rademacher_perturbation(int p, Stream& rng) {
    Vec d(p);
    for (int i = 0; i < p; ++i) d[i] = rng.bit() ? 1.0 : -1.0;
    return d;
}

static double checked(double y) {
    if (!std::isfinite(y)) throw MeasurementFailure("loss oracle returned a non-finite value");
    return y;
}

GradientSample spsa2_estimate(const LossOracle& loss, const Vec& theta, double c, const Vec& delta) {
    double yp = checked(loss(theta + c * delta));
    double ym = checked(loss(theta - c * delta));
    return {((yp - ym) / (2 * c)) * delta.cwiseInverse(), 2};
}

GradientSample spsa2_estimate(const LossOracle& loss, const Vec& theta, const PerturbationSpec& spec, Stream& rng) {
    return spsa2_estimate(loss, theta, spec.c, rademacher_perturbation(spec.p, rng));
}

GradientSample spsa1_estimate(const LossOracle& loss, const Vec& theta, double c, const Vec& delta) {
    double yp = checked(loss(theta + c * delta));
    return {(yp / c) * delta.cwiseInverse(), 1};
}

GradientSample spsa1_estimate(const LossOracle& loss, const Vec& theta, const PerturbationSpec& spec, Stream& rng) {
    return spsa1_estimate(loss, theta, spec.c, rademacher_perturbation(spec.p, rng));
}

GradientSample sg_estimate(const GradientOracle& grad, const Vec& theta) {
    Vec g = grad(theta);
    if (!g.allFinite()) throw MeasurementFailure("gradient oracle returned a non-finite value");
    return {std::move(g), 1};
}

SAState sa_step(const SAState& s, double a, const GradientSample& sample) {
    SAState out;
    out.k = s.k + 1;
    out.theta = s.theta - a * sample.g;
    out.correction = Vec::Zero(s.theta.size());
    return out;
}

SAState projected_sa_step(const SAState& s, double a, const GradientSample& sample, const ConstraintRegion& region) {
    Vec pre = s.theta - a * sample.g;
    SAState out;
    out.k = s.k + 1;
    if (region.contains(pre)) {
        out.theta = std::move(pre);
        out.correction = Vec::Zero(s.theta.size());
    } else {
        out.theta = region.project(pre);
        out.correction = out.theta - pre;
    }
    return out;
}

}  // namespace tsa
