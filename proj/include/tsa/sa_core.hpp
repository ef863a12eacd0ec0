#pragma once

#include <Eigen/Dense>
#include <functional>

#include "tsa/rng.hpp"

namespace tsa {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

using LossOracle = std::function<double(const Vec&)>;
using GradientOracle = std::function<Vec(const Vec&)>;

struct PerturbationSpec {
    int p = 1;
    double c = 1.0;  // differencing magnitude c_k
};

struct GradientSample {
    Vec g;
    int count = 0;
};

struct ConstraintRegion {
    enum class Kind { Unbounded, Box, Ball };

    Kind kind = Kind::Unbounded;
    Vec lower, upper;  // box
    Vec center;        // ball
    double radius = 0.0;

    static ConstraintRegion unbounded() { return {}; }
    static ConstraintRegion box(Vec lo, Vec hi);
    static ConstraintRegion ball(Vec c, double r);

    bool contains(const Vec& x) const;
    Vec project(const Vec& x) const;
};

struct SAState {
    long k = 0;
    Vec theta;
    Vec correction;  // a_k * eta_k of the last projected step
};

Vec rademacher_perturbation(int p, Stream& rng);

GradientSample spsa2_estimate(const LossOracle& loss, const Vec& theta, double c, const Vec& delta);
GradientSample spsa2_estimate(const LossOracle& loss, const Vec& theta, const PerturbationSpec& spec, Stream& rng);

GradientSample spsa1_estimate(const LossOracle& loss, const Vec& theta, double c, const Vec& delta);
GradientSample spsa1_estimate(const LossOracle& loss, const Vec& theta, const PerturbationSpec& spec, Stream& rng);

GradientSample sg_estimate(const GradientOracle& grad, const Vec& theta);

SAState sa_step(const SAState& s, double a, const GradientSample& sample);
SAState projected_sa_step(const SAState& s, double a, const GradientSample& sample, const ConstraintRegion& region);

}  // namespace tsa
