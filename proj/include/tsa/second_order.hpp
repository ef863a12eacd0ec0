#pragma once

#include <optional>

#include "tsa/matfac.hpp"

namespace tsa {

enum class SecondOrderKind { SPSA2, E2SPSA, SG2, E2SG };

bool gradient_free(SecondOrderKind kind);

struct UpdateCoefficients {
    double t = 1.0;
    double b = 0.0;
    Vec u, v;
};

struct SplitVectors {
    Vec u_tilde, v_tilde;
};

// u~ u~^T - v~ v~^T = u v^T + v u^T
SplitVectors symmetric_split(const Vec& u, const Vec& v);

// raw per-iteration data feeding the curvature update
struct CurvatureMeasurements {
    // gradient-free: y(theta +- c delta) and y(theta +- c delta + c~ delta~)
    double y_plus = 0.0, y_minus = 0.0;
    double y_plus_tilde = 0.0, y_minus_tilde = 0.0;
    // gradient-based: Y(theta +- c delta)
    Vec g_plus, g_minus;
};

// hbar_prev is required by the feedback kinds (E2SPSA, E2SG)
UpdateCoefficients coefficients_for(SecondOrderKind kind, double w, double c, double c_tilde, const Vec& delta,
                                    const Vec& delta_tilde, const CurvatureMeasurements& m,
                                    const LBLFactors* hbar_prev = nullptr, FlopCounter* flops = nullptr);

// B <- tB, then +b u~u~^T, then -b v~v~^T
LBLFactors hbar_update(const LBLFactors& f, const UpdateCoefficients& co, const UpdateOptions& opt = {},
                       FlopCounter* flops = nullptr);

struct Preconditioned {
    BlockEigen eig;  // lambda holds the modified values
    Vec raw_lambda;
    double tau = 0.0;
};

double default_tau(int p, const Vec& lambda);
Preconditioned precondition(const LBLFactors& f, double tau, FlopCounter* flops = nullptr);
Preconditioned precondition(const LBLFactors& f, FlopCounter* flops = nullptr);

// dense P^T L Q diag(lambda-bar) Q^T L^T P, for diagnostics
Mat preconditioned_matrix(const LBLFactors& f, const Preconditioned& pre);

struct StepResult {
    Vec theta;
    Vec direction;
    bool blocked = false;
};

StepResult descent_and_step(const Vec& theta, const LBLFactors& f, const Preconditioned& pre, const Vec& G, double a,
                            double blocking = 1.0, FlopCounter* flops = nullptr);

struct SecondOrderSchedule {
    double a = 0.04, A = 1000.0, alpha = 0.602;
    double c = 0.05, gamma = 0.101;
    double c_tilde = 0.05;  // c~_k uses the same decay exponent as c_k
    double w = 0.01, w_exp = 0.501;

    double a_k(long k) const;
    double c_k(long k) const;
    double c_tilde_k(long k) const;
    double w_k(long k) const;
};

struct SecondOrderConfig {
    SecondOrderKind kind = SecondOrderKind::SPSA2;
    SecondOrderSchedule schedule;
    double blocking = 1.0;
    int retry_budget = 5;
    UpdateOptions update;
};

struct IterationRecord {
    long k = 0;
    Vec G;
    UpdateCoefficients coeffs;
    double tau = 0.0;
    bool blocked = false;
    int retries = 0;
};

class SecondOrderOptimizer {
public:
    SecondOrderOptimizer(const SecondOrderConfig& cfg, Vec theta0, Stream rng);

    // one full loop body; the loss oracle must be noisy-measurement y(theta)
    IterationRecord iterate(const LossOracle& y);
    IterationRecord iterate(const GradientOracle& Y);

    const Vec& theta() const { return theta_; }
    const LBLFactors& factors() const { return hbar_; }
    const Preconditioned& last_preconditioned() const { return last_pre_; }
    long k() const { return k_; }
    long measurements() const { return measurements_; }
    FlopCounter& flops() { return flops_; }
    const SecondOrderConfig& config() const { return cfg_; }

private:
    IterationRecord finish(const Vec& G, const UpdateCoefficients& co, int retries);

    SecondOrderConfig cfg_;
    Vec theta_;
    LBLFactors hbar_;
    Preconditioned last_pre_;
    Stream delta_rng_, delta_tilde_rng_;
    long k_ = 0;
    long measurements_ = 0;
    FlopCounter flops_;
};

}  // namespace tsa
