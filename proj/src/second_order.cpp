#include "tsa/second_order.hpp"

#include <cmath>

#include "tsa/errors.hpp"

namespace tsa {

bool gradient_free(SecondOrderKind kind) { return kind == SecondOrderKind::SPSA2 || kind == SecondOrderKind::E2SPSA; }

SplitVectors symmetric_split(const Vec& u, const Vec& v) {
    double nu = u.norm(), nv = v.norm();
    if (nu == 0.0 || nv == 0.0) throw DomainViolation("symmetric_split: zero vector");
    double s = std::sqrt(nv / (2.0 * nu));
    double r = nu / nv;
    return {s * (u + r * v), s * (u - r * v)};
}

UpdateCoefficients coefficients_for(SecondOrderKind kind, double w, double c, double c_tilde, const Vec& delta,
                                    const Vec& delta_tilde, const CurvatureMeasurements& m, const LBLFactors* hbar_prev,
                                    FlopCounter* flops) {
    UpdateCoefficients co;
    co.v = delta.cwiseInverse();
    bool feedback = kind == SecondOrderKind::E2SPSA || kind == SecondOrderKind::E2SG;
    if (feedback && !hbar_prev) throw DomainViolation("coefficients_for: feedback kinds need the previous estimate");

    if (gradient_free(kind)) {
        if (delta_tilde.size() != delta.size()) throw DomainViolation("coefficients_for: missing second perturbation");
        double dy = (m.y_plus_tilde - m.y_plus) - (m.y_minus_tilde - m.y_minus);
        co.u = delta_tilde.cwiseInverse();
        if (kind == SecondOrderKind::SPSA2) {
            co.t = 1.0 - w;
            co.b = w * dy / (4.0 * c * c_tilde);
        } else {
            Vec Hdt = apply(*hbar_prev, delta_tilde, flops);
            co.t = 1.0;
            co.b = w * (dy / (2.0 * c * c_tilde)) / 2.0 - w * delta.dot(Hdt) / 2.0;
        }
    } else {
        if (m.g_plus.size() != delta.size() || m.g_minus.size() != delta.size())
            throw DomainViolation("coefficients_for: gradient measurements missing");
        Vec dG = m.g_plus - m.g_minus;
        if (kind == SecondOrderKind::SG2) {
            co.t = 1.0 - w;
            co.b = w / (4.0 * c);
            co.u = dG;
        } else {
            co.t = 1.0;
            co.b = w / 2.0;
            co.u = dG / (2.0 * c) - apply(*hbar_prev, delta, flops);
        }
    }
    return co;
}

LBLFactors hbar_update(const LBLFactors& f, const UpdateCoefficients& co, const UpdateOptions& opt, FlopCounter* flops) {
    LBLFactors out = f;
    if (co.t != 1.0) scale_blocks(out, co.t);
    if (flops) flops->update += 3 * static_cast<long long>(f.n());
    if (co.b == 0.0 || co.u.squaredNorm() == 0.0 || co.v.squaredNorm() == 0.0) return out;

    SplitVectors sv = symmetric_split(co.u, co.v);
    if (flops) flops->update += 8 * static_cast<long long>(f.n());
    out = rank_one_update(out, co.b, sv.u_tilde, opt, flops);
    if (sv.v_tilde.squaredNorm() > 0.0) out = rank_one_update(out, -co.b, sv.v_tilde, opt, flops);
    return out;
}

double default_tau(int p, const Vec& lambda) {
    double m = lambda.size() ? lambda.cwiseAbs().maxCoeff() : 0.0;
    return std::max(1e-4, 1e-4 * p * m);
}

Preconditioned precondition(const LBLFactors& f, double tau, FlopCounter* flops) {
    if (!(tau > 0.0)) throw DomainViolation("precondition: tau must be positive");
    Preconditioned pc;
    pc.eig = block_eigen(f.blocks, f.n());
    pc.raw_lambda = pc.eig.lambda;
    pc.tau = tau;
    pc.eig.lambda = pc.raw_lambda.cwiseAbs().cwiseMax(tau);
    if (flops) flops->precondition += 12 * static_cast<long long>(f.n());
    return pc;
}

Preconditioned precondition(const LBLFactors& f, FlopCounter* flops) {
    Vec lam = block_eigen(f.blocks, f.n()).lambda;
    return precondition(f, default_tau(f.n(), lam), flops);
}

Mat preconditioned_matrix(const LBLFactors& f, const Preconditioned& pre) {
    const int n = f.n();
    Mat QL = Mat::Zero(n, n);
    for (std::size_t bi = 0; bi < f.blocks.size(); ++bi) {
        const Block& b = f.blocks[bi];
        if (b.size == 1) {
            QL(b.start, b.start) = pre.eig.lambda[b.start];
            continue;
        }
        double cs = pre.eig.cs[bi], sn = pre.eig.sn[bi];
        Eigen::Matrix2d Q;
        Q << cs, -sn, sn, cs;
        Eigen::Matrix2d D = Eigen::Vector2d(pre.eig.lambda[b.start], pre.eig.lambda[b.start + 1]).asDiagonal();
        QL.block<2, 2>(b.start, b.start) = Q * D * Q.transpose();
    }
    LBLFactors g = f;
    g.blocks.clear();
    for (const auto& b : f.blocks) {
        Block nb = b;
        nb.a = QL(b.start, b.start);
        if (b.size == 2) {
            nb.b = QL(b.start + 1, b.start);
            nb.c = QL(b.start + 1, b.start + 1);
        }
        g.blocks.push_back(nb);
    }
    return reconstruct(g);
}

StepResult descent_and_step(const Vec& theta, const LBLFactors& f, const Preconditioned& pre, const Vec& G, double a,
                            double blocking, FlopCounter* flops) {
    StepResult r;
    r.direction = solve(f, pre.eig, G, flops);
    Vec next = theta - a * r.direction;
    if (flops) flops->solve += 2 * static_cast<long long>(theta.size());
    if (!next.allFinite() || (next - theta).norm() >= blocking) {
        r.theta = theta;
        r.blocked = true;
    } else {
        r.theta = next;
    }
    return r;
}

double SecondOrderSchedule::a_k(long k) const { return a / std::pow(A + k + 1.0, alpha); }
double SecondOrderSchedule::c_k(long k) const { return c / std::pow(k + 1.0, gamma); }
double SecondOrderSchedule::c_tilde_k(long k) const { return c_tilde / std::pow(k + 1.0, gamma); }
double SecondOrderSchedule::w_k(long k) const { return w / std::pow(k + 1.0, w_exp); }

SecondOrderOptimizer::SecondOrderOptimizer(const SecondOrderConfig& cfg, Vec theta0, Stream rng)
    : cfg_(cfg),
      theta_(std::move(theta0)),
      hbar_(LBLFactors::identity(static_cast<int>(theta_.size()))),
      delta_rng_(rng.derive(kDelta)),
      delta_tilde_rng_(rng.derive(kDeltaTilde)) {}

IterationRecord SecondOrderOptimizer::finish(const Vec& G, const UpdateCoefficients& co, int retries) {
    last_pre_ = precondition(hbar_, &flops_);
    const Preconditioned& pc = last_pre_;
    StepResult st = descent_and_step(theta_, hbar_, pc, G, cfg_.schedule.a_k(k_), cfg_.blocking, &flops_);
    IterationRecord rec;
    rec.k = k_;
    rec.G = G;
    rec.coeffs = co;
    rec.tau = pc.tau;
    rec.blocked = st.blocked;
    rec.retries = retries;
    theta_ = st.theta;
    ++k_;
    return rec;
}

IterationRecord SecondOrderOptimizer::iterate(const LossOracle& y) {
    if (!gradient_free(cfg_.kind)) throw DomainViolation("iterate: gradient-based kind needs a gradient oracle");
    const int p = static_cast<int>(theta_.size());
    const double c = cfg_.schedule.c_k(k_), ct = cfg_.schedule.c_tilde_k(k_), w = cfg_.schedule.w_k(k_);
    auto eval = [&](const Vec& x) {
        double v = y(x);
        ++measurements_;
        if (!std::isfinite(v)) throw MeasurementFailure("loss oracle returned a non-finite value");
        return v;
    };
    for (int attempt = 0;; ++attempt) {
        Vec d = rademacher_perturbation(p, delta_rng_);
        Vec dt = rademacher_perturbation(p, delta_tilde_rng_);
        CurvatureMeasurements m;
        Vec xp = theta_ + c * d, xm = theta_ - c * d;
        m.y_plus = eval(xp);
        m.y_minus = eval(xm);
        m.y_plus_tilde = eval(xp + ct * dt);
        m.y_minus_tilde = eval(xm + ct * dt);
        Vec G = ((m.y_plus - m.y_minus) / (2.0 * c)) * d.cwiseInverse();
        UpdateCoefficients co = coefficients_for(cfg_.kind, w, c, ct, d, dt, m, &hbar_, &flops_);
        try {
            hbar_ = hbar_update(hbar_, co, cfg_.update, &flops_);
        } catch (const UpdateBreakdown&) {
            if (attempt >= cfg_.retry_budget) throw;
            continue;
        }
        return finish(G, co, attempt);
    }
}

IterationRecord SecondOrderOptimizer::iterate(const GradientOracle& Y) {
    if (gradient_free(cfg_.kind)) throw DomainViolation("iterate: gradient-free kind needs a loss oracle");
    const int p = static_cast<int>(theta_.size());
    const double c = cfg_.schedule.c_k(k_), w = cfg_.schedule.w_k(k_);
    auto eval = [&](const Vec& x) {
        Vec v = Y(x);
        ++measurements_;
        if (!v.allFinite()) throw MeasurementFailure("gradient oracle returned a non-finite value");
        return v;
    };
    Vec G = eval(theta_);
    for (int attempt = 0;; ++attempt) {
        Vec d = rademacher_perturbation(p, delta_rng_);
        CurvatureMeasurements m;
        m.g_plus = eval(theta_ + c * d);
        m.g_minus = eval(theta_ - c * d);
        UpdateCoefficients co = coefficients_for(cfg_.kind, w, c, 0.0, d, Vec(), m, &hbar_, &flops_);
        try {
            hbar_ = hbar_update(hbar_, co, cfg_.update, &flops_);
        } catch (const UpdateBreakdown&) {
            if (attempt >= cfg_.retry_budget) throw;
            continue;
        }
        return finish(G, co, attempt);
    }
}

}  // namespace tsa
