#include "tsa/gain_adapt.hpp"

#include "tsa/errors.hpp"

namespace tsa {

HessianEstimate hessian_update(const HessianEstimate& prev, double c, const Vec& delta, const Vec& g_plus,
                               const Vec& g_minus) {
    if (c == 0.0) throw DomainViolation("hessian_update: zero differencing magnitude");
    HessianEstimate out;
    out.k = prev.k + 1;
    const double k = static_cast<double>(out.k);
    Vec dG = g_plus - g_minus;
    Mat term = dG * delta.cwiseInverse().transpose();
    out.H = (k / (k + 1.0)) * prev.H + (term + term.transpose()) / (4.0 * c * (k + 1.0));
    // exact symmetry, not just up to rounding
    out.H = 0.5 * (out.H + out.H.transpose()).eval();
    return out;
}

NoiseCovEstimate noisecov_update(const NoiseCovEstimate& prev, const Vec& g_plus, const Vec& g_minus) {
    NoiseCovEstimate out;
    out.k = prev.k + 1;
    const double k = static_cast<double>(out.k);
    Vec dG = g_plus - g_minus;
    out.V = (k / (k + 1.0)) * prev.V + (dG * dG.transpose()) / (k + 1.0);
    return out;
}

double trace_product(const Mat& A, const Mat& B) { return A.cwiseProduct(B.transpose()).sum(); }

PhaseThresholds phase_thresholds(double a, const Mat& H, const Mat& V, const Vec& theta) {
    double tr = trace_product(H, V);
    Vec h1 = H * theta;
    Vec h2 = H * h1;
    PhaseThresholds t;
    t.steady = -a * tr;
    t.transient = h1.squaredNorm() - a * (h1.dot(h2) + tr);
    return t;
}

AdaptState make_adapt_state(const Vec& theta0, const AdaptConfig& cfg) {
    const auto p = theta0.size();
    AdaptState s;
    s.theta = theta0;
    s.a = cfg.a0;
    s.H.H = cfg.hessian_scale * Mat::Identity(p, p);
    s.V.V = Mat::Zero(p, p);
    s.anchor_sum = Vec::Zero(p);
    return s;
}

std::optional<GainEvent> adapt_step(AdaptState& s, const AdaptConfig& cfg, const Vec& delta, const Vec& g_plus,
                                    const Vec& g_minus) {
    s.H = hessian_update(s.H, cfg.c, delta, g_plus, g_minus);
    s.V = noisecov_update(s.V, g_plus, g_minus);

    Vec g = 0.5 * (g_plus + g_minus);
    s.anchor_sum += s.theta;
    ++s.anchor_n;
    if (s.have_prev) {
        s.phase.sum += g.dot(s.prev_g);
        ++s.phase.count;
    }

    std::optional<GainEvent> ev;
    if (s.phase.count >= cfg.min_samples) {
        Vec centred = cfg.recenter ? Vec(s.theta - s.anchor_sum / static_cast<double>(s.anchor_n)) : s.theta;
        PhaseThresholds t = phase_thresholds(s.a, s.H.H, s.V.V, centred);
        double m = s.phase.mean();
        int dir = 0;
        if (m < t.steady)
            dir = -1;
        else if (m >= t.transient)
            dir = +1;
        if (dir != 0) {
            GainEvent e;
            e.step = s.k;
            e.old_a = s.a;
            e.new_a = s.a * (dir > 0 ? cfg.eta_plus : cfg.eta_minus);
            e.direction = dir;
            e.mean = m;
            s.a = e.new_a;
            s.phase = PhaseStats{s.k, 0.0, 0};
            s.anchor_sum.setZero();
            s.anchor_n = 0;
            ev = e;
        }
    }

    s.prev_g = g;
    s.have_prev = true;
    s.theta -= s.a * g;
    ++s.k;
    return ev;
}

}  // namespace tsa
