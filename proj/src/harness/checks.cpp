#include "tsa/harness/checks.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>

#include "tsa/change_detect.hpp"
#include "tsa/errors.hpp"
#include "tsa/gain_design.hpp"
#include "tsa/matfac.hpp"
#include "tsa/second_order.hpp"

namespace tsa::harness {

namespace {

using clock = std::chrono::steady_clock;

double since(clock::time_point t0) { return std::chrono::duration<double>(clock::now() - t0).count(); }

Check make(int id, std::string name, bool ok, std::string detail, double seconds, double limit) {
    Check c;
    c.id = id;
    c.name = std::move(name);
    c.seconds = seconds;
    c.limit = limit;
    c.pass = ok && (limit <= 0.0 || seconds < limit);
    c.detail = std::move(detail);
    if (limit > 0.0 && seconds >= limit) c.detail += fmt::format("; over the {:.0f} s budget", limit);
    return c;
}

Mat random_symmetric(int p, Stream& rng) {
    Mat G(p, p);
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j) G(i, j) = rng.normal();
    return 0.5 * (G + G.transpose());
}

}  // namespace

std::string format_check(const Check& c) {
    return fmt::format("{} criterion {:>2} {}: {} ({:.2f} s)", c.pass ? "PASS" : "FAIL", c.id, c.name, c.detail,
                       c.seconds);
}

// ---------------------------------------------------------------- 1

Check check_gain_region(std::uint64_t seed, int samples) {
    auto t0 = clock::now();
    Stream rng(seed ^ 0x1111);
    long bad = 0;
    double worst_u = 0.0, worst_v = 0.0;
    for (int i = 0; i < samples; ++i) {
        double R = i % 4 == 0 ? 1.0 : std::exp(rng.uniform(0.0, std::log(50.0)));
        SlackDomain dom = slack_domain(R);
        double q = std::isfinite(dom.upper) ? dom.lower + (dom.upper - dom.lower) * rng.uniform()
                                             : dom.lower - 5.0 * std::log(rng.uniform());
        GainRegion g = gain_region(R, q);
        double aL = g.lo + (g.hi - g.lo) * rng.uniform();
        try {
            StepCoefficients sc = step_coefficients(1.0, R, q, aL / R);
            worst_u = std::max(worst_u, sc.u);
            worst_v = std::min(worst_v, sc.v);
            if (!(sc.u >= 0.0 && sc.u < 1.0 && sc.v >= 0.0)) ++bad;
        } catch (const Error&) {
            ++bad;
        }
    }
    return make(1, "gain-region soundness", bad == 0,
                fmt::format("{} triples, {} counterexamples, max u {:.6f}, min v {:.3g}", samples, bad, worst_u,
                            worst_v),
                since(t0), 1.0);
}

// ---------------------------------------------------------------- 2

Check check_bound_dominance(const TrackSummary& s, long burn_in, double seconds) {
    if (!s.has_bound) return make(2, "bound dominance", false, "run has no bound", seconds, 30.0);
    long rms_viol = 0, mad_viol = 0, first = -1;
    double worst = 0.0;
    for (std::size_t k = static_cast<std::size_t>(burn_in); k < s.emp_rms.size(); ++k) {
        bool r = s.emp_rms[k] > s.rms_bound[k], m = s.emp_mad[k] > s.mad_bound[k];
        rms_viol += r;
        mad_viol += m;
        if ((r || m) && first < 0) first = static_cast<long>(k);
        worst = std::max(worst, s.emp_rms[k] / s.rms_bound[k]);
    }
    return make(2, "bound dominance", rms_viol == 0 && mad_viol == 0,
                fmt::format("RMS above bound at {} steps, MAD at {} (first k={}), worst RMS/bound {:.3f}, "
                            "terminal RMS {:.3f} vs bound {:.3f}",
                            rms_viol, mad_viol, first, worst, s.emp_rms.back(), s.rms_bound.back()),
                seconds, 30.0);
}

// ---------------------------------------------------------------- 3

Check check_jump(const JumpSummary& s, double seconds) {
    bool i = s.frac_reentered >= 0.95, ii = s.p_gt7 == 0.0, iii = s.p_gt4 >= 0.80 && s.p_gt4 <= 0.95;
    return make(3, "jump-process behavior", i && ii && iii,
                fmt::format("(i) {}/{} jumps re-entered within {} steps ({:.3f}) {}; (ii) P(dev>7)={:.3f} {}; "
                            "(iii) P(dev>4)={:.3f} {}; max dev {:.2f}",
                            s.reentered, s.jumps, kReentrySteps, s.frac_reentered, i ? "ok" : "no", s.p_gt7,
                            ii ? "ok" : "no", s.p_gt4, iii ? "ok" : "no", s.max_dev),
                seconds, 300.0);
}

// ---------------------------------------------------------------- 4

Check check_detection(const DetectSummary& s, double seconds) {
    bool all = s.detected == s.eligible, few = s.mean_false <= 1.0;
    return make(4, "change detection", all && few,
                fmt::format("{}/{} eligible jumps announced within 2w, mean delay {:.1f}; {:.2f} false "
                            "announcements per run",
                            s.detected, s.eligible, s.mean_delay, s.mean_false),
                seconds, 120.0);
}

// ---------------------------------------------------------------- 5

Check check_pvalue_calibration(std::uint64_t seed, int trials) {
    auto t0 = clock::now();
    Stream rng(seed ^ 0x5555);
    const int n = 30;
    Eigen::Matrix2d S2;
    S2 << 4.0, 1.5, 1.5, 2.0;
    Eigen::Matrix2d L2 = S2.llt().matrixL();
    std::vector<double> pv;
    pv.reserve(trials);
    for (int t = 0; t < trials; ++t) {
        Mat pre(n, 2), post(n, 2);
        for (int i = 0; i < n; ++i) {
            pre.row(i) << rng.normal(), rng.normal();
            Eigen::Vector2d z(rng.normal(), rng.normal());
            post.row(i) = (L2 * z).transpose();
        }
        pv.push_back(split_test(pre, post, DofMethod::KN).p_value);
    }
    std::sort(pv.begin(), pv.end());
    double D = 0.0;
    for (int i = 0; i < trials; ++i)
        D = std::max({D, (i + 1.0) / trials - pv[i], pv[i] - static_cast<double>(i) / trials});
    return make(5, "p-value calibration", D < 0.08, fmt::format("KS distance {:.4f} over {} null trials", D, trials),
                since(t0), 0.0);
}

// ---------------------------------------------------------------- 6

Check check_factorization(std::uint64_t seed, int matrices, int updates) {
    auto t0 = clock::now();
    Stream rng(seed ^ 0x6666);
    int recon_bad = 0, inertia_bad = 0, update_bad = 0;
    double worst_recon = 0.0, worst_update = 0.0;
    for (int t = 0; t < matrices; ++t) {
        int p = 5 + static_cast<int>(rng() % 60);
        Mat A = random_symmetric(p, rng);
        LBLFactors f = factorize(A);
        double e = (reconstruct(f) - A).norm() / A.norm();
        worst_recon = std::max(worst_recon, e);
        recon_bad += !(e <= 1e-10);
        Eigen::SelfAdjointEigenSolver<Mat> es(A);
        inertia_bad += !(inertia_of(f) == inertia_of(Vec(es.eigenvalues())));
    }
    for (int t = 0; t < updates; ++t) {
        int p = 5 + static_cast<int>(rng() % 60);
        Mat A = random_symmetric(p, rng);
        Vec z(p);
        for (int i = 0; i < p; ++i) z[i] = rng.normal();
        double sigma = (rng.bit() ? 1.0 : -1.0) * std::exp(rng.uniform(std::log(0.1), std::log(10.0)));
        Mat A2 = A + sigma * z * z.transpose();
        try {
            LBLFactors g = rank_one_update(factorize(A), sigma, z);
            LBLFactors ref = factorize(A2);
            double e = (reconstruct(g) - reconstruct(ref)).norm() / A2.norm();
            worst_update = std::max(worst_update, e);
            update_bad += !(e <= 1e-8) || !(inertia_of(g) == inertia_of(ref));
        } catch (const UpdateBreakdown&) {
            ++update_bad;
        }
    }
    return make(6, "factorization oracle", recon_bad == 0 && inertia_bad == 0 && update_bad == 0,
                fmt::format("{} matrices: worst reconstruction {:.2e} ({} bad), {} inertia mismatches; {} updates: "
                            "worst {:.2e}, {} bad",
                            matrices, worst_recon, recon_bad, inertia_bad, updates, worst_update, update_bad),
                since(t0), 0.0);
}

// ---------------------------------------------------------------- 7

Check check_dense_equivalence(std::uint64_t seed, int p, int iterations) {
    auto t0 = clock::now();
    ScenarioConfig cfg = ScenarioConfig::defaults_for("soquartic");
    cfg.seed = seed;
    cfg.p = p;
    Stream base = replicate_base(cfg, 0);
    Stream noise = base.derive(kNoise);
    SkewedQuartic f{p};
    SecondOrderConfig sc;
    SecondOrderOptimizer opt(sc, Vec::Ones(p), base);
    LossOracle y = [&](const Vec& x) { return f.loss(x) + cfg.so_noise * noise.normal(); };

    Mat dense = Mat::Identity(p, p);
    double worst = 0.0, worst_margin = std::numeric_limits<double>::infinity();
    int eq_bad = 0, lam_bad = 0;
    for (int it = 0; it < iterations; ++it) {
        IterationRecord rec = opt.iterate(y);
        const UpdateCoefficients& co = rec.coeffs;
        dense = co.t * dense + co.b * (co.u * co.v.transpose() + co.v * co.u.transpose());
        double e = (reconstruct(opt.factors()) - dense).norm() / dense.norm();
        worst = std::max(worst, e);
        eq_bad += !(e <= 1e-8);

        const Preconditioned& pre = opt.last_preconditioned();
        Mat Hpd = preconditioned_matrix(opt.factors(), pre);
        double lam_min = Eigen::SelfAdjointEigenSolver<Mat>(Hpd).eigenvalues().minCoeff();
        double smin = Eigen::JacobiSVD<Mat>(opt.factors().L).singularValues().minCoeff();
        double floor = smin * smin * pre.tau;
        worst_margin = std::min(worst_margin, lam_min / floor);
        lam_bad += !(lam_min >= floor * (1.0 - 1e-12));
    }
    return make(7, "2SPSA dense equivalence", eq_bad == 0 && lam_bad == 0,
                fmt::format("{} iterations at p={}: worst relative gap {:.2e} ({} bad); min lambda/floor {:.3f} "
                            "({} bad)",
                            iterations, p, worst, eq_bad, worst_margin, lam_bad),
                since(t0), 0.0);
}

// ---------------------------------------------------------------- 8

Check check_complexity(const BenchSummary& s, double seconds) {
    bool eff = std::abs(s.efficient_slope - 2.0) <= 0.4, dense = s.dense_slope >= 2.6;
    std::string ps;
    for (const auto& r : s.rows) ps += fmt::format("{}{}", ps.empty() ? "" : ",", r.p);
    return make(8, "complexity scaling", eff && dense,
                fmt::format("efficient slope {:.3f} over p={{{}}}, dense slope {:.3f}, dense/efficient ratio {}",
                            s.efficient_slope, ps, s.dense_slope, s.ratio_grows ? "grows" : "does not grow"),
                seconds, 180.0);
}

// ---------------------------------------------------------------- 9

Check check_soquartic(const SoquarticSummary& s, double seconds) {
    bool low = s.terminal < 0.1;
    long ups = 0;
    for (std::size_t i = 1; i < s.smoothed.size(); ++i) ups += s.smoothed[i] > s.smoothed[i - 1];
    return make(9, "skewed-quartic descent", low && s.nonincreasing,
                fmt::format("mean normalized terminal loss {:.4g}; {} of {} smoothed windows increase", s.terminal,
                            ups, s.smoothed.size() ? s.smoothed.size() - 1 : 0),
                seconds, 120.0);
}

// ---------------------------------------------------------------- 10

Check check_partition(const AgentsSummary& s, double seconds) {
    const int n = static_cast<int>(s.runs.size());
    return make(10, "multi-agent partition", n > 0 && s.partitioned >= 0.7 * n,
                fmt::format("{}/{} seeds end with one tracker per target and distant spreaders", s.partitioned, n),
                seconds, 120.0);
}

// ---------------------------------------------------------------- 11

Check check_adaptive(const AdaptSummary& s, double seconds) {
    const int n = static_cast<int>(s.runs.size());
    return make(11, "adaptive-gain robustness", s.both >= 8 * n / 10 && n > 0,
                fmt::format("{}/{} seeds: baseline diverged in {}, adaptive below 10% of start in {}", s.both, n,
                            s.baseline_diverged, s.adaptive_ok),
                seconds, 60.0);
}

Check run_criterion(int id, std::uint64_t seed, int threads) {
    auto cfg_for = [&](const char* scenario) {
        ScenarioConfig c = ScenarioConfig::defaults_for(scenario);
        c.seed = seed;
        c.threads = threads;
        return c;
    };
    auto t0 = clock::now();
    switch (id) {
        case 1: return check_gain_region(seed);
        case 2: {
            auto c = cfg_for("evolution1");
            auto s = run_track(c);
            return check_bound_dominance(s, c.burn_in, since(t0));
        }
        case 3: {
            auto s = run_jump(cfg_for("jump"));
            return check_jump(s, since(t0));
        }
        case 4: {
            auto s = run_detect(cfg_for("model1"));
            return check_detection(s, since(t0));
        }
        case 5: return check_pvalue_calibration(seed);
        case 6: return check_factorization(seed);
        case 7: return check_dense_equivalence(seed);
        case 8: {
            auto s = run_bench(cfg_for("bench"));
            return check_complexity(s, since(t0));
        }
        case 9: {
            auto s = run_soquartic(cfg_for("soquartic"));
            return check_soquartic(s, since(t0));
        }
        case 10: {
            auto s = run_agents(cfg_for("multiagent"));
            return check_partition(s, since(t0));
        }
        case 11: {
            auto s = run_adapt(cfg_for("adapt"));
            return check_adaptive(s, since(t0));
        }
        default: throw ConfigError(fmt::format("no criterion {}", id));
    }
}

}  // namespace tsa::harness
