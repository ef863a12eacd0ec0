#include "tsa/harness/scenarios.hpp"

#include <chrono>
#include <cmath>

#include "tsa/agent_sim.hpp"
#include "tsa/change_detect.hpp"
#include "tsa/error_bounds.hpp"
#include "tsa/errors.hpp"
#include "tsa/gain_adapt.hpp"
#include "tsa/gain_design.hpp"
#include "tsa/second_order.hpp"

namespace tsa::harness {

namespace {

constexpr double kTwoPi = 6.283185307179586;

Vec gaussian(int p, double sigma, Stream& rng) {
    Vec x(p);
    for (int i = 0; i < p; ++i) x[i] = sigma * rng.normal();
    return x;
}

Vec on_circle(double radius, Stream& rng) {
    double phi = rng.uniform(0.0, kTwoPi);
    Vec v(2);
    v << radius * std::cos(phi), radius * std::sin(phi);
    return v;
}

Mat scenario_hessian(const ScenarioConfig& cfg) {
    if (cfg.hessian == "identity") return Mat::Identity(cfg.p, cfg.p);
    if (cfg.p != 2) throw ConfigError("hessian.kind = sim needs run.p = 2");
    return sim_hessian(cfg.d1, cfg.d2);
}

void require_positive(double x, const char* name) {
    if (!(x > 0.0)) throw ConfigError(std::string(name) + " must be positive");
}

void check_common(const ScenarioConfig& cfg) {
    if (cfg.K <= 0) throw ConfigError("run.K must be positive");
    if (cfg.replicates <= 0) throw ConfigError("run.replicates must be positive");
    if (cfg.p <= 0) throw ConfigError("run.p must be positive");
}

// deterministic part of the optimum's motion at step k -> k+1
Vec track_drift(const ScenarioConfig& cfg, long k, Stream& truth) {
    Vec d = Vec::Zero(cfg.p);
    if (cfg.scenario == "evolution1" || cfg.scenario == "evolution2") {
        d.setOnes();
        if (cfg.scenario == "evolution1" && k >= 500) d[0] = -1.0;
        if (cfg.scenario == "evolution2" && k == 500) d = on_circle(cfg.jump_magnitude, truth);
    }
    return d;
}

double track_B(const ScenarioConfig& cfg, long k) {
    if (cfg.B >= 0.0) return cfg.B;
    double det2 = 0.0;
    if (cfg.scenario == "evolution1") det2 = 2.0;
    if (cfg.scenario == "evolution2") det2 = k == 500 ? cfg.jump_magnitude * cfg.jump_magnitude : 2.0;
    double walk2 = cfg.p * cfg.sigma2 * cfg.sigma2;
    if (cfg.scenario == "lms") return std::sqrt(walk2);
    return cfg.B_rule == "moment" ? std::sqrt(det2 + walk2) : std::sqrt(det2);
}

}  // namespace

Mat sim_hessian(double d1, double d2) {
    Mat P(2, 2);
    P << 0.8145, -0.5802, -0.5802, -0.8145;
    return P * Eigen::Vector2d(d1, d2).asDiagonal() * P.transpose();
}

Stream replicate_base(const ScenarioConfig& cfg, int r) {
    return replicate_stream(cfg.seed, scenario_hash(cfg.scenario), static_cast<std::uint64_t>(r));
}

// ---------------------------------------------------------------- tracking

TrackRun run_track_replicate(const ScenarioConfig& cfg, double a, int r) {
    const int p = cfg.p;
    Stream base = replicate_base(cfg, r);
    Stream truth = base.derive(kTruth), noise = base.derive(kNoise);
    const bool lms = cfg.scenario == "lms";
    Mat H = lms ? Mat::Identity(p, p) : scenario_hessian(cfg);
    require_positive(a, "gain.a");

    Vec theta = Vec::Zero(p), star = Vec::Zero(p);
    TrackRun run;
    run.err.reserve(cfg.K + 1);
    run.err.push_back(0.0);
    for (long k = 0; k < cfg.K; ++k) {
        Vec g;
        if (lms) {
            Vec h = gaussian(p, 1.0, noise);
            double y = h.dot(star) + cfg.sigma1 * noise.normal();
            g = h * (h.dot(theta) - y);
        } else {
            g = H * (theta - star) + gaussian(p, cfg.sigma1, noise);
        }
        theta -= a * g;
        star += track_drift(cfg, k, truth);
        if (cfg.sigma2 > 0.0) star += gaussian(p, cfg.sigma2, truth);
        run.err.push_back((theta - star).norm());
    }
    return run;
}

TrackSummary run_track(const ScenarioConfig& cfg) {
    check_common(cfg);
    if (cfg.scenario != "evolution1" && cfg.scenario != "evolution2" && cfg.scenario != "lms")
        throw ConfigError("track runs evolution1, evolution2 or lms, not '" + cfg.scenario + "'");
    TrackSummary s;
    const int p = cfg.p;
    if (cfg.policy != "fixed") {
        double C, L;
        if (cfg.scenario == "lms") {
            C = L = 1.0;
        } else {
            Eigen::SelfAdjointEigenSolver<Mat> es(scenario_hessian(cfg));
            C = es.eigenvalues().minCoeff();
            L = es.eigenvalues().maxCoeff();
            // the tracking examples quote the unrounded design values
            if (cfg.hessian == "sim") C = cfg.d2, L = cfg.d1;
        }
        GainPolicy pol = cfg.policy == "mix" ? GainPolicy::Mix
                         : cfg.policy == "midpoint" ? GainPolicy::Midpoint
                                                    : GainPolicy::Explicit;
        double q = cfg.q > 0.0 ? cfg.q : default_slack(C, L);
        GainChoice gc = select_gain(C, L, pol, q, cfg.a);
        StepCoefficients sc = step_coefficients(C, L, gc.q, gc.a);
        s.a = gc.a;
        s.q = gc.q;
        s.u = sc.u;
        s.v = sc.v;
        s.has_bound = true;
    } else {
        s.a = cfg.a;
    }
    s.M = cfg.M >= 0.0 ? cfg.M : std::sqrt(static_cast<double>(p)) * cfg.sigma1;

    s.runs = parallel_map(cfg.replicates, cfg.threads, [&](int r) { return run_track_replicate(cfg, s.a, r); });
    const std::size_t n = static_cast<std::size_t>(cfg.K) + 1;
    s.emp_mad.assign(n, 0.0);
    s.emp_rms.assign(n, 0.0);
    for (const auto& run : s.runs)
        for (std::size_t k = 0; k < n; ++k) {
            s.emp_mad[k] += run.err[k];
            s.emp_rms[k] += run.err[k] * run.err[k];
        }
    for (std::size_t k = 0; k < n; ++k) {
        s.emp_mad[k] /= cfg.replicates;
        s.emp_rms[k] = std::sqrt(s.emp_rms[k] / cfg.replicates);
    }
    if (s.has_bound) {
        s.mad_bound.push_back(0.0);
        s.rms_bound.push_back(0.0);
        for (long k = 0; k < cfg.K; ++k) {
            double B = track_B(cfg, k);
            s.B.push_back(B);
            s.mad_bound.push_back(mad_bound_step(s.mad_bound.back(), s.u, s.v, s.M, B));
            s.rms_bound.push_back(rms_bound_step(s.rms_bound.back(), s.u, s.v, s.M, B));
        }
    }
    return s;
}

// ---------------------------------------------------------------- jump process

JumpRun run_jump_replicate(const ScenarioConfig& cfg, int r) {
    Stream base = replicate_base(cfg, r);
    Stream truth = base.derive(kTruth), noise = base.derive(kNoise);
    const double a = cfg.a, decay = std::exp(-cfg.a);
    const double tr = cfg.truncation;
    Vec theta = Vec::Zero(2), star = Vec::Zero(2), ode = Vec::Zero(2);
    JumpRun run;
    long pending = -1;  // start of the regime still waiting for re-entry
    auto close_regime = [&] {
        if (pending < 0) return;
        run.reentry_steps.push_back(-1);
        pending = -1;
    };
    for (long k = 0; k < cfg.K; ++k) {
        Vec xi(2);
        for (int i = 0; i < 2; ++i) xi[i] = tr > 0.0 ? noise.truncated_normal(-tr, tr) : noise.normal();
        theta -= a * (theta - star + xi);
        Vec next = star;
        if (truth.uniform() < cfg.jump_prob) next += on_circle(cfg.jump_magnitude, truth);
        ode = next + (ode - next) * decay;
        if (next != star) {
            close_regime();
            ++run.jumps;
            pending = k + 1;
        }
        star = next;
        run.max_dev = std::max(run.max_dev, (theta - ode).norm());
        if (pending >= 0 && (theta - star).norm() <= kReentryRadius) {
            long steps = k + 1 - pending;
            run.reentry_steps.push_back(steps);
            if (steps <= kReentrySteps) ++run.reentered;
            pending = -1;
        }
    }
    close_regime();
    return run;
}

JumpSummary run_jump(const ScenarioConfig& cfg) {
    check_common(cfg);
    if (cfg.p != 2) throw ConfigError("the jump scenario is two-dimensional");
    require_positive(cfg.a, "gain.a");
    JumpSummary s;
    s.runs = parallel_map(cfg.replicates, cfg.threads, [&](int r) { return run_jump_replicate(cfg, r); });
    long gt4 = 0, gt7 = 0;
    for (const auto& run : s.runs) {
        s.jumps += run.jumps;
        s.reentered += run.reentered;
        for (long st : run.reentry_steps) s.worst_reentry = std::max(s.worst_reentry, st < 0 ? cfg.K : st);
        gt4 += run.max_dev > 4.0;
        gt7 += run.max_dev > 7.0;
        s.max_dev = std::max(s.max_dev, run.max_dev);
    }
    s.frac_reentered = s.jumps ? static_cast<double>(s.reentered) / s.jumps : 1.0;
    s.p_gt4 = static_cast<double>(gt4) / cfg.replicates;
    s.p_gt7 = static_cast<double>(gt7) / cfg.replicates;
    return s;
}

// ---------------------------------------------------------------- detection

DetectRun run_detect_replicate(const ScenarioConfig& cfg, int r) {
    Stream base = replicate_base(cfg, r);
    Stream truth = base.derive(kTruth), noise = base.derive(kNoise);
    const bool model2 = cfg.scenario == "model2";
    const double radius = 50.0;
    Mat H = scenario_hessian(cfg);
    ChangeDetector det(cfg.p, cfg.window, cfg.alpha, cfg.dof == "yao" ? DofMethod::Yao : DofMethod::KN);

    Vec theta = Vec::Zero(cfg.p), center = Vec::Zero(cfg.p);
    auto draw_star = [&]() -> Vec {
        if (!model2) return center;
        // uniform in the disk around the regime center
        double rad = radius * std::sqrt(truth.uniform());
        return center + on_circle(rad, truth);
    };
    Vec star = draw_star();
    DetectRun run;
    for (long k = 0; k < cfg.K; ++k) {
        if (auto ev = det.push(theta)) run.announce.push_back(ev->announce + 1);
        theta -= cfg.a * (H * (theta - star) + gaussian(cfg.p, cfg.sigma1, noise));
        if (truth.uniform() < cfg.jump_prob) {
            center += on_circle(cfg.jump_magnitude, truth);
            run.jumps.push_back(k + 1);
        }
        star = draw_star();
    }

    const long w2 = 2L * cfg.window;
    for (std::size_t j = 0; j < run.jumps.size(); ++j) {
        long J = run.jumps[j];
        long end = j + 1 < run.jumps.size() ? run.jumps[j + 1] : cfg.K;
        if (end - J < w2) continue;
        ++run.eligible;
        for (long t : run.announce)
            if (t >= J && t <= J + w2) {
                ++run.detected;
                run.delays.push_back(t - J);
                break;
            }
    }
    for (long t : run.announce) {
        bool inside = false;
        for (long J : run.jumps) inside = inside || (t >= J && t <= J + w2);
        run.false_alarms += !inside;
    }
    return run;
}

DetectSummary run_detect(const ScenarioConfig& cfg) {
    check_common(cfg);
    if (cfg.scenario != "model1" && cfg.scenario != "model2")
        throw ConfigError("detect runs model1 or model2, not '" + cfg.scenario + "'");
    if (cfg.window < 2) throw ConfigError("detect.window must be at least 2");
    require_positive(cfg.a, "gain.a");
    DetectSummary s;
    s.runs = parallel_map(cfg.replicates, cfg.threads, [&](int r) { return run_detect_replicate(cfg, r); });
    double delay_sum = 0.0;
    long delay_n = 0;
    for (const auto& run : s.runs) {
        s.eligible += run.eligible;
        s.detected += run.detected;
        s.false_alarms += run.false_alarms;
        for (long d : run.delays) delay_sum += d, ++delay_n;
    }
    s.mean_false = static_cast<double>(s.false_alarms) / cfg.replicates;
    s.mean_delay = delay_n ? delay_sum / delay_n : 0.0;
    return s;
}

// ---------------------------------------------------------------- gain adaptation

AdaptRun run_adapt_replicate(const ScenarioConfig& cfg, int r) {
    Stream base = replicate_base(cfg, r);
    Stream delta_rng = base.derive(kDelta), noise = base.derive(kNoise);
    Mat H = scenario_hessian(cfg);
    Eigen::SelfAdjointEigenSolver<Mat> es(H);
    const double L = cfg.hessian == "sim" ? cfg.d1 : es.eigenvalues().maxCoeff();

    AdaptConfig ac;
    ac.eta_plus = cfg.eta_plus;
    ac.eta_minus = cfg.eta_minus;
    ac.a0 = cfg.a_mult / L;
    ac.c = cfg.c;
    ac.min_samples = cfg.min_samples;
    ac.recenter = cfg.recenter;

    const Vec theta0 = Vec::Constant(cfg.p, cfg.theta0);
    AdaptState st = make_adapt_state(theta0, ac);
    Vec base_theta = theta0;
    AdaptRun run;
    run.initial = theta0.norm();
    auto grad = [&](const Vec& x) -> Vec { return H * x + gaussian(cfg.p, cfg.sigma1, noise); };
    bool diverged = false;
    for (long k = 0; k < cfg.K; ++k) {
        Vec d = rademacher_perturbation(cfg.p, delta_rng);
        Vec gp = grad(st.theta + ac.c * d), gm = grad(st.theta - ac.c * d);
        if (auto ev = adapt_step(st, ac, d, gp, gm)) (ev->direction > 0 ? run.increases : run.decreases)++;
        // the baseline sees the same kind of measurement with the gain frozen
        if (!diverged) {
            Vec bp = grad(base_theta + ac.c * d), bm = grad(base_theta - ac.c * d);
            base_theta -= ac.a0 * 0.5 * (bp + bm);
            if (!(base_theta.norm() < 1e100)) diverged = true;
        }
        run.adaptive_curve.push_back(st.theta.norm());
        run.constant_curve.push_back(base_theta.norm());
    }
    run.adaptive = st.theta.norm();
    run.constant = base_theta.norm();
    run.final_gain = st.a;
    return run;
}

AdaptSummary run_adapt(const ScenarioConfig& cfg) {
    check_common(cfg);
    if (!(cfg.eta_plus > 1.0) || !(cfg.eta_minus > 0.0 && cfg.eta_minus < 1.0))
        throw ConfigError("adapt needs eta_plus > 1 and eta_minus in (0, 1)");
    require_positive(cfg.a_mult, "adapt.a_mult");
    require_positive(cfg.c, "adapt.c");
    AdaptSummary s;
    s.runs = parallel_map(cfg.replicates, cfg.threads, [&](int r) { return run_adapt_replicate(cfg, r); });
    for (const auto& run : s.runs) {
        bool ok = run.adaptive < 0.1 * run.initial;
        bool div = !(run.constant <= run.initial);
        s.adaptive_ok += ok;
        s.baseline_diverged += div;
        s.both += ok && div;
    }
    return s;
}

// ---------------------------------------------------------------- agents

namespace {

AgentParams agent_params(const ScenarioConfig& cfg) {
    AgentParams prm;
    prm.dt = cfg.dt;
    prm.vx_max = cfg.vx_max;
    prm.vy_max = cfg.vy_max;
    prm.gain_scale = cfg.gain_scale;
    prm.meas_var = cfg.meas_var;
    require_positive(prm.dt, "agents.dt");
    require_positive(prm.vy_max, "agents.vy_max");
    require_positive(prm.meas_var, "agents.meas_var");
    return prm;
}

}  // namespace

bool partition_ok(const Eigen::MatrixXd& dist, double near, double far) {
    const int J = static_cast<int>(dist.rows()), I = static_cast<int>(dist.cols());
    std::vector<int> owner(J, -1);
    for (int i = 0; i < I; ++i) {
        int count = 0;
        for (int j = 0; j < J; ++j)
            if (dist(j, i) <= near) {
                ++count;
                if (owner[j] >= 0) return false;
                owner[j] = i;
            }
        if (count != 1) return false;
    }
    for (int j = 0; j < J; ++j)
        if (owner[j] < 0 && dist.row(j).minCoeff() <= far) return false;
    return true;
}

AgentsRun run_agents_replicate(const ScenarioConfig& cfg, int r) {
    AgentParams prm = agent_params(cfg);
    MotionModel m = MotionModel::constant_velocity(prm.dt);
    Stream base = replicate_base(cfg, r);
    Stream init = base.derive(kInit), truth = base.derive(kTruth), sensor = base.derive(kSensor);
    World w = make_world(cfg.targets, cfg.agents, cfg.j_star, prm, init);
    for (long k = 0; k < cfg.K; ++k) multi_agent_step(w, prm, m, truth, sensor);
    AgentsRun run;
    run.final_dist.resize(cfg.agents, cfg.targets);
    for (int j = 0; j < cfg.agents; ++j) {
        run.roles.push_back(w.agents[j].role);
        for (int i = 0; i < cfg.targets; ++i) run.final_dist(j, i) = (w.agents[j].y - w.targets[i].head<2>()).norm();
    }
    run.partitioned = partition_ok(run.final_dist);
    return run;
}

AgentsSummary run_agents(const ScenarioConfig& cfg) {
    check_common(cfg);
    if (cfg.targets < 1 || cfg.agents < cfg.targets * cfg.j_star || cfg.j_star < 1)
        throw ConfigError("agents needs targets >= 1, j_star >= 1 and agents >= targets * j_star");
    AgentsSummary s;
    s.runs = parallel_map(cfg.replicates, cfg.threads, [&](int r) { return run_agents_replicate(cfg, r); });
    for (const auto& run : s.runs) s.partitioned += run.partitioned;
    return s;
}

SingleAgentSummary run_single_agent(const ScenarioConfig& cfg, int r) {
    AgentParams prm = agent_params(cfg);
    MotionModel m = MotionModel::constant_velocity(prm.dt);
    Stream base = replicate_base(cfg, r);
    Stream init = base.derive(kInit), truth = base.derive(kTruth), sensor = base.derive(kSensor);
    SingleAgentState st = make_single_agent(prm, init);
    SingleAgentSummary s;
    for (long k = 0; k < cfg.K; ++k) {
        SingleAgentRow row = single_agent_step(st, prm, m, truth, sensor);
        s.k.push_back(row.k);
        s.distance.push_back(row.distance);
        s.loose_bound.push_back(row.loose_bound);
        s.theta_error.push_back(row.theta_error);
    }
    return s;
}

// ---------------------------------------------------------------- skewed quartic

// (B theta)_i = (1/p) sum_{j >= i} theta_j
double SkewedQuartic::loss(const Vec& theta) const {
    double s = 0.0, out = 0.0;
    for (int i = p - 1; i >= 0; --i) {
        s += theta[i];
        double x = s / p;
        out += x * x + 0.1 * x * x * x + 0.01 * x * x * x * x;
    }
    return out;
}

Vec SkewedQuartic::gradient(const Vec& theta) const {
    Vec r(p);
    double s = 0.0;
    for (int i = p - 1; i >= 0; --i) {
        s += theta[i];
        double x = s / p;
        r[i] = 2.0 * x + 0.3 * x * x + 0.04 * x * x * x;
    }
    // B^T r: prefix sums
    Vec g(p);
    double acc = 0.0;
    for (int j = 0; j < p; ++j) {
        acc += r[j];
        g[j] = acc / p;
    }
    return g;
}

namespace {

SecondOrderConfig so_config(const ScenarioConfig& cfg) {
    SecondOrderConfig sc;
    sc.kind = cfg.kind == "e2spsa" ? SecondOrderKind::E2SPSA
              : cfg.kind == "2sg"  ? SecondOrderKind::SG2
              : cfg.kind == "e2sg" ? SecondOrderKind::E2SG
                                   : SecondOrderKind::SPSA2;
    sc.schedule.a = cfg.so_a;
    sc.schedule.A = cfg.so_A;
    sc.schedule.c = cfg.so_c;
    sc.schedule.c_tilde = cfg.so_c;
    sc.schedule.w = cfg.so_w;
    sc.blocking = cfg.blocking;
    sc.retry_budget = cfg.retries;
    return sc;
}

}  // namespace

SoquarticRun run_soquartic_replicate(const ScenarioConfig& cfg, int r) {
    Stream base = replicate_base(cfg, r);
    Stream noise = base.derive(kNoise);
    SkewedQuartic f{cfg.p};
    SecondOrderConfig sc = so_config(cfg);
    SecondOrderOptimizer opt(sc, Vec::Ones(cfg.p), base);
    const double L0 = f.loss(opt.theta());
    LossOracle y = [&](const Vec& x) { return f.loss(x) + cfg.so_noise * noise.normal(); };
    GradientOracle Y = [&](const Vec& x) -> Vec { return f.gradient(x) + gaussian(cfg.p, cfg.so_noise, noise); };
    SoquarticRun run;
    run.norm_loss.reserve(cfg.K + 1);
    run.norm_loss.push_back(1.0);
    for (long k = 0; k < cfg.K; ++k) {
        IterationRecord rec = gradient_free(sc.kind) ? opt.iterate(y) : opt.iterate(Y);
        run.blocked += rec.blocked;
        run.retries += rec.retries;
        run.norm_loss.push_back(f.loss(opt.theta()) / L0);
    }
    return run;
}

SoquarticSummary run_soquartic(const ScenarioConfig& cfg) {
    check_common(cfg);
    SoquarticSummary s;
    s.runs = parallel_map(cfg.replicates, cfg.threads, [&](int r) { return run_soquartic_replicate(cfg, r); });
    const std::size_t n = static_cast<std::size_t>(cfg.K) + 1;
    s.mean_norm_loss.assign(n, 0.0);
    for (const auto& run : s.runs)
        for (std::size_t k = 0; k < n; ++k) s.mean_norm_loss[k] += run.norm_loss[k] / cfg.replicates;
    for (std::size_t b = 0; b + kSmoothWindow <= n; b += kSmoothWindow) {
        double m = 0.0;
        for (std::size_t k = b; k < b + kSmoothWindow; ++k) m += s.mean_norm_loss[k];
        s.smoothed.push_back(m / kSmoothWindow);
    }
    s.terminal = s.mean_norm_loss.back();
    s.nonincreasing = true;
    for (std::size_t i = 1; i < s.smoothed.size(); ++i) s.nonincreasing = s.nonincreasing && s.smoothed[i] <= s.smoothed[i - 1];
    return s;
}

// ---------------------------------------------------------------- bench

// textbook counts for one dense iteration: symmetric eigendecomposition
// (~9p^3), forming Q diag Q^T (2p^3), the rank-two update, the solve
double dense_iteration_flops(int p) {
    double n = p;
    return 9.0 * n * n * n + 2.0 * n * n * n + 4.0 * n * n + 2.0 * n * n + 10.0 * n;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) return 0.0;
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) mx += std::log(x[i]), my += std::log(y[i]);
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double dx = std::log(x[i]) - mx;
        sxy += dx * (std::log(y[i]) - my);
        sxx += dx * dx;
    }
    return sxx > 0 ? sxy / sxx : 0.0;
}

namespace {

// one dense iteration of the same recursion, for timing
void dense_iteration(Mat& Hbar, Vec& theta, const UpdateCoefficients& co, const Vec& G, double a, double tau) {
    Hbar = co.t * Hbar + co.b * (co.u * co.v.transpose() + co.v * co.u.transpose());
    Eigen::SelfAdjointEigenSolver<Mat> es(Hbar);
    Vec lam = es.eigenvalues().cwiseAbs().cwiseMax(tau);
    Mat Hpd = es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
    theta -= a * Hpd.ldlt().solve(G);
}

}  // namespace

BenchSummary run_bench(const ScenarioConfig& cfg) {
    std::vector<int> ps = parse_int_list(cfg.p_list);
    if (ps.empty()) throw ConfigError("bench.p_list is empty");
    if (cfg.bench_iterations < 1) throw ConfigError("bench.iterations must be positive");
    BenchSummary s;
    using clock = std::chrono::steady_clock;
    for (int p : ps) {
        if (p < 2) throw ConfigError("bench.p_list entries must be at least 2");
        ScenarioConfig c = cfg;
        c.p = p;
        Stream base = replicate_base(c, 0);
        Stream noise = base.derive(kNoise);
        SkewedQuartic f{p};
        SecondOrderConfig sc = so_config(c);
        SecondOrderOptimizer opt(sc, Vec::Ones(p), base);
        LossOracle y = [&](const Vec& x) { return f.loss(x) + c.so_noise * noise.normal(); };
        GradientOracle Y = [&](const Vec& x) -> Vec { return f.gradient(x) + gaussian(p, c.so_noise, noise); };

        BenchRow row;
        row.p = p;
        const bool dense = p <= cfg.dense_max_p;
        Mat Hbar = dense ? Mat(Mat::Identity(p, p)) : Mat();
        Vec dtheta = Vec::Ones(p);
        double dense_s = 0.0, eff_s = 0.0;
        for (int it = 0; it < cfg.bench_iterations; ++it) {
            auto t0 = clock::now();
            IterationRecord rec = gradient_free(sc.kind) ? opt.iterate(y) : opt.iterate(Y);
            eff_s += std::chrono::duration<double>(clock::now() - t0).count();
            if (dense) {
                auto t1 = clock::now();
                dense_iteration(Hbar, dtheta, rec.coeffs, rec.G, sc.schedule.a_k(rec.k), rec.tau);
                dense_s += std::chrono::duration<double>(clock::now() - t1).count();
            }
        }
        row.efficient_flops = static_cast<double>(opt.flops().total()) / cfg.bench_iterations;
        row.efficient_seconds = eff_s / cfg.bench_iterations;
        if (dense) {
            row.dense_flops = dense_iteration_flops(p);
            row.dense_seconds = dense_s / cfg.bench_iterations;
        }
        s.rows.push_back(row);
    }
    std::vector<double> xe, ye, xd, yd;
    for (const auto& r : s.rows) {
        xe.push_back(r.p);
        ye.push_back(r.efficient_flops);
        if (r.dense_flops > 0) xd.push_back(r.p), yd.push_back(r.dense_flops);
    }
    s.efficient_slope = loglog_slope(xe, ye);
    s.dense_slope = loglog_slope(xd, yd);
    s.ratio_grows = true;
    double prev = 0.0;
    for (const auto& r : s.rows) {
        if (r.dense_flops <= 0) continue;
        double ratio = r.dense_flops / r.efficient_flops;
        s.ratio_grows = s.ratio_grows && ratio > prev;
        prev = ratio;
    }
    return s;
}

}  // namespace tsa::harness
