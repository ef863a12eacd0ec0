#include "tsa/agent_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tsa/error_bounds.hpp"
#include "tsa/errors.hpp"
#include "tsa/gain_design.hpp"

namespace tsa {

namespace {

constexpr double kPi = 3.14159265358979323846;

Vec2 project_ball(const Vec2& v, double r) {
    double n = v.norm();
    return n > r ? Vec2(v * (r / n)) : v;
}

double cross(const Vec2& o, const Vec2& a, const Vec2& b) {
    return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

// keep the part of poly with (z - m) . n <= 0
std::vector<Vec2> clip_halfplane(const std::vector<Vec2>& poly, const Vec2& m, const Vec2& n) {
    std::vector<Vec2> out;
    const std::size_t N = poly.size();
    for (std::size_t i = 0; i < N; ++i) {
        const Vec2& a = poly[i];
        const Vec2& b = poly[(i + 1) % N];
        double da = (a - m).dot(n), db = (b - m).dot(n);
        if (da <= 0.0) out.push_back(a);
        if ((da < 0.0 && db > 0.0) || (da > 0.0 && db < 0.0)) {
            double t = da / (da - db);
            out.push_back(a + t * (b - a));
        }
    }
    return out;
}

// independent noise per (step, observer, object) so agent ordering never
// changes what anyone measures
Stream noise_stream(const Stream& sensor, long k, int observer, int object) {
    std::uint64_t id = (static_cast<std::uint64_t>(k) << 20) ^ (static_cast<std::uint64_t>(observer) << 10) ^
                       static_cast<std::uint64_t>(object);
    return sensor.derive(id);
}

}  // namespace

MotionModel MotionModel::constant_velocity(double dt) {
    MotionModel m;
    m.dt = dt;
    m.Phi = Mat4::Identity();
    m.Phi(0, 2) = dt;
    m.Phi(1, 3) = dt;
    double d2 = dt * dt / 2.0, d3 = dt * dt * dt / 3.0;
    m.Q << d3, 0, d2, 0, 0, d3, 0, d2, d2, 0, dt, 0, 0, d2, 0, dt;
    return m;
}

Mat4 default_initial_covariance(double box_half_width, double speed) {
    double w = 2.0 * box_half_width;
    Vec4 d(w * w / 12.0, w * w / 12.0, speed * speed / 2.0, speed * speed / 2.0);
    return d.asDiagonal();
}

double azimuth(const Vec2& target, const Vec2& agent) {
    double dE = target.x() - agent.x(), dN = target.y() - agent.y();
    if (dE == 0.0) {
        if (dN > 0.0) return kPi / 2.0;
        if (dN < 0.0) return 3.0 * kPi / 2.0;
        return 0.0;
    }
    double base = std::atan(dN / dE);
    if (dE < 0.0) return base + kPi;
    if (dN < 0.0) return base + 2.0 * kPi;
    return base;
}

double range(const Vec2& target, const Vec2& agent) { return (target - agent).norm(); }

Vec2 measure(const Vec2& target, const Vec2& agent, const Mat2& R, Stream* rng) {
    Vec2 z = target - agent;
    if (rng) {
        Eigen::LLT<Mat2> llt(R);
        Vec2 e(rng->normal(), rng->normal());
        z += llt.matrixL() * e;
    }
    return z;
}

KFBelief kf_predict(const KFBelief& b, const MotionModel& m) {
    KFBelief o;
    o.x = m.Phi * b.x;
    o.P = m.Phi * b.P * m.Phi.transpose() + m.Q;
    o.P = 0.5 * (o.P + o.P.transpose()).eval();
    return o;
}

KFBelief kf_update(const KFBelief& prior, const Vec2& z, const Mat2& R) {
    Eigen::Matrix<double, 2, 4> S = Eigen::Matrix<double, 2, 4>::Zero();
    S(0, 0) = S(1, 1) = 1.0;
    Mat2 inn = S * prior.P * S.transpose() + R;
    Eigen::Matrix<double, 4, 2> K = prior.P * S.transpose() * inn.inverse();
    KFBelief o;
    o.x = prior.x + K * (z - S * prior.x);
    o.P = (Mat4::Identity() - K * S) * prior.P;
    o.P = 0.5 * (o.P + o.P.transpose()).eval();
    return o;
}

double drift_bound_kf(double vx_max, double vy_max, double dt_next, double dt_cur) {
    return vx_max * dt_next + vy_max * dt_cur;
}

int Assignment::target_of(int agent) const {
    for (std::size_t i = 0; i < tracking.size(); ++i)
        if (std::find(tracking[i].begin(), tracking[i].end(), agent) != tracking[i].end()) return static_cast<int>(i);
    return -1;
}

Assignment assign_roles(const Eigen::MatrixXd& D, int j_star) {
    const int I = static_cast<int>(D.rows()), J = static_cast<int>(D.cols());
    if (j_star < 1 || j_star > J / std::max(I, 1)) throw DomainViolation("assign_roles: j* must be in [1, floor(J/I)]");
    std::vector<bool> free(J, true);
    Assignment a;
    a.tracking.resize(I);
    for (int i = 0; i < I; ++i) {
        std::vector<int> cand;
        for (int j = 0; j < J; ++j)
            if (free[j]) cand.push_back(j);
        std::stable_sort(cand.begin(), cand.end(), [&](int l, int r) { return D(i, l) < D(i, r); });
        for (int n = 0; n < j_star; ++n) {
            a.tracking[i].push_back(cand[n]);
            free[cand[n]] = false;
        }
        std::sort(a.tracking[i].begin(), a.tracking[i].end());
    }
    for (int j = 0; j < J; ++j)
        if (free[j]) a.spreading.push_back(j);
    return a;
}

std::vector<Vec2> convex_hull(std::vector<Vec2> pts) {
    std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
        return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
    });
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (pts.size() < 3) return pts;
    std::vector<Vec2> h(2 * pts.size());
    std::size_t k = 0;
    for (const auto& p : pts) {
        while (k >= 2 && cross(h[k - 2], h[k - 1], p) <= 0.0) --k;
        h[k++] = p;
    }
    for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
        while (k >= t && cross(h[k - 2], h[k - 1], pts[i]) <= 0.0) --k;
        h[k++] = pts[i];
    }
    h.resize(k - 1);
    return h;
}

double polygon_area(const std::vector<Vec2>& poly) {
    double s = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const Vec2& a = poly[i];
        const Vec2& b = poly[(i + 1) % poly.size()];
        s += a.x() * b.y() - b.x() * a.y();
    }
    return 0.5 * s;
}

Vec2 polygon_centroid(const std::vector<Vec2>& poly) {
    double A = 0.0, cx = 0.0, cy = 0.0;
    // shift to the first vertex for conditioning
    const Vec2 o = poly.front();
    for (std::size_t i = 0; i < poly.size(); ++i) {
        Vec2 a = poly[i] - o, b = poly[(i + 1) % poly.size()] - o;
        double c = a.x() * b.y() - b.x() * a.y();
        A += c;
        cx += (a.x() + b.x()) * c;
        cy += (a.y() + b.y()) * c;
    }
    A *= 0.5;
    return o + Vec2(cx, cy) / (6.0 * A);
}

Vec2 voronoi_centroid(const std::vector<Vec2>& sites, int idx) {
    const Vec2& p = sites[idx];
    std::vector<Vec2> hull = convex_hull(sites);
    if (hull.size() < 3) return p;
    double scale = 0.0;
    for (const auto& h : hull) scale = std::max(scale, (h - hull.front()).norm());
    if (std::abs(polygon_area(hull)) <= 1e-12 * scale * scale) return p;

    std::vector<Vec2> cell = hull;
    for (std::size_t j = 0; j < sites.size(); ++j) {
        if (static_cast<int>(j) == idx) continue;
        Vec2 n = sites[j] - p;
        if (n.norm() <= 1e-12 * std::max(scale, 1.0)) return p;
        cell = clip_halfplane(cell, 0.5 * (p + sites[j]), n);
        if (cell.size() < 3) return p;
    }
    if (std::abs(polygon_area(cell)) <= 1e-14 * scale * scale) return p;
    return polygon_centroid(cell);
}

std::vector<Vec2> voronoi_centers(const std::vector<Vec2>& sites) {
    std::vector<Vec2> c(sites.size());
    for (std::size_t i = 0; i < sites.size(); ++i) c[i] = voronoi_centroid(sites, static_cast<int>(i));
    return c;
}

Vec4 random_target(const AgentParams& prm, Stream& rng) {
    double h = prm.box_half_width;
    double phi = rng.uniform(0.0, 2.0 * kPi);
    return Vec4(rng.uniform(-h, h), rng.uniform(-h, h), prm.vx_max * std::cos(phi), prm.vx_max * std::sin(phi));
}

Vec4 target_step(const Vec4& x, long k, const AgentParams& prm, const MotionModel& m, Stream& rng) {
    Mat4 T = m.Phi;
    if (k == prm.flip_step) T(2, 2) = -1.0;
    Eigen::LLT<Mat4> llt(m.Q);
    Vec4 e(rng.normal(), rng.normal(), rng.normal(), rng.normal());
    Vec4 nx = T * x + llt.matrixL() * e;
    Vec2 v = project_ball(nx.tail<2>(), prm.vx_max);
    nx.tail<2>() = v;
    return nx;
}

SingleAgentState make_single_agent(const AgentParams& prm, Stream& rng) {
    SingleAgentState s;
    s.target = random_target(prm, rng);
    double h = prm.box_half_width;
    s.y = Vec2(rng.uniform(-h, h), rng.uniform(-h, h));
    s.belief.x = Vec4::Zero();
    s.belief.P = default_initial_covariance(prm.box_half_width, prm.vx_max);
    return s;
}

SingleAgentRow single_agent_step(SingleAgentState& s, const AgentParams& prm, const MotionModel& m, Stream& truth,
                                 Stream& sensor) {
    const double dt = m.dt;
    KFBelief pred = kf_predict(s.belief, m);
    Vec2 xhat = pred.x.head<2>();

    // the truth advances first only so theta* is available for diagnostics;
    // the agent never sees it
    Vec4 next = target_step(s.target, s.k, prm, m, truth);
    Vec2 theta_star = (next.head<2>() - s.y) / dt;

    Vec2 g = dt * dt * s.theta + dt * (s.y - xhat);
    Vec2 theta_new = project_ball(s.theta - prm.gain() * g, prm.vy_max);

    const double L = dt * dt;
    StepCoefficients uv = step_coefficients(L, L, 2.5, prm.gain());
    double M = std::sqrt(pred.P(0, 0) + pred.P(1, 1));
    double B = drift_bound_kf(prm.vx_max, prm.vy_max, dt, dt);
    double prev_err = (s.theta - theta_star).norm();
    if (s.bound < 0.0) s.bound = prev_err;
    s.bound = loose_per_path_bound(s.bound, uv.u, uv.v, M, B);

    s.y += dt * theta_new;
    s.theta = theta_new;
    s.target = next;
    Stream ns = noise_stream(sensor, s.k, 0, 0);
    Vec2 z = measure(next.head<2>(), s.y, prm.R(), &ns);
    s.belief = kf_update(pred, z + s.y, prm.R());

    SingleAgentRow row;
    row.k = s.k;
    row.distance = (next.head<2>() - s.y).norm();
    row.theta_error = (theta_new - theta_star).norm();
    row.loose_bound = s.bound;
    row.M = M;
    ++s.k;
    return row;
}

World make_world(int I, int J, int j_star, const AgentParams& prm, Stream& rng) {
    if (I < 1 || J < I) throw DomainViolation("make_world: need 1 <= I <= J");
    World w;
    w.j_star = j_star;
    for (int i = 0; i < I; ++i) w.targets.push_back(random_target(prm, rng));
    double h = prm.box_half_width;
    KFBelief b0;
    b0.P = default_initial_covariance(prm.box_half_width, prm.vx_max);
    for (int j = 0; j < J; ++j) {
        AgentView a;
        a.y = Vec2(rng.uniform(-h, h), rng.uniform(-h, h));
        a.targets.assign(I, b0);
        a.others.assign(J, b0);
        w.agents.push_back(a);
    }
    return w;
}

void multi_agent_step(World& w, const AgentParams& prm, const MotionModel& m, Stream& truth, Stream& sensor,
                      const std::vector<int>& order) {
    const int I = static_cast<int>(w.targets.size());
    const int J = static_cast<int>(w.agents.size());
    const double dt = m.dt;
    std::vector<int> ord = order;
    if (ord.empty()) {
        ord.resize(J);
        std::iota(ord.begin(), ord.end(), 0);
    }

    const std::vector<AgentView> snap = w.agents;
    std::vector<AgentView> next = snap;

    for (int j : ord) {
        const AgentView& me = snap[j];
        AgentView& out = next[j];
        std::vector<KFBelief> tp(I), op(J);
        for (int i = 0; i < I; ++i) tp[i] = kf_predict(me.targets[i], m);
        for (int o = 0; o < J; ++o)
            if (o != j) op[o] = kf_predict(me.others[o], m);

        std::vector<Vec2> pos(J);
        for (int o = 0; o < J; ++o) pos[o] = o == j ? me.y : Vec2(op[o].x.head<2>());
        Eigen::MatrixXd D(I, J);
        for (int i = 0; i < I; ++i)
            for (int o = 0; o < J; ++o) D(i, o) = (tp[i].x.head<2>() - pos[o]).squaredNorm();
        Assignment as = assign_roles(D, w.j_star);
        int tgt = as.target_of(j);

        Vec2 aim = tgt >= 0 ? Vec2(tp[tgt].x.head<2>()) : voronoi_centroid(pos, j);
        Vec2 g = dt * dt * me.theta + dt * (me.y - aim);
        out.theta = project_ball(me.theta - prm.gain() * g, prm.vy_max);
        out.y = me.y + dt * out.theta;
        out.role = tgt;
        out.targets = std::move(tp);
        out.others = std::move(op);
    }

    for (int i = 0; i < I; ++i) w.targets[i] = target_step(w.targets[i], w.k, prm, m, truth);

    for (int j = 0; j < J; ++j) {
        AgentView& a = next[j];
        for (int i = 0; i < I; ++i) {
            Stream ns = noise_stream(sensor, w.k, j, i);
            Vec2 z = measure(w.targets[i].head<2>(), a.y, prm.R(), &ns);
            a.targets[i] = kf_update(a.targets[i], z + a.y, prm.R());
        }
        for (int o = 0; o < J; ++o) {
            if (o == j) continue;
            Stream ns = noise_stream(sensor, w.k, j, I + o);
            Vec2 z = measure(next[o].y, a.y, prm.R(), &ns);
            a.others[o] = kf_update(a.others[o], z + a.y, prm.R());
        }
    }
    w.agents = std::move(next);
    ++w.k;
}

}  // namespace tsa
