#pragma once

#include <Eigen/Dense>
#include <vector>

#include "tsa/rng.hpp"

namespace tsa {

using Vec2 = Eigen::Vector2d;
using Vec4 = Eigen::Vector4d;
using Mat2 = Eigen::Matrix2d;
using Mat4 = Eigen::Matrix4d;

struct MotionModel {
    double dt = 0.3;
    Mat4 Phi = Mat4::Identity();
    Mat4 Q = Mat4::Zero();
    static MotionModel constant_velocity(double dt);
};

struct KFBelief {
    Vec4 x = Vec4::Zero();
    Mat4 P = Mat4::Zero();
};

// diag(25/3, 25/3, 225/2, 225/2)
Mat4 default_initial_covariance(double box_half_width = 5.0, double speed = 15.0);

// bearing from agent to target with the three-branch arctan convention, in [0, 2pi)
double azimuth(const Vec2& target, const Vec2& agent);
double range(const Vec2& target, const Vec2& agent);

// noiseless when rng is null
Vec2 measure(const Vec2& target, const Vec2& agent, const Mat2& R, Stream* rng);

KFBelief kf_predict(const KFBelief& b, const MotionModel& m);
// z is an absolute position observation
KFBelief kf_update(const KFBelief& prior, const Vec2& z, const Mat2& R);

double drift_bound_kf(double vx_max, double vy_max, double dt_next, double dt_cur);

struct Assignment {
    std::vector<std::vector<int>> tracking;  // per target
    std::vector<int> spreading;
    // -1 for spreading agents
    int target_of(int agent) const;
};

// D is I x J squared distances
Assignment assign_roles(const Eigen::MatrixXd& D, int j_star);

std::vector<Vec2> convex_hull(std::vector<Vec2> pts);
double polygon_area(const std::vector<Vec2>& poly);
Vec2 polygon_centroid(const std::vector<Vec2>& poly);

// centroid of the Voronoi cell of sites[idx] clipped to the hull of all sites;
// falls back to the site itself on degenerate geometry
Vec2 voronoi_centroid(const std::vector<Vec2>& sites, int idx);
std::vector<Vec2> voronoi_centers(const std::vector<Vec2>& sites);

struct AgentParams {
    double dt = 0.3;
    double vx_max = 15.0;
    double vy_max = 30.0;
    double gain_scale = 1.15;  // a = gain_scale / dt^2
    double meas_var = 10.0;
    double box_half_width = 5.0;
    int flip_step = 500;  // target's east velocity reverses on this step
    double gain() const { return gain_scale / (dt * dt); }
    Mat2 R() const { return meas_var * Mat2::Identity(); }
};

struct Target {
    Vec4 x;
};

// truth motion: constant velocity with process noise, east velocity flip at
// flip_step, speed clamped to vx_max
Vec4 target_step(const Vec4& x, long k, const AgentParams& prm, const MotionModel& m, Stream& rng);
Vec4 random_target(const AgentParams& prm, Stream& rng);

struct SingleAgentState {
    long k = 0;
    Vec2 y = Vec2::Zero();
    Vec2 theta = Vec2::Zero();
    KFBelief belief;
    Vec4 target;
    double bound = -1.0;  // loose bound carried between steps; negative until seeded
};

struct SingleAgentRow {
    long k = 0;
    double distance = 0.0;  // |x_{k+1} - y_{k+1}|
    double theta_error = 0.0;
    double loose_bound = 0.0;
    double M = 0.0;
};

SingleAgentState make_single_agent(const AgentParams& prm, Stream& rng);

// one loop body; truth and sensing draw from their own streams
SingleAgentRow single_agent_step(SingleAgentState& s, const AgentParams& prm, const MotionModel& m, Stream& truth,
                                 Stream& sensor);

struct AgentView {
    Vec2 y = Vec2::Zero();
    Vec2 theta = Vec2::Zero();
    std::vector<KFBelief> targets;  // this agent's beliefs about each target
    std::vector<KFBelief> others;   // beliefs about every agent (own slot unused)
    int role = -1;
};

struct World {
    long k = 0;
    std::vector<Vec4> targets;
    std::vector<AgentView> agents;
    int j_star = 1;
};

World make_world(int I, int J, int j_star, const AgentParams& prm, Stream& rng);

// agents act on a start-of-step snapshot, so iteration order is irrelevant;
// `order` permutes the agent loop (identity when empty)
void multi_agent_step(World& w, const AgentParams& prm, const MotionModel& m, Stream& truth, Stream& sensor,
                      const std::vector<int>& order = {});

}  // namespace tsa
