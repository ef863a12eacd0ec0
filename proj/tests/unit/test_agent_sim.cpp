#include <doctest.h>

#include <cmath>

#include "tsa/agent_sim.hpp"
#include "tsa/errors.hpp"

using namespace tsa;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("constant-velocity model") {
    MotionModel m = MotionModel::constant_velocity(0.3);
    CHECK(m.Phi(0, 2) == doctest::Approx(0.3));
    CHECK(m.Phi(1, 3) == doctest::Approx(0.3));
    CHECK(m.Q(0, 0) == doctest::Approx(0.009));
    CHECK(m.Q(0, 2) == doctest::Approx(0.045));
    CHECK(m.Q(2, 2) == doctest::Approx(0.3));
    CHECK(m.Q(0, 1) == 0.0);
    CHECK(m.Q == m.Q.transpose());
    Eigen::SelfAdjointEigenSolver<Mat4> es(m.Q);
    CHECK(es.eigenvalues().minCoeff() > 0.0);
}

TEST_CASE("initial covariance") {
    Mat4 P = default_initial_covariance(5, 15);
    CHECK(P(0, 0) == doctest::Approx(25.0 / 3));
    CHECK(P(1, 1) == doctest::Approx(25.0 / 3));
    CHECK(P(2, 2) == doctest::Approx(112.5));
    CHECK(P(3, 3) == doctest::Approx(112.5));
    CHECK(std::sqrt(P(0, 0) + P(1, 1)) == doctest::Approx(4.0825).epsilon(1e-4));
}

TEST_CASE("azimuth branches") {
    Vec2 o(0, 0);
    CHECK(azimuth(Vec2(1, 1), o) == doctest::Approx(kPi / 4));
    CHECK(azimuth(Vec2(-1, 1), o) == doctest::Approx(3 * kPi / 4));
    CHECK(azimuth(Vec2(-1, -1), o) == doctest::Approx(5 * kPi / 4));
    CHECK(azimuth(Vec2(1, -1), o) == doctest::Approx(7 * kPi / 4));
    CHECK(azimuth(Vec2(0, 2), o) == doctest::Approx(kPi / 2));
    CHECK(azimuth(Vec2(0, -2), o) == doctest::Approx(3 * kPi / 2));
    CHECK(azimuth(Vec2(3, 0), o) == 0.0);
    CHECK(azimuth(Vec2(-3, 0), o) == doctest::Approx(kPi));
    CHECK(range(Vec2(4, 6), Vec2(1, 2)) == doctest::Approx(5.0));
    CHECK(measure(Vec2(4, 6), Vec2(1, 2), Mat2::Identity(), nullptr) == Vec2(3, 4));
}

TEST_CASE("Kalman filter") {
    MotionModel m = MotionModel::constant_velocity(0.3);
    KFBelief b;
    b.x << 1, 2, 3, 4;
    b.P = Mat4::Zero();
    KFBelief pr = kf_predict(b, m);
    CHECK(pr.x(0) == doctest::Approx(1.9));
    CHECK(pr.x(1) == doctest::Approx(3.2));
    CHECK(pr.P == m.Q);

    // a confident prior barely moves; a vague prior jumps to the observation
    KFBelief sure = b;
    sure.P = 1e-12 * Mat4::Identity();
    CHECK((kf_update(sure, Vec2(50, 50), Mat2::Identity()).x - b.x).norm() < 1e-9);
    KFBelief vague = b;
    vague.P = 1e12 * Mat4::Identity();
    KFBelief post = kf_update(vague, Vec2(50, 50), Mat2::Identity());
    CHECK((post.x.head<2>() - Vec2(50, 50)).norm() < 1e-6);
    CHECK(post.P(0, 0) < 1.0 + 1e-6);
    CHECK(post.P == post.P.transpose());
}

TEST_CASE("drift bound") {
    CHECK(drift_bound_kf(15, 30, 0.3, 0.3) == doctest::Approx(13.5));
}

TEST_CASE("role assignment") {
    Eigen::MatrixXd D(2, 5);
    D << 1, 9, 2, 8, 7,
         3, 1, 9, 9, 2;
    Assignment a = assign_roles(D, 2);
    CHECK(a.tracking[0] == std::vector<int>{0, 2});
    CHECK(a.tracking[1] == std::vector<int>{1, 4});
    CHECK(a.spreading == std::vector<int>{3});
    CHECK(a.target_of(4) == 1);
    CHECK(a.target_of(3) == -1);
    CHECK_THROWS_AS(assign_roles(D, 3), DomainViolation);
    CHECK_THROWS_AS(assign_roles(D, 0), DomainViolation);

    // the first target claims a contested agent
    Eigen::MatrixXd E(2, 2);
    E << 1, 5, 0.5, 6;
    Assignment b = assign_roles(E, 1);
    CHECK(b.tracking[0] == std::vector<int>{0});
    CHECK(b.tracking[1] == std::vector<int>{1});
}

TEST_CASE("polygons and Voronoi centroids") {
    std::vector<Vec2> sq{{0, 0}, {2, 0}, {2, 2}, {0, 2}, {1, 1}};
    auto hull = convex_hull(sq);
    CHECK(hull.size() == 4);
    CHECK(std::abs(polygon_area(hull)) == doctest::Approx(4.0));
    CHECK((polygon_centroid(hull) - Vec2(1, 1)).norm() < 1e-12);

    std::vector<Vec2> corners{{0, 0}, {2, 0}, {2, 2}, {0, 2}};
    Vec2 c0 = voronoi_centroid(corners, 0);
    CHECK((c0 - Vec2(0.5, 0.5)).norm() < 1e-12);
    auto all = voronoi_centers(corners);
    CHECK((all[2] - Vec2(1.5, 1.5)).norm() < 1e-12);

    std::vector<Vec2> line{{0, 0}, {1, 1}, {2, 2}};
    CHECK(voronoi_centroid(line, 1) == Vec2(1, 1));
    std::vector<Vec2> dup{{0, 0}, {0, 0}, {1, 0}, {0, 1}};
    CHECK(voronoi_centroid(dup, 0) == Vec2(0, 0));
}

TEST_CASE("target motion") {
    AgentParams prm;
    MotionModel m = MotionModel::constant_velocity(prm.dt);
    Stream rng(3);
    Vec4 x = random_target(prm, rng);
    CHECK(std::abs(x(0)) <= prm.box_half_width);
    CHECK(x.tail<2>().norm() == doctest::Approx(prm.vx_max));
    for (long k = 0; k < 1000; ++k) {
        x = target_step(x, k, prm, m, rng);
        CHECK(x.tail<2>().norm() <= prm.vx_max + 1e-12);
    }
}

TEST_CASE("one target and one agent reproduce the single-agent run") {
    AgentParams prm;
    MotionModel m = MotionModel::constant_velocity(prm.dt);
    Stream init(10), truth(11), sensor(12);
    Stream init2 = init, truth2 = truth, sensor2 = sensor;
    SingleAgentState s = make_single_agent(prm, init);
    World w = make_world(1, 1, 1, prm, init2);
    for (int k = 0; k < 300; ++k) {
        single_agent_step(s, prm, m, truth, sensor);
        multi_agent_step(w, prm, m, truth2, sensor2);
        CHECK(w.agents[0].y == s.y);
        CHECK(w.targets[0] == s.target);
        CHECK(w.agents[0].role == 0);
    }
}

TEST_CASE("agent loop order does not matter") {
    AgentParams prm;
    MotionModel m = MotionModel::constant_velocity(prm.dt);
    Stream init(20);
    Stream i2 = init;
    World a = make_world(2, 5, 1, prm, init), b = make_world(2, 5, 1, prm, i2);
    Stream ta(21), sa(22), tb(21), sb(22);
    for (int k = 0; k < 100; ++k) {
        multi_agent_step(a, prm, m, ta, sa);
        multi_agent_step(b, prm, m, tb, sb, {4, 2, 0, 3, 1});
    }
    for (int j = 0; j < 5; ++j) {
        CHECK(a.agents[j].y == b.agents[j].y);
        CHECK(a.agents[j].role == b.agents[j].role);
    }
}

TEST_CASE("world construction") {
    AgentParams prm;
    Stream rng(1);
    CHECK_THROWS_AS(make_world(3, 2, 1, prm, rng), DomainViolation);
    World w = make_world(2, 6, 3, prm, rng);
    CHECK(w.targets.size() == 2);
    CHECK(w.agents.size() == 6);
    CHECK(w.agents[0].targets.size() == 2);
}
