#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <limits>

#include "tsa/errors.hpp"
#include "tsa/harness/emit.hpp"

using namespace tsa::harness;
using tsa::Mat;
using tsa::Vec;

namespace {

ScenarioConfig small_track(int reps, int threads) {
    ScenarioConfig cfg = ScenarioConfig::defaults_for("evolution1");
    cfg.K = 60;
    cfg.replicates = reps;
    cfg.threads = threads;
    return cfg;
}

std::string tmp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / ("tsa_test_" + name)).string();
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

}  // namespace

TEST_CASE("a single replicate is the run itself") {
    ScenarioConfig cfg = small_track(1, 1);
    TrackSummary s = run_track(cfg);
    TrackRun r = run_track_replicate(cfg, s.a, 0);
    REQUIRE(r.err.size() == s.emp_mad.size());
    for (std::size_t k = 0; k < r.err.size(); ++k) {
        CHECK(s.emp_mad[k] == r.err[k]);
        CHECK(s.emp_rms[k] == doctest::Approx(r.err[k]));
    }
}

TEST_CASE("replicates do not depend on scheduling") {
    TrackSummary one = run_track(small_track(6, 1));
    TrackSummary many = run_track(small_track(6, 4));
    CHECK(one.emp_rms == many.emp_rms);
    CHECK(one.emp_mad == many.emp_mad);
    // computing replicate 4 on its own gives the same path as inside the batch
    TrackRun alone = run_track_replicate(small_track(6, 1), one.a, 4);
    CHECK(alone.err == one.runs[4].err);
}

TEST_CASE("parallel map keeps order") {
    auto v = parallel_map(37, 5, [](int r) { return r * r; });
    for (int r = 0; r < 37; ++r) CHECK(v[r] == r * r);
}

TEST_CASE("different seeds give different paths") {
    ScenarioConfig a = small_track(1, 1), b = small_track(1, 1);
    b.seed = a.seed + 1;
    CHECK(run_track(a).emp_mad != run_track(b).emp_mad);
}

TEST_CASE("CSV round trip is bitwise") {
    Table t{{"x", "y"}, {}};
    const double vals[] = {0.1, 1.0 / 3.0, -2.5e-310, 6.02214076e23, std::numeric_limits<double>::max(),
                           std::numeric_limits<double>::denorm_min(), -0.0, 123456789.0};
    for (double v : vals) t.rows.push_back({v, std::nextafter(v, 1.0)});
    t.rows.push_back({std::numeric_limits<double>::quiet_NaN(), 1.0});
    const std::string path = tmp_path("roundtrip.csv");
    write_csv(t, path);
    Table back = read_csv(path);
    CHECK(back.header == t.header);
    REQUIRE(back.rows.size() == t.rows.size());
    for (std::size_t i = 0; i + 1 < t.rows.size(); ++i)
        for (int j = 0; j < 2; ++j) CHECK(same_bits(back.rows[i][j], t.rows[i][j]));
    CHECK(std::isnan(back.rows.back()[0]));
    std::filesystem::remove(path);
}

TEST_CASE("empty tables keep their header") {
    const std::string path = tmp_path("empty.csv");
    write_csv(Table{{"k", "empirical", "bound"}, {}}, path);
    Table back = read_csv(path);
    CHECK(back.header == std::vector<std::string>{"k", "empirical", "bound"});
    CHECK(back.rows.empty());
    std::filesystem::remove(path);
}

TEST_CASE("I/O errors name the path") {
    try {
        read_csv("/nonexistent/dir/file.csv");
        FAIL("expected an error");
    } catch (const tsa::Error& e) {
        CHECK(std::string(e.what()).find("/nonexistent/dir/file.csv") != std::string::npos);
    }
    CHECK_THROWS_AS(write_csv(Table{{"a"}, {{1.0, 2.0}}}, tmp_path("bad.csv")), tsa::Error);
}

TEST_CASE("plot tables") {
    ScenarioConfig cfg = small_track(3, 1);
    TrackSummary s = run_track(cfg);
    REQUIRE(s.has_bound);
    Table rms = bound_plot_table(s, true), mad = bound_plot_table(s, false);
    CHECK(rms.header == std::vector<std::string>{"k", "empirical", "bound"});
    CHECK(rms.rows.size() == static_cast<std::size_t>(cfg.K + 1));
    CHECK(mad.rows[5][2] == s.mad_bound[5]);
    Table full = track_table(s);
    CHECK(full.header.size() == 6);

    ScenarioConfig lms = ScenarioConfig::defaults_for("lms");
    lms.K = 20;
    lms.replicates = 2;
    TrackSummary ls = run_track(lms);
    CHECK_FALSE(ls.has_bound);
    CHECK(bound_plot_table(ls, true).rows.empty());
    CHECK(std::isnan(track_table(ls).rows[3][3]));
}

TEST_CASE("config parsing") {
    KeyValues kv = parse_config_text("# comment\n[run]\nK = 200  # trailing\nseed=7\n\n[gain]\npolicy = midpoint\n");
    REQUIRE(kv.entries.size() == 3);
    CHECK(kv.entries[0].first == "run.K");
    CHECK(kv.entries[0].second == "200");
    ScenarioConfig cfg = ScenarioConfig::defaults_for("evolution1");
    cfg.apply(kv);
    CHECK(cfg.K == 200);
    CHECK(cfg.seed == 7);
    CHECK(cfg.policy == "midpoint");

    CHECK_THROWS_AS(parse_config_text("[run\nK=1\n"), tsa::ConfigError);
    CHECK_THROWS_AS(parse_config_text("just words\n"), tsa::ConfigError);
    CHECK_THROWS_AS(cfg.set("run.bogus", "1"), tsa::ConfigError);
    CHECK_THROWS_AS(cfg.set("run.K", "ten"), tsa::ConfigError);
    CHECK_THROWS_AS(cfg.set("gain.policy", "whatever"), tsa::ConfigError);
    CHECK_THROWS_AS(ScenarioConfig::defaults_for("nope"), tsa::ConfigError);
    CHECK(parse_int_list("250, 500,1000") == std::vector<int>{250, 500, 1000});
}

TEST_CASE("content hash") {
    CHECK(git_blob_hash("") == "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
    CHECK(git_blob_hash("hello\n") == "ce013625030ba8dba906f756967f9e9ca394464a");
    ScenarioConfig a = ScenarioConfig::defaults_for("jump"), b = ScenarioConfig::defaults_for("jump");
    CHECK(a.content_hash() == b.content_hash());
    CHECK(a.canonical() == b.canonical());
    b.set("run.K", "4999");
    CHECK(a.content_hash() != b.content_hash());
    CHECK(a.echo().at("run.scenario") == "jump");
    CHECK(scenario_hash("jump") == scenario_hash("jump"));
    CHECK(scenario_hash("jump") != scenario_hash("model1"));
    for (const auto& s : registered_scenarios()) CHECK(is_registered(s));
    CHECK_FALSE(is_registered("nope"));
}

TEST_CASE("summary json") {
    ScenarioConfig cfg = small_track(2, 1);
    TrackSummary s = run_track(cfg);
    Check c = check_bound_dominance(s, cfg.burn_in, 0.1);
    auto j = summary_json(cfg, metrics_json(s), {c});
    CHECK(j["scenario"] == "evolution1");
    CHECK(j["config_hash"] == cfg.content_hash());
    CHECK(j["checks"].size() == 1);
    CHECK(j["pass"] == c.pass);
    CHECK(format_check(c).rfind(c.pass ? "PASS" : "FAIL", 0) == 0);
}

TEST_CASE("complexity helpers") {
    std::vector<double> x{10, 20, 40, 80}, y2, y3;
    for (double v : x) y2.push_back(3 * v * v), y3.push_back(dense_iteration_flops(static_cast<int>(v)));
    CHECK(loglog_slope(x, y2) == doctest::Approx(2.0));
    CHECK(loglog_slope(x, y3) > 2.8);
    CHECK(dense_iteration_flops(10) == doctest::Approx(11000 + 600 + 100));
}

TEST_CASE("skewed quartic gradient") {
    SkewedQuartic f{6};
    Vec th(6);
    th << 0.3, -1.0, 0.7, 0.1, -0.4, 2.0;
    Vec g = f.gradient(th);
    for (int i = 0; i < 6; ++i) {
        Vec e = Vec::Zero(6);
        e(i) = 1e-6;
        double fd = (f.loss(th + e) - f.loss(th - e)) / 2e-6;
        CHECK(g(i) == doctest::Approx(fd).epsilon(1e-6));
    }
    CHECK(f.loss(Vec::Zero(6)) == 0.0);
}

TEST_CASE("simulation Hessian") {
    Mat H = sim_hessian(30, 5);
    Eigen::SelfAdjointEigenSolver<Mat> es(H);
    CHECK(es.eigenvalues()(0) == doctest::Approx(5.0).epsilon(1e-3));
    CHECK(es.eigenvalues()(1) == doctest::Approx(30.0).epsilon(1e-3));
}

TEST_CASE("partition predicate") {
    Eigen::MatrixXd d(4, 2);
    d << 5, 200, 150, 150, 300, 20, 120, 130;
    CHECK(partition_ok(d));
    d(1, 1) = 50;
    CHECK_FALSE(partition_ok(d));
}
