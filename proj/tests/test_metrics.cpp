#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include <algodiv/metrics.hpp>

using namespace algodiv;

namespace {

ClusterSizes sizes_of(std::vector<std::size_t> sizes) {
    ClusterSizes cs;
    for (const std::size_t s : sizes) cs.n += s;
    cs.sizes = std::move(sizes);
    return cs;
}

}  // namespace

TEST_CASE("da_at_k matches the worked [2,3] example", "[metrics]") {
    const ClusterSizes cs = sizes_of({2, 3});
    CHECK(da_at_k(cs, 1) == 1.0);
    // k=2: (1 − C(3,2)/C(5,2)) + (1 − C(2,2)/C(5,2)) = 0.7 + 0.9
    CHECK_THAT(da_at_k(cs, 2), Catch::Matchers::WithinAbs(1.6, 1e-12));
    CHECK_THAT(da_at_k(cs, 3), Catch::Matchers::WithinAbs(1.9, 1e-12));
    CHECK(da_at_k(cs, 5) == 2.0);
    CHECK(da_at_k(cs, 6) == 2.0);   // saturation past k = n
    CHECK(da_at_k(cs, 50) == 2.0);  // stays saturated
}

TEST_CASE("da_at_k rejects bad arguments", "[metrics]") {
    const ClusterSizes cs = sizes_of({2, 3});
    CHECK_THROWS_AS(da_at_k(cs, 0), std::invalid_argument);
    CHECK_THROWS_AS(da_at_k(cs, -1), std::invalid_argument);
    CHECK_THROWS_AS(da_at_k(ClusterSizes{}, 1), std::invalid_argument);
}

TEST_CASE("da_at_k is monotone and bounded on a mixed partition", "[metrics]") {
    const ClusterSizes cs = sizes_of({7, 1, 1, 4, 2});
    double prev = 0.0;
    for (int k = 1; k <= static_cast<int>(cs.n); ++k) {
        const double v = da_at_k(cs, k);
        CHECK(v >= prev);
        CHECK(v >= 1.0);
        CHECK(v <= std::min<double>(k, static_cast<double>(cs.sizes.size())));
        prev = v;
    }
    CHECK(prev == static_cast<double>(cs.sizes.size()));
}

TEST_CASE("Monte-Carlo estimate brackets the closed form", "[metrics]") {
    const ClusterSizes cs = sizes_of({2, 3, 5, 1});
    const double exact = da_at_k(cs, 4);
    const McEstimate mc = da_at_k_mc_stats(cs, 4, 40000, /*seed=*/123);
    const double tol = std::max(5.0 * mc.stderr_mean, 1e-9);
    CHECK(std::abs(mc.mean - exact) <= tol);
    CHECK(mc.trials == 40000);
}

TEST_CASE("ea fixtures and invariances", "[metrics]") {
    CHECK_THAT(ea(sizes_of({4, 4})), Catch::Matchers::WithinAbs(2.0, 1e-12));
    CHECK_THAT(ea(sizes_of({3, 1})), Catch::Matchers::WithinAbs(1.754765, 1e-6));
    CHECK(ea(sizes_of({5})) == 1.0);                      // one cluster
    CHECK_THAT(ea(sizes_of({1, 1, 1})), Catch::Matchers::WithinAbs(3.0, 1e-12));
    // Bitwise permutation invariance.
    CHECK(ea(sizes_of({2, 7, 3, 3})) == ea(sizes_of({3, 3, 7, 2})));
    CHECK_THROWS_AS(ea(ClusterSizes{}), std::invalid_argument);
}

TEST_CASE("adc samples the fixed grid", "[metrics]") {
    const ClusterSizes cs = sizes_of({2, 3});
    const Curve c = adc(cs, 25);
    REQUIRE(c.ks.size() == 25);
    REQUIRE(c.values.size() == 25);
    CHECK(c.ks.front() == 1);
    CHECK(c.ks.back() == 25);
    CHECK(c.values[0] == 1.0);
    CHECK_THAT(c.values[1], Catch::Matchers::WithinAbs(1.6, 1e-12));
    // Saturated tail: k >= n means the whole set is drawn.
    for (std::size_t i = 4; i < c.values.size(); ++i) CHECK(c.values[i] == 2.0);
    CHECK_THROWS_AS(adc(cs, 1), std::invalid_argument);
}

TEST_CASE("nauadc matches the hand-computed fixture", "[metrics]") {
    Curve c;
    c.ks = {1, 2, 3};
    c.values = {1.0, 1.6, 1.9};
    // Trapezoid area 3.05 over width 2.
    CHECK_THAT(nauadc(c), Catch::Matchers::WithinAbs(1.525, 1e-12));
}

TEST_CASE("nauadc of a constant curve is that constant, exactly", "[metrics]") {
    for (const double v : {1.0, 2.5, 17.125, 3.3333333333333335}) {
        Curve c;
        c.ks = {1, 5, 9, 25};
        c.values = {v, v, v, v};
        CHECK(nauadc(c) == v);
    }
}

TEST_CASE("nauadc validates its grid", "[metrics]") {
    Curve c;
    c.ks = {1};
    c.values = {1.0};
    CHECK_THROWS_AS(nauadc(c), std::invalid_argument);
    c.ks = {3, 2};
    c.values = {1.0, 1.0};
    CHECK_THROWS_AS(nauadc(c), std::invalid_argument);
    c.ks = {1, 2, 3};
    c.values = {1.0, 1.0};  // length mismatch
    CHECK_THROWS_AS(nauadc(c), std::invalid_argument);
}

TEST_CASE("pass_at_k fixtures", "[metrics]") {
    CHECK(pass_at_k(100, 0, 10) == 0.0);
    CHECK(pass_at_k(100, 100, 1) == 1.0);
    CHECK_THAT(pass_at_k(5, 2, 3), Catch::Matchers::WithinAbs(0.9, 1e-12));
    CHECK_THAT(pass_at_k(10, 3, 1), Catch::Matchers::WithinAbs(0.3, 1e-12));
    CHECK(pass_at_k(4, 1, 4) == 1.0);  // k > n − c forces a hit
}

TEST_CASE("pass_at_k rejects inconsistent counts", "[metrics]") {
    CHECK_THROWS_AS(pass_at_k(5, 6, 1), std::invalid_argument);
    CHECK_THROWS_AS(pass_at_k(5, 2, 0), std::invalid_argument);
    CHECK_THROWS_AS(pass_at_k(5, 2, 6), std::invalid_argument);
    CHECK_THROWS_AS(pass_at_k(0, 0, 1), std::invalid_argument);
}

namespace {

Clustering tiny_clustering() {
    Clustering c;
    c.problem_id = "p1";
    c.set_label = "modelA:correct";
    c.order_seed = 3;
    c.judge_id = "oracle:labels";
    c.forced_default_count = 1;
    Cluster a;
    a.leader_id = "s0";
    a.member_ids = {"s0", "s2"};
    Cluster b;
    b.leader_id = "s1";
    b.member_ids = {"s1", "s3", "s4"};
    c.clusters = {a, b};
    c.skipped_pairs.push_back({"s0", "s4", "timeout"});
    return c;
}

}  // namespace

TEST_CASE("make_report assembles metrics and provenance", "[metrics]") {
    const DiversityReport r = make_report(tiny_clustering(), /*total_samples=*/12,
                                          /*total_correct=*/5, {1, 10}, 25);
    CHECK(r.problem_id == "p1");
    CHECK(r.set_label == "modelA:correct");
    CHECK(r.n == 5);
    CHECK(r.m == 2);
    REQUIRE(r.da_curve.ks.size() == 25);
    CHECK_THAT(r.da_curve.values[1], Catch::Matchers::WithinAbs(1.6, 1e-12));
    CHECK(r.ea == ea(sizes_of({2, 3})));
    CHECK(r.nauadc == nauadc(r.da_curve));
    REQUIRE(r.pass_at.count(1) == 1);
    REQUIRE(r.pass_at.count(10) == 1);
    CHECK_THAT(r.pass_at.at(1), Catch::Matchers::WithinAbs(5.0 / 12.0, 1e-12));
    CHECK(r.judge_id == "oracle:labels");
    CHECK(r.flags.forced_default_count == 1);
    CHECK(r.flags.skipped_pairs == 1);
}

TEST_CASE("make_report omits pass@k beyond the sample count", "[metrics]") {
    const DiversityReport r = make_report(tiny_clustering(), /*total_samples=*/5,
                                          /*total_correct=*/5, {1, 10}, 25);
    CHECK(r.pass_at.count(1) == 1);
    CHECK(r.pass_at.count(10) == 0);
}

TEST_CASE("reports round-trip through json", "[metrics]") {
    const DiversityReport r =
            make_report(tiny_clustering(), 12, 5, {1, 10}, 25);
    const json j = r;
    const DiversityReport back = j.get<DiversityReport>();
    CHECK(json(back).dump() == j.dump());
    CHECK(back.pass_at.at(10) == r.pass_at.at(10));
    CHECK(back.flags.skipped_pairs == 1);
}

TEST_CASE("aggregate groups by source, difficulty, and label", "[metrics]") {
    Problem p1;
    p1.id = "p1";
    p1.source = "apps";
    p1.difficulty = "interview";
    Problem p2;
    p2.id = "p2";
    p2.source = "apps";
    p2.difficulty = "interview";
    Problem p3;
    p3.id = "p3";
    p3.source = "apps";
    p3.difficulty = "competition";
    const std::vector<Problem> problems = {p1, p2, p3};
    const auto index = problem_index(problems);

    const auto report_for = [](std::string pid, double ea_v, double na, double p10) {
        DiversityReport r;
        r.problem_id = std::move(pid);
        r.set_label = "m";
        r.n = 10;
        r.m = 3;
        r.ea = ea_v;
        r.nauadc = na;
        r.pass_at[10] = p10;
        return r;
    };
    const std::vector<DiversityReport> reports = {
            report_for("p1", 2.0, 2.5, 0.5),
            report_for("p2", 4.0, 3.5, 0.7),
            report_for("p3", 3.0, 3.0, 0.9),
    };

    const AggregateResult agg = aggregate(reports, index, 1);
    REQUIRE(agg.groups.size() == 2);
    CHECK(agg.excluded_reports == 0);
    // Sorted by (source, difficulty, label): competition before interview.
    CHECK(agg.groups[0].difficulty == "competition");
    CHECK(agg.groups[0].problems == 1);
    CHECK(agg.groups[1].difficulty == "interview");
    CHECK(agg.groups[1].problems == 2);
    CHECK_THAT(agg.groups[1].mean_ea, Catch::Matchers::WithinAbs(3.0, 1e-12));
    CHECK_THAT(agg.groups[1].mean_nauadc, Catch::Matchers::WithinAbs(3.0, 1e-12));
    CHECK_THAT(agg.groups[1].mean_pass_at.at(10), Catch::Matchers::WithinAbs(0.6, 1e-12));
}

TEST_CASE("aggregate applies min_n and tolerates unknown problems", "[metrics]") {
    Problem p1;
    p1.id = "p1";
    p1.source = "apps";
    p1.difficulty = "interview";
    const std::vector<Problem> problems = {p1};
    const auto index = problem_index(problems);

    DiversityReport small;
    small.problem_id = "p1";
    small.set_label = "m";
    small.n = 2;
    small.ea = 2.0;
    DiversityReport ghost;
    ghost.problem_id = "unknown";
    ghost.set_label = "m";
    ghost.n = 8;
    ghost.ea = 4.0;

    const AggregateResult agg = aggregate({small, ghost}, index, 5);
    CHECK(agg.excluded_reports == 1);  // the n=2 report
    REQUIRE(agg.groups.size() == 1);
    CHECK(agg.groups[0].source.empty());  // unknown problem → unnamed group
    CHECK(agg.groups[0].mean_ea == 4.0);
}

TEST_CASE("curve csv is long-format with a fixed header", "[metrics]") {
    DiversityReport r;
    r.problem_id = "p,1";  // needs csv quoting
    r.set_label = "m";
    r.da_curve.ks = {1, 2};
    r.da_curve.values = {1.0, 1.6};
    const std::string csv = curves_to_csv({r});
    CHECK(csv.rfind("k,value,problem_id,set_label\n", 0) == 0);
    CHECK(csv.find("1,1,\"p,1\",m\n") != std::string::npos);
    CHECK(csv.find("2,1.6000000000000001,\"p,1\",m\n") != std::string::npos);
    std::size_t lines = 0;
    for (const char c : csv)
        if (c == '\n') ++lines;
    CHECK(lines == 3);
}
