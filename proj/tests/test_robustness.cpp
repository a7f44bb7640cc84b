#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "oscd/error.hpp"
#include "oscd/robustness.hpp"
#include "oscd/synthetic.hpp"
#include "oracles.hpp"

using namespace oscd;

TEST_CASE("student_t_cdf agrees with quadrature of the density") {
    for (double dof : {1.0, 2.0, 4.0, 9.0, 30.0}) {
        for (double t : {0.0, 0.1, 0.5, 1.0, 2.0, 5.0, -1.5, -3.0}) {
            CHECK(student_t_cdf(t, dof) ==
                  doctest::Approx(oracle::t_cdf_quadrature(t, dof)).epsilon(1e-8));
        }
    }
}

TEST_CASE("paired_t_test basics and oracles") {
    SUBCASE("identical vectors are degenerate with p = 1") {
        const std::vector<double> a{0.1, 0.2, 0.3, 0.4, 0.5};
        const PairedTResult r = paired_t_test(a, a);
        CHECK(r.degenerate);
        CHECK(r.p == 1.0);
    }
    SUBCASE("constant difference with shrinking jitter drives p toward 0") {
        const std::vector<double> b{0.0, 0.0, 0.0, 0.0, 0.0};
        double prev_p = 1.1;
        for (double eps : {1e-2, 1e-4, 1e-6}) {
            const std::vector<double> a{1.0 + eps, 1.0 - eps, 1.0 + 0.5 * eps, 1.0 - 0.5 * eps, 1.0};
            const PairedTResult r = paired_t_test(a, b);
            CHECK(r.p < prev_p);
            prev_p = r.p;
        }
        CHECK(prev_p < 1e-9);
    }
    SUBCASE("random pairs match the direct formula and quadrature p") {
        oracle::TestRand rnd(61);
        for (int rep = 0; rep < 50; ++rep) {
            std::vector<double> a(5), b(5);
            for (size_t i = 0; i < 5; ++i) {
                a[i] = rnd.uniform(0.0, 1.0);
                b[i] = rnd.uniform(0.0, 1.0);
            }
            const PairedTResult r = paired_t_test(a, b);

            long double mean = 0.0L;
            for (size_t i = 0; i < 5; ++i) mean += static_cast<long double>(a[i]) - b[i];
            mean /= 5.0L;
            long double ss = 0.0L;
            for (size_t i = 0; i < 5; ++i) {
                const long double d = (static_cast<long double>(a[i]) - b[i]) - mean;
                ss += d * d;
            }
            const long double sd = sqrtl(ss / 4.0L);
            if (sd == 0.0L) continue;
            const double t_want = static_cast<double>(mean / (sd / sqrtl(5.0L)));
            CHECK(std::abs(r.t - t_want) < 1e-10);
            CHECK(std::abs(r.p - oracle::paired_p_quadrature(r.t, 4.0)) < 1e-6);
        }
    }
    SUBCASE("antisymmetry: t(a,b) == -t(b,a)") {
        const std::vector<double> a{0.3, 0.5, 0.2, 0.9, 0.4};
        const std::vector<double> b{0.1, 0.6, 0.1, 0.8, 0.2};
        CHECK(paired_t_test(a, b).t == doctest::Approx(-paired_t_test(b, a).t).epsilon(1e-12));
    }
    SUBCASE("size errors") {
        CHECK_THROWS_AS(paired_t_test(std::vector<double>{1.0}, std::vector<double>{1.0}), Error);
        CHECK_THROWS_AS(paired_t_test(std::vector<double>{1.0, 2.0}, std::vector<double>{1.0}),
                        Error);
    }
}

TEST_CASE("pearson and spearman closed forms") {
    const std::vector<double> x{1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0};
    std::vector<double> y = x;
    CHECK(pearson(x, y) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(spearman(x, y) == doctest::Approx(1.0).epsilon(1e-14));

    for (size_t i = 0; i < y.size(); ++i) y[i] = -x[i];
    CHECK(pearson(x, y) == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(spearman(x, y) == doctest::Approx(-1.0).epsilon(1e-14));

    CHECK_THROWS_AS(pearson(x, std::vector<double>(7, 2.0)), Error);
    CHECK_THROWS_AS(spearman(x, std::vector<double>(7, 2.0)), Error);
}

TEST_CASE("spearman matches the d^2 rank formula on tie-free data") {
    // One adjacent swap in a 7-element ranking.
    const std::vector<double> x{1, 2, 3, 4, 5, 6, 7};
    const std::vector<double> y{1, 2, 4, 3, 5, 6, 7};
    CHECK(spearman(x, y) == doctest::Approx(oracle::spearman_d2(x, y)).epsilon(1e-14));

    oracle::TestRand rnd(62);
    for (int rep = 0; rep < 100; ++rep) {
        std::vector<double> a(9), b(9);
        for (size_t i = 0; i < 9; ++i) {
            a[i] = rnd.uniform(-10.0, 10.0) + static_cast<double>(i) * 1e-9;
            b[i] = rnd.uniform(-10.0, 10.0) + static_cast<double>(i) * 1e-9;
        }
        CHECK(spearman(a, b) == doctest::Approx(oracle::spearman_d2(a, b)).epsilon(1e-12));
    }
}

TEST_CASE("spearman is invariant under strictly increasing transforms") {
    oracle::TestRand rnd(63);
    std::vector<double> x(20), y(20);
    for (size_t i = 0; i < 20; ++i) {
        x[i] = rnd.uniform(-3.0, 3.0);
        y[i] = rnd.uniform(-3.0, 3.0);
    }
    std::vector<double> tx(20);
    for (size_t i = 0; i < 20; ++i) tx[i] = std::exp(x[i]);
    CHECK(spearman(x, y) == doctest::Approx(spearman(tx, y)).epsilon(1e-12));
}

TEST_CASE("mean_sd matches a long-double two-pass oracle") {
    oracle::TestRand rnd(64);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<double> v(2 + rnd.index(20));
        for (double& x : v) x = rnd.uniform(-100.0, 100.0);
        const MeanSd got = mean_sd(v);
        long double mean = 0.0L;
        for (double x : v) mean += x;
        mean /= static_cast<long double>(v.size());
        long double ss = 0.0L;
        for (double x : v) ss += (x - mean) * (x - mean);
        const long double sd = sqrtl(ss / static_cast<long double>(v.size() - 1));
        CHECK(std::abs(got.mean - static_cast<double>(mean)) < 1e-12);
        CHECK(std::abs(got.sd - static_cast<double>(sd)) < 1e-12);
    }
}

namespace {

// Manifest + scores where every unknown sample of a category is predicted as
// a chosen sequence of known classes.
std::pair<SampleSet, ScoreTable> absorption_fixture(
    const std::vector<std::tuple<std::string, bool, std::vector<int>>>& categories, size_t k) {
    SampleSet set;
    for (size_t c = 0; c < k; ++c) set.known_classes.push_back("class_" + std::to_string(c));
    ScoreTable scores;
    scores.methods = {"planted"};
    size_t serial = 0;
    for (const auto& [name, non_target, predictions] : categories) {
        for (int pred : predictions) {
            SampleRecord rec;
            rec.sample_id = "u" + std::to_string(serial++);
            rec.split = Split::test;
            rec.category = name;
            rec.group = non_target ? Group::non_target_unknown : Group::target_unknown;
            rec.logits = std::vector<double>(k, 0.0);
            set.records.push_back(rec);

            ScoreTableRow row;
            row.sample_id = rec.sample_id;
            row.split = Split::test;
            row.group = rec.group;
            row.category = name;
            row.predicted_class = pred;
            row.scores = {0.0};
            scores.rows.push_back(row);
        }
    }
    set.reindex();
    return {std::move(set), std::move(scores)};
}

} // namespace

TEST_CASE("absorption_matrix rows, ordering, and normalization") {
    const auto [set, scores] = absorption_fixture(
        {
            {"always_zero", false, {0, 0, 0, 0}},
            {"uniform", false, {0, 1, 2, 0, 1, 2}},
            {"bead", true, {1, 1}},
        },
        3);
    const AbsorptionMatrix m = absorption_matrix(set, scores, Split::test);

    // Target categories precede non-target ones.
    REQUIRE(m.row_categories.size() == 3);
    CHECK(m.row_categories[0] == "always_zero");
    CHECK(m.row_categories[1] == "uniform");
    CHECK(m.row_categories[2] == "bead");
    CHECK_FALSE(m.row_is_non_target[0]);
    CHECK(m.row_is_non_target[2]);

    CHECK(m.cells.at(0, 0) == 100.0);
    CHECK(m.cells.at(0, 1) == 0.0);
    for (size_t c = 0; c < 3; ++c) {
        CHECK(m.cells.at(1, c) == doctest::Approx(100.0 / 3.0).epsilon(1e-12));
    }
    for (size_t r = 0; r < 3; ++r) {
        double row_sum = 0.0;
        for (size_t c = 0; c < 3; ++c) row_sum += m.cells.at(r, c);
        CHECK(std::abs(row_sum - 100.0) < 1e-9);
    }

    SampleSet no_unknowns;
    no_unknowns.known_classes = {"x"};
    no_unknowns.reindex();
    CHECK_THROWS_AS(absorption_matrix(no_unknowns, scores, Split::test), Error);
}

TEST_CASE("confidence_summary per-group statistics") {
    SampleSet set;
    set.known_classes = {"a", "b"};
    ScoreTable scores;
    scores.methods = {"planted"};
    size_t serial = 0;
    auto add = [&](Group group, int ci, std::vector<double> logits, int pred) {
        SampleRecord rec;
        rec.sample_id = "c" + std::to_string(serial++);
        rec.split = Split::test;
        rec.category = group == Group::known ? set.known_classes[ci] : "odd";
        rec.group = group;
        rec.class_index = ci;
        rec.logits = std::move(logits);
        set.records.push_back(rec);
        ScoreTableRow row;
        row.sample_id = set.records.back().sample_id;
        row.split = Split::test;
        row.group = group;
        row.category = set.records.back().category;
        row.predicted_class = pred;
        row.scores = {0.0};
        scores.rows.push_back(row);
    };

    SUBCASE("perfect known predictions give accuracy 1") {
        add(Group::known, 0, {8.0, 0.0}, 0);
        add(Group::known, 1, {0.0, 8.0}, 1);
        set.reindex();
        const auto summary = confidence_summary(set, scores, Split::test);
        CHECK(summary[0].group == "known");
        CHECK(summary[0].n == 2);
        CHECK(*summary[0].accuracy == 1.0);
        CHECK(summary[0].frac_high_confidence == 1.0);
    }
    SUBCASE("mid confidences never reach the 0.90 bar") {
        add(Group::known, 0, {0.0, 0.0}, 0); // softmax max = 0.5
        add(Group::target_unknown, -1, {0.0, 0.0}, 0);
        set.reindex();
        const auto summary = confidence_summary(set, scores, Split::test);
        for (const auto& row : summary) {
            if (row.n > 0) {
                CHECK(row.mean_confidence == doctest::Approx(0.5));
                CHECK(row.frac_high_confidence == 0.0);
            }
        }
    }
    SUBCASE("random fixture matches a counting oracle") {
        oracle::TestRand rnd(65);
        size_t want_high = 0;
        long double conf_sum = 0.0L;
        const size_t n = 60;
        for (size_t i = 0; i < n; ++i) {
            const double gap = rnd.uniform(0.0, 6.0);
            add(Group::target_unknown, -1, {gap, 0.0}, 0);
            const double conf = std::exp(gap) / (std::exp(gap) + 1.0);
            conf_sum += conf;
            if (conf >= 0.90) ++want_high;
        }
        set.reindex();
        const auto summary = confidence_summary(set, scores, Split::test);
        const auto& unknown_row = summary[1];
        CHECK(unknown_row.n == n);
        CHECK(unknown_row.mean_confidence ==
              doctest::Approx(static_cast<double>(conf_sum / n)).epsilon(1e-12));
        CHECK(unknown_row.frac_high_confidence ==
              doctest::Approx(static_cast<double>(want_high) / n).epsilon(1e-12));
    }
    SUBCASE("missing logits are an error") {
        SampleRecord rec;
        rec.sample_id = "nologits";
        rec.split = Split::test;
        rec.category = "odd";
        rec.group = Group::target_unknown;
        rec.feature = std::vector<double>{1.0};
        set.records.push_back(rec);
        set.reindex();
        CHECK_THROWS_AS(confidence_summary(set, scores, Split::test), Error);
    }
}

TEST_CASE("recommendation rule enumeration") {
    const RecommendationRule rule; // delta 0.005, alpha 0.01
    const std::vector<double> oracle_vals{0.05, 0.05, 0.05, 0.05, 0.05};

    SUBCASE("clear gain with small p: ca_recommended") {
        const std::vector<double> best{0.200, 0.201, 0.199, 0.200, 0.202};
        const std::vector<double> ca{0.150, 0.151, 0.149, 0.150, 0.151};
        const RecommendationRow row = recommend("s", best, ca, oracle_vals, rule);
        CHECK(row.recommendation == Recommendation::ca_recommended);
        CHECK(row.paired_p < 0.01);
    }
    SUBCASE("community-aware clearly worse: sample_preferred") {
        const std::vector<double> best{0.100, 0.101, 0.099, 0.100, 0.100};
        const std::vector<double> ca{0.150, 0.149, 0.151, 0.150, 0.152};
        CHECK(recommend("s", best, ca, oracle_vals, rule).recommendation ==
              Recommendation::sample_preferred);
    }
    SUBCASE("tiny but consistent gain inside the band: boundary") {
        const std::vector<double> best{0.1000, 0.1001, 0.0999, 0.1000, 0.1001};
        const std::vector<double> ca{0.0961, 0.0960, 0.0958, 0.0961, 0.0960};
        const RecommendationRow row = recommend("s", best, ca, oracle_vals, rule);
        CHECK(std::abs(row.community_aware.mean - row.best_sample.mean) <= rule.delta);
        CHECK(row.paired_p < rule.alpha);
        CHECK(row.recommendation == Recommendation::boundary);
    }
    SUBCASE("noisy indistinguishable values: sample_sufficient") {
        const std::vector<double> best{0.100, 0.104, 0.096, 0.101, 0.099};
        const std::vector<double> ca{0.102, 0.097, 0.103, 0.098, 0.100};
        CHECK(recommend("s", best, ca, oracle_vals, rule).recommendation ==
              Recommendation::sample_sufficient);
    }
    SUBCASE("misaligned seed vectors are an error") {
        CHECK_THROWS_AS(recommend("s", std::vector<double>{0.1, 0.2}, std::vector<double>{0.1},
                                  std::vector<double>{0.1}, rule),
                        Error);
    }
}
