// Acceptance suite: ten end-to-end criteria, one pass/fail line each.
// Exit code 0 only when every criterion holds.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fcntl.h>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "oscd/calibrate.hpp"
#include "oscd/communities.hpp"
#include "oscd/community_metrics.hpp"
#include "oscd/io.hpp"
#include "oscd/pipeline.hpp"
#include "oscd/robustness.hpp"
#include "oscd/sample_metrics.hpp"
#include "oscd/scoring.hpp"
#include "oscd/synthetic.hpp"
#include "oracles.hpp"

using namespace oscd;
namespace fs = std::filesystem;

namespace {

struct Failure {
    std::string reason;
};

void require(bool condition, const std::string& reason) {
    if (!condition) throw Failure{reason};
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::vector<double> random_abundance(oracle::TestRand& rnd, size_t bins) {
    std::vector<double> v(bins);
    double total = 0.0;
    for (double& x : v) {
        x = -std::log(std::max(1e-12, rnd.uniform()));
        total += x;
    }
    for (double& x : v) x /= total;
    return v;
}

// ---------------------------------------------------------------------------

void criterion_oscd_identity() {
    oracle::TestRand rnd(101);
    for (int rep = 0; rep < 10000; ++rep) {
        const size_t bins = 3 + rnd.index(39); // K in {2..40} plus the unknown bin
        const auto p = random_abundance(rnd, bins);
        const auto q = random_abundance(rnd, bins);

        const double d = oscd_distance(p, q);
        const DirectionalOscd dir = oscd_directional(p, q);
        require(std::abs(d - std::max(dir.plus, dir.minus)) <= 1e-12,
                "identity violated: oscd=" + fmt(d) + " max=" + fmt(std::max(dir.plus, dir.minus)));

        double denominator = 0.0;
        for (size_t i = 0; i < bins; ++i) denominator += p[i] + q[i];
        require(std::abs(denominator - 2.0) <= 1e-12,
                "denominator " + fmt(denominator) + " != 2");
    }
}

void criterion_mean_aggregation() {
    // Replicate A: truth counts (2,6,2)/10, predicted (4,6,0)/10; replicate B mirrored.
    const std::vector<double> pa{2.0 / 10, 6.0 / 10, 2.0 / 10};
    const std::vector<double> qa{4.0 / 10, 6.0 / 10, 0.0 / 10};
    const double oscd_a = oscd_distance(pa, qa);
    const double oscd_b = oscd_distance(qa, pa);
    const DirectionalOscd da = oscd_directional(pa, qa);
    const DirectionalOscd db = oscd_directional(qa, pa);

    const double mean_oscd = (oscd_a + oscd_b) / 2.0;
    const double mean_plus = (da.plus + db.plus) / 2.0;
    const double mean_minus = (da.minus + db.minus) / 2.0;

    require(mean_oscd == 0.2, "mean oscd " + fmt(mean_oscd) + " != 0.2 exactly");
    require(std::max(mean_plus, mean_minus) == 0.1,
            "max of mean directional parts " + fmt(std::max(mean_plus, mean_minus)) +
                " != 0.1 exactly");
}

void criterion_ranking_oracles() {
    oracle::TestRand rnd(103);
    for (int rep = 0; rep < 1000; ++rep) {
        const size_t n = 2 + rnd.index(499);
        std::vector<double> scores(n);
        std::vector<bool> labels(n);
        const bool quantize = rep % 2 == 0;
        for (size_t i = 0; i < n; ++i) {
            labels[i] = rnd.uniform() < 0.4;
            double s = rnd.uniform(-2.0, 2.0) + (labels[i] ? rnd.uniform(0.0, 1.0) : 0.0);
            if (quantize) s = std::round(s * 8.0) / 8.0;
            scores[i] = s;
        }
        labels[0] = true;
        labels[n - 1] = false;
        const BinaryScoredSet b = make_binary_scored(scores, labels);

        require(auroc(b) == oracle::auroc_pairs(scores, labels), "auroc mismatch");
        require(aupr(b) == oracle::aupr_enumeration(scores, labels), "aupr mismatch");
        const FprAtRecall got = fpr_at_unknown_recall(b, 0.95);
        const oracle::FprOracle want = oracle::fpr_at_recall_scan(scores, labels, 0.95);
        require(got.fpr == want.fpr && got.threshold == want.threshold, "fpr@95 mismatch");
    }
}

void criterion_scoring_oracles() {
    oracle::TestRand rnd(104);

    for (int rep = 0; rep < 500; ++rep) {
        std::vector<double> logits(2 + rnd.index(8));
        for (double& v : logits) v = rnd.uniform(-50.0, 50.0);
        const double msp = msp_score(logits);
        const double msp_want = static_cast<double>(oracle::msp_long_double(logits));
        require(std::abs(msp - msp_want) <= 1e-12 * std::max(1.0, std::abs(msp_want)),
                "msp relative error too large");

        const double t = rnd.uniform(0.25, 4.0);
        const double e = energy_score(logits, t);
        const double e_want = static_cast<double>(oracle::energy_oracle(logits, t));
        require(std::abs(e - e_want) <= 1e-12 * std::max(1.0, std::abs(e_want)),
                "energy relative error too large");

        const double c = rnd.uniform(-40.0, 40.0);
        std::vector<double> shifted = logits;
        for (double& v : shifted) v += c;
        require(std::abs(energy_score(shifted, t) - (energy_score(logits, t) - c)) <= 1e-10,
                "energy shift identity violated");
    }

    // Prototype distance vs brute force.
    PrototypeSet protos;
    for (int cidx = 0; cidx < 5; ++cidx) {
        std::vector<double> mu(6);
        for (double& v : mu) v = rnd.uniform(-3.0, 3.0);
        protos.prototypes.push_back(mu);
    }
    for (int rep = 0; rep < 200; ++rep) {
        std::vector<double> f(6);
        for (double& v : f) v = rnd.uniform(-3.0, 3.0);
        long double best = 1e300L;
        for (const auto& mu : protos.prototypes) {
            long double s = 0.0L;
            for (size_t d = 0; d < 6; ++d) {
                const long double diff = static_cast<long double>(f[d]) - mu[d];
                s += diff * diff;
            }
            best = std::min(best, sqrtl(s));
        }
        const double got = prototype_distance_score(f, protos, PrototypeVariant::raw);
        require(std::abs(got - static_cast<double>(best)) <=
                    1e-12 * std::max(1.0, static_cast<double>(best)),
                "prototype distance mismatch");
    }

    // Mahalanobis: identity-covariance construction, dense oracle, reduction,
    // and a rank-deficient pseudo-inverse case.
    {
        SampleSet set;
        set.known_classes = {"c0"};
        const double a = std::sqrt(1.5);
        size_t serial = 0;
        for (const auto& f : std::vector<std::vector<double>>{{a, 0}, {-a, 0}, {0, a}, {0, -a}}) {
            SampleRecord rec;
            rec.sample_id = "m" + std::to_string(serial++);
            rec.split = Split::train;
            rec.category = "c0";
            rec.group = Group::known;
            rec.class_index = 0;
            rec.feature = f;
            set.feature_dim = 2;
            set.records.push_back(rec);
        }
        set.reindex();
        const MahalanobisModel model = fit_mahalanobis(set, 0.0);
        require(std::abs(model.precision.at(0, 0) - 1.0) <= 1e-8 &&
                    std::abs(model.precision.at(1, 1) - 1.0) <= 1e-8 &&
                    std::abs(model.precision.at(0, 1)) <= 1e-8,
                "identity covariance not recovered");

        for (int rep = 0; rep < 100; ++rep) {
            std::vector<double> f{rnd.uniform(-2.0, 2.0), rnd.uniform(-2.0, 2.0)};
            const double got = mahalanobis_score(f, model);
            const PrototypeSet raw{{model.prototypes}};
            const double d = prototype_distance_score(f, raw, PrototypeVariant::raw);
            require(std::abs(got - d * d) <= 1e-8, "identity-precision reduction violated");
        }
    }
    {
        SampleSet set;
        set.known_classes = {"c0"};
        const std::vector<std::vector<double>> pts{{1, 1}, {2, 2}, {3, 3}, {-1, -1}, {-2, -2},
                                                   {0.5, 0.5}};
        size_t serial = 0;
        for (const auto& f : pts) {
            SampleRecord rec;
            rec.sample_id = "r" + std::to_string(serial++);
            rec.split = Split::train;
            rec.category = "c0";
            rec.group = Group::known;
            rec.class_index = 0;
            rec.feature = f;
            set.feature_dim = 2;
            set.records.push_back(rec);
        }
        set.reindex();
        const MahalanobisModel model = fit_mahalanobis(set, 0.0);
        const auto& mu = model.prototypes[0];
        long double s_ld = 0.0L;
        for (const auto& p : pts) {
            const long double dx = p[0] - mu[0];
            const long double dy = p[1] - mu[1];
            s_ld += 0.5L * (dx + dy) * (dx + dy);
        }
        const double s = static_cast<double>(s_ld / 5.0L);
        const std::vector<double> probe{4.0, 4.0};
        const double proj = ((probe[0] - mu[0]) + (probe[1] - mu[1])) / std::sqrt(2.0);
        const double want = proj * proj / s;
        const double got = mahalanobis_score(probe, model);
        require(std::isfinite(got), "rank-deficient score not finite");
        require(std::abs(got - want) <= 1e-8 * std::max(1.0, want),
                "rank-deficient pseudo-inverse mismatch: got " + fmt(got) + " want " + fmt(want));
    }
    {
        // Reduction identity on a full model: precision forced to identity.
        MahalanobisModel model;
        PrototypeSet protos2;
        for (int cidx = 0; cidx < 3; ++cidx) {
            std::vector<double> mu(4);
            for (double& v : mu) v = rnd.uniform(-2.0, 2.0);
            model.prototypes.push_back(mu);
            protos2.prototypes.push_back(mu);
        }
        model.precision = Matrix::identity(4);
        for (int rep = 0; rep < 100; ++rep) {
            std::vector<double> f(4);
            for (double& v : f) v = rnd.uniform(-2.0, 2.0);
            const double d = prototype_distance_score(f, protos2, PrototypeVariant::raw);
            require(std::abs(mahalanobis_score(f, model) - d * d) <= 1e-10,
                    "mahalanobis-to-euclidean reduction violated");
        }
    }
}

void criterion_community_determinism() {
    SampleSet set;
    set.known_classes = {"c0", "c1", "c2", "c3"};
    size_t serial = 0;
    auto add = [&](const std::string& category, Group group, int ci, size_t count) {
        for (size_t i = 0; i < count; ++i) {
            SampleRecord rec;
            rec.sample_id = "s" + std::to_string(serial++);
            rec.split = Split::val;
            rec.category = category;
            rec.group = group;
            rec.class_index = ci;
            rec.logits = std::vector<double>(4, 0.0);
            set.records.push_back(rec);
        }
    };
    add("c0", Group::known, 0, 50);
    add("c1", Group::known, 1, 30);
    add("c2", Group::known, 2, 12);
    add("c3", Group::known, 3, 8);
    add("odd", Group::target_unknown, -1, 25);
    add("bead", Group::non_target_unknown, -1, 10);
    set.reindex();
    const Pool pool = build_pool(set, Split::val);

    std::vector<CommunitySpec> specs;
    for (double ratio : {0.1, 0.2, 0.4}) {
        CommunitySpec spec;
        spec.community_type = CommunityType::unknown_ratio_controlled;
        spec.unknown_ratio = ratio;
        spec.size = 500;
        spec.replicates = 5;
        spec.split = Split::val;
        specs.push_back(spec);
    }
    const CommunitySuite a = generate_suite(pool, set, specs, {42});
    const CommunitySuite b = generate_suite(pool, set, specs, {42});
    require(suite_to_json(a, set) == suite_to_json(b, set),
            "suite manifests differ across identical runs");

    const std::vector<size_t> want_unknown{50, 100, 200};
    for (size_t s = 0; s < specs.size(); ++s) {
        for (size_t rep = 0; rep < 5; ++rep) {
            const Community& c = a.communities[s * 5 + rep];
            size_t unknown = 0;
            for (size_t idx : c.members) unknown += set.records[idx].is_unknown() ? 1 : 0;
            require(unknown == want_unknown[s],
                    "unknown slots " + std::to_string(unknown) + " != round(ratio*size)");
            require(c.members.size() == 500, "community size drifted");
        }
    }

    CommunitySpec dominant;
    dominant.community_type = CommunityType::dominant_taxa;
    dominant.unknown_ratio = 0.2;
    dominant.size = 500;
    dominant.replicates = 1;
    dominant.split = Split::val;
    Rng rng = Rng::for_replicate(42, dominant.fingerprint(), 0);
    const Community c = sample_community(pool, set, dominant, 0, rng);
    size_t dominant_count = 0;
    for (size_t idx : c.members) dominant_count += set.records[idx].category == "c0" ? 1 : 0;
    require(dominant_count == 300,
            "dominant allocation " + std::to_string(dominant_count) + " != 300 of 400 known slots");
}

struct MismatchPipeline {
    SyntheticOutput data;
    Pool val_pool, test_pool;
    CommunitySuite val_suite, test_suite;
    ScanTable table;

    ScanInputs inputs() const {
        ScanInputs in;
        in.samples = &data.samples;
        in.scores = &data.scores;
        in.method = "planted";
        in.val_suite = &val_suite;
        in.test_suite = &test_suite;
        return in;
    }
};

MismatchPipeline run_mismatch(size_t n_per_split, size_t replicates, size_t community_size) {
    MismatchPipeline p;
    p.data = generate(mismatch_scenario(), n_per_split);
    p.val_pool = build_pool(p.data.samples, Split::val);
    p.test_pool = build_pool(p.data.samples, Split::test);

    std::vector<CommunitySpec> val_specs, test_specs;
    for (double ratio : {0.1, 0.2, 0.4}) {
        CommunitySpec spec;
        spec.community_type = CommunityType::unknown_ratio_controlled;
        spec.unknown_ratio = ratio;
        spec.size = community_size;
        spec.replicates = replicates;
        spec.split = Split::val;
        val_specs.push_back(spec);
        spec.split = Split::test;
        test_specs.push_back(spec);
    }
    p.val_suite = generate_suite(p.val_pool, p.data.samples, val_specs, {42});
    p.test_suite = generate_suite(p.test_pool, p.data.samples, test_specs, {42});

    std::vector<double> vs;
    for (const auto& row : p.data.scores.rows) {
        if (row.split == Split::val) vs.push_back(row.scores[0]);
    }
    p.table = scan(build_grid(vs, 401, "planted"), p.inputs());
    return p;
}

void criterion_scan_invariants() {
    const MismatchPipeline p = run_mismatch(4000, 8, 250);

    for (size_t i = 1; i < p.table.rows.size(); ++i) {
        require(p.table.rows[i].val_confusion.known_recall >=
                    p.table.rows[i - 1].val_confusion.known_recall,
                "known recall not non-decreasing along the grid");
        require(p.table.rows[i].val_confusion.unknown_recall <=
                    p.table.rows[i - 1].val_confusion.unknown_recall,
                "unknown recall not non-increasing along the grid");
    }

    // +infinity threshold row reduces to the closed-set baseline bundle.
    ThresholdGrid inf_grid;
    inf_grid.thresholds = {std::numeric_limits<double>::infinity()};
    const ScanTable inf_scan = scan(inf_grid, p.inputs());
    const CommunityMetricBundle baseline = closed_set_baseline(p.inputs(), true);
    const CommunityMetricBundle& row = *inf_scan.rows[0].test_mean;
    require(row.oscd == baseline.oscd && row.oscd_plus == baseline.oscd_plus &&
                row.oscd_minus == baseline.oscd_minus &&
                row.mean_abs_abundance_error == baseline.mean_abs_abundance_error &&
                row.shannon_error == baseline.shannon_error &&
                row.simpson_error == baseline.simpson_error &&
                row.pielou_error == baseline.pielou_error &&
                row.richness_error == baseline.richness_error &&
                row.topk_overlap == baseline.topk_overlap,
            "+inf row does not equal the closed-set baseline exactly");

    // Oracle dominance and per-setting refinement.
    const StrategyResult oracle_global = select(p.table, Strategy::oracle_global);
    for (Strategy s : {Strategy::fixed_recall_95, Strategy::detection_f1_max, Strategy::youden_max,
                       Strategy::fpr_at_95_unknown_recall, Strategy::community_aware_oscd}) {
        const StrategyResult r = select(p.table, s);
        require(oracle_global.test_metrics->oscd <= r.test_metrics->oscd + 1e-15,
                std::string("oracle dominated by ") + to_string(s));
    }
    const auto setting_oracles = select_setting_oracles(p.table);
    for (size_t s_id = 0; s_id < setting_oracles.size(); ++s_id) {
        require(setting_oracles[s_id].setting_metrics->oscd <=
                    p.table.rows[oracle_global.grid_index].test_setting_mean[s_id].oscd + 1e-15,
                "setting oracle does not refine the global oracle");
    }
}

void criterion_mismatch_replication() {
    const MismatchPipeline p = run_mismatch(20000, 20, 500);

    const StrategyResult fpr95 = select(p.table, Strategy::fpr_at_95_unknown_recall);
    const StrategyResult f1 = select(p.table, Strategy::detection_f1_max);
    const StrategyResult ca = select(p.table, Strategy::community_aware_oscd);
    const StrategyResult oracle_global = select(p.table, Strategy::oracle_global);

    // (a) per-community minus-dominance at the FPR@95 threshold.
    std::map<std::string, size_t> row_of_id;
    for (size_t r = 0; r < p.data.scores.rows.size(); ++r) {
        row_of_id[p.data.scores.rows[r].sample_id] = r;
    }
    size_t minus_dominant = 0;
    const size_t k = p.data.samples.k();
    for (const auto& community : p.test_suite.communities) {
        DecisionVector decisions;
        decisions.reserve(community.members.size());
        for (size_t idx : community.members) {
            const auto& row = p.data.scores.rows[row_of_id.at(p.data.samples.records[idx].sample_id)];
            decisions.push_back(row.scores[0] > fpr95.threshold
                                    ? k
                                    : static_cast<size_t>(row.predicted_class));
        }
        const CommunityMetricBundle b = evaluate_community(community, decisions, k);
        if (b.oscd_minus > b.oscd_plus) ++minus_dominant;
    }
    const double fraction = static_cast<double>(minus_dominant) /
                            static_cast<double>(p.test_suite.communities.size());
    require(fraction >= 0.95, "minus-dominance fraction " + fmt(fraction) + " < 0.95");

    // (b) community-aware strictly better than detection-F1 on test communities.
    require(ca.test_metrics->oscd < f1.test_metrics->oscd,
            "community-aware " + fmt(ca.test_metrics->oscd) + " not below detection-F1 " +
                fmt(f1.test_metrics->oscd));

    // (c) community-aware within 0.01 of the global test oracle.
    require(std::abs(ca.test_metrics->oscd - oracle_global.test_metrics->oscd) <= 0.01,
            "community-aware " + fmt(ca.test_metrics->oscd) + " vs oracle " +
                fmt(oracle_global.test_metrics->oscd) + " differ by more than 0.01");
}

void criterion_statistics_oracles() {
    oracle::TestRand rnd(108);

    for (int rep = 0; rep < 100; ++rep) {
        std::vector<double> a(5), b(5);
        for (size_t i = 0; i < 5; ++i) {
            a[i] = rnd.uniform(0.0, 1.0);
            b[i] = rnd.uniform(0.0, 1.0);
        }
        const PairedTResult r = paired_t_test(a, b);
        if (r.degenerate) continue;
        require(std::abs(r.p - oracle::paired_p_quadrature(r.t, 4.0)) <= 1e-6,
                "paired-t p differs from quadrature");
    }

    for (int rep = 0; rep < 100; ++rep) {
        std::vector<double> x(8), y(8);
        for (size_t i = 0; i < 8; ++i) {
            x[i] = rnd.uniform(-5.0, 5.0) + 1e-9 * static_cast<double>(i);
            y[i] = rnd.uniform(-5.0, 5.0) + 1e-9 * static_cast<double>(i);
        }
        require(std::abs(spearman(x, y) - oracle::spearman_d2(x, y)) <= 1e-12,
                "spearman differs from the rank-formula oracle");
    }
    {
        const std::vector<double> x{1, 2, 3, 4, 5};
        std::vector<double> y{2, 4, 6, 8, 10};
        require(pearson(x, y) == 1.0, "pearson of a perfect linear relation != 1");
        for (double& v : y) v = -v;
        require(pearson(x, y) == -1.0, "pearson of a perfect inverse relation != -1");
    }

    // Absorption matrices: row normalization and planted-row recovery.
    SyntheticScenario scn = separable_scenario();
    scn.unknown_categories = {
        {"ua", false, 1.0, {0.7, 0.2, 0.1}, std::nullopt},
        {"ub", false, 1.0, {0.1, 0.1, 0.8}, std::nullopt},
        {"bead", true, 1.0, {0.25, 0.5, 0.25}, std::nullopt},
    };
    scn.test_unknown_fraction = 0.6;
    scn.seed = 17;
    const SyntheticOutput out = generate(scn, 60000); // ~12k per unknown category on test
    const AbsorptionMatrix m = absorption_matrix(out.samples, out.scores, Split::test);
    require(m.row_categories.size() == 3, "absorption matrix row count");
    for (size_t r = 0; r < m.row_categories.size(); ++r) {
        double row_sum = 0.0;
        for (size_t c = 0; c < m.col_classes.size(); ++c) row_sum += m.cells.at(r, c);
        require(std::abs(row_sum - 100.0) <= 1e-9, "absorption row does not sum to 100");
        require(m.row_counts[r] >= 10000, "absorption category has fewer than 10^4 samples");

        const SyntheticUnknownCategory* planted = nullptr;
        for (const auto& u : scn.unknown_categories) {
            if (u.name == m.row_categories[r]) planted = &u;
        }
        require(planted != nullptr, "unexpected absorption row");
        for (size_t c = 0; c < m.col_classes.size(); ++c) {
            const double p = planted->absorption[c];
            const double sd = std::sqrt(p * (1.0 - p) / static_cast<double>(m.row_counts[r]));
            require(std::abs(m.cells.at(r, c) / 100.0 - p) <= 3.0 * sd,
                    "planted absorption row not recovered within 3 sd");
        }
    }
    // Target rows precede non-target rows.
    require(!m.row_is_non_target[0] && !m.row_is_non_target[1] && m.row_is_non_target[2],
            "absorption rows not ordered target-first");
}

void criterion_diversity_closed_forms() {
    for (size_t n = 1; n <= 50; ++n) {
        std::vector<double> uniform(n, 1.0 / static_cast<double>(n));
        const double h = shannon_index(uniform);
        const double s = simpson_index(uniform);
        const double j = pielou_evenness(uniform);
        const size_t r = richness(uniform);
        require(std::abs(h - std::log(static_cast<double>(n))) <= 1e-12, "shannon(uniform) != ln n");
        require(std::abs(s - (1.0 - 1.0 / static_cast<double>(n))) <= 1e-12,
                "simpson(uniform) != 1 - 1/n");
        if (n == 1) {
            require(j == 0.0, "pielou of a single taxon != 0");
        } else {
            require(std::abs(j - 1.0) <= 1e-12, "pielou(uniform) != 1");
        }
        require(r == n, "richness(uniform) != n");
    }
}

// Commands print progress lines; keep the criterion output to one line each.
struct StdoutSilencer {
    int saved;
    StdoutSilencer() {
        std::fflush(stdout);
        saved = dup(1);
        const int null_fd = open("/dev/null", O_WRONLY);
        dup2(null_fd, 1);
        close(null_fd);
    }
    ~StdoutSilencer() {
        std::fflush(stdout);
        dup2(saved, 1);
        close(saved);
    }
};

void criterion_end_to_end_determinism() {
    const StdoutSilencer quiet;
    const fs::path dir = fs::temp_directory_path() / "oscd_acceptance_e2e";
    fs::remove_all(dir);

    RunConfig config;
    config.output_dir = dir.string();
    config.scenario = "mismatch";
    config.n_per_split = 2000;
    config.seeds = {42, 43};
    config.communities.types = {"balanced", "unknown_ratio_controlled", "dominant_taxa"};
    config.communities.ratios = {0.0, 0.2};
    config.communities.size = 150;
    config.communities.replicates = 5;
    config.n_quantiles = 101;

    require(cmd_simulate(config) == 0, "simulate failed");
    require(cmd_calibrate(config) == 0, "calibrate failed");

    std::map<std::string, std::string> first;
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const std::string rel = fs::relative(entry.path(), dir).string();
        if (rel == "run.log") continue;
        first[rel] = read_text_file(entry.path().string());
    }
    require(!first.empty(), "no artifacts produced");

    require(cmd_simulate(config) == 0, "second simulate failed");
    require(cmd_calibrate(config) == 0, "second calibrate failed");

    size_t checked = 0;
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const std::string rel = fs::relative(entry.path(), dir).string();
        if (rel == "run.log") continue;
        auto it = first.find(rel);
        require(it != first.end(), "new artifact appeared on rerun: " + rel);
        require(read_text_file(entry.path().string()) == it->second,
                "artifact differs across reruns: " + rel);
        ++checked;
    }
    require(checked == first.size(), "artifact missing on rerun");
}

} // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        std::function<void()> run;
    };
    const std::vector<Criterion> criteria{
        {1, "distortion identity and Bray-Curtis denominator on 10k random pairs",
         criterion_oscd_identity},
        {2, "mean-aggregation counterexample (0.2 vs 0.1, exact)", criterion_mean_aggregation},
        {3, "auroc/aupr/fpr@95 equal brute-force enumeration oracles", criterion_ranking_oracles},
        {4, "score oracles: msp/energy/prototype/mahalanobis", criterion_scoring_oracles},
        {5, "community generation determinism and slot accounting",
         criterion_community_determinism},
        {6, "scan monotonicity, closed-set reduction, oracle dominance",
         criterion_scan_invariants},
        {7, "synthetic mismatch replication (direction, ordering, oracle gap)",
         criterion_mismatch_replication},
        {8, "statistics oracles: paired-t, rank correlation, absorption recovery",
         criterion_statistics_oracles},
        {9, "diversity closed forms for n = 1..50", criterion_diversity_closed_forms},
        {10, "end-to-end determinism of simulate + calibrate", criterion_end_to_end_determinism},
    };

    int failures = 0;
    for (const auto& criterion : criteria) {
        const auto start = std::chrono::steady_clock::now();
        std::string failure;
        try {
            criterion.run();
        } catch (const Failure& f) {
            failure = f.reason;
        } catch (const std::exception& e) {
            failure = std::string("exception: ") + e.what();
        }
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (failure.empty()) {
            std::printf("[PASS] criterion %2d (%5.1fs): %s\n", criterion.id, seconds,
                        criterion.name);
        } else {
            ++failures;
            std::printf("[FAIL] criterion %2d (%5.1fs): %s -- %s\n", criterion.id, seconds,
                        criterion.name, failure.c_str());
        }
    }
    if (failures == 0) {
        std::printf("acceptance: all %zu criteria passed\n", criteria.size());
        return 0;
    }
    std::printf("acceptance: %d criteria FAILED\n", failures);
    return 1;
}
