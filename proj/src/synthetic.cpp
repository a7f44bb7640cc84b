#include "oscd/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <json.hpp>

#include "oscd/error.hpp"

namespace oscd {

using ordered_json = nlohmann::ordered_json;

const char* to_string(ScoreFamily f) {
    switch (f) {
        case ScoreFamily::normal: return "normal";
        case ScoreFamily::lognormal: return "lognormal";
    }
    return "?";
}

ScoreFamily score_family_from_string(const std::string& s) {
    if (s == "normal") return ScoreFamily::normal;
    if (s == "lognormal") return ScoreFamily::lognormal;
    fail(ErrorCode::invalid_value, "unknown score family: " + s);
}

double ScoreComponent::draw(Rng& rng) const {
    switch (family) {
        case ScoreFamily::normal: return location + scale * rng.next_normal();
        case ScoreFamily::lognormal: return rng.next_lognormal(location, scale);
    }
    fail(ErrorCode::invalid_value, "unhandled score family");
}

double ScoreMixture::draw(Rng& rng) const {
    if (secondary_weight > 0.0 && rng.next_double() < secondary_weight) {
        return secondary.draw(rng);
    }
    return primary.draw(rng);
}

namespace {

void check_stochastic_row(const std::vector<double>& row, size_t k, const std::string& what) {
    if (row.size() != k) {
        fail(ErrorCode::dimension_mismatch, what + " has wrong length");
    }
    double total = 0.0;
    for (double v : row) {
        if (v < 0.0 || !std::isfinite(v)) fail(ErrorCode::invalid_value, what + " has bad entries");
        total += v;
    }
    if (std::abs(total - 1.0) > 1e-12) {
        fail(ErrorCode::invalid_value, what + " does not sum to 1");
    }
}

} // namespace

void SyntheticScenario::validate() const {
    const size_t K = k();
    if (K == 0) fail(ErrorCode::invalid_value, "scenario has no known classes");
    if (known_frequencies.size() != K) {
        fail(ErrorCode::dimension_mismatch, "known_frequencies length != K");
    }
    if (known_confusion.size() != K) {
        fail(ErrorCode::dimension_mismatch, "known_confusion must have K rows");
    }
    for (size_t c = 0; c < K; ++c) {
        check_stochastic_row(known_confusion[c], K, "confusion row " + std::to_string(c));
    }
    for (const auto& u : unknown_categories) {
        check_stochastic_row(u.absorption, K, "absorption row '" + u.name + "'");
        if (u.frequency < 0.0) fail(ErrorCode::invalid_value, "unknown category frequency < 0");
    }
    if (score_models.empty()) fail(ErrorCode::invalid_value, "scenario has no score models");
    for (const auto& m : score_models) {
        for (const ScoreMixture* mix : {&m.known, &m.unknown}) {
            if (mix->primary.scale <= 0.0 ||
                (mix->secondary_weight > 0.0 && mix->secondary.scale <= 0.0)) {
                fail(ErrorCode::invalid_value, "score scales must be > 0");
            }
            if (mix->secondary_weight < 0.0 || mix->secondary_weight > 1.0) {
                fail(ErrorCode::invalid_value, "mixture weight outside [0,1]");
            }
        }
    }
    if (val_unknown_fraction < 0.0 || val_unknown_fraction >= 1.0 || test_unknown_fraction < 0.0 ||
        test_unknown_fraction >= 1.0) {
        fail(ErrorCode::invalid_value, "unknown fractions must lie in [0,1)");
    }
    if (feature_dim > 0 && feature_dim < K) {
        fail(ErrorCode::invalid_value, "feature_dim must be 0 or >= K");
    }
}

namespace {

std::vector<double> synthesize_logits(size_t k, size_t predicted, bool is_known,
                                      const SyntheticScenario& scn, Rng& rng) {
    std::vector<double> logits(k);
    double best_other = -1e300;
    for (size_t c = 0; c < k; ++c) {
        logits[c] = rng.next_normal();
        if (c != predicted) best_other = std::max(best_other, logits[c]);
    }
    const double loc = is_known ? scn.known_gap_location : scn.unknown_gap_location;
    const double scale = is_known ? scn.known_gap_scale : scn.unknown_gap_scale;
    const double gap = std::max(0.05, loc + scale * rng.next_normal());
    logits[predicted] = best_other + gap;
    return logits;
}

std::vector<double> blob_center_known(size_t class_index, const SyntheticScenario& scn) {
    std::vector<double> center(scn.feature_dim, 0.0);
    center[class_index % scn.feature_dim] = scn.blob_radius;
    return center;
}

std::vector<double> blob_center_unknown(size_t category_index, const SyntheticScenario& scn) {
    // Off-manifold: negative axis directions, cycling past the known axes.
    std::vector<double> center(scn.feature_dim, 0.0);
    center[category_index % scn.feature_dim] = -scn.blob_radius;
    center[(category_index + 1) % scn.feature_dim] = -0.5 * scn.blob_radius;
    return center;
}

std::vector<double> draw_feature(const std::vector<double>& center, double sigma, Rng& rng) {
    std::vector<double> f(center.size());
    for (size_t d = 0; d < center.size(); ++d) f[d] = center[d] + sigma * rng.next_normal();
    return f;
}

} // namespace

SyntheticOutput generate(const SyntheticScenario& scenario, size_t n_per_split) {
    scenario.validate();
    if (n_per_split == 0) fail(ErrorCode::invalid_value, "n_per_split must be >= 1");
    const size_t k = scenario.k();

    Rng rng(scenario.seed);

    SyntheticOutput out;
    out.samples.known_classes = scenario.known_classes;
    out.samples.feature_dim = scenario.feature_dim;
    out.scores.methods.clear();
    for (const auto& m : scenario.score_models) out.scores.methods.push_back(m.method);

    size_t serial = 0;
    char id_buf[40];

    auto eligible_unknowns = [&](Split split) {
        std::vector<size_t> ids;
        std::vector<double> weights;
        for (size_t u = 0; u < scenario.unknown_categories.size(); ++u) {
            const auto& cat = scenario.unknown_categories[u];
            if (cat.only_split && *cat.only_split != split) continue;
            if (cat.frequency <= 0.0) continue;
            ids.push_back(u);
            weights.push_back(cat.frequency);
        }
        return std::make_pair(ids, weights);
    };

    for (Split split : {Split::train, Split::val, Split::test}) {
        const double unknown_fraction = split == Split::train ? 0.0
                                        : split == Split::val ? scenario.val_unknown_fraction
                                                              : scenario.test_unknown_fraction;
        const auto [unknown_ids, unknown_weights] = eligible_unknowns(split);
        if (unknown_fraction > 0.0 && unknown_ids.empty()) {
            fail(ErrorCode::unsupported_spec, "scenario has no unknown categories for a split that needs them");
        }

        for (size_t i = 0; i < n_per_split; ++i) {
            std::snprintf(id_buf, sizeof(id_buf), "syn_%s_%06zu", to_string(split), serial++);
            SampleRecord rec;
            rec.sample_id = id_buf;
            rec.split = split;

            const bool is_unknown = unknown_fraction > 0.0 && rng.next_double() < unknown_fraction;
            size_t predicted = 0;
            if (!is_unknown) {
                const size_t c = rng.next_weighted(scenario.known_frequencies);
                rec.group = Group::known;
                rec.class_index = static_cast<int>(c);
                rec.category = scenario.known_classes[c];
                predicted = rng.next_weighted(scenario.known_confusion[c]);
                if (scenario.feature_dim > 0) {
                    rec.feature = draw_feature(blob_center_known(c, scenario), scenario.blob_sigma, rng);
                }
            } else {
                const size_t u = unknown_ids[rng.next_weighted(unknown_weights)];
                const auto& cat = scenario.unknown_categories[u];
                rec.group = cat.non_target ? Group::non_target_unknown : Group::target_unknown;
                rec.category = cat.name;
                predicted = rng.next_weighted(cat.absorption);
                if (scenario.feature_dim > 0) {
                    rec.feature = draw_feature(blob_center_unknown(u, scenario), scenario.blob_sigma, rng);
                }
            }
            rec.logits = synthesize_logits(k, predicted, !is_unknown, scenario, rng);

            if (split != Split::train) {
                ScoreTableRow row;
                row.sample_id = rec.sample_id;
                row.split = split;
                row.group = rec.group;
                row.category = rec.category;
                row.predicted_class = static_cast<int>(predicted);
                row.scores.reserve(scenario.score_models.size());
                for (const auto& model : scenario.score_models) {
                    const ScoreMixture& mix = is_unknown ? model.unknown : model.known;
                    row.scores.push_back(mix.draw(rng));
                }
                out.scores.rows.push_back(std::move(row));
            }
            out.samples.records.push_back(std::move(rec));
        }
    }
    out.samples.reindex();
    return out;
}

SyntheticScenario mismatch_scenario() {
    SyntheticScenario scn;
    scn.known_classes = {"taxon_a", "taxon_b", "taxon_c", "taxon_d", "taxon_e"};
    scn.known_frequencies = {0.34, 0.26, 0.18, 0.14, 0.08};
    scn.known_confusion = {
        {0.96, 0.01, 0.01, 0.01, 0.01},
        {0.01, 0.96, 0.01, 0.01, 0.01},
        {0.01, 0.01, 0.96, 0.01, 0.01},
        {0.01, 0.01, 0.01, 0.96, 0.01},
        {0.01, 0.01, 0.01, 0.01, 0.96},
    };
    scn.unknown_categories = {
        {"novel_calanoid", false, 0.5, {0.10, 0.70, 0.10, 0.05, 0.05}, std::nullopt},
        {"novel_cladoceran", false, 0.3, {0.05, 0.05, 0.15, 0.60, 0.15}, std::nullopt},
        {"fiber_debris", true, 0.2, {0.55, 0.15, 0.10, 0.10, 0.10}, std::nullopt},
    };
    scn.val_unknown_fraction = 0.45;
    scn.test_unknown_fraction = 0.45;

    // Known scores carry a lognormal right tail and half of the unknown mass
    // is buried inside the known bulk. High unknown recall is then only
    // reachable by rejecting much of the known population, which drags the
    // detection-F1 and FPR@95 operating points far below the community
    // optimum on known-sample recall.
    MethodScoreModel model;
    model.method = "planted";
    model.known.primary = {ScoreFamily::normal, 0.0, 0.65};
    model.known.secondary = {ScoreFamily::lognormal, 0.8, 0.45};
    model.known.secondary_weight = 0.08;
    model.unknown.primary = {ScoreFamily::normal, 0.3, 0.6};
    model.unknown.secondary = {ScoreFamily::normal, 3.0, 0.6};
    model.unknown.secondary_weight = 0.45;
    scn.score_models = {model};

    scn.feature_dim = 8;
    scn.seed = 42;
    return scn;
}

SyntheticScenario separable_scenario() {
    SyntheticScenario scn;
    scn.known_classes = {"taxon_a", "taxon_b", "taxon_c"};
    scn.known_frequencies = {0.5, 0.3, 0.2};
    scn.known_confusion = {
        {0.98, 0.01, 0.01},
        {0.01, 0.98, 0.01},
        {0.01, 0.01, 0.98},
    };
    scn.unknown_categories = {
        {"novel_x", false, 0.7, {0.8, 0.1, 0.1}, std::nullopt},
        {"bead", true, 0.3, {0.1, 0.1, 0.8}, std::nullopt},
    };
    scn.val_unknown_fraction = 0.3;
    scn.test_unknown_fraction = 0.3;

    MethodScoreModel model;
    model.method = "planted";
    model.known.primary = {ScoreFamily::normal, 0.0, 0.5};
    model.unknown.primary = {ScoreFamily::normal, 100.0, 0.5};
    scn.score_models = {model};
    scn.feature_dim = 4;
    scn.seed = 7;
    return scn;
}

SyntheticScenario normal_overlap_scenario(double known_mean, double unknown_mean, double sd) {
    SyntheticScenario scn = separable_scenario();
    scn.score_models[0].known.primary = {ScoreFamily::normal, known_mean, sd};
    scn.score_models[0].unknown.primary = {ScoreFamily::normal, unknown_mean, sd};
    return scn;
}

namespace {

ordered_json mixture_to_json(const ScoreMixture& m) {
    ordered_json j;
    j["family"] = to_string(m.primary.family);
    j["location"] = m.primary.location;
    j["scale"] = m.primary.scale;
    if (m.secondary_weight > 0.0) {
        j["secondary_family"] = to_string(m.secondary.family);
        j["secondary_location"] = m.secondary.location;
        j["secondary_scale"] = m.secondary.scale;
        j["secondary_weight"] = m.secondary_weight;
    }
    return j;
}

ScoreMixture mixture_from_json(const ordered_json& j) {
    ScoreMixture m;
    m.primary.family = score_family_from_string(j.at("family").get<std::string>());
    m.primary.location = j.at("location").get<double>();
    m.primary.scale = j.at("scale").get<double>();
    if (j.contains("secondary_weight")) {
        m.secondary.family = score_family_from_string(j.at("secondary_family").get<std::string>());
        m.secondary.location = j.at("secondary_location").get<double>();
        m.secondary.scale = j.at("secondary_scale").get<double>();
        m.secondary_weight = j.at("secondary_weight").get<double>();
    }
    return m;
}

} // namespace

std::string scenario_to_json(const SyntheticScenario& scenario) {
    ordered_json j;
    j["known_classes"] = scenario.known_classes;
    j["known_frequencies"] = scenario.known_frequencies;
    j["known_confusion"] = scenario.known_confusion;
    ordered_json unknowns = ordered_json::array();
    for (const auto& u : scenario.unknown_categories) {
        ordered_json ju;
        ju["name"] = u.name;
        ju["non_target"] = u.non_target;
        ju["frequency"] = u.frequency;
        ju["absorption"] = u.absorption;
        if (u.only_split) ju["only_split"] = to_string(*u.only_split);
        unknowns.push_back(std::move(ju));
    }
    j["unknown_categories"] = std::move(unknowns);
    j["val_unknown_fraction"] = scenario.val_unknown_fraction;
    j["test_unknown_fraction"] = scenario.test_unknown_fraction;
    ordered_json models = ordered_json::array();
    for (const auto& m : scenario.score_models) {
        ordered_json jm;
        jm["method"] = m.method;
        jm["known"] = mixture_to_json(m.known);
        jm["unknown"] = mixture_to_json(m.unknown);
        models.push_back(std::move(jm));
    }
    j["score_models"] = std::move(models);
    j["feature_dim"] = scenario.feature_dim;
    j["blob_radius"] = scenario.blob_radius;
    j["blob_sigma"] = scenario.blob_sigma;
    j["known_gap_location"] = scenario.known_gap_location;
    j["known_gap_scale"] = scenario.known_gap_scale;
    j["unknown_gap_location"] = scenario.unknown_gap_location;
    j["unknown_gap_scale"] = scenario.unknown_gap_scale;
    j["seed"] = scenario.seed;
    return j.dump(2);
}

SyntheticScenario scenario_from_json(const std::string& json_text) {
    ordered_json j;
    try {
        j = ordered_json::parse(json_text);
    } catch (const std::exception& e) {
        fail(ErrorCode::parse_error, std::string("scenario parse failure: ") + e.what());
    }
    SyntheticScenario scn;
    scn.known_classes = j.at("known_classes").get<std::vector<std::string>>();
    scn.known_frequencies = j.at("known_frequencies").get<std::vector<double>>();
    scn.known_confusion = j.at("known_confusion").get<std::vector<std::vector<double>>>();
    for (const auto& ju : j.at("unknown_categories")) {
        SyntheticUnknownCategory u;
        u.name = ju.at("name").get<std::string>();
        u.non_target = ju.at("non_target").get<bool>();
        u.frequency = ju.at("frequency").get<double>();
        u.absorption = ju.at("absorption").get<std::vector<double>>();
        if (ju.contains("only_split")) {
            u.only_split = split_from_string(ju.at("only_split").get<std::string>());
        }
        scn.unknown_categories.push_back(std::move(u));
    }
    scn.val_unknown_fraction = j.at("val_unknown_fraction").get<double>();
    scn.test_unknown_fraction = j.at("test_unknown_fraction").get<double>();
    for (const auto& jm : j.at("score_models")) {
        MethodScoreModel m;
        m.method = jm.at("method").get<std::string>();
        m.known = mixture_from_json(jm.at("known"));
        m.unknown = mixture_from_json(jm.at("unknown"));
        scn.score_models.push_back(std::move(m));
    }
    scn.feature_dim = j.value("feature_dim", size_t{0});
    scn.blob_radius = j.value("blob_radius", 6.0);
    scn.blob_sigma = j.value("blob_sigma", 1.0);
    scn.known_gap_location = j.value("known_gap_location", 2.5);
    scn.known_gap_scale = j.value("known_gap_scale", 0.8);
    scn.unknown_gap_location = j.value("unknown_gap_location", 0.35);
    scn.unknown_gap_scale = j.value("unknown_gap_scale", 0.25);
    scn.seed = j.value("seed", uint64_t{42});
    scn.validate();
    return scn;
}

} // namespace oscd
