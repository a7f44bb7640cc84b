#pragma once

// Fully specified synthetic open-set scenarios. Every quantity downstream
// code estimates (absorption rows, confusion, score separation, community
// behavior) is planted here, so end-to-end tests can compare against known
// ground truth instead of trusting the pipeline under test.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "oscd/manifest.hpp"
#include "oscd/rng.hpp"
#include "oscd/scoring.hpp"

namespace oscd {

enum class ScoreFamily : uint8_t { normal = 0, lognormal = 1 };

const char* to_string(ScoreFamily f);
ScoreFamily score_family_from_string(const std::string& s);

struct ScoreComponent {
    ScoreFamily family = ScoreFamily::normal;
    double location = 0.0;
    double scale = 1.0;

    double draw(Rng& rng) const;
};

// Two-component location-scale mixture; secondary_weight = 0 disables the
// second component.
struct ScoreMixture {
    ScoreComponent primary;
    ScoreComponent secondary;
    double secondary_weight = 0.0;

    double draw(Rng& rng) const;
};

struct MethodScoreModel {
    std::string method;
    ScoreMixture known;
    ScoreMixture unknown;
};

struct SyntheticUnknownCategory {
    std::string name;
    bool non_target = false;
    double frequency = 1.0;           // relative weight within the unknown pool
    std::vector<double> absorption;   // row-stochastic over K known classes
    std::optional<Split> only_split;  // restrict the category to one split
};

struct SyntheticScenario {
    std::vector<std::string> known_classes;
    std::vector<double> known_frequencies;          // relative weights
    std::vector<std::vector<double>> known_confusion; // K x K, rows sum to 1
    std::vector<SyntheticUnknownCategory> unknown_categories;
    double val_unknown_fraction = 0.3;
    double test_unknown_fraction = 0.3;
    std::vector<MethodScoreModel> score_models;

    // Feature channel: Gaussian blob per known class on coordinate axes plus
    // offset blobs per unknown category. 0 disables features.
    size_t feature_dim = 0;
    double blob_radius = 6.0;
    double blob_sigma = 1.0;

    // Synthesized logit margins (predicted-class logit above the runner-up).
    double known_gap_location = 2.5;
    double known_gap_scale = 0.8;
    double unknown_gap_location = 0.35;
    double unknown_gap_scale = 0.25;

    uint64_t seed = 42;

    size_t k() const { return known_classes.size(); }
    void validate() const;
};

struct SyntheticOutput {
    SampleSet samples;
    ScoreTable scores; // val + test rows; predicted class and scores are planted
};

// Deterministic under scenario.seed. Train split holds n_per_split known-only
// records; val and test hold n_per_split records each with the scenario's
// unknown fractions.
SyntheticOutput generate(const SyntheticScenario& scenario, size_t n_per_split);

// Canned scenario with a heavy known-score right tail: aggressive sample-level
// thresholds over-reject known taxa there, so community distortion at the
// detection-F1 / high-unknown-recall operating points is dominated by
// known-taxon underestimation while a community-aware threshold stays mild.
SyntheticScenario mismatch_scenario();

// Fully separated known/unknown score populations (AUROC 1 by construction).
SyntheticScenario separable_scenario();

// Normal-vs-normal single-component scores with a closed-form AUROC.
SyntheticScenario normal_overlap_scenario(double known_mean, double unknown_mean, double sd);

std::string scenario_to_json(const SyntheticScenario& scenario);
SyntheticScenario scenario_from_json(const std::string& json_text);

} // namespace oscd
