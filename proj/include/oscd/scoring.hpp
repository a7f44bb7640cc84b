#pragma once

// Post-hoc unknown scores computed from logits and frozen-encoder features.
// Every score is oriented so that a larger value means stronger evidence the
// sample lies outside the known classes.

#include <map>
#include <span>
#include <string>
#include <vector>

#include "oscd/linalg.hpp"
#include "oscd/manifest.hpp"

namespace oscd {

enum class PrototypeVariant { raw, l2norm, cosine };

const char* to_string(PrototypeVariant v);
PrototypeVariant prototype_variant_from_string(const std::string& s);

enum class CovarianceDivisor { n_minus_k, n };

const char* to_string(CovarianceDivisor d);
CovarianceDivisor covariance_divisor_from_string(const std::string& s);

struct PrototypeSet {
    std::vector<std::vector<double>> prototypes; // one per known class, raw feature-space means
    size_t dim() const { return prototypes.empty() ? 0 : prototypes[0].size(); }
};

struct MahalanobisModel {
    std::vector<std::vector<double>> prototypes;
    Matrix precision; // pseudo-inverse of the shrunk pooled covariance
    double shrinkage = 0.0;
};

// softmax with max subtraction; sums to 1.
std::vector<double> softmax(std::span<const double> logits);

// 1 - max softmax probability; in [0, 1 - 1/K].
double msp_score(std::span<const double> logits);

// -T * logsumexp(logits / T), computed with the max-subtraction identity.
double energy_score(std::span<const double> logits, double temperature = 1.0);

size_t argmax_logit(std::span<const double> logits);

// Per-class arithmetic means of train-split features. Errors if any known
// class has no train feature record.
PrototypeSet fit_prototypes(const SampleSet& set);

// Minimum distance from the feature to any prototype under the chosen
// variant. l2norm/cosine reject zero-norm inputs rather than scoring them.
double prototype_distance_score(std::span<const double> feature, const PrototypeSet& protos,
                                PrototypeVariant variant);

size_t nearest_prototype(std::span<const double> feature, const PrototypeSet& protos);

// Pooled covariance of class-centered train features (divisor N - K by
// default), plus diagonal loading sigma + lambda * mean(diag(sigma)) * I,
// inverted by eigenvalue-cutoff pseudo-inverse.
MahalanobisModel fit_mahalanobis(const SampleSet& set, double shrinkage_lambda,
                                 double pinv_cutoff_ratio = 1e-10,
                                 CovarianceDivisor divisor = CovarianceDivisor::n_minus_k);

// Minimum squared Mahalanobis distance to any prototype, clamped at zero.
double mahalanobis_score(std::span<const double> feature, const MahalanobisModel& model);

struct ScoreTableRow {
    std::string sample_id;
    Split split = Split::val;
    Group group = Group::known;
    std::string category;
    int predicted_class = -1;
    std::vector<double> scores; // aligned with ScoreTable::methods
};

struct ScoreTable {
    std::vector<std::string> methods;
    std::vector<ScoreTableRow> rows;

    int method_index(const std::string& name) const;
};

struct ScoringParams {
    double temperature = 1.0;
    double shrinkage_lambda = 1e-3;
    double pinv_cutoff_ratio = 1e-10;
    CovarianceDivisor covariance_divisor = CovarianceDivisor::n_minus_k;
};

// Known method names: msp, energy, prototype_raw, prototype_l2norm,
// prototype_cosine, mahalanobis.
std::vector<std::string> all_score_methods();

// Scores every val/test sample with each requested method. Feature-based
// methods error (naming the sample) when a sample lacks features; predicted
// class falls back to the nearest raw prototype for feature-only records.
ScoreTable build_score_table(const SampleSet& set, const std::vector<std::string>& methods,
                             const ScoringParams& params = {});

} // namespace oscd
