#include "oscd/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "oscd/error.hpp"

namespace oscd {

const char* to_string(PrototypeVariant v) {
    switch (v) {
        case PrototypeVariant::raw: return "raw";
        case PrototypeVariant::l2norm: return "l2norm";
        case PrototypeVariant::cosine: return "cosine";
    }
    return "?";
}

PrototypeVariant prototype_variant_from_string(const std::string& s) {
    if (s == "raw") return PrototypeVariant::raw;
    if (s == "l2norm") return PrototypeVariant::l2norm;
    if (s == "cosine") return PrototypeVariant::cosine;
    fail(ErrorCode::invalid_value, "unknown prototype variant: " + s);
}

const char* to_string(CovarianceDivisor d) {
    return d == CovarianceDivisor::n_minus_k ? "n_minus_k" : "n";
}

CovarianceDivisor covariance_divisor_from_string(const std::string& s) {
    if (s == "n_minus_k") return CovarianceDivisor::n_minus_k;
    if (s == "n") return CovarianceDivisor::n;
    fail(ErrorCode::invalid_value, "unknown covariance divisor: " + s);
}

namespace {

void require_finite(std::span<const double> values, const char* what) {
    for (double v : values) {
        if (!std::isfinite(v)) fail(ErrorCode::invalid_value, std::string("non-finite ") + what);
    }
}

double l2_norm(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

double euclidean(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

} // namespace

std::vector<double> softmax(std::span<const double> logits) {
    if (logits.empty()) fail(ErrorCode::degenerate_input, "softmax of empty logits");
    require_finite(logits, "logits");
    const double m = *std::max_element(logits.begin(), logits.end());
    std::vector<double> out(logits.size());
    double denom = 0.0;
    for (size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - m);
        denom += out[i];
    }
    for (double& x : out) x /= denom;
    return out;
}

double msp_score(std::span<const double> logits) {
    if (logits.empty()) fail(ErrorCode::degenerate_input, "msp of empty logits");
    require_finite(logits, "logits");
    // 1 - max softmax as (sum of non-max terms) / denom; avoids the
    // cancellation of 1 - p when the top probability saturates.
    const double m = *std::max_element(logits.begin(), logits.end());
    double denom = 0.0;
    double best = 0.0;
    double others = 0.0;
    for (double z : logits) {
        const double e = std::exp(z - m);
        denom += e;
        if (e > best) {
            others += best;
            best = e;
        } else {
            others += e;
        }
    }
    return others / denom;
}

double energy_score(std::span<const double> logits, double temperature) {
    if (temperature <= 0.0) fail(ErrorCode::invalid_value, "energy temperature must be > 0");
    if (logits.empty()) fail(ErrorCode::degenerate_input, "energy of empty logits");
    require_finite(logits, "logits");
    const double m = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double z : logits) sum += std::exp((z - m) / temperature);
    // -T * logsumexp(z/T) = -(m + T*log sum exp((z-m)/T))
    return -(m + temperature * std::log(sum));
}

size_t argmax_logit(std::span<const double> logits) {
    if (logits.empty()) fail(ErrorCode::degenerate_input, "argmax of empty logits");
    return static_cast<size_t>(std::max_element(logits.begin(), logits.end()) - logits.begin());
}

PrototypeSet fit_prototypes(const SampleSet& set) {
    const size_t k = set.k();
    if (k == 0) fail(ErrorCode::degenerate_input, "fit_prototypes: no known classes declared");
    std::vector<std::vector<double>> sums(k);
    std::vector<size_t> counts(k, 0);

    for (size_t idx : set.split_index(Split::train)) {
        const auto& rec = set.records[idx];
        if (rec.group != Group::known || !rec.feature) continue;
        auto& acc = sums[rec.class_index];
        if (acc.empty()) acc.assign(rec.feature->size(), 0.0);
        for (size_t d = 0; d < acc.size(); ++d) acc[d] += (*rec.feature)[d];
        ++counts[rec.class_index];
    }

    PrototypeSet out;
    out.prototypes.resize(k);
    for (size_t c = 0; c < k; ++c) {
        if (counts[c] == 0) {
            fail(ErrorCode::insufficient_data,
                 "fit_prototypes: known class '" + set.known_classes[c] + "' has no train features");
        }
        out.prototypes[c] = sums[c];
        for (double& v : out.prototypes[c]) v /= static_cast<double>(counts[c]);
    }
    return out;
}

double prototype_distance_score(std::span<const double> feature, const PrototypeSet& protos,
                                PrototypeVariant variant) {
    if (protos.prototypes.empty()) fail(ErrorCode::degenerate_input, "no prototypes fitted");
    if (feature.size() != protos.dim()) {
        fail(ErrorCode::dimension_mismatch, "prototype_distance_score: feature dimension mismatch");
    }

    if (variant == PrototypeVariant::raw) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& mu : protos.prototypes) best = std::min(best, euclidean(feature, mu));
        return best;
    }

    const double fn = l2_norm(feature);
    if (fn == 0.0) {
        fail(ErrorCode::degenerate_input,
             std::string("zero-norm feature under ") + to_string(variant) + " variant");
    }
    std::vector<double> f_unit(feature.begin(), feature.end());
    for (double& v : f_unit) v /= fn;

    double best = std::numeric_limits<double>::infinity();
    for (const auto& mu : protos.prototypes) {
        const double mn = l2_norm(mu);
        if (mn == 0.0) {
            fail(ErrorCode::degenerate_input,
                 std::string("zero-norm prototype under ") + to_string(variant) + " variant");
        }
        if (variant == PrototypeVariant::l2norm) {
            std::vector<double> mu_unit = mu;
            for (double& v : mu_unit) v /= mn;
            best = std::min(best, euclidean(f_unit, mu_unit));
        } else { // cosine
            double dot = 0.0;
            for (size_t d = 0; d < mu.size(); ++d) dot += f_unit[d] * mu[d] / mn;
            best = std::min(best, 1.0 - dot);
        }
    }
    return best;
}

size_t nearest_prototype(std::span<const double> feature, const PrototypeSet& protos) {
    if (protos.prototypes.empty()) fail(ErrorCode::degenerate_input, "no prototypes fitted");
    size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (size_t c = 0; c < protos.prototypes.size(); ++c) {
        const double d = euclidean(feature, protos.prototypes[c]);
        if (d < best_d) {
            best_d = d;
            best = c;
        }
    }
    return best;
}

MahalanobisModel fit_mahalanobis(const SampleSet& set, double shrinkage_lambda,
                                 double pinv_cutoff_ratio, CovarianceDivisor divisor_kind) {
    if (shrinkage_lambda < 0.0) fail(ErrorCode::invalid_value, "shrinkage lambda must be >= 0");
    const PrototypeSet protos = fit_prototypes(set);
    const size_t d = protos.dim();
    const size_t k = set.k();

    Matrix cov(d, d);
    size_t n = 0;
    for (size_t idx : set.split_index(Split::train)) {
        const auto& rec = set.records[idx];
        if (rec.group != Group::known || !rec.feature) continue;
        const auto& mu = protos.prototypes[rec.class_index];
        std::vector<double> centered(d);
        for (size_t i = 0; i < d; ++i) centered[i] = (*rec.feature)[i] - mu[i];
        for (size_t i = 0; i < d; ++i) {
            for (size_t j = i; j < d; ++j) cov.at(i, j) += centered[i] * centered[j];
        }
        ++n;
    }
    if (n < 2 || n <= k) {
        fail(ErrorCode::insufficient_data,
             "fit_mahalanobis: need more than K train features, got " + std::to_string(n));
    }
    const double divisor = divisor_kind == CovarianceDivisor::n_minus_k
                               ? static_cast<double>(n - k)
                               : static_cast<double>(n);
    for (size_t i = 0; i < d; ++i) {
        for (size_t j = i; j < d; ++j) {
            const double v = cov.at(i, j) / divisor;
            if (!std::isfinite(v)) fail(ErrorCode::invalid_value, "non-finite covariance entry");
            cov.at(i, j) = v;
            cov.at(j, i) = v;
        }
    }

    // Scale-aware diagonal loading: sigma + lambda * mean(diag(sigma)) * I.
    double diag_mean = 0.0;
    for (size_t i = 0; i < d; ++i) diag_mean += cov.at(i, i);
    diag_mean /= static_cast<double>(d);
    for (size_t i = 0; i < d; ++i) cov.at(i, i) += shrinkage_lambda * diag_mean;

    MahalanobisModel model;
    model.prototypes = protos.prototypes;
    model.shrinkage = shrinkage_lambda;
    model.precision = symmetric_pinv(cov, pinv_cutoff_ratio);
    return model;
}

double mahalanobis_score(std::span<const double> feature, const MahalanobisModel& model) {
    if (model.prototypes.empty()) fail(ErrorCode::degenerate_input, "empty mahalanobis model");
    const size_t d = model.prototypes[0].size();
    if (feature.size() != d) {
        fail(ErrorCode::dimension_mismatch, "mahalanobis_score: feature dimension mismatch");
    }
    double best = std::numeric_limits<double>::infinity();
    std::vector<double> diff(d);
    for (const auto& mu : model.prototypes) {
        for (size_t i = 0; i < d; ++i) diff[i] = feature[i] - mu[i];
        const std::vector<double> pd = matvec(model.precision, diff);
        double q = 0.0;
        for (size_t i = 0; i < d; ++i) q += diff[i] * pd[i];
        best = std::min(best, q);
    }
    return std::max(best, 0.0);
}

int ScoreTable::method_index(const std::string& name) const {
    for (size_t i = 0; i < methods.size(); ++i) {
        if (methods[i] == name) return static_cast<int>(i);
    }
    return -1;
}

std::vector<std::string> all_score_methods() {
    return {"msp", "energy", "prototype_raw", "prototype_l2norm", "prototype_cosine", "mahalanobis"};
}

ScoreTable build_score_table(const SampleSet& set, const std::vector<std::string>& methods,
                             const ScoringParams& params) {
    if (methods.empty()) fail(ErrorCode::invalid_value, "build_score_table: no methods requested");

    bool needs_features = false;
    for (const auto& m : methods) {
        if (m == "msp" || m == "energy") {
            // logit methods
        } else if (m == "prototype_raw" || m == "prototype_l2norm" || m == "prototype_cosine" ||
                   m == "mahalanobis") {
            needs_features = true;
        } else {
            fail(ErrorCode::invalid_value, "unknown score method: " + m);
        }
    }

    PrototypeSet protos;
    MahalanobisModel maha;
    const bool wants_maha = std::find(methods.begin(), methods.end(), "mahalanobis") != methods.end();
    if (needs_features) protos = fit_prototypes(set);
    if (wants_maha) {
        maha = fit_mahalanobis(set, params.shrinkage_lambda, params.pinv_cutoff_ratio,
                               params.covariance_divisor);
    }

    ScoreTable table;
    table.methods = methods;

    for (Split split : {Split::val, Split::test}) {
        for (size_t idx : set.split_index(split)) {
            const auto& rec = set.records[idx];
            ScoreTableRow row;
            row.sample_id = rec.sample_id;
            row.split = rec.split;
            row.group = rec.group;
            row.category = rec.category;

            if (rec.logits) {
                row.predicted_class = static_cast<int>(argmax_logit(*rec.logits));
            } else if (needs_features || !protos.prototypes.empty()) {
                row.predicted_class = static_cast<int>(nearest_prototype(*rec.feature, protos));
            } else {
                // Logit-only run but a feature-only record: prototypes are
                // needed to produce a predicted class.
                protos = fit_prototypes(set);
                row.predicted_class = static_cast<int>(nearest_prototype(*rec.feature, protos));
            }

            row.scores.reserve(methods.size());
            for (const auto& m : methods) {
                if (m == "msp" || m == "energy") {
                    if (!rec.logits) {
                        fail(ErrorCode::missing_field,
                             "method '" + m + "' needs logits but sample '" + rec.sample_id +
                                 "' has none");
                    }
                    row.scores.push_back(m == "msp" ? msp_score(*rec.logits)
                                                    : energy_score(*rec.logits, params.temperature));
                } else {
                    if (!rec.feature) {
                        fail(ErrorCode::missing_field,
                             "method '" + m + "' needs features but sample '" + rec.sample_id +
                                 "' has none");
                    }
                    if (m == "mahalanobis") {
                        row.scores.push_back(mahalanobis_score(*rec.feature, maha));
                    } else {
                        PrototypeVariant variant = PrototypeVariant::raw;
                        if (m == "prototype_l2norm") variant = PrototypeVariant::l2norm;
                        if (m == "prototype_cosine") variant = PrototypeVariant::cosine;
                        row.scores.push_back(prototype_distance_score(*rec.feature, protos, variant));
                    }
                }
            }
            table.rows.push_back(std::move(row));
        }
    }
    return table;
}

} // namespace oscd
