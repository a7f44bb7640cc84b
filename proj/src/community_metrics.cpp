#include "oscd/community_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "oscd/error.hpp"

namespace oscd {

const char* to_string(DiversityDomain d) {
    switch (d) {
        case DiversityDomain::include_unknown_bin: return "include_unknown_bin";
        case DiversityDomain::known_renormalized: return "known_renormalized";
    }
    return "?";
}

DiversityDomain diversity_domain_from_string(const std::string& s) {
    if (s == "include_unknown_bin") return DiversityDomain::include_unknown_bin;
    if (s == "known_renormalized") return DiversityDomain::known_renormalized;
    fail(ErrorCode::invalid_value, "unknown diversity domain: " + s);
}

std::vector<double> predicted_abundance(const Community& community, const DecisionVector& decisions,
                                        size_t k) {
    if (decisions.size() != community.members.size()) {
        fail(ErrorCode::dimension_mismatch,
             "decision count " + std::to_string(decisions.size()) + " != community size " +
                 std::to_string(community.members.size()));
    }
    std::vector<double> hist(k + 1, 0.0);
    for (size_t d : decisions) {
        if (d > k) fail(ErrorCode::invalid_value, "decision bin out of range");
        hist[d] += 1.0;
    }
    for (double& v : hist) v /= static_cast<double>(decisions.size());
    return hist;
}

double oscd_distance(std::span<const double> truth, std::span<const double> predicted) {
    if (truth.size() != predicted.size()) {
        fail(ErrorCode::dimension_mismatch, "abundance vectors have different lengths");
    }
    double num = 0.0;
    double den = 0.0;
    for (size_t i = 0; i < truth.size(); ++i) {
        num += std::abs(predicted[i] - truth[i]);
        den += predicted[i] + truth[i];
    }
    if (den == 0.0) fail(ErrorCode::degenerate_input, "both abundance vectors are all-zero");
    return num / den;
}

DirectionalOscd oscd_directional(std::span<const double> truth, std::span<const double> predicted) {
    if (truth.size() != predicted.size()) {
        fail(ErrorCode::dimension_mismatch, "abundance vectors have different lengths");
    }
    if (truth.empty()) fail(ErrorCode::degenerate_input, "empty abundance vectors");
    DirectionalOscd d;
    const size_t k = truth.size() - 1; // trailing unknown bin excluded
    for (size_t i = 0; i < k; ++i) {
        const double diff = predicted[i] - truth[i];
        if (diff > 0.0) d.plus += diff;
        else d.minus -= diff;
    }
    return d;
}

double shannon_index(std::span<const double> v) {
    double h = 0.0;
    for (double p : v) {
        if (p > 0.0) h -= p * std::log(p);
    }
    return h;
}

double simpson_index(std::span<const double> v) {
    double s = 0.0;
    for (double p : v) s += p * p;
    return 1.0 - s;
}

size_t richness(std::span<const double> v) {
    size_t n = 0;
    for (double p : v) n += (p > 0.0) ? 1 : 0;
    return n;
}

double pielou_evenness(std::span<const double> v) {
    const size_t s = richness(v);
    if (s <= 1) return 0.0;
    return shannon_index(v) / std::log(static_cast<double>(s));
}

namespace {

std::vector<size_t> top_known(std::span<const double> v, size_t k_top) {
    const size_t k = v.size() - 1;
    std::vector<size_t> order(k);
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        if (v[a] != v[b]) return v[a] > v[b];
        return a < b;
    });
    order.resize(k_top);
    return order;
}

} // namespace

double topk_overlap(std::span<const double> truth, std::span<const double> predicted, size_t k_top) {
    if (truth.size() != predicted.size()) {
        fail(ErrorCode::dimension_mismatch, "abundance vectors have different lengths");
    }
    if (k_top == 0) fail(ErrorCode::invalid_value, "k_top must be >= 1");
    if (truth.size() < k_top + 1) {
        fail(ErrorCode::invalid_value,
             "topk_overlap needs at least " + std::to_string(k_top) + " known taxa");
    }
    const auto a = top_known(truth, k_top);
    const auto b = top_known(predicted, k_top);
    size_t shared = 0;
    for (size_t x : a) {
        if (std::find(b.begin(), b.end(), x) != b.end()) ++shared;
    }
    return static_cast<double>(shared) / static_cast<double>(k_top);
}

namespace {

// Domain vector the diversity indices are computed over.
std::vector<double> diversity_view(std::span<const double> v, DiversityDomain domain) {
    if (domain == DiversityDomain::include_unknown_bin) {
        return std::vector<double>(v.begin(), v.end());
    }
    const size_t k = v.size() - 1;
    std::vector<double> known(v.begin(), v.begin() + k);
    double total = 0.0;
    for (double p : known) total += p;
    if (total > 0.0) {
        for (double& p : known) p /= total;
    }
    return known;
}

} // namespace

CommunityMetricBundle evaluate_abundances(std::span<const double> truth,
                                          std::span<const double> predicted,
                                          const CommunityMetricParams& params) {
    if (truth.size() != predicted.size() || truth.empty()) {
        fail(ErrorCode::dimension_mismatch, "abundance vectors have different lengths");
    }
    const size_t k = truth.size() - 1;

    CommunityMetricBundle b;
    b.oscd = oscd_distance(truth, predicted);
    const DirectionalOscd d = oscd_directional(truth, predicted);
    b.oscd_plus = d.plus;
    b.oscd_minus = d.minus;

    double abs_sum = 0.0;
    for (size_t i = 0; i < k; ++i) abs_sum += std::abs(predicted[i] - truth[i]);
    b.mean_abs_abundance_error = k > 0 ? abs_sum / static_cast<double>(k) : 0.0;

    const std::vector<double> tv = diversity_view(truth, params.diversity_domain);
    const std::vector<double> pv = diversity_view(predicted, params.diversity_domain);
    b.shannon_error = std::abs(shannon_index(pv) - shannon_index(tv));
    b.simpson_error = std::abs(simpson_index(pv) - simpson_index(tv));
    b.pielou_error = std::abs(pielou_evenness(pv) - pielou_evenness(tv));
    b.richness_error = std::abs(static_cast<double>(richness(pv)) - static_cast<double>(richness(tv)));
    b.topk_overlap = topk_overlap(truth, predicted, params.top_k);
    return b;
}

CommunityMetricBundle evaluate_community(const Community& community, const DecisionVector& decisions,
                                         size_t k, const CommunityMetricParams& params) {
    const std::vector<double> predicted = predicted_abundance(community, decisions, k);
    return evaluate_abundances(community.true_abundance, predicted, params);
}

double bundle_field(const CommunityMetricBundle& b, const std::string& objective) {
    if (objective == "oscd") return b.oscd;
    if (objective == "oscd_plus") return b.oscd_plus;
    if (objective == "oscd_minus") return b.oscd_minus;
    if (objective == "mean_abs_abundance_error") return b.mean_abs_abundance_error;
    if (objective == "shannon_error") return b.shannon_error;
    if (objective == "simpson_error") return b.simpson_error;
    if (objective == "pielou_error") return b.pielou_error;
    if (objective == "richness_error") return b.richness_error;
    if (objective == "topk_overlap") return b.topk_overlap;
    fail(ErrorCode::invalid_value, "unknown metric field: " + objective);
}

void BundleAccumulator::add(const CommunityMetricBundle& b) {
    sum.oscd += b.oscd;
    sum.oscd_plus += b.oscd_plus;
    sum.oscd_minus += b.oscd_minus;
    sum.mean_abs_abundance_error += b.mean_abs_abundance_error;
    sum.shannon_error += b.shannon_error;
    sum.simpson_error += b.simpson_error;
    sum.pielou_error += b.pielou_error;
    sum.richness_error += b.richness_error;
    sum.topk_overlap += b.topk_overlap;
    ++count;
}

CommunityMetricBundle BundleAccumulator::mean() const {
    if (count == 0) fail(ErrorCode::degenerate_input, "mean of empty bundle accumulator");
    CommunityMetricBundle m = sum;
    const double n = static_cast<double>(count);
    m.oscd /= n;
    m.oscd_plus /= n;
    m.oscd_minus /= n;
    m.mean_abs_abundance_error /= n;
    m.shannon_error /= n;
    m.simpson_error /= n;
    m.pielou_error /= n;
    m.richness_error /= n;
    m.topk_overlap /= n;
    return m;
}

} // namespace oscd
