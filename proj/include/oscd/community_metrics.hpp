#pragma once

// Community-level error metrics between a true and a predicted relative
// abundance vector over K known taxa plus one trailing unknown bin.
//
// The headline metric is the Bray-Curtis distance on those K+1 vectors
// (called community distortion here), with directional components over the
// known taxa: the plus side collects overestimation (absorption of unknowns
// into known classes), the minus side underestimation (over-rejection of
// true knowns). For a single community the distortion equals
// max(plus, minus); means over many communities do not keep that identity.

#include <cstddef>
#include <span>
#include <vector>

#include "oscd/communities.hpp"

namespace oscd {

// One decision per community member: class index in [0, K) or K = unknown bin.
using DecisionVector = std::vector<size_t>;

enum class DiversityDomain {
    include_unknown_bin, // metrics over the full K+1 vector (default)
    known_renormalized,  // metrics over the K known entries, renormalized
};

const char* to_string(DiversityDomain d);
DiversityDomain diversity_domain_from_string(const std::string& s);

struct CommunityMetricBundle {
    double oscd = 0.0;
    double oscd_plus = 0.0;
    double oscd_minus = 0.0;
    double mean_abs_abundance_error = 0.0;
    double shannon_error = 0.0;
    double simpson_error = 0.0;
    double pielou_error = 0.0;
    double richness_error = 0.0;
    double topk_overlap = 0.0;
};

// Histogram of decisions over K+1 bins, normalized by community size.
std::vector<double> predicted_abundance(const Community& community, const DecisionVector& decisions,
                                        size_t k);

// Bray-Curtis distance sum|q-p| / sum(q+p); equals half the L1 distance for
// normalized inputs.
double oscd_distance(std::span<const double> truth, std::span<const double> predicted);

struct DirectionalOscd {
    double plus = 0.0;  // overestimation of known taxa
    double minus = 0.0; // underestimation of known taxa
};

// Sums over the K known entries only; the unknown bin is excluded.
DirectionalOscd oscd_directional(std::span<const double> truth, std::span<const double> predicted);

// Diversity indices. 0*ln(0) is taken as 0; pielou is 0 when richness <= 1.
double shannon_index(std::span<const double> v);
double simpson_index(std::span<const double> v);  // Gini-Simpson, 1 - sum p^2
double pielou_evenness(std::span<const double> v);
size_t richness(std::span<const double> v);

// Fraction of the k_top highest-abundance known taxa shared between the two
// vectors. Ties sort by (abundance desc, class index asc). Errors when fewer
// than k_top known taxa are declared.
double topk_overlap(std::span<const double> truth, std::span<const double> predicted,
                    size_t k_top = 3);

struct CommunityMetricParams {
    DiversityDomain diversity_domain = DiversityDomain::include_unknown_bin;
    size_t top_k = 3;
};

CommunityMetricBundle evaluate_community(const Community& community, const DecisionVector& decisions,
                                         size_t k, const CommunityMetricParams& params = {});

// Same bundle from raw abundance vectors (used by threshold scans that have
// already histogrammed their decisions).
CommunityMetricBundle evaluate_abundances(std::span<const double> truth,
                                          std::span<const double> predicted,
                                          const CommunityMetricParams& params = {});

// Field access by objective name; used by objective-aware calibration.
double bundle_field(const CommunityMetricBundle& b, const std::string& objective);

struct BundleAccumulator {
    CommunityMetricBundle sum;
    size_t count = 0;

    void add(const CommunityMetricBundle& b);
    CommunityMetricBundle mean() const;
};

} // namespace oscd
