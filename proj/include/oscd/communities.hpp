#pragma once

// Seeded pseudo-community resampling from split pools. Generation is
// byte-reproducible: per-replicate streams are derived from
// (seed, spec fingerprint, replicate) and all slot counts are deterministic.
//
// Slot rules: the unknown portion of a sized community is
// round-half-to-even(ratio * size); per-category slots inside each portion
// are assigned by largest-remainder apportionment over the type's target
// weights (ties by bucket order). Empirical communities instead draw i.i.d.
// from the pool's observed category frequencies.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "oscd/manifest.hpp"
#include "oscd/rng.hpp"

namespace oscd {

enum class CommunityType : uint8_t {
    empirical = 0,
    balanced = 1,
    unknown_ratio_controlled = 2,
    dominant_taxa = 3,
    long_tail = 4,
    non_target_enriched = 5,
};

const char* to_string(CommunityType t);
CommunityType community_type_from_string(const std::string& s);

struct CommunitySpec {
    CommunityType community_type = CommunityType::unknown_ratio_controlled;
    // Ignored (must be unset) for empirical communities.
    std::optional<double> unknown_ratio = 0.2;
    size_t size = 500;
    size_t replicates = 20;
    Split split = Split::val;

    // Canonical serialization; fingerprint feeds the RNG substream derivation.
    std::string canonical_string() const;
    uint64_t fingerprint() const;
};

struct PoolBucket {
    std::string category;
    Group group = Group::known;
    int class_index = -1; // known buckets only
    std::vector<size_t> sample_indices;
    double frequency = 0.0; // bucket count / split size
};

struct Pool {
    Split split = Split::val;
    size_t total = 0;
    std::vector<PoolBucket> buckets; // known classes in canonical order, then unknowns by name
    size_t known_class_count = 0;

    bool has_unknowns() const;
    bool has_non_target() const;
};

struct Community {
    std::vector<size_t> members;        // sample indices into the SampleSet, draw order
    std::vector<double> true_abundance; // K+1, member-count histogram / size
    CommunitySpec spec;
    uint64_t seed = 0;
    size_t replicate_index = 0;
};

struct CommunitySuite {
    Split split = Split::val;
    std::vector<Community> communities; // ordered by (spec, seed, replicate)
};

// Indexes one split by category; errors on an empty split.
Pool build_pool(const SampleSet& set, Split split);

// Draws one community of exactly spec.size members with replacement.
Community sample_community(const Pool& pool, const SampleSet& set, const CommunitySpec& spec,
                           size_t replicate, Rng& rng);

// Expands specs x seeds x replicates. Identical inputs give identical suites.
CommunitySuite generate_suite(const Pool& pool, const SampleSet& set,
                              const std::vector<CommunitySpec>& specs,
                              const std::vector<uint64_t>& seeds);

// Suite manifest serialization; the unit of reproducibility. extra_fields are
// written after the version key (tool version, config fingerprint).
std::string suite_to_json(const CommunitySuite& suite, const SampleSet& set,
                          const std::map<std::string, std::string>& extra_fields = {});
void save_suite(const CommunitySuite& suite, const SampleSet& set, const std::string& path,
                const std::map<std::string, std::string>& extra_fields = {});

// Deterministic slot apportionment, exposed for direct testing.
std::vector<size_t> largest_remainder_apportion(const std::vector<double>& weights, size_t slots);
size_t round_half_even(double x);

} // namespace oscd
