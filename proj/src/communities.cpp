#include "oscd/communities.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include <json.hpp>

#include "oscd/error.hpp"
#include "oscd/io.hpp"

namespace oscd {

using ordered_json = nlohmann::ordered_json;

const char* to_string(CommunityType t) {
    switch (t) {
        case CommunityType::empirical: return "empirical";
        case CommunityType::balanced: return "balanced";
        case CommunityType::unknown_ratio_controlled: return "unknown_ratio_controlled";
        case CommunityType::dominant_taxa: return "dominant_taxa";
        case CommunityType::long_tail: return "long_tail";
        case CommunityType::non_target_enriched: return "non_target_enriched";
    }
    return "?";
}

CommunityType community_type_from_string(const std::string& s) {
    if (s == "empirical") return CommunityType::empirical;
    if (s == "balanced") return CommunityType::balanced;
    if (s == "unknown_ratio_controlled") return CommunityType::unknown_ratio_controlled;
    if (s == "dominant_taxa") return CommunityType::dominant_taxa;
    if (s == "long_tail") return CommunityType::long_tail;
    if (s == "non_target_enriched") return CommunityType::non_target_enriched;
    fail(ErrorCode::invalid_value, "unknown community type: " + s);
}

std::string CommunitySpec::canonical_string() const {
    std::string s = "type=";
    s += to_string(community_type);
    s += ";ratio=";
    if (community_type == CommunityType::empirical || !unknown_ratio) {
        s += "empirical";
    } else {
        s += format_double(*unknown_ratio);
    }
    s += ";size=" + std::to_string(size);
    s += ";replicates=" + std::to_string(replicates);
    s += ";split=";
    s += to_string(split);
    return s;
}

uint64_t CommunitySpec::fingerprint() const { return fnv1a64(canonical_string()); }

bool Pool::has_unknowns() const {
    for (const auto& b : buckets) {
        if (b.group != Group::known && !b.sample_indices.empty()) return true;
    }
    return false;
}

bool Pool::has_non_target() const {
    for (const auto& b : buckets) {
        if (b.group == Group::non_target_unknown && !b.sample_indices.empty()) return true;
    }
    return false;
}

size_t round_half_even(double x) {
    if (x < 0.0) fail(ErrorCode::invalid_value, "round_half_even: negative input");
    const double floor_x = std::floor(x);
    const double frac = x - floor_x;
    size_t base = static_cast<size_t>(floor_x);
    if (frac > 0.5) return base + 1;
    if (frac < 0.5) return base;
    return (base % 2 == 0) ? base : base + 1;
}

std::vector<size_t> largest_remainder_apportion(const std::vector<double>& weights, size_t slots) {
    const size_t n = weights.size();
    std::vector<size_t> out(n, 0);
    if (slots == 0 || n == 0) return out;

    double total = 0.0;
    for (double w : weights) {
        if (w < 0.0 || !std::isfinite(w)) {
            fail(ErrorCode::invalid_value, "apportionment weights must be finite and >= 0");
        }
        total += w;
    }
    if (total <= 0.0) fail(ErrorCode::degenerate_input, "apportionment requires positive total weight");

    std::vector<double> remainders(n, 0.0);
    size_t assigned = 0;
    for (size_t i = 0; i < n; ++i) {
        const double quota = static_cast<double>(slots) * weights[i] / total;
        const double fl = std::floor(quota);
        out[i] = static_cast<size_t>(fl);
        remainders[i] = quota - fl;
        assigned += out[i];
    }

    std::vector<size_t> order(n);
    for (size_t i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t b) { return remainders[a] > remainders[b]; });
    for (size_t k = 0; assigned < slots; ++k) {
        ++out[order[k % n]];
        ++assigned;
    }
    return out;
}

Pool build_pool(const SampleSet& set, Split split) {
    const auto& indices = set.split_index(split);
    if (indices.empty()) {
        fail(ErrorCode::degenerate_input,
             std::string("cannot build pool: split '") + to_string(split) + "' is empty");
    }

    Pool pool;
    pool.split = split;
    pool.total = indices.size();
    pool.known_class_count = set.k();

    // Known classes keep canonical order even when absent from the split.
    pool.buckets.resize(set.k());
    for (size_t c = 0; c < set.k(); ++c) {
        pool.buckets[c].category = set.known_classes[c];
        pool.buckets[c].group = Group::known;
        pool.buckets[c].class_index = static_cast<int>(c);
    }

    std::map<std::string, PoolBucket> unknown_buckets; // sorted by category name
    for (size_t idx : indices) {
        const auto& rec = set.records[idx];
        if (rec.group == Group::known) {
            pool.buckets[rec.class_index].sample_indices.push_back(idx);
        } else {
            auto& b = unknown_buckets[rec.category];
            if (b.category.empty()) {
                b.category = rec.category;
                b.group = rec.group;
            }
            b.sample_indices.push_back(idx);
        }
    }
    for (auto& [name, bucket] : unknown_buckets) pool.buckets.push_back(std::move(bucket));

    for (auto& b : pool.buckets) {
        b.frequency = static_cast<double>(b.sample_indices.size()) / static_cast<double>(pool.total);
    }
    return pool;
}

namespace {

struct PortionPlan {
    std::vector<size_t> bucket_ids; // indices into pool.buckets
    std::vector<size_t> slots;      // aligned with bucket_ids
};

// Target weights for one portion of a sized community.
PortionPlan plan_portion(const Pool& pool, const CommunitySpec& spec, bool unknown_portion,
                         size_t portion_slots) {
    PortionPlan plan;
    if (portion_slots == 0) return plan;

    for (size_t i = 0; i < pool.buckets.size(); ++i) {
        const auto& b = pool.buckets[i];
        if (b.sample_indices.empty()) continue;
        const bool is_unknown = b.group != Group::known;
        if (is_unknown != unknown_portion) continue;
        if (unknown_portion && spec.community_type == CommunityType::non_target_enriched &&
            b.group != Group::non_target_unknown) {
            continue;
        }
        plan.bucket_ids.push_back(i);
    }
    if (plan.bucket_ids.empty()) {
        fail(ErrorCode::unsupported_spec,
             std::string("spec '") + spec.canonical_string() + "' needs " +
                 (unknown_portion ? "unknown" : "known") + " samples absent from the " +
                 to_string(pool.split) + " pool");
    }

    std::vector<double> weights(plan.bucket_ids.size(), 0.0);
    switch (spec.community_type) {
        case CommunityType::balanced:
            for (auto& w : weights) w = 1.0;
            break;
        case CommunityType::long_tail:
            for (size_t j = 0; j < weights.size(); ++j) {
                weights[j] = 1.0 / pool.buckets[plan.bucket_ids[j]].frequency;
            }
            break;
        case CommunityType::dominant_taxa: {
            if (unknown_portion) {
                for (size_t j = 0; j < weights.size(); ++j) {
                    weights[j] = pool.buckets[plan.bucket_ids[j]].frequency;
                }
                break;
            }
            // 75% of the known portion to the split's most frequent known
            // class (ties by canonical order); the rest follows empirical
            // frequencies renormalized over the remaining classes.
            size_t dominant = 0;
            double best = -1.0;
            for (size_t j = 0; j < weights.size(); ++j) {
                const double f = pool.buckets[plan.bucket_ids[j]].frequency;
                if (f > best) {
                    best = f;
                    dominant = j;
                }
            }
            double rest_total = 0.0;
            for (size_t j = 0; j < weights.size(); ++j) {
                if (j != dominant) rest_total += pool.buckets[plan.bucket_ids[j]].frequency;
            }
            for (size_t j = 0; j < weights.size(); ++j) {
                if (j == dominant) {
                    weights[j] = 0.75;
                } else if (rest_total > 0.0) {
                    weights[j] = 0.25 * pool.buckets[plan.bucket_ids[j]].frequency / rest_total;
                } else {
                    weights[j] = 0.0;
                }
            }
            if (weights.size() == 1) weights[0] = 1.0; // single known class takes the whole portion
            break;
        }
        case CommunityType::unknown_ratio_controlled:
        case CommunityType::non_target_enriched:
            for (size_t j = 0; j < weights.size(); ++j) {
                weights[j] = pool.buckets[plan.bucket_ids[j]].frequency;
            }
            break;
        case CommunityType::empirical:
            fail(ErrorCode::invalid_value, "empirical communities do not use portion plans");
    }

    plan.slots = largest_remainder_apportion(weights, portion_slots);
    return plan;
}

} // namespace

Community sample_community(const Pool& pool, const SampleSet& set, const CommunitySpec& spec,
                           size_t replicate, Rng& rng) {
    if (spec.size == 0) fail(ErrorCode::invalid_value, "community size must be >= 1");
    if (spec.split != pool.split) {
        fail(ErrorCode::invalid_value, "community spec split does not match pool split");
    }
    if (spec.community_type == CommunityType::empirical) {
        if (spec.unknown_ratio) {
            fail(ErrorCode::invalid_value, "empirical communities take no numeric unknown ratio");
        }
    } else {
        if (!spec.unknown_ratio) {
            fail(ErrorCode::invalid_value, "non-empirical communities need a numeric unknown ratio");
        }
        if (*spec.unknown_ratio < 0.0 || *spec.unknown_ratio > 1.0) {
            fail(ErrorCode::invalid_value, "unknown ratio must lie in [0, 1]");
        }
    }

    Community community;
    community.spec = spec;
    community.replicate_index = replicate;
    community.members.reserve(spec.size);

    if (spec.community_type == CommunityType::empirical) {
        std::vector<size_t> bucket_ids;
        std::vector<double> weights;
        for (size_t i = 0; i < pool.buckets.size(); ++i) {
            if (pool.buckets[i].sample_indices.empty()) continue;
            bucket_ids.push_back(i);
            weights.push_back(pool.buckets[i].frequency);
        }
        for (size_t n = 0; n < spec.size; ++n) {
            const size_t j = rng.next_weighted(weights);
            const auto& bucket = pool.buckets[bucket_ids[j]];
            const size_t pick = rng.next_below(bucket.sample_indices.size());
            community.members.push_back(bucket.sample_indices[pick]);
        }
    } else {
        const size_t unknown_slots = round_half_even(*spec.unknown_ratio * static_cast<double>(spec.size));
        const size_t known_slots = spec.size - unknown_slots;
        if (unknown_slots > 0 && !pool.has_unknowns()) {
            fail(ErrorCode::unsupported_spec,
                 "spec '" + spec.canonical_string() + "' needs unknown samples but the pool has none");
        }

        const PortionPlan known_plan = plan_portion(pool, spec, false, known_slots);
        const PortionPlan unknown_plan = plan_portion(pool, spec, true, unknown_slots);

        // Draw order is deterministic: known buckets in pool order, then
        // unknown buckets, each bucket's slots drawn consecutively.
        for (const PortionPlan* plan : {&known_plan, &unknown_plan}) {
            for (size_t j = 0; j < plan->bucket_ids.size(); ++j) {
                const auto& bucket = pool.buckets[plan->bucket_ids[j]];
                for (size_t s = 0; s < plan->slots[j]; ++s) {
                    const size_t pick = rng.next_below(bucket.sample_indices.size());
                    community.members.push_back(bucket.sample_indices[pick]);
                }
            }
        }
    }

    const size_t k = set.k();
    community.true_abundance.assign(k + 1, 0.0);
    for (size_t idx : community.members) {
        const auto& rec = set.records[idx];
        if (rec.group == Group::known) {
            community.true_abundance[rec.class_index] += 1.0;
        } else {
            community.true_abundance[k] += 1.0;
        }
    }
    for (double& v : community.true_abundance) v /= static_cast<double>(spec.size);
    return community;
}

CommunitySuite generate_suite(const Pool& pool, const SampleSet& set,
                              const std::vector<CommunitySpec>& specs,
                              const std::vector<uint64_t>& seeds) {
    CommunitySuite suite;
    suite.split = pool.split;
    for (const auto& spec : specs) {
        const uint64_t fp = spec.fingerprint();
        for (uint64_t seed : seeds) {
            for (size_t rep = 0; rep < spec.replicates; ++rep) {
                Rng rng = Rng::for_replicate(seed, fp, rep);
                Community c = sample_community(pool, set, spec, rep, rng);
                c.seed = seed;
                suite.communities.push_back(std::move(c));
            }
        }
    }
    return suite;
}

std::string suite_to_json(const CommunitySuite& suite, const SampleSet& set,
                          const std::map<std::string, std::string>& extra_fields) {
    ordered_json root;
    root["version"] = 1;
    for (const auto& [key, value] : extra_fields) root[key] = value;
    root["split"] = to_string(suite.split);
    root["community_count"] = suite.communities.size();
    ordered_json entries = ordered_json::array();
    for (const auto& c : suite.communities) {
        ordered_json e;
        e["spec"] = c.spec.canonical_string();
        char fp_hex[17];
        std::snprintf(fp_hex, sizeof(fp_hex), "%016llx",
                      static_cast<unsigned long long>(c.spec.fingerprint()));
        e["fingerprint"] = fp_hex;
        e["seed"] = c.seed;
        e["replicate"] = c.replicate_index;
        ordered_json members = ordered_json::array();
        for (size_t idx : c.members) members.push_back(set.records[idx].sample_id);
        e["members"] = std::move(members);
        e["true_abundance"] = c.true_abundance;
        entries.push_back(std::move(e));
    }
    root["communities"] = std::move(entries);
    return root.dump();
}

void save_suite(const CommunitySuite& suite, const SampleSet& set, const std::string& path,
                const std::map<std::string, std::string>& extra_fields) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::io_error, "cannot write suite manifest: " + path);
    out << suite_to_json(suite, set, extra_fields) << "\n";
    if (!out) fail(ErrorCode::io_error, "write failure on suite manifest: " + path);
}

} // namespace oscd
