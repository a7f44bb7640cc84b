#pragma once

// Sample manifests: the line-delimited JSON interchange format every other
// stage consumes. The first line is a header object declaring the known-class
// vocabulary and feature dimension; each following line is one sample record.
//
//   {"version":1,"K":3,"known_classes":["a","b","c"],"feature_dim":4}
//   {"sample_id":"s1","split":"train","category":"a","group":"known",
//    "class_index":0,"logits":[...],"feature":[...]}
//
// Loading is strict: duplicate ids, bad dimensions, unknown enum values and
// records lacking both logits and feature are load-time errors, so downstream
// code never re-validates.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace oscd {

enum class Split : uint8_t { train = 0, val = 1, test = 2 };
enum class Group : uint8_t { known = 0, target_unknown = 1, non_target_unknown = 2 };

const char* to_string(Split s);
const char* to_string(Group g);
Split split_from_string(const std::string& s);
Group group_from_string(const std::string& s);

struct SampleRecord {
    std::string sample_id;
    Split split = Split::train;
    std::string category;
    Group group = Group::known;
    int class_index = -1; // valid iff group == known
    std::optional<std::vector<double>> logits;
    std::optional<std::vector<double>> feature;

    bool is_unknown() const { return group != Group::known; }
};

struct SampleSet {
    std::vector<SampleRecord> records;
    std::vector<std::string> known_classes; // canonical class-index order
    size_t feature_dim = 0;

    std::vector<size_t> split_indices[3]; // per Split, in load order

    size_t k() const { return known_classes.size(); }
    const std::vector<size_t>& split_index(Split s) const {
        return split_indices[static_cast<size_t>(s)];
    }
    // Rebuilds split_indices from records (used after programmatic assembly).
    void reindex();
};

struct GroupCounts {
    size_t known = 0;
    size_t target_unknown = 0;
    size_t non_target_unknown = 0;
    size_t total() const { return known + target_unknown + non_target_unknown; }
};

struct ValidationReport {
    std::map<std::string, GroupCounts> per_split_counts; // key: split name
    std::map<std::string, std::map<std::string, size_t>> per_split_categories;
    std::vector<std::string> val_unknown_categories;  // sorted
    std::vector<std::string> test_unknown_categories; // sorted
    bool disjointness_checked = false;
    std::vector<std::string> overlap; // offending categories when checked
    std::vector<std::string> warnings;

    bool passed() const { return overlap.empty(); }
    std::string to_json() const;
};

// Parses and validates a manifest file. Deterministic and order-preserving.
SampleSet load_samples(const std::string& manifest_path);

// Serializes a SampleSet in the manifest format (round-trip safe floats).
// extra_header entries are appended to the header object (ignored on load).
void save_samples(const SampleSet& set, const std::string& manifest_path,
                  const std::map<std::string, std::string>& extra_header = {});

// Pure split/group inventory. With require_disjoint_unknowns set, a non-empty
// overlap between val-unknown and test-unknown category names is an error.
ValidationReport validate_splits(const SampleSet& set, bool require_disjoint_unknowns);

} // namespace oscd
