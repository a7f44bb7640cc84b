#include "oscd/manifest.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "oscd/error.hpp"

namespace oscd {

using ordered_json = nlohmann::ordered_json;

const char* to_string(Split s) {
    switch (s) {
        case Split::train: return "train";
        case Split::val: return "val";
        case Split::test: return "test";
    }
    return "?";
}

const char* to_string(Group g) {
    switch (g) {
        case Group::known: return "known";
        case Group::target_unknown: return "target_unknown";
        case Group::non_target_unknown: return "non_target_unknown";
    }
    return "?";
}

Split split_from_string(const std::string& s) {
    if (s == "train") return Split::train;
    if (s == "val") return Split::val;
    if (s == "test") return Split::test;
    fail(ErrorCode::invalid_value, "unknown split name: " + s);
}

Group group_from_string(const std::string& s) {
    if (s == "known") return Group::known;
    if (s == "target_unknown") return Group::target_unknown;
    if (s == "non_target_unknown") return Group::non_target_unknown;
    fail(ErrorCode::invalid_value, "unknown group name: " + s);
}

void SampleSet::reindex() {
    for (auto& bucket : split_indices) bucket.clear();
    for (size_t i = 0; i < records.size(); ++i) {
        split_indices[static_cast<size_t>(records[i].split)].push_back(i);
    }
}

namespace {

std::vector<double> read_double_array(const ordered_json& j, const char* field, size_t line_no) {
    if (!j.is_array()) {
        fail(ErrorCode::parse_error,
             "line " + std::to_string(line_no) + ": field '" + field + "' must be an array");
    }
    std::vector<double> out;
    out.reserve(j.size());
    for (const auto& v : j) {
        if (!v.is_number()) {
            fail(ErrorCode::parse_error,
                 "line " + std::to_string(line_no) + ": field '" + field + "' must be numeric");
        }
        out.push_back(v.get<double>());
    }
    return out;
}

} // namespace

SampleSet load_samples(const std::string& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) fail(ErrorCode::missing_input, "cannot open manifest: " + manifest_path);

    SampleSet set;
    std::string line;
    size_t line_no = 0;

    // Header line.
    if (!std::getline(in, line)) fail(ErrorCode::parse_error, "manifest is empty: " + manifest_path);
    ++line_no;
    ordered_json header;
    try {
        header = ordered_json::parse(line);
    } catch (const std::exception& e) {
        fail(ErrorCode::parse_error, "line 1: header parse failure: " + std::string(e.what()));
    }
    if (!header.contains("K") || !header.contains("known_classes")) {
        fail(ErrorCode::parse_error, "line 1: header must declare K and known_classes");
    }
    if (header.contains("version") && header["version"].get<int64_t>() != 1) {
        fail(ErrorCode::parse_error, "unsupported manifest version (expected 1)");
    }
    const auto declared_k = header["K"].get<int64_t>();
    for (const auto& name : header["known_classes"]) {
        set.known_classes.push_back(name.get<std::string>());
    }
    if (declared_k < 0 || static_cast<size_t>(declared_k) != set.known_classes.size()) {
        fail(ErrorCode::invalid_value, "header K does not match known_classes length");
    }
    set.feature_dim = header.value("feature_dim", size_t{0});

    std::unordered_set<std::string> seen_ids;
    bool feature_dim_locked = set.feature_dim > 0;

    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        ordered_json j;
        try {
            j = ordered_json::parse(line);
        } catch (const std::exception& e) {
            fail(ErrorCode::parse_error,
                 "line " + std::to_string(line_no) + ": record parse failure: " + std::string(e.what()));
        }

        SampleRecord rec;
        for (const char* field : {"sample_id", "split", "category", "group"}) {
            if (!j.contains(field)) {
                fail(ErrorCode::missing_field,
                     "line " + std::to_string(line_no) + ": missing field '" + field + "'");
            }
        }
        rec.sample_id = j["sample_id"].get<std::string>();
        rec.split = split_from_string(j["split"].get<std::string>());
        rec.category = j["category"].get<std::string>();
        rec.group = group_from_string(j["group"].get<std::string>());

        if (!seen_ids.insert(rec.sample_id).second) {
            fail(ErrorCode::duplicate_id,
                 "line " + std::to_string(line_no) + ": duplicate sample_id '" + rec.sample_id + "'");
        }

        if (rec.group == Group::known) {
            if (!j.contains("class_index")) {
                fail(ErrorCode::missing_field,
                     "line " + std::to_string(line_no) + ": known record '" + rec.sample_id +
                         "' lacks class_index");
            }
            const int64_t ci = j["class_index"].get<int64_t>();
            if (ci < 0 || static_cast<size_t>(ci) >= set.k()) {
                fail(ErrorCode::invalid_value,
                     "line " + std::to_string(line_no) + ": class_index " + std::to_string(ci) +
                         " out of range for K=" + std::to_string(set.k()));
            }
            rec.class_index = static_cast<int>(ci);
        }

        if (j.contains("logits") && !j["logits"].is_null()) {
            rec.logits = read_double_array(j["logits"], "logits", line_no);
            if (rec.logits->size() != set.k()) {
                fail(ErrorCode::dimension_mismatch,
                     "line " + std::to_string(line_no) + ": logits length " +
                         std::to_string(rec.logits->size()) + " != K=" + std::to_string(set.k()));
            }
        }
        if (j.contains("feature") && !j["feature"].is_null()) {
            rec.feature = read_double_array(j["feature"], "feature", line_no);
            if (!feature_dim_locked) {
                set.feature_dim = rec.feature->size();
                feature_dim_locked = true;
            }
            if (rec.feature->size() != set.feature_dim) {
                fail(ErrorCode::dimension_mismatch,
                     "line " + std::to_string(line_no) + ": feature length " +
                         std::to_string(rec.feature->size()) + " != feature_dim=" +
                         std::to_string(set.feature_dim));
            }
        }
        if (!rec.logits && !rec.feature) {
            fail(ErrorCode::missing_field,
                 "line " + std::to_string(line_no) + ": record '" + rec.sample_id +
                     "' has neither logits nor feature");
        }

        set.records.push_back(std::move(rec));
    }

    set.reindex();
    return set;
}

void save_samples(const SampleSet& set, const std::string& manifest_path,
                  const std::map<std::string, std::string>& extra_header) {
    std::ofstream out(manifest_path);
    if (!out) fail(ErrorCode::io_error, "cannot write manifest: " + manifest_path);

    ordered_json header;
    header["version"] = 1;
    header["K"] = set.k();
    header["known_classes"] = set.known_classes;
    header["feature_dim"] = set.feature_dim;
    for (const auto& [key, value] : extra_header) header[key] = value;
    out << header.dump() << "\n";

    for (const auto& rec : set.records) {
        ordered_json j;
        j["sample_id"] = rec.sample_id;
        j["split"] = to_string(rec.split);
        j["category"] = rec.category;
        j["group"] = to_string(rec.group);
        if (rec.group == Group::known) j["class_index"] = rec.class_index;
        if (rec.logits) j["logits"] = *rec.logits;
        if (rec.feature) j["feature"] = *rec.feature;
        out << j.dump() << "\n";
    }
    if (!out) fail(ErrorCode::io_error, "write failure on manifest: " + manifest_path);
}

ValidationReport validate_splits(const SampleSet& set, bool require_disjoint_unknowns) {
    ValidationReport report;

    std::set<std::string> val_unknowns;
    std::set<std::string> test_unknowns;

    for (Split split : {Split::train, Split::val, Split::test}) {
        const std::string name = to_string(split);
        GroupCounts counts;
        auto& cats = report.per_split_categories[name];
        for (size_t idx : set.split_index(split)) {
            const auto& rec = set.records[idx];
            switch (rec.group) {
                case Group::known: ++counts.known; break;
                case Group::target_unknown: ++counts.target_unknown; break;
                case Group::non_target_unknown: ++counts.non_target_unknown; break;
            }
            ++cats[rec.category];
            if (rec.is_unknown()) {
                if (split == Split::val) val_unknowns.insert(rec.category);
                if (split == Split::test) test_unknowns.insert(rec.category);
            }
        }
        report.per_split_counts[name] = counts;
        if (counts.total() == 0) {
            report.warnings.push_back(std::string("split '") + name + "' is empty");
        }
    }

    report.val_unknown_categories.assign(val_unknowns.begin(), val_unknowns.end());
    report.test_unknown_categories.assign(test_unknowns.begin(), test_unknowns.end());

    if (require_disjoint_unknowns) {
        report.disjointness_checked = true;
        std::set_intersection(val_unknowns.begin(), val_unknowns.end(), test_unknowns.begin(),
                              test_unknowns.end(), std::back_inserter(report.overlap));
        if (!report.overlap.empty()) {
            std::string names;
            for (const auto& c : report.overlap) {
                if (!names.empty()) names += ", ";
                names += c;
            }
            fail(ErrorCode::disjointness_violation,
                 "val-unknown and test-unknown categories overlap: {" + names + "}");
        }
    }
    return report;
}

std::string ValidationReport::to_json() const {
    ordered_json j;
    for (const auto& [split, counts] : per_split_counts) {
        ordered_json c;
        c["known"] = counts.known;
        c["target_unknown"] = counts.target_unknown;
        c["non_target_unknown"] = counts.non_target_unknown;
        c["total"] = counts.total();
        auto it = per_split_categories.find(split);
        if (it != per_split_categories.end()) c["categories"] = it->second;
        j["per_split"][split] = c;
    }
    j["val_unknown_categories"] = val_unknown_categories;
    j["test_unknown_categories"] = test_unknown_categories;
    j["disjointness_checked"] = disjointness_checked;
    j["overlap"] = overlap;
    j["warnings"] = warnings;
    return j.dump(2);
}

} // namespace oscd
