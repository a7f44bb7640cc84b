#pragma once

// Run configuration and the command implementations behind the CLI. Each
// command is a library function so end-to-end behavior is testable in
// process; the CLI binary only parses flags and maps errors to exit codes.
//
// A run directory is laid out as
//   config_echo.json  run.log  manifest.jsonl (simulate)
//   scores/ communities/ scans/ results/ reports/
// and every artifact except run.log is byte-deterministic given the same
// config and inputs.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "oscd/calibrate.hpp"
#include "oscd/communities.hpp"
#include "oscd/manifest.hpp"
#include "oscd/robustness.hpp"
#include "oscd/scoring.hpp"
#include "oscd/synthetic.hpp"

namespace oscd {

struct CommunityGridConfig {
    std::vector<std::string> types = {"empirical",     "balanced",  "unknown_ratio_controlled",
                                      "dominant_taxa", "long_tail", "non_target_enriched"};
    std::vector<double> ratios = {0.0, 0.1, 0.2, 0.4};
    size_t size = 500;
    size_t replicates = 20;
};

struct RunConfig {
    std::string manifest;
    std::string scores; // optional precomputed score table
    std::string output_dir = "oscd_run";

    std::vector<std::string> methods; // empty = every method the manifest supports
    double temperature = 1.0;
    double shrinkage_lambda = 1e-3;
    double pinv_cutoff_ratio = 1e-10;
    std::string covariance_divisor = "n_minus_k"; // n_minus_k | n

    CommunityGridConfig communities;
    std::vector<uint64_t> seeds = {42, 43, 44, 45, 46};

    std::vector<std::string> strategies = {"fixed_recall_95", "detection_f1_max", "youden_max",
                                           "fpr_at_95_unknown_recall", "community_aware_oscd",
                                           "oracle_global", "oracle_setting"};
    std::vector<std::string> objectives = {"oscd",          "mean_abs_abundance_error",
                                           "shannon_error", "simpson_error",
                                           "pielou_error",  "richness_error",
                                           "topk_overlap_max"};

    std::string diversity_domain = "include_unknown_bin";
    size_t top_k = 3;
    std::string quantile_source = "val"; // val | pooled
    size_t n_quantiles = 401;
    double fixed_recall_target = 0.95;
    double fpr_unknown_recall_target = 0.95;
    double recommend_delta = 0.005;
    double recommend_alpha = 0.01;
    std::string boundary_method; // default: first resolved method

    int jobs = 1;
    bool require_disjoint_unknowns = false;

    // simulate
    std::string scenario = "mismatch"; // mismatch | separable | path to a scenario json
    size_t n_per_split = 20000;

    static RunConfig from_json(const std::string& json_text);
    static RunConfig from_json_file(const std::string& path);
    std::string to_json() const;

    // Echo including the fixed design constants; written to the run directory.
    std::string effective_json() const;
    uint64_t fingerprint() const;

    // output_dir with the OSCD_OUTPUT_ROOT env override applied.
    std::string resolved_output_dir() const;
};

int cmd_validate(const RunConfig& config);
int cmd_score(const RunConfig& config);
int cmd_communities(const RunConfig& config);
int cmd_scan(const RunConfig& config);
int cmd_calibrate(const RunConfig& config);
int cmd_report(const RunConfig& config);
int cmd_simulate(const RunConfig& config);

// Shared building blocks (used by commands and tests).
std::vector<CommunitySpec> build_spec_grid(const CommunityGridConfig& grid, Split split);
SyntheticScenario resolve_scenario(const std::string& name_or_path);
std::vector<std::string> resolve_methods(const RunConfig& config, const SampleSet& set);

} // namespace oscd
