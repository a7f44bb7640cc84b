#include "oscd/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "oscd/error.hpp"
#include "oscd/io.hpp"
#include "oscd/version.hpp"

namespace oscd {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// RunConfig
// ---------------------------------------------------------------------------

namespace {

const std::set<std::string>& known_config_keys() {
    static const std::set<std::string> keys = {
        "manifest",       "scores",           "output_dir",       "methods",
        "temperature",    "shrinkage_lambda", "pinv_cutoff_ratio", "covariance_divisor",
        "communities",    "seeds",            "strategies",       "objectives",
        "diversity_domain", "top_k",          "quantile_source",  "n_quantiles",
        "fixed_recall_target", "fpr_unknown_recall_target", "recommend_delta",
        "recommend_alpha", "boundary_method", "jobs",             "require_disjoint_unknowns",
        "scenario",       "n_per_split",
    };
    return keys;
}

} // namespace

RunConfig RunConfig::from_json(const std::string& json_text) {
    ordered_json j;
    try {
        j = ordered_json::parse(json_text);
    } catch (const std::exception& e) {
        fail(ErrorCode::config_error, std::string("config parse failure: ") + e.what());
    }
    RunConfig c;
    for (const auto& [key, value] : j.items()) {
        if (!known_config_keys().count(key)) {
            fail(ErrorCode::config_error, "unknown config key: '" + key + "'");
        }
    }
    c.manifest = j.value("manifest", c.manifest);
    c.scores = j.value("scores", c.scores);
    c.output_dir = j.value("output_dir", c.output_dir);
    if (j.contains("methods")) c.methods = j["methods"].get<std::vector<std::string>>();
    c.temperature = j.value("temperature", c.temperature);
    c.shrinkage_lambda = j.value("shrinkage_lambda", c.shrinkage_lambda);
    c.pinv_cutoff_ratio = j.value("pinv_cutoff_ratio", c.pinv_cutoff_ratio);
    c.covariance_divisor = j.value("covariance_divisor", c.covariance_divisor);
    if (j.contains("communities")) {
        const auto& g = j["communities"];
        if (g.contains("types")) c.communities.types = g["types"].get<std::vector<std::string>>();
        if (g.contains("ratios")) c.communities.ratios = g["ratios"].get<std::vector<double>>();
        c.communities.size = g.value("size", c.communities.size);
        c.communities.replicates = g.value("replicates", c.communities.replicates);
    }
    if (j.contains("seeds")) c.seeds = j["seeds"].get<std::vector<uint64_t>>();
    if (j.contains("strategies")) c.strategies = j["strategies"].get<std::vector<std::string>>();
    if (j.contains("objectives")) c.objectives = j["objectives"].get<std::vector<std::string>>();
    c.diversity_domain = j.value("diversity_domain", c.diversity_domain);
    c.top_k = j.value("top_k", c.top_k);
    c.quantile_source = j.value("quantile_source", c.quantile_source);
    c.n_quantiles = j.value("n_quantiles", c.n_quantiles);
    c.fixed_recall_target = j.value("fixed_recall_target", c.fixed_recall_target);
    c.fpr_unknown_recall_target = j.value("fpr_unknown_recall_target", c.fpr_unknown_recall_target);
    c.recommend_delta = j.value("recommend_delta", c.recommend_delta);
    c.recommend_alpha = j.value("recommend_alpha", c.recommend_alpha);
    c.boundary_method = j.value("boundary_method", c.boundary_method);
    c.jobs = j.value("jobs", c.jobs);
    c.require_disjoint_unknowns = j.value("require_disjoint_unknowns", c.require_disjoint_unknowns);
    c.scenario = j.value("scenario", c.scenario);
    c.n_per_split = j.value("n_per_split", c.n_per_split);

    if (c.seeds.empty()) fail(ErrorCode::config_error, "config needs at least one seed");
    if (c.quantile_source != "val" && c.quantile_source != "pooled") {
        fail(ErrorCode::config_error, "quantile_source must be 'val' or 'pooled'");
    }
    diversity_domain_from_string(c.diversity_domain);         // validates
    covariance_divisor_from_string(c.covariance_divisor);     // validates
    if (c.jobs < 1) fail(ErrorCode::config_error, "jobs must be >= 1");
    return c;
}

RunConfig RunConfig::from_json_file(const std::string& path) {
    return from_json(read_text_file(path));
}

namespace {

ordered_json config_core_json(const RunConfig& c) {
    ordered_json j;
    j["manifest"] = c.manifest;
    j["scores"] = c.scores;
    j["output_dir"] = c.output_dir;
    j["methods"] = c.methods;
    j["temperature"] = c.temperature;
    j["shrinkage_lambda"] = c.shrinkage_lambda;
    j["pinv_cutoff_ratio"] = c.pinv_cutoff_ratio;
    j["covariance_divisor"] = c.covariance_divisor;
    j["communities"]["types"] = c.communities.types;
    j["communities"]["ratios"] = c.communities.ratios;
    j["communities"]["size"] = c.communities.size;
    j["communities"]["replicates"] = c.communities.replicates;
    j["seeds"] = c.seeds;
    j["strategies"] = c.strategies;
    j["objectives"] = c.objectives;
    j["diversity_domain"] = c.diversity_domain;
    j["top_k"] = c.top_k;
    j["quantile_source"] = c.quantile_source;
    j["n_quantiles"] = c.n_quantiles;
    j["fixed_recall_target"] = c.fixed_recall_target;
    j["fpr_unknown_recall_target"] = c.fpr_unknown_recall_target;
    j["recommend_delta"] = c.recommend_delta;
    j["recommend_alpha"] = c.recommend_alpha;
    j["boundary_method"] = c.boundary_method;
    j["jobs"] = c.jobs;
    j["require_disjoint_unknowns"] = c.require_disjoint_unknowns;
    j["scenario"] = c.scenario;
    j["n_per_split"] = c.n_per_split;
    return j;
}

} // namespace

std::string RunConfig::to_json() const { return config_core_json(*this).dump(2); }

std::string RunConfig::effective_json() const {
    ordered_json j = config_core_json(*this);
    j["tool_version"] = kToolVersion;
    ordered_json fixed;
    fixed["decision_rule"] = "score_gt_threshold_is_unknown";
    fixed["softmax_logsumexp"] = "max_subtraction";
    fixed["auroc_ties"] = "midrank";
    fixed["detection_f1_zero_predicted_positives"] = 0.0;
    fixed["quantile_rule"] = "type7_linear_interpolation";
    fixed["grid"] = "quantiles_plus_extrema_deduplicated";
    fixed["selection_tie_breaking"] = "lowest_grid_index";
    fixed["shrinkage_form"] = "sigma_plus_lambda_mean_diag_identity";
    fixed["predicted_class_feature_only"] = "argmin_raw_prototype_distance";
    fixed["rng"] = "xoshiro256**";
    fixed["stream_derivation"] = "splitmix64(seed, spec_fingerprint, replicate)";
    fixed["unknown_slot_rounding"] = "round_half_to_even";
    fixed["portion_apportionment"] = "largest_remainder";
    fixed["dominant_fraction"] = 0.75;
    fixed["empirical_draws"] = "iid_pool_frequencies";
    fixed["simpson"] = "gini_simpson";
    fixed["shannon_log"] = "natural";
    fixed["richness"] = "count_strictly_positive";
    fixed["topk_tie_breaking"] = "abundance_desc_class_index_asc";
    j["fixed_parameters"] = std::move(fixed);
    return j.dump(2);
}

uint64_t RunConfig::fingerprint() const { return fnv1a64(effective_json()); }

std::string RunConfig::resolved_output_dir() const {
    const char* root = std::getenv("OSCD_OUTPUT_ROOT");
    fs::path out(output_dir);
    if (root && *root && out.is_relative()) return (fs::path(root) / out).string();
    return out.string();
}

// ---------------------------------------------------------------------------
// Run-directory helpers
// ---------------------------------------------------------------------------

namespace {

struct RunDir {
    fs::path root;

    fs::path scores_dir() const { return root / "scores"; }
    fs::path communities_dir() const { return root / "communities"; }
    fs::path scans_dir() const { return root / "scans"; }
    fs::path results_dir() const { return root / "results"; }
    fs::path reports_dir() const { return root / "reports"; }
    fs::path score_table_path() const { return scores_dir() / "score_table.tsv"; }
    fs::path manifest_path() const { return root / "manifest.jsonl"; }
};

std::string fingerprint_hex(const RunConfig& config) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(config.fingerprint()));
    return buf;
}

FileStamp stamp_for(const RunConfig& config) {
    return FileStamp{kToolVersion, fingerprint_hex(config)};
}

std::map<std::string, std::string> stamp_fields(const RunConfig& config) {
    return {{"tool_version", kToolVersion}, {"config_fingerprint", fingerprint_hex(config)}};
}

void stamp_json(ordered_json& j, const RunConfig& config) {
    j["tool_version"] = kToolVersion;
    j["config_fingerprint"] = fingerprint_hex(config);
}

RunDir prepare_run_dir(const RunConfig& config) {
    RunDir dir{fs::path(config.resolved_output_dir())};
    std::error_code ec;
    fs::create_directories(dir.root, ec);
    if (ec) fail(ErrorCode::io_error, "cannot create output directory: " + dir.root.string());
    for (const fs::path& p : {dir.scores_dir(), dir.communities_dir(), dir.scans_dir(),
                              dir.results_dir(), dir.reports_dir(), dir.reports_dir() / "curves"}) {
        fs::create_directories(p, ec);
        if (ec) fail(ErrorCode::io_error, "cannot create output directory: " + p.string());
    }
    ordered_json echo = ordered_json::parse(config.effective_json());
    echo["config_fingerprint"] = fingerprint_hex(config);
    write_text_file((dir.root / "config_echo.json").string(), echo.dump(2) + "\n");
    return dir;
}

// Timestamps live only in the run log.
void log_run(const RunDir& dir, const RunConfig& config, const std::string& command) {
    std::ofstream log(dir.root / "run.log", std::ios::app);
    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    char stamp[32];
    std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&tt));
    char fp_hex[17];
    std::snprintf(fp_hex, sizeof(fp_hex), "%016llx",
                  static_cast<unsigned long long>(config.fingerprint()));
    log << stamp << " " << command << " config=" << fp_hex << " version=" << kToolVersion << "\n";
}

SampleSet load_manifest_for(const RunConfig& config, const RunDir& dir) {
    std::string path = config.manifest;
    if (path.empty()) {
        if (fs::exists(dir.manifest_path())) {
            path = dir.manifest_path().string();
        } else {
            fail(ErrorCode::missing_input, "no manifest configured and none found in the run directory");
        }
    }
    return load_samples(path);
}

ScoreTable resolve_score_table(const RunConfig& config, const RunDir& dir, const SampleSet& set,
                               bool allow_compute) {
    if (!config.scores.empty()) return load_score_table(config.scores);
    if (fs::exists(dir.score_table_path())) return load_score_table(dir.score_table_path().string());
    if (!allow_compute) {
        fail(ErrorCode::missing_input, "no score table available; run the score command first");
    }
    ScoringParams params;
    params.temperature = config.temperature;
    params.shrinkage_lambda = config.shrinkage_lambda;
    params.pinv_cutoff_ratio = config.pinv_cutoff_ratio;
    params.covariance_divisor = covariance_divisor_from_string(config.covariance_divisor);
    const ScoreTable table = build_score_table(set, resolve_methods(config, set), params);
    save_score_table(table, dir.score_table_path().string(), stamp_for(config));
    return table;
}

ordered_json confusion_json(const ThresholdedConfusion& c) {
    ordered_json j;
    j["tp"] = c.tp;
    j["fp"] = c.fp;
    j["tn"] = c.tn;
    j["fn"] = c.fn;
    j["known_recall"] = c.known_recall;
    j["unknown_recall"] = c.unknown_recall;
    j["detection_f1"] = c.detection_f1;
    j["youden"] = c.youden;
    return j;
}

ordered_json bundle_json(const CommunityMetricBundle& b) {
    ordered_json j;
    j["oscd"] = b.oscd;
    j["oscd_plus"] = b.oscd_plus;
    j["oscd_minus"] = b.oscd_minus;
    j["mean_abs_abundance_error"] = b.mean_abs_abundance_error;
    j["shannon_error"] = b.shannon_error;
    j["simpson_error"] = b.simpson_error;
    j["pielou_error"] = b.pielou_error;
    j["richness_error"] = b.richness_error;
    j["topk_overlap"] = b.topk_overlap;
    return j;
}

ordered_json strategy_result_json(const StrategyResult& r, const std::string& method, uint64_t seed) {
    ordered_json j;
    j["method"] = method;
    j["seed"] = seed;
    j["strategy"] = to_string(r.strategy);
    if (!r.objective.empty()) j["objective"] = r.objective;
    if (!r.setting.empty()) j["setting"] = r.setting;
    j["threshold"] = r.threshold;
    j["grid_index"] = r.grid_index;
    j["selected_on"] = r.selected_on;
    j["deployable"] = r.deployable;
    j["val_confusion"] = confusion_json(r.val_confusion);
    j["test_confusion"] = confusion_json(r.test_confusion);
    if (r.test_metrics) j["test_metrics"] = bundle_json(*r.test_metrics);
    if (r.setting_metrics) j["setting_metrics"] = bundle_json(*r.setting_metrics);
    return j;
}

} // namespace

// ---------------------------------------------------------------------------
// Shared building blocks
// ---------------------------------------------------------------------------

std::vector<CommunitySpec> build_spec_grid(const CommunityGridConfig& grid, Split split) {
    if (grid.types.empty()) fail(ErrorCode::config_error, "community grid has no types");
    if (grid.size == 0 || grid.replicates == 0) {
        fail(ErrorCode::config_error, "community size and replicates must be >= 1");
    }
    std::vector<CommunitySpec> specs;
    for (const auto& type_name : grid.types) {
        const CommunityType type = community_type_from_string(type_name);
        if (type == CommunityType::empirical) {
            CommunitySpec spec;
            spec.community_type = type;
            spec.unknown_ratio = std::nullopt;
            spec.size = grid.size;
            spec.replicates = grid.replicates;
            spec.split = split;
            specs.push_back(spec);
            continue;
        }
        if (grid.ratios.empty()) fail(ErrorCode::config_error, "community grid has no ratios");
        for (double ratio : grid.ratios) {
            CommunitySpec spec;
            spec.community_type = type;
            spec.unknown_ratio = ratio;
            spec.size = grid.size;
            spec.replicates = grid.replicates;
            spec.split = split;
            specs.push_back(spec);
        }
    }
    return specs;
}

SyntheticScenario resolve_scenario(const std::string& name_or_path) {
    if (name_or_path == "mismatch") return mismatch_scenario();
    if (name_or_path == "separable") return separable_scenario();
    if (fs::exists(name_or_path)) return scenario_from_json(read_text_file(name_or_path));
    fail(ErrorCode::missing_input, "unknown scenario (and no such file): " + name_or_path);
}

std::vector<std::string> resolve_methods(const RunConfig& config, const SampleSet& set) {
    if (!config.methods.empty()) return config.methods;

    bool all_logits = true;
    bool all_features = true;
    for (Split split : {Split::val, Split::test}) {
        for (size_t idx : set.split_index(split)) {
            const auto& rec = set.records[idx];
            all_logits = all_logits && rec.logits.has_value();
            all_features = all_features && rec.feature.has_value();
        }
    }
    bool train_features = false;
    for (size_t idx : set.split_index(Split::train)) {
        if (set.records[idx].feature) {
            train_features = true;
            break;
        }
    }

    std::vector<std::string> methods;
    if (all_logits) {
        methods.push_back("msp");
        methods.push_back("energy");
    }
    if (all_features && train_features) {
        methods.push_back("prototype_raw");
        methods.push_back("prototype_l2norm");
        methods.push_back("prototype_cosine");
        methods.push_back("mahalanobis");
    }
    if (methods.empty()) {
        fail(ErrorCode::insufficient_data,
             "manifest supports no score method (need logits everywhere or features everywhere)");
    }
    return methods;
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

int cmd_validate(const RunConfig& config) {
    if (config.manifest.empty()) fail(ErrorCode::missing_input, "validate: no manifest configured");
    const SampleSet set = load_samples(config.manifest);
    const ValidationReport report = validate_splits(set, config.require_disjoint_unknowns);
    const std::string json = report.to_json();
    if (!config.output_dir.empty()) {
        const RunDir dir = prepare_run_dir(config);
        ordered_json stamped = ordered_json::parse(json);
        stamp_json(stamped, config);
        write_text_file((dir.root / "validation_report.json").string(), stamped.dump(2) + "\n");
        log_run(dir, config, "validate");
    }
    std::printf("%s\n", json.c_str());
    return 0;
}

int cmd_score(const RunConfig& config) {
    const RunDir dir = prepare_run_dir(config);
    const SampleSet set = load_manifest_for(config, dir);
    ScoringParams params;
    params.temperature = config.temperature;
    params.shrinkage_lambda = config.shrinkage_lambda;
    params.pinv_cutoff_ratio = config.pinv_cutoff_ratio;
    params.covariance_divisor = covariance_divisor_from_string(config.covariance_divisor);
    const ScoreTable table = build_score_table(set, resolve_methods(config, set), params);
    save_score_table(table, dir.score_table_path().string(), stamp_for(config));
    log_run(dir, config, "score");
    std::printf("scored %zu samples with %zu methods -> %s\n", table.rows.size(),
                table.methods.size(), dir.score_table_path().string().c_str());
    return 0;
}

namespace {

std::string suite_file_name(Split split, uint64_t seed) {
    return std::string(to_string(split)) + "_seed" + std::to_string(seed) + ".json";
}

} // namespace

int cmd_communities(const RunConfig& config) {
    const RunDir dir = prepare_run_dir(config);
    const SampleSet set = load_manifest_for(config, dir);

    for (Split split : {Split::val, Split::test}) {
        const Pool pool = build_pool(set, split);
        const std::vector<CommunitySpec> specs = build_spec_grid(config.communities, split);
        for (uint64_t seed : config.seeds) {
            const CommunitySuite suite = generate_suite(pool, set, specs, {seed});
            save_suite(suite, set, (dir.communities_dir() / suite_file_name(split, seed)).string(),
                       stamp_fields(config));
        }
    }
    log_run(dir, config, "communities");
    std::printf("community suites written to %s\n", dir.communities_dir().string().c_str());
    return 0;
}

namespace {

ThresholdGrid grid_for_method(const RunConfig& config, const ScoreTable& table,
                              const std::string& method) {
    const int col = table.method_index(method);
    if (col < 0) fail(ErrorCode::missing_input, "score table lacks method '" + method + "'");
    std::vector<double> scores;
    for (const auto& row : table.rows) {
        if (config.quantile_source == "val" && row.split != Split::val) continue;
        scores.push_back(row.scores[col]);
    }
    if (scores.empty()) fail(ErrorCode::degenerate_input, "no scores available for grid building");
    return build_grid(scores, config.n_quantiles, method);
}

struct ScanContext {
    SampleSet set;
    ScoreTable table;
    std::vector<std::string> methods;
    Pool val_pool;
    Pool test_pool;
    std::vector<CommunitySpec> val_specs;
    std::vector<CommunitySpec> test_specs;
    CommunityMetricParams metric_params;
};

ScanContext make_scan_context(const RunConfig& config, const RunDir& dir) {
    ScanContext ctx;
    ctx.set = load_manifest_for(config, dir);
    if (ctx.set.split_index(Split::val).empty()) {
        fail(ErrorCode::degenerate_input, "val split is empty");
    }
    if (ctx.set.split_index(Split::test).empty()) {
        fail(ErrorCode::degenerate_input, "test split is empty");
    }
    ctx.table = resolve_score_table(config, dir, ctx.set, /*allow_compute=*/true);
    ctx.methods = config.methods.empty() ? ctx.table.methods : config.methods;
    ctx.val_pool = build_pool(ctx.set, Split::val);
    ctx.test_pool = build_pool(ctx.set, Split::test);
    ctx.val_specs = build_spec_grid(config.communities, Split::val);
    ctx.test_specs = build_spec_grid(config.communities, Split::test);
    ctx.metric_params.diversity_domain = diversity_domain_from_string(config.diversity_domain);
    ctx.metric_params.top_k = config.top_k;
    return ctx;
}

ScanTable scan_method_for_seed(const RunConfig& config, const ScanContext& ctx,
                               const std::string& method, const CommunitySuite& val_suite,
                               const CommunitySuite& test_suite) {
    const ThresholdGrid grid = grid_for_method(config, ctx.table, method);
    ScanInputs inputs;
    inputs.samples = &ctx.set;
    inputs.scores = &ctx.table;
    inputs.method = method;
    inputs.val_suite = &val_suite;
    inputs.test_suite = &test_suite;
    inputs.metric_params = ctx.metric_params;
    inputs.jobs = config.jobs;
    return scan(grid, inputs);
}

} // namespace

int cmd_scan(const RunConfig& config) {
    const RunDir dir = prepare_run_dir(config);
    const ScanContext ctx = make_scan_context(config, dir);

    const uint64_t seed = config.seeds.front();
    const CommunitySuite val_suite = generate_suite(ctx.val_pool, ctx.set, ctx.val_specs, {seed});
    const CommunitySuite test_suite = generate_suite(ctx.test_pool, ctx.set, ctx.test_specs, {seed});

    for (const auto& method : ctx.methods) {
        const ScanTable table = scan_method_for_seed(config, ctx, method, val_suite, test_suite);
        write_text_file((dir.scans_dir() / (method + ".tsv")).string(),
                        stamp_for(config).comment_line() + "\n" + table.to_tsv());
    }
    log_run(dir, config, "scan");
    std::printf("scan tables written to %s\n", dir.scans_dir().string().c_str());
    return 0;
}

int cmd_calibrate(const RunConfig& config) {
    const RunDir dir = prepare_run_dir(config);
    const ScanContext ctx = make_scan_context(config, dir);
    const std::string boundary_method =
        config.boundary_method.empty() ? ctx.methods.front() : config.boundary_method;

    std::vector<Strategy> headline_strategies;
    bool want_setting_oracle = false;
    for (const auto& name : config.strategies) {
        const Strategy s = strategy_from_string(name);
        if (s == Strategy::oracle_setting) {
            want_setting_oracle = true;
        } else if (s == Strategy::objective_aware) {
            fail(ErrorCode::config_error, "objective strategies are configured via 'objectives'");
        } else {
            headline_strategies.push_back(s);
        }
    }
    SelectionTargets targets;
    targets.fixed_recall = config.fixed_recall_target;
    targets.fpr_unknown_recall = config.fpr_unknown_recall_target;

    ordered_json all_results = ordered_json::array();
    // (method, strategy label) -> per-seed global test oscd
    std::map<std::pair<std::string, std::string>, std::vector<double>> sweep_values;
    // boundary bookkeeping: setting -> strategy label -> per-seed setting oscd
    std::map<std::string, std::map<std::string, std::vector<double>>> boundary_values;
    std::vector<std::string> boundary_sample_strategies;
    // method -> per-seed community-aware global test oscd (for rank consistency)
    std::map<std::string, std::vector<double>> ca_oscd_per_method;

    for (Strategy s : headline_strategies) {
        switch (s) {
            case Strategy::fixed_recall_95:
            case Strategy::detection_f1_max:
            case Strategy::youden_max:
            case Strategy::fpr_at_95_unknown_recall:
                boundary_sample_strategies.push_back(to_string(s));
                break;
            default: break;
        }
    }

    for (size_t seed_pos = 0; seed_pos < config.seeds.size(); ++seed_pos) {
        const uint64_t seed = config.seeds[seed_pos];
        const CommunitySuite val_suite = generate_suite(ctx.val_pool, ctx.set, ctx.val_specs, {seed});
        const CommunitySuite test_suite =
            generate_suite(ctx.test_pool, ctx.set, ctx.test_specs, {seed});
        if (seed_pos == 0) {
            save_suite(val_suite, ctx.set,
                       (dir.communities_dir() / suite_file_name(Split::val, seed)).string(),
                       stamp_fields(config));
            save_suite(test_suite, ctx.set,
                       (dir.communities_dir() / suite_file_name(Split::test, seed)).string(),
                       stamp_fields(config));
        }

        for (const auto& method : ctx.methods) {
            const ScanTable scan_table =
                scan_method_for_seed(config, ctx, method, val_suite, test_suite);
            if (seed_pos == 0) {
                write_text_file((dir.scans_dir() / (method + ".tsv")).string(),
                                stamp_for(config).comment_line() + "\n" + scan_table.to_tsv());
            }

            std::vector<StrategyResult> results;
            for (Strategy s : headline_strategies) {
                results.push_back(select(scan_table, s, targets));
            }
            for (const auto& objective : config.objectives) {
                results.push_back(select_objective_aware(scan_table, objective));
            }
            std::vector<StrategyResult> setting_oracles;
            if (want_setting_oracle) {
                setting_oracles = select_setting_oracles(scan_table);
                for (const auto& r : setting_oracles) results.push_back(r);
            }

            // Structural guarantees, asserted on every run: the global oracle
            // dominates every strategy, and each setting oracle refines the
            // global oracle within its setting.
            const auto oracle_it =
                std::find_if(results.begin(), results.end(), [](const StrategyResult& r) {
                    return r.strategy == Strategy::oracle_global;
                });
            if (oracle_it != results.end()) {
                for (const auto& r : results) {
                    if (!r.test_metrics || !r.setting.empty()) continue;
                    if (oracle_it->test_metrics->oscd > r.test_metrics->oscd + 1e-12) {
                        fail(ErrorCode::generic,
                             std::string("internal invariant violated: oracle dominated by ") +
                                 to_string(r.strategy));
                    }
                }
                for (const auto& so : setting_oracles) {
                    const auto pos = std::find(scan_table.test_settings.begin(),
                                               scan_table.test_settings.end(), so.setting);
                    const size_t s_id =
                        static_cast<size_t>(pos - scan_table.test_settings.begin());
                    const double global_at_setting =
                        scan_table.rows[oracle_it->grid_index].test_setting_mean[s_id].oscd;
                    if (so.setting_metrics->oscd > global_at_setting + 1e-12) {
                        fail(ErrorCode::generic,
                             "internal invariant violated: setting oracle above global oracle in " +
                                 so.setting);
                    }
                }
            }

            for (const auto& r : results) {
                all_results.push_back(strategy_result_json(r, method, seed));
                if (r.setting.empty()) {
                    std::string label = to_string(r.strategy);
                    if (!r.objective.empty()) label += ":" + r.objective;
                    if (r.test_metrics) {
                        sweep_values[{method, label}].push_back(r.test_metrics->oscd);
                    }
                    if (r.strategy == Strategy::community_aware_oscd && r.test_metrics) {
                        ca_oscd_per_method[method].push_back(r.test_metrics->oscd);
                    }
                }
            }

            // Applicability-boundary bookkeeping on the designated method.
            if (method == boundary_method) {
                for (size_t s_id = 0; s_id < scan_table.test_settings.size(); ++s_id) {
                    const std::string& setting = scan_table.test_settings[s_id];
                    auto& per_strategy = boundary_values[setting];
                    for (Strategy s : headline_strategies) {
                        switch (s) {
                            case Strategy::fixed_recall_95:
                            case Strategy::detection_f1_max:
                            case Strategy::youden_max:
                            case Strategy::fpr_at_95_unknown_recall: {
                                const StrategyResult r = select(scan_table, s, targets);
                                per_strategy[to_string(s)].push_back(
                                    scan_table.rows[r.grid_index].test_setting_mean[s_id].oscd);
                                break;
                            }
                            default: break;
                        }
                    }
                    const StrategyResult ca =
                        select_community_aware_for_setting(scan_table, setting);
                    per_strategy["community_aware_setting"].push_back(
                        scan_table.rows[ca.grid_index].test_setting_mean[s_id].oscd);
                }
                for (const auto& oracle : setting_oracles) {
                    boundary_values[oracle.setting]["oracle_setting"].push_back(
                        oracle.setting_metrics->oscd);
                }
            }
        }
    }

    {
        ordered_json doc;
        stamp_json(doc, config);
        doc["results"] = std::move(all_results);
        write_text_file((dir.results_dir() / "strategy_results.json").string(),
                        doc.dump(2) + "\n");
    }

    // Seed sweep summaries.
    ordered_json sweeps = ordered_json::array();
    for (const auto& [key, values] : sweep_values) {
        SeedSweep sweep;
        sweep.strategy = key.second;
        sweep.seeds = config.seeds;
        sweep.values = values;
        const MeanSd ms = sweep.summary();
        ordered_json j;
        j["method"] = key.first;
        j["strategy"] = sweep.strategy;
        j["seeds"] = sweep.seeds;
        j["values"] = sweep.values;
        j["mean"] = ms.mean;
        j["sd"] = ms.sd;
        sweeps.push_back(std::move(j));
    }
    {
        ordered_json doc;
        stamp_json(doc, config);
        doc["sweeps"] = std::move(sweeps);
        write_text_file((dir.results_dir() / "seed_sweep.json").string(), doc.dump(2) + "\n");
    }

    // Applicability-boundary recommendations.
    RecommendationRule rule;
    rule.delta = config.recommend_delta;
    rule.alpha = config.recommend_alpha;
    ordered_json boundary = ordered_json::array();
    for (const auto& [setting, per_strategy] : boundary_values) {
        auto ca_it = per_strategy.find("community_aware_setting");
        auto oracle_it = per_strategy.find("oracle_setting");
        if (ca_it == per_strategy.end() || oracle_it == per_strategy.end()) continue;

        // Best sample-level strategy = lowest mean setting-level distortion.
        std::string best_name;
        double best_mean = std::numeric_limits<double>::infinity();
        for (const auto& name : boundary_sample_strategies) {
            auto it = per_strategy.find(name);
            if (it == per_strategy.end()) continue;
            const double m = mean_sd(it->second).mean;
            if (m < best_mean) {
                best_mean = m;
                best_name = name;
            }
        }
        if (best_name.empty()) continue;

        ordered_json j;
        j["setting"] = setting;
        j["best_sample_strategy"] = best_name;
        if (config.seeds.size() >= 2) {
            RecommendationRow row = recommend(setting, per_strategy.at(best_name), ca_it->second,
                                              oracle_it->second, rule);
            row.best_sample_strategy = best_name;
            j["best_sample_mean"] = row.best_sample.mean;
            j["best_sample_sd"] = row.best_sample.sd;
            j["community_aware_mean"] = row.community_aware.mean;
            j["community_aware_sd"] = row.community_aware.sd;
            j["setting_oracle_mean"] = row.setting_oracle.mean;
            j["setting_oracle_sd"] = row.setting_oracle.sd;
            j["paired_p"] = row.paired_p;
            j["recommendation"] = to_string(row.recommendation);
        } else {
            // The paired test needs at least two seeds.
            j["best_sample_mean"] = mean_sd(per_strategy.at(best_name)).mean;
            j["community_aware_mean"] = mean_sd(ca_it->second).mean;
            j["setting_oracle_mean"] = mean_sd(oracle_it->second).mean;
            j["paired_p"] = nullptr;
            j["recommendation"] = "insufficient_seeds";
        }
        ordered_json per_seed;
        for (const auto& [name, values] : per_strategy) per_seed[name] = values;
        j["per_seed"] = std::move(per_seed);
        boundary.push_back(std::move(j));
    }
    ordered_json boundary_doc;
    stamp_json(boundary_doc, config);
    boundary_doc["method"] = boundary_method;
    boundary_doc["delta"] = rule.delta;
    boundary_doc["alpha"] = rule.alpha;
    boundary_doc["settings"] = std::move(boundary);
    write_text_file((dir.results_dir() / "boundary.json").string(), boundary_doc.dump(2) + "\n");

    // Sample-vs-community rank consistency across methods.
    ordered_json rank_doc;
    stamp_json(rank_doc, config);
    {
        std::vector<std::string> methods_with_ca;
        std::vector<double> aurocs;
        std::vector<double> ca_oscds;
        for (const auto& method : ctx.methods) {
            auto it = ca_oscd_per_method.find(method);
            if (it == ca_oscd_per_method.end() || it->second.empty()) continue;
            const int col = ctx.table.method_index(method);
            std::vector<double> scores;
            std::vector<bool> labels;
            for (const auto& row : ctx.table.rows) {
                if (row.split != Split::test) continue;
                scores.push_back(row.scores[col]);
                labels.push_back(row.group != Group::known);
            }
            const BinaryScoredSet b = make_binary_scored(scores, labels);
            methods_with_ca.push_back(method);
            aurocs.push_back(auroc(b));
            ca_oscds.push_back(mean_sd(it->second).mean);
        }
        rank_doc["methods"] = methods_with_ca;
        rank_doc["test_auroc"] = aurocs;
        rank_doc["community_aware_test_oscd"] = ca_oscds;
        if (methods_with_ca.size() >= 2) {
            // Negated distortion so +1 means the rankings agree.
            std::vector<double> neg_oscd;
            for (double v : ca_oscds) neg_oscd.push_back(-v);
            rank_doc["spearman"] = spearman(aurocs, neg_oscd);
            rank_doc["pearson"] = pearson(aurocs, neg_oscd);
        } else {
            rank_doc["spearman"] = nullptr;
            rank_doc["pearson"] = nullptr;
            rank_doc["note"] = "rank consistency needs at least two methods";
        }
    }
    write_text_file((dir.results_dir() / "rank_consistency.json").string(), rank_doc.dump(2) + "\n");

    log_run(dir, config, "calibrate");
    std::printf("calibration results written to %s\n", dir.results_dir().string().c_str());
    return 0;
}

int cmd_simulate(const RunConfig& config) {
    const RunDir dir = prepare_run_dir(config);
    const SyntheticScenario scenario = resolve_scenario(config.scenario);
    const SyntheticOutput out = generate(scenario, config.n_per_split);
    save_samples(out.samples, dir.manifest_path().string(), stamp_fields(config));
    save_score_table(out.scores, dir.score_table_path().string(), stamp_for(config));
    ordered_json scenario_echo = ordered_json::parse(scenario_to_json(scenario));
    stamp_json(scenario_echo, config);
    write_text_file((dir.root / "scenario_echo.json").string(), scenario_echo.dump(2) + "\n");
    log_run(dir, config, "simulate");
    std::printf("synthetic manifest: %s (%zu records)\n", dir.manifest_path().string().c_str(),
                out.samples.records.size());
    return 0;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

namespace {

std::string format_mean_sd(double mean, double sd) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4f +- %.4f", mean, sd);
    return buf;
}

std::string format_fixed(double v, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return buf;
}

// Minimal column-aligned text table.
std::string render_table(const std::vector<std::vector<std::string>>& rows) {
    std::vector<size_t> widths;
    for (const auto& row : rows) {
        if (widths.size() < row.size()) widths.resize(row.size(), 0);
        for (size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], row[c].size());
    }
    std::ostringstream os;
    for (const auto& row : rows) {
        for (size_t c = 0; c < row.size(); ++c) {
            os << row[c];
            if (c + 1 < row.size()) os << std::string(widths[c] - row[c].size() + 2, ' ');
        }
        os << "\n";
    }
    return os.str();
}

// Scan TSV columns needed for the threshold-curve exports.
struct CurvePoints {
    std::vector<double> threshold, val_known_recall, val_f1, test_oscd, test_known_recall;
};

CurvePoints parse_scan_curve(const std::string& tsv) {
    CurvePoints out;
    std::istringstream in(tsv);
    std::string line;
    std::vector<std::string> header;
    int c_thr = -1, c_vkr = -1, c_vf1 = -1, c_toscd = -1, c_tkr = -1;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> fields;
        std::istringstream ls(line);
        std::string field;
        while (std::getline(ls, field, '\t')) fields.push_back(field);
        if (header.empty()) {
            header = fields;
            for (int i = 0; i < static_cast<int>(header.size()); ++i) {
                if (header[i] == "threshold") c_thr = i;
                if (header[i] == "val.known_recall") c_vkr = i;
                if (header[i] == "val.detection_f1") c_vf1 = i;
                if (header[i] == "test_comm.oscd") c_toscd = i;
                if (header[i] == "test.known_recall") c_tkr = i;
            }
            continue;
        }
        if (c_thr < 0 || c_vkr < 0 || c_vf1 < 0) continue;
        out.threshold.push_back(parse_double(fields[c_thr]));
        out.val_known_recall.push_back(parse_double(fields[c_vkr]));
        out.val_f1.push_back(parse_double(fields[c_vf1]));
        out.test_oscd.push_back(c_toscd >= 0 ? parse_double(fields[c_toscd]) : 0.0);
        out.test_known_recall.push_back(c_tkr >= 0 ? parse_double(fields[c_tkr]) : 0.0);
    }
    return out;
}

} // namespace

int cmd_report(const RunConfig& config) {
    const RunDir dir = prepare_run_dir(config);
    const SampleSet set = load_manifest_for(config, dir);
    const ScoreTable table = resolve_score_table(config, dir, set, /*allow_compute=*/false);

    // Confidence summary (per split) when logits exist.
    for (Split split : {Split::val, Split::test}) {
        bool logits_everywhere = !set.split_index(split).empty();
        for (size_t idx : set.split_index(split)) {
            if (!set.records[idx].logits) {
                logits_everywhere = false;
                break;
            }
        }
        if (!logits_everywhere) continue;
        const auto summary = confidence_summary(set, table, split);
        ordered_json j = ordered_json::array();
        std::vector<std::vector<std::string>> text_rows;
        text_rows.push_back({"group", "n", "accuracy", "mean_confidence", "frac_conf>=0.90"});
        for (const auto& row : summary) {
            ordered_json r;
            r["group"] = row.group;
            r["n"] = row.n;
            if (row.accuracy) r["accuracy"] = *row.accuracy;
            r["mean_confidence"] = row.mean_confidence;
            r["frac_high_confidence"] = row.frac_high_confidence;
            j.push_back(std::move(r));
            text_rows.push_back({row.group, std::to_string(row.n),
                                 row.accuracy ? format_fixed(*row.accuracy) : "--",
                                 format_fixed(row.mean_confidence),
                                 format_fixed(row.frac_high_confidence)});
        }
        const std::string base =
            (dir.reports_dir() / (std::string("confidence_summary_") + to_string(split))).string();
        ordered_json doc;
        stamp_json(doc, config);
        doc["rows"] = std::move(j);
        write_text_file(base + ".json", doc.dump(2) + "\n");
        write_text_file(base + ".txt",
                        stamp_for(config).comment_line() + "\n" + render_table(text_rows));
    }

    // Absorption matrices for splits that contain unknowns.
    for (Split split : {Split::val, Split::test}) {
        bool has_unknown = false;
        for (size_t idx : set.split_index(split)) {
            if (set.records[idx].is_unknown()) {
                has_unknown = true;
                break;
            }
        }
        if (!has_unknown) continue;
        const AbsorptionMatrix m = absorption_matrix(set, table, split);
        const std::string base =
            (dir.reports_dir() / (std::string("absorption_matrix_") + to_string(split))).string();
        write_text_file(base + ".tsv", stamp_for(config).comment_line() + "\n" + m.to_tsv());
    }

    // Tables derived from calibration results.
    const fs::path results = dir.results_dir();
    if (fs::exists(results / "seed_sweep.json")) {
        const ordered_json sweeps = ordered_json::parse(
            read_text_file((results / "seed_sweep.json").string()))["sweeps"];
        const ordered_json rank = fs::exists(results / "rank_consistency.json")
                                      ? ordered_json::parse(read_text_file(
                                            (results / "rank_consistency.json").string()))
                                      : ordered_json();

        // Method summary (sample-level metrics + community-aware distortion).
        std::vector<std::vector<std::string>> rows;
        rows.push_back({"method", "test_auroc", "test_aupr", "fpr_at_95_unknown_recall",
                        "community_aware_test_oscd"});
        for (const auto& method : table.methods) {
            const int col = table.method_index(method);
            std::vector<double> scores;
            std::vector<bool> labels;
            for (const auto& row : table.rows) {
                if (row.split != Split::test) continue;
                scores.push_back(row.scores[col]);
                labels.push_back(row.group != Group::known);
            }
            std::string ca_cell = "--";
            for (const auto& s : sweeps) {
                if (s["method"] == method && s["strategy"] == "community_aware_oscd") {
                    ca_cell = format_mean_sd(s["mean"].get<double>(), s["sd"].get<double>());
                }
            }
            try {
                const BinaryScoredSet b = make_binary_scored(scores, labels);
                rows.push_back({method, format_fixed(auroc(b)), format_fixed(aupr(b)),
                                format_fixed(fpr_at_unknown_recall(b).fpr), ca_cell});
            } catch (const Error&) {
                rows.push_back({method, "--", "--", "--", ca_cell});
            }
        }
        std::string text = render_table(rows);
        if (rank.contains("spearman") && !rank["spearman"].is_null()) {
            text += "\nrank consistency (test auroc vs community-aware test oscd): spearman " +
                    format_fixed(rank["spearman"].get<double>()) + ", pearson " +
                    format_fixed(rank["pearson"].get<double>()) + "\n";
        }
        write_text_file((dir.reports_dir() / "method_summary.txt").string(),
                        stamp_for(config).comment_line() + "\n" + text);
    }

    if (fs::exists(results / "strategy_results.json")) {
        const ordered_json all = ordered_json::parse(
            read_text_file((results / "strategy_results.json").string()))["results"];
        const std::string boundary_method =
            config.boundary_method.empty() ? table.methods.front() : config.boundary_method;
        const uint64_t first_seed = config.seeds.front();

        // Direction table: distortion decomposition per strategy.
        std::vector<std::vector<std::string>> dir_rows;
        dir_rows.push_back({"strategy", "threshold", "oscd", "oscd_plus", "oscd_minus"});
        // Objective trade-off table.
        std::vector<std::vector<std::string>> obj_rows;
        obj_rows.push_back({"strategy", "selected_on", "grid_index", "oscd", "shannon", "simpson",
                            "pielou", "richness", "top3_overlap"});
        for (const auto& r : all) {
            if (r["method"] != boundary_method || r["seed"] != first_seed) continue;
            if (r.contains("setting")) continue;
            if (!r.contains("test_metrics")) continue;
            const auto& tm = r["test_metrics"];
            std::string label = r["strategy"].get<std::string>();
            if (r.contains("objective")) label += ":" + r["objective"].get<std::string>();
            dir_rows.push_back({label, format_fixed(r["threshold"].get<double>(), 6),
                                format_fixed(tm["oscd"].get<double>()),
                                format_fixed(tm["oscd_plus"].get<double>()),
                                format_fixed(tm["oscd_minus"].get<double>())});
            obj_rows.push_back({label, r["selected_on"].get<std::string>(),
                                std::to_string(r["grid_index"].get<size_t>()),
                                format_fixed(tm["oscd"].get<double>()),
                                format_fixed(tm["shannon_error"].get<double>()),
                                format_fixed(tm["simpson_error"].get<double>()),
                                format_fixed(tm["pielou_error"].get<double>()),
                                format_fixed(tm["richness_error"].get<double>()),
                                format_fixed(tm["topk_overlap"].get<double>())});
        }
        write_text_file((dir.reports_dir() / "direction_table.txt").string(),
                        stamp_for(config).comment_line() + "\nmethod: " + boundary_method + "\n" +
                            render_table(dir_rows));
        write_text_file((dir.reports_dir() / "objective_tradeoffs.txt").string(),
                        stamp_for(config).comment_line() + "\nmethod: " + boundary_method + "\n" +
                            render_table(obj_rows));

        // Threshold curves (sample detection vs community distortion).
        for (const auto& method : table.methods) {
            const fs::path scan_path = dir.scans_dir() / (method + ".tsv");
            if (!fs::exists(scan_path)) continue;
            const CurvePoints pts = parse_scan_curve(read_text_file(scan_path.string()));
            std::ostringstream os;
            os << stamp_for(config).comment_line() << "\n";
            os << "threshold\tval_known_recall\tval_detection_f1\ttest_known_recall\ttest_mean_oscd\n";
            for (size_t i = 0; i < pts.threshold.size(); ++i) {
                os << format_double(pts.threshold[i]) << "\t"
                   << format_double(pts.val_known_recall[i]) << "\t"
                   << format_double(pts.val_f1[i]) << "\t"
                   << format_double(pts.test_known_recall[i]) << "\t"
                   << format_double(pts.test_oscd[i]) << "\n";
            }
            write_text_file((dir.reports_dir() / "curves" / (method + "_threshold_curve.tsv")).string(),
                            os.str());

            ordered_json markers = ordered_json::array();
            for (const auto& r : all) {
                if (r["method"] != method || r["seed"] != first_seed) continue;
                if (r.contains("setting") || r.contains("objective")) continue;
                ordered_json m;
                m["strategy"] = r["strategy"];
                m["threshold"] = r["threshold"];
                m["val_known_recall"] = r["val_confusion"]["known_recall"];
                m["val_detection_f1"] = r["val_confusion"]["detection_f1"];
                m["test_known_recall"] = r["test_confusion"]["known_recall"];
                if (r.contains("test_metrics")) m["test_mean_oscd"] = r["test_metrics"]["oscd"];
                m["deployable"] = r["deployable"];
                markers.push_back(std::move(m));
            }
            ordered_json marker_doc;
            stamp_json(marker_doc, config);
            marker_doc["markers"] = std::move(markers);
            write_text_file((dir.reports_dir() / "curves" / (method + "_markers.json")).string(),
                            marker_doc.dump(2) + "\n");
        }
    }

    if (fs::exists(results / "boundary.json")) {
        const ordered_json boundary =
            ordered_json::parse(read_text_file((results / "boundary.json").string()));
        std::vector<std::vector<std::string>> rows;
        rows.push_back({"setting", "best_sample_strategy", "best_sample_oscd", "ca_oscd",
                        "setting_oracle_oscd", "paired_p", "recommendation"});
        for (const auto& s : boundary["settings"]) {
            std::string p_cell = "--";
            if (s.contains("paired_p") && !s["paired_p"].is_null()) {
                char p_buf[32];
                std::snprintf(p_buf, sizeof(p_buf), "%.3g", s["paired_p"].get<double>());
                p_cell = p_buf;
            }
            rows.push_back({s["setting"].get<std::string>(),
                            s["best_sample_strategy"].get<std::string>(),
                            format_mean_sd(s["best_sample_mean"].get<double>(),
                                           s.value("best_sample_sd", 0.0)),
                            format_mean_sd(s["community_aware_mean"].get<double>(),
                                           s.value("community_aware_sd", 0.0)),
                            format_mean_sd(s["setting_oracle_mean"].get<double>(),
                                           s.value("setting_oracle_sd", 0.0)),
                            p_cell, s["recommendation"].get<std::string>()});
        }
        write_text_file((dir.reports_dir() / "boundary_table.txt").string(),
                        stamp_for(config).comment_line() + "\nmethod: " +
                            boundary["method"].get<std::string>() + "\n" + render_table(rows));
    }

    log_run(dir, config, "report");
    std::printf("reports written to %s\n", dir.reports_dir().string().c_str());
    return 0;
}

} // namespace oscd
