// oscd command line: validate manifests, score samples, generate seeded
// pseudo-communities, scan thresholds, calibrate strategies, and emit reports.

#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "oscd/error.hpp"
#include "oscd/pipeline.hpp"
#include "oscd/version.hpp"

namespace {

struct CliOverrides {
    std::string config_path;
    std::string manifest;
    std::string scores;
    std::string output_dir;
    std::vector<std::string> methods;
    std::vector<uint64_t> seeds;
    std::vector<std::string> types;
    std::vector<double> ratios;
    int community_size = -1;
    int replicates = -1;
    double temperature = -1.0;
    double shrinkage = -1.0;
    std::string covariance_divisor;
    std::string diversity_domain;
    std::string quantile_source;
    int n_quantiles = -1;
    double recommend_delta = -1.0;
    double recommend_alpha = -1.0;
    std::string boundary_method;
    int jobs = -1;
    bool require_disjoint = false;
    std::string scenario;
    long long n_per_split = -1;
};

void add_common_options(CLI::App* cmd, CliOverrides& o) {
    cmd->add_option("--config", o.config_path, "JSON config file; flags override its fields");
    cmd->add_option("--manifest", o.manifest, "sample manifest (jsonl)");
    cmd->add_option("--scores", o.scores, "precomputed score table (tsv)");
    cmd->add_option("--out-dir", o.output_dir, "run output directory");
    cmd->add_option("--methods", o.methods, "score methods")->delimiter(',');
    cmd->add_option("--seeds", o.seeds, "community seeds")->delimiter(',');
    cmd->add_option("--community-types", o.types, "community types")->delimiter(',');
    cmd->add_option("--unknown-ratios", o.ratios, "controlled unknown ratios")->delimiter(',');
    cmd->add_option("--community-size", o.community_size, "community size");
    cmd->add_option("--replicates", o.replicates, "replicates per (spec, seed)");
    cmd->add_option("--temperature", o.temperature, "energy temperature");
    cmd->add_option("--shrinkage", o.shrinkage, "covariance shrinkage lambda");
    cmd->add_option("--covariance-divisor", o.covariance_divisor, "n_minus_k | n");
    cmd->add_option("--diversity-domain", o.diversity_domain,
                    "include_unknown_bin | known_renormalized");
    cmd->add_option("--quantile-source", o.quantile_source, "val | pooled");
    cmd->add_option("--quantiles", o.n_quantiles, "quantile count for the threshold grid");
    cmd->add_option("--recommend-delta", o.recommend_delta, "recommendation indifference band");
    cmd->add_option("--recommend-alpha", o.recommend_alpha, "recommendation significance level");
    cmd->add_option("--boundary-method", o.boundary_method, "method for the boundary analysis");
    cmd->add_option("--jobs", o.jobs, "worker cap for the threshold scan");
    cmd->add_flag("--require-disjoint-unknowns", o.require_disjoint,
                  "fail when val/test unknown categories overlap");
    cmd->add_option("--scenario", o.scenario, "simulate: mismatch | separable | scenario json path");
    cmd->add_option("--n-per-split", o.n_per_split, "simulate: samples per split");
}

oscd::RunConfig build_config(const CliOverrides& o) {
    oscd::RunConfig config;
    if (!o.config_path.empty()) config = oscd::RunConfig::from_json_file(o.config_path);
    if (!o.manifest.empty()) config.manifest = o.manifest;
    if (!o.scores.empty()) config.scores = o.scores;
    if (!o.output_dir.empty()) config.output_dir = o.output_dir;
    if (!o.methods.empty()) config.methods = o.methods;
    if (!o.seeds.empty()) config.seeds = o.seeds;
    if (!o.types.empty()) config.communities.types = o.types;
    if (!o.ratios.empty()) config.communities.ratios = o.ratios;
    if (o.community_size > 0) config.communities.size = static_cast<size_t>(o.community_size);
    if (o.replicates > 0) config.communities.replicates = static_cast<size_t>(o.replicates);
    if (o.temperature > 0.0) config.temperature = o.temperature;
    if (o.shrinkage >= 0.0) config.shrinkage_lambda = o.shrinkage;
    if (!o.covariance_divisor.empty()) config.covariance_divisor = o.covariance_divisor;
    if (!o.diversity_domain.empty()) config.diversity_domain = o.diversity_domain;
    if (!o.quantile_source.empty()) config.quantile_source = o.quantile_source;
    if (o.n_quantiles > 1) config.n_quantiles = static_cast<size_t>(o.n_quantiles);
    if (o.recommend_delta >= 0.0) config.recommend_delta = o.recommend_delta;
    if (o.recommend_alpha >= 0.0) config.recommend_alpha = o.recommend_alpha;
    if (!o.boundary_method.empty()) config.boundary_method = o.boundary_method;
    if (o.jobs > 0) config.jobs = o.jobs;
    if (o.require_disjoint) config.require_disjoint_unknowns = true;
    if (!o.scenario.empty()) config.scenario = o.scenario;
    if (o.n_per_split > 0) config.n_per_split = static_cast<size_t>(o.n_per_split);
    return config;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"open-set community-distortion evaluation and threshold calibration"};
    app.set_version_flag("--version", oscd::kToolVersion);
    app.require_subcommand(1);

    CliOverrides o;
    int (*run)(const oscd::RunConfig&) = nullptr;

    auto* validate = app.add_subcommand("validate", "validate a sample manifest");
    auto* score = app.add_subcommand("score", "compute the unknown-score table");
    auto* communities = app.add_subcommand("communities", "generate seeded pseudo-community suites");
    auto* scan_cmd = app.add_subcommand("scan", "scan the threshold grid for each method");
    auto* calibrate = app.add_subcommand("calibrate", "select thresholds under every strategy");
    auto* report = app.add_subcommand("report", "render summary tables and curve files");
    auto* simulate = app.add_subcommand("simulate", "generate a synthetic end-to-end dataset");

    for (auto* cmd : {validate, score, communities, scan_cmd, calibrate, report, simulate}) {
        add_common_options(cmd, o);
    }
    validate->callback([&]() { run = oscd::cmd_validate; });
    score->callback([&]() { run = oscd::cmd_score; });
    communities->callback([&]() { run = oscd::cmd_communities; });
    scan_cmd->callback([&]() { run = oscd::cmd_scan; });
    calibrate->callback([&]() { run = oscd::cmd_calibrate; });
    report->callback([&]() { run = oscd::cmd_report; });
    simulate->callback([&]() { run = oscd::cmd_simulate; });

    CLI11_PARSE(app, argc, argv);

    try {
        return run(build_config(o));
    } catch (const oscd::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return e.exit_code();
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
