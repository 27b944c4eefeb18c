#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "atlas/error.hpp"
#include "atlas/io.hpp"
#include "atlas/pipeline.hpp"
#include "atlas/synth.hpp"

namespace fs = std::filesystem;

namespace {

struct CommonOptions {
    std::string config_path;
    std::string workspace;
    // Optional parameter overrides; CLI flags win over the config file.
    std::optional<int> n_centroids, k_embed, m_jw, min_hull_points, graph_min_degree, workers;
    std::optional<double> kde_bandwidth, outlier_z;
    std::optional<std::string> span_filter, centroid_mode;
    std::optional<std::string> corpus, neighborhoods, tracts, embeddings_a, embeddings_b, lexicon,
        overrides;
};

void add_common_options(CLI::App* cmd, CommonOptions& opt) {
    cmd->add_option("-c,--config", opt.config_path, "Pipeline config JSON")->required();
    cmd->add_option("-w,--workspace", opt.workspace, "Workspace directory")
        ->envname("ATLAS_WORKSPACE")
        ->required();
    cmd->add_option("--n-centroids", opt.n_centroids, "Candidate centroids per surface");
    cmd->add_option("--k-embed", opt.k_embed, "Embedding nearest-neighbor cut");
    cmd->add_option("--m-jw", opt.m_jw, "Jaro-Winkler nearest-neighbor cut");
    cmd->add_option("--kde-bandwidth", opt.kde_bandwidth, "KDE bandwidth");
    cmd->add_option("--outlier-z", opt.outlier_z, "Outlier threshold in standard deviations");
    cmd->add_option("--min-hull-points", opt.min_hull_points, "Minimum points for a span hull");
    cmd->add_option("--min-degree", opt.graph_min_degree, "Mention-network degree filter");
    cmd->add_option("--span-filter", opt.span_filter, "Span outlier filter: kde|mahalanobis");
    cmd->add_option("--centroid-mode", opt.centroid_mode,
                    "Canonical centroid source: polygon|listing_hull");
    cmd->add_option("--workers", opt.workers, "Worker threads (0 = hardware)");
    cmd->add_option("--corpus", opt.corpus, "Override corpus path");
    cmd->add_option("--neighborhoods", opt.neighborhoods, "Override neighborhoods path");
    cmd->add_option("--tracts", opt.tracts, "Override tracts path");
    cmd->add_option("--embeddings-a", opt.embeddings_a, "Override embedding table A path");
    cmd->add_option("--embeddings-b", opt.embeddings_b, "Override embedding table B path");
    cmd->add_option("--lexicon", opt.lexicon, "Override membership lexicon path");
    cmd->add_option("--overrides", opt.overrides, "Override manual resolution map path");
}

atlas::pipeline::PipelineConfig build_config(const CommonOptions& opt) {
    auto cfg = atlas::pipeline::load_pipeline_config(opt.config_path);
    auto& c = cfg.params.config;
    if (opt.n_centroids) c.n_centroids = *opt.n_centroids;
    if (opt.k_embed) c.k_embed = *opt.k_embed;
    if (opt.m_jw) c.m_jw = *opt.m_jw;
    if (opt.kde_bandwidth) c.kde_bandwidth = *opt.kde_bandwidth;
    if (opt.outlier_z) c.outlier_z = *opt.outlier_z;
    if (opt.min_hull_points) c.min_hull_points = *opt.min_hull_points;
    if (opt.graph_min_degree) c.graph_min_degree = *opt.graph_min_degree;
    if (opt.workers) cfg.params.workers = *opt.workers;
    if (opt.span_filter) {
        if (*opt.span_filter == "kde") cfg.params.span_filter = atlas::analytics::OutlierFilter::kKde;
        else if (*opt.span_filter == "mahalanobis")
            cfg.params.span_filter = atlas::analytics::OutlierFilter::kMahalanobis;
        else throw atlas::InputError("unknown --span-filter '" + *opt.span_filter + "'");
    }
    if (opt.centroid_mode) {
        if (*opt.centroid_mode == "polygon")
            cfg.params.centroid_mode = atlas::resolve::CentroidMode::kPolygon;
        else if (*opt.centroid_mode == "listing_hull")
            cfg.params.centroid_mode = atlas::resolve::CentroidMode::kListingHull;
        else throw atlas::InputError("unknown --centroid-mode '" + *opt.centroid_mode + "'");
    }
    auto override_path = [](std::optional<std::string> value, fs::path& target) {
        if (value) target = fs::absolute(*value);
    };
    override_path(opt.corpus, cfg.inputs.corpus);
    override_path(opt.neighborhoods, cfg.inputs.neighborhoods);
    override_path(opt.tracts, cfg.inputs.tracts);
    override_path(opt.embeddings_a, cfg.inputs.embeddings_a);
    override_path(opt.embeddings_b, cfg.inputs.embeddings_b);
    override_path(opt.lexicon, cfg.inputs.lexicon);
    override_path(opt.overrides, cfg.inputs.overrides);
    return cfg;
}

int run_stages(const CommonOptions& opt, atlas::pipeline::Stage up_to) {
    auto cfg = build_config(opt);
    atlas::pipeline::Pipeline pipeline(cfg, fs::path(opt.workspace), &std::cerr);
    pipeline.run(up_to);
    return 0;
}

void print_file(const fs::path& path) {
    std::cout << atlas::io::read_file(path);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"atlas: toponymic analytics over tagged rental-listing corpora"};
    app.require_subcommand(1);

    CommonOptions run_opt, ingest_opt, link_opt, resolve_opt, span_opt, graph_opt, stats_opt;
    auto* run_cmd = app.add_subcommand("run", "Run the full pipeline");
    add_common_options(run_cmd, run_opt);
    auto* ingest_cmd = app.add_subcommand("ingest", "Parse and validate inputs; assign listings");
    add_common_options(ingest_cmd, ingest_opt);
    auto* link_cmd = app.add_subcommand("link", "Extract spatial-entity/toponym pairs");
    add_common_options(link_cmd, link_opt);
    auto* resolve_cmd = app.add_subcommand("resolve", "Resolve non-canonical neighborhood names");
    add_common_options(resolve_cmd, resolve_opt);
    auto* span_cmd = app.add_subcommand("span", "Compute toponymic spans and hulls");
    add_common_options(span_cmd, span_opt);
    auto* graph_cmd = app.add_subcommand("graph", "Build the cross-neighborhood mention network");
    add_common_options(graph_cmd, graph_opt);
    auto* stats_cmd = app.add_subcommand("stats", "Compute metrics and correlations");
    add_common_options(stats_cmd, stats_opt);

    // eval
    std::string eval_config, eval_workspace, eval_gold_resolution, eval_gold_spans;
    auto* eval_cmd = app.add_subcommand("eval", "Score staged outputs against gold files");
    eval_cmd->add_option("-c,--config", eval_config, "Pipeline config JSON")->required();
    eval_cmd->add_option("-w,--workspace", eval_workspace, "Workspace directory")
        ->envname("ATLAS_WORKSPACE")
        ->required();
    eval_cmd->add_option("--gold-resolution", eval_gold_resolution,
                         "Gold surface,canonical CSV");
    eval_cmd->add_option("--gold-spans", eval_gold_spans, "Gold span CSV");

    // synth
    atlas::synth::FixtureSpec synth_spec;
    std::string synth_out;
    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic fixture city");
    synth_cmd->add_option("-o,--out", synth_out, "Output directory")->required();
    synth_cmd->add_option("--seed", synth_spec.seed, "Random seed");
    synth_cmd->add_option("--neighborhoods", synth_spec.neighborhoods, "Neighborhood count");
    synth_cmd->add_option("--listings", synth_spec.listings, "Listing count");
    synth_cmd->add_option("--misspell-rate", synth_spec.misspell_rate,
                          "Fraction of listings using a misspelled name");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        using atlas::pipeline::Stage;
        if (run_cmd->parsed()) return run_stages(run_opt, Stage::kAnalytics);
        if (ingest_cmd->parsed()) return run_stages(ingest_opt, Stage::kIngest);
        if (link_cmd->parsed()) return run_stages(link_opt, Stage::kLink);
        if (resolve_cmd->parsed()) return run_stages(resolve_opt, Stage::kResolve);
        if (span_cmd->parsed()) {
            const int rc = run_stages(span_opt, Stage::kAnalytics);
            if (rc == 0) print_file(fs::path(span_opt.workspace) / "metrics.csv");
            return rc;
        }
        if (graph_cmd->parsed()) {
            const int rc = run_stages(graph_opt, Stage::kAnalytics);
            if (rc == 0) print_file(fs::path(graph_opt.workspace) / "network.csv");
            return rc;
        }
        if (stats_cmd->parsed()) {
            const int rc = run_stages(stats_opt, Stage::kAnalytics);
            if (rc == 0) print_file(fs::path(stats_opt.workspace) / "correlations.csv");
            return rc;
        }
        if (eval_cmd->parsed()) {
            if (eval_gold_resolution.empty() && eval_gold_spans.empty())
                throw atlas::InputError("eval needs --gold-resolution and/or --gold-spans");
            const auto cfg = atlas::pipeline::load_pipeline_config(eval_config);
            std::optional<fs::path> gold_res, gold_spans;
            if (!eval_gold_resolution.empty()) gold_res = fs::path(eval_gold_resolution);
            if (!eval_gold_spans.empty()) gold_spans = fs::path(eval_gold_spans);
            const auto report = atlas::pipeline::evaluate_workspace(cfg, fs::path(eval_workspace),
                                                                    gold_res, gold_spans);
            std::cout << atlas::pipeline::format_eval_report(report);
            return 0;
        }
        if (synth_cmd->parsed()) {
            const auto result = atlas::synth::generate_fixture(synth_spec, fs::path(synth_out));
            std::cerr << "fixture: " << result.listings_written << " listings, "
                      << result.gold_surfaces << " gold surfaces, config at "
                      << result.config.string() << "\n";
            return 0;
        }
    } catch (const atlas::InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
