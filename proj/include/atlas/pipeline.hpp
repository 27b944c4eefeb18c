#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "atlas/analytics.hpp"
#include "atlas/corpus.hpp"
#include "atlas/resolution.hpp"

namespace atlas::pipeline {

struct InputPaths {
    std::filesystem::path corpus;
    std::filesystem::path neighborhoods;
    std::filesystem::path tracts;
    std::filesystem::path embeddings_a;
    std::filesystem::path embeddings_b;
    std::filesystem::path lexicon;    // empty = built-in membership phrases
    std::filesystem::path overrides;  // empty = none
};

struct Params {
    corpus::Config config;
    analytics::OutlierFilter span_filter = analytics::OutlierFilter::kKde;
    resolve::CentroidMode centroid_mode = resolve::CentroidMode::kPolygon;
    int workers = 1;
};

struct PipelineConfig {
    InputPaths inputs;
    Params params;
};

// JSON config with `inputs` and `params` objects; relative input paths are
// resolved against the config file's directory.
PipelineConfig load_pipeline_config(const std::filesystem::path& path);
std::string pipeline_config_to_json(const PipelineConfig& config);

enum class Stage { kIngest, kLink, kResolve, kAnalytics };
std::string stage_name(Stage stage);

struct StageReport {
    Stage stage;
    bool cached = false;
};

struct RunResult {
    std::vector<StageReport> stages;
};

// Orchestrates the staged pipeline over a workspace directory. Stages are
// fingerprinted by their input digests, parameter slices, and upstream
// fingerprints; a stage reruns only when its fingerprint changes or an
// output is missing. All outputs are written atomically.
class Pipeline {
public:
    Pipeline(PipelineConfig config, std::filesystem::path workspace, std::ostream* log = nullptr);

    RunResult run(Stage up_to = Stage::kAnalytics);

    const std::filesystem::path& workspace() const { return workspace_; }
    const PipelineConfig& config() const { return config_; }

    // Workspace artifact paths.
    std::filesystem::path manifest_path() const;
    std::filesystem::path output_path(const std::string& filename) const;

private:
    struct Loaded;  // lazily loaded inputs shared across stages

    std::string stage_fingerprint(Stage stage, const std::map<std::string, std::string>& digests) const;
    void log_line(const std::string& line) const;

    PipelineConfig config_;
    std::filesystem::path workspace_;
    std::ostream* log_ = nullptr;
};

// Evaluation over staged outputs: resolution quality against a gold
// surface->canonical map, tag spans against a gold span table.
struct EvalReport {
    std::optional<resolve::PrfScores> resolution;
    std::optional<resolve::SpanEval> spans;
};

EvalReport evaluate_workspace(const PipelineConfig& config, const std::filesystem::path& workspace,
                              const std::optional<std::filesystem::path>& gold_resolution,
                              const std::optional<std::filesystem::path>& gold_spans);

// CSV `listing_id,sentence,start,end,label` (optional header).
std::vector<resolve::LabeledSpan> load_gold_spans(const std::filesystem::path& path);

// All spans decoded from a corpus, as evaluation records.
std::vector<resolve::LabeledSpan> corpus_spans(std::span<const corpus::Listing> listings);

std::string format_eval_report(const EvalReport& report);

}  // namespace atlas::pipeline
