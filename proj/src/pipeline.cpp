#include "atlas/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "atlas/csv.hpp"
#include "atlas/error.hpp"
#include "atlas/io.hpp"
#include "atlas/parallel.hpp"
#include "atlas/text.hpp"

namespace atlas::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr int kManifestVersion = 1;

std::string filter_name(analytics::OutlierFilter f) {
    return f == analytics::OutlierFilter::kKde ? "kde" : "mahalanobis";
}

analytics::OutlierFilter filter_from_name(const std::string& name) {
    if (name == "kde") return analytics::OutlierFilter::kKde;
    if (name == "mahalanobis") return analytics::OutlierFilter::kMahalanobis;
    throw InputError("unknown span_filter '" + name + "' (expected kde or mahalanobis)");
}

std::string centroid_mode_name(resolve::CentroidMode m) {
    return m == resolve::CentroidMode::kPolygon ? "polygon" : "listing_hull";
}

resolve::CentroidMode centroid_mode_from_name(const std::string& name) {
    if (name == "polygon") return resolve::CentroidMode::kPolygon;
    if (name == "listing_hull") return resolve::CentroidMode::kListingHull;
    throw InputError("unknown centroid_mode '" + name + "' (expected polygon or listing_hull)");
}

fs::path resolve_relative(const fs::path& base_dir, const std::string& p) {
    if (p.empty()) return {};
    fs::path path(p);
    return path.is_absolute() ? path : base_dir / path;
}

void require_file(const fs::path& path, const std::string& role) {
    if (path.empty()) throw InputError("config is missing the " + role + " input path");
    if (!fs::exists(path)) throw InputError(role + " file not found: " + path.string());
}

}  // namespace

PipelineConfig load_pipeline_config(const fs::path& path) {
    json doc;
    try {
        doc = json::parse(io::read_file(path));
    } catch (const json::exception& e) {
        throw InputError(path.string() + ": " + e.what());
    }
    PipelineConfig cfg;
    const fs::path base = fs::absolute(path).parent_path();
    const auto& inputs = doc.at("inputs");
    cfg.inputs.corpus = resolve_relative(base, inputs.value("corpus", ""));
    cfg.inputs.neighborhoods = resolve_relative(base, inputs.value("neighborhoods", ""));
    cfg.inputs.tracts = resolve_relative(base, inputs.value("tracts", ""));
    cfg.inputs.embeddings_a = resolve_relative(base, inputs.value("embeddings_a", ""));
    cfg.inputs.embeddings_b = resolve_relative(base, inputs.value("embeddings_b", ""));
    cfg.inputs.lexicon = resolve_relative(base, inputs.value("lexicon", ""));
    cfg.inputs.overrides = resolve_relative(base, inputs.value("overrides", ""));

    if (doc.contains("params")) {
        const auto& p = doc.at("params");
        auto& c = cfg.params.config;
        c.n_centroids = p.value("n_centroids", c.n_centroids);
        c.k_embed = p.value("k_embed", c.k_embed);
        c.m_jw = p.value("m_jw", c.m_jw);
        c.kde_bandwidth = p.value("kde_bandwidth", c.kde_bandwidth);
        c.outlier_z = p.value("outlier_z", c.outlier_z);
        c.min_hull_points = p.value("min_hull_points", c.min_hull_points);
        c.graph_min_degree = p.value("graph_min_degree", c.graph_min_degree);
        c.earth_radius_km = p.value("earth_radius_km", c.earth_radius_km);
        cfg.params.span_filter = filter_from_name(p.value("span_filter", std::string("kde")));
        cfg.params.centroid_mode =
            centroid_mode_from_name(p.value("centroid_mode", std::string("polygon")));
        cfg.params.workers = p.value("workers", cfg.params.workers);
    }
    if (cfg.params.config.n_centroids <= 0 || cfg.params.config.k_embed <= 0 ||
        cfg.params.config.m_jw <= 0 || cfg.params.config.kde_bandwidth <= 0.0 ||
        cfg.params.config.outlier_z <= 0.0 || cfg.params.config.min_hull_points <= 0 ||
        cfg.params.config.graph_min_degree < 0 || cfg.params.config.earth_radius_km <= 0.0)
        throw InputError(path.string() + ": params must be positive");
    return cfg;
}

std::string pipeline_config_to_json(const PipelineConfig& config) {
    ordered_json doc;
    doc["inputs"] = {
        {"corpus", config.inputs.corpus.string()},
        {"neighborhoods", config.inputs.neighborhoods.string()},
        {"tracts", config.inputs.tracts.string()},
        {"embeddings_a", config.inputs.embeddings_a.string()},
        {"embeddings_b", config.inputs.embeddings_b.string()},
    };
    if (!config.inputs.lexicon.empty()) doc["inputs"]["lexicon"] = config.inputs.lexicon.string();
    if (!config.inputs.overrides.empty())
        doc["inputs"]["overrides"] = config.inputs.overrides.string();
    const auto& c = config.params.config;
    doc["params"] = {
        {"n_centroids", c.n_centroids},
        {"k_embed", c.k_embed},
        {"m_jw", c.m_jw},
        {"kde_bandwidth", c.kde_bandwidth},
        {"outlier_z", c.outlier_z},
        {"min_hull_points", c.min_hull_points},
        {"graph_min_degree", c.graph_min_degree},
        {"earth_radius_km", c.earth_radius_km},
        {"span_filter", filter_name(config.params.span_filter)},
        {"centroid_mode", centroid_mode_name(config.params.centroid_mode)},
        {"workers", config.params.workers},
    };
    return doc.dump(2) + "\n";
}

std::string stage_name(Stage stage) {
    switch (stage) {
        case Stage::kIngest: return "ingest";
        case Stage::kLink: return "link";
        case Stage::kResolve: return "resolve";
        case Stage::kAnalytics: return "analytics";
    }
    return "?";
}

// Lazily loaded inputs shared by the stages of one run.
struct Pipeline::Loaded {
    std::optional<std::vector<corpus::Listing>> listings;
    bool assigned = false;
    std::optional<std::vector<corpus::Neighborhood>> neighborhoods;
    std::optional<corpus::GentrificationResult> gentrification;
    std::optional<stlink::MembershipLexicon> lexicon;
    std::optional<corpus::EmbeddingTable> table_a, table_b;
    std::optional<std::vector<stlink::StePair>> pairs;
    std::optional<resolve::ResolutionMap> resolution;
    std::optional<geo::Projection> projection;
    std::set<std::string> cached_stages;  // stages satisfied from disk this run
};

Pipeline::Pipeline(PipelineConfig config, fs::path workspace, std::ostream* log)
    : config_(std::move(config)), workspace_(std::move(workspace)), log_(log) {}

fs::path Pipeline::manifest_path() const {
    return workspace_ / "manifest.json";
}

fs::path Pipeline::output_path(const std::string& filename) const {
    return workspace_ / filename;
}

void Pipeline::log_line(const std::string& line) const {
    if (log_) (*log_) << line << "\n";
}

std::string Pipeline::stage_fingerprint(Stage stage,
                                        const std::map<std::string, std::string>& digests) const {
    ordered_json j;
    j["version"] = kManifestVersion;
    j["stage"] = stage_name(stage);
    const auto& c = config_.params.config;
    switch (stage) {
        case Stage::kIngest:
            j["inputs"] = {digests.at("corpus"), digests.at("neighborhoods"), digests.at("tracts")};
            break;
        case Stage::kLink:
            j["inputs"] = {digests.at("corpus"), digests.at("lexicon")};
            break;
        case Stage::kResolve:
            j["inputs"] = {digests.at("link"), digests.at("neighborhoods"),
                           digests.at("embeddings_a"), digests.at("embeddings_b"),
                           digests.at("overrides")};
            j["params"] = {c.n_centroids, c.k_embed,       c.m_jw,
                           c.kde_bandwidth, c.outlier_z,   c.min_hull_points,
                           c.earth_radius_km};
            j["centroid_mode"] = centroid_mode_name(config_.params.centroid_mode);
            break;
        case Stage::kAnalytics:
            j["inputs"] = {digests.at("ingest"), digests.at("link"), digests.at("resolve")};
            j["params"] = {c.graph_min_degree, c.kde_bandwidth, c.outlier_z, c.min_hull_points,
                           c.earth_radius_km};
            j["span_filter"] = filter_name(config_.params.span_filter);
            break;
    }
    return io::to_hex(io::fnv1a64(j.dump()));
}

RunResult Pipeline::run(Stage up_to) {
    fs::create_directories(workspace_);

    require_file(config_.inputs.corpus, "corpus");
    require_file(config_.inputs.neighborhoods, "neighborhoods");
    require_file(config_.inputs.tracts, "tracts");
    require_file(config_.inputs.embeddings_a, "embeddings_a");
    require_file(config_.inputs.embeddings_b, "embeddings_b");
    if (!config_.inputs.lexicon.empty()) require_file(config_.inputs.lexicon, "lexicon");
    if (!config_.inputs.overrides.empty()) require_file(config_.inputs.overrides, "overrides");

    ordered_json manifest;
    if (fs::exists(manifest_path())) {
        try {
            manifest = ordered_json::parse(io::read_file(manifest_path()));
        } catch (const json::exception&) {
            manifest = ordered_json::object();  // rebuilt below
        }
    }
    if (manifest.value("format_version", kManifestVersion) != kManifestVersion)
        manifest = ordered_json::object();
    manifest["format_version"] = kManifestVersion;
    manifest["config"] = json::parse(pipeline_config_to_json(config_));
    if (!manifest.contains("stages")) manifest["stages"] = ordered_json::object();

    std::map<std::string, std::string> digests;
    digests["corpus"] = io::file_digest(config_.inputs.corpus);
    digests["neighborhoods"] = io::file_digest(config_.inputs.neighborhoods);
    digests["tracts"] = io::file_digest(config_.inputs.tracts);
    digests["embeddings_a"] = io::file_digest(config_.inputs.embeddings_a);
    digests["embeddings_b"] = io::file_digest(config_.inputs.embeddings_b);
    digests["lexicon"] =
        config_.inputs.lexicon.empty() ? "builtin" : io::file_digest(config_.inputs.lexicon);
    digests["overrides"] =
        config_.inputs.overrides.empty() ? "none" : io::file_digest(config_.inputs.overrides);
    {
        ordered_json input_digests;
        for (const auto& [k, v] : digests) input_digests[k] = v;
        manifest["inputs"] = input_digests;
    }

    Loaded loaded;
    const corpus::Config& cfg = config_.params.config;
    const int workers = config_.params.workers;

    auto ensure_corpus = [&]() -> std::vector<corpus::Listing>& {
        if (!loaded.listings) {
            loaded.listings = corpus::parse_corpus_file(config_.inputs.corpus);
            loaded.projection = geo::Projection(corpus::mean_coordinate(*loaded.listings),
                                                cfg.earth_radius_km);
        }
        return *loaded.listings;
    };
    auto ensure_neighborhoods = [&]() -> std::vector<corpus::Neighborhood>& {
        if (!loaded.neighborhoods)
            loaded.neighborhoods = corpus::load_neighborhoods(config_.inputs.neighborhoods);
        return *loaded.neighborhoods;
    };
    auto ensure_assigned = [&]() -> std::vector<corpus::Listing>& {
        auto& listings = ensure_corpus();
        if (loaded.assigned) return listings;
        const fs::path staged = output_path("assignments.csv");
        if (loaded.cached_stages.count("ingest") && fs::exists(staged)) {
            std::map<std::string, std::string> by_id;
            const auto rows = csv::parse(io::read_file(staged));
            for (size_t i = 1; i < rows.size(); ++i)
                if (rows[i].size() == 2) by_id[rows[i][0]] = rows[i][1];
            for (auto& l : listings) {
                auto it = by_id.find(l.id);
                if (it != by_id.end() && !it->second.empty()) l.neighborhood = it->second;
                else l.neighborhood = std::nullopt;
            }
        } else {
            corpus::assign_neighborhoods(listings, ensure_neighborhoods());
        }
        loaded.assigned = true;
        return listings;
    };
    auto ensure_lexicon = [&]() -> stlink::MembershipLexicon& {
        if (!loaded.lexicon)
            loaded.lexicon = config_.inputs.lexicon.empty()
                                 ? stlink::MembershipLexicon::builtin()
                                 : stlink::MembershipLexicon::load(config_.inputs.lexicon);
        return *loaded.lexicon;
    };
    auto ensure_pairs = [&]() -> std::vector<stlink::StePair>& {
        if (loaded.pairs) return *loaded.pairs;
        const fs::path staged = output_path("pairs.csv");
        if (loaded.cached_stages.count("link") && fs::exists(staged)) {
            // Span offsets are not stored in the pair export; downstream
            // stages only read surfaces, labels, and the membership flag.
            std::vector<stlink::StePair> pairs;
            const auto rows = csv::parse(io::read_file(staged));
            for (size_t i = 1; i < rows.size(); ++i) {
                if (rows[i].size() != 6) continue;
                stlink::StePair p;
                p.listing_id = rows[i][0];
                p.sentence = std::stoi(rows[i][1]);
                p.ste.sentence = p.sentence;
                p.ste.label = std::string(stlink::kSpatialEntityLabel);
                p.ste.surface = rows[i][2];
                p.is_membership = rows[i][3] == "true";
                p.toponym.sentence = p.sentence;
                p.toponym.surface = rows[i][4];
                p.toponym.label = rows[i][5];
                pairs.push_back(std::move(p));
            }
            loaded.pairs = std::move(pairs);
            return *loaded.pairs;
        }
        auto& listings = ensure_corpus();
        auto& lexicon = ensure_lexicon();
        std::vector<std::vector<stlink::StePair>> slots(listings.size());
        parallel_for(listings.size(), workers, [&](size_t i) {
            slots[i] = stlink::extract_listing_pairs(listings[i], lexicon);
        });
        std::vector<stlink::StePair> pairs;
        for (auto& s : slots) pairs.insert(pairs.end(), s.begin(), s.end());
        loaded.pairs = std::move(pairs);
        return *loaded.pairs;
    };
    auto ensure_resolution = [&]() -> resolve::ResolutionMap& {
        if (loaded.resolution) return *loaded.resolution;
        const fs::path staged = output_path("resolution.csv");
        const fs::path staged_unresolved = output_path("unresolved.csv");
        if (loaded.cached_stages.count("resolve") && fs::exists(staged) &&
            fs::exists(staged_unresolved)) {
            resolve::ResolutionMap map;
            const auto rows = csv::parse(io::read_file(staged));
            for (size_t i = 1; i < rows.size(); ++i)
                if (rows[i].size() >= 2) map.resolved[rows[i][0]].assigned = rows[i][1];
            const auto urows = csv::parse(io::read_file(staged_unresolved));
            for (size_t i = 1; i < urows.size(); ++i)
                if (urows[i].size() >= 2) map.unresolved[urows[i][0]] = urows[i][1];
            loaded.resolution = std::move(map);
            return *loaded.resolution;
        }
        {
            auto& listings = ensure_assigned();
            auto& neighborhoods = ensure_neighborhoods();
            auto& pairs = ensure_pairs();
            if (!loaded.table_a) loaded.table_a = corpus::load_embeddings(config_.inputs.embeddings_a);
            if (!loaded.table_b) loaded.table_b = corpus::load_embeddings(config_.inputs.embeddings_b);
            std::map<std::string, std::string> overrides;
            if (!config_.inputs.overrides.empty())
                overrides = resolve::load_surface_map(config_.inputs.overrides);

            std::map<std::string, geo::Point> coords;
            for (const auto& l : listings) coords[l.id] = {l.lon, l.lat};
            const auto canon = resolve::canonical_index(neighborhoods);
            const auto collected = resolve::collect_noncanonical(pairs, coords, canon);

            resolve::ResolverContext ctx;
            ctx.neighborhoods = neighborhoods;
            ctx.listings = listings;
            ctx.table_a = &*loaded.table_a;
            ctx.table_b = &*loaded.table_b;
            ctx.overrides = &overrides;
            ctx.projection = *loaded.projection;
            ctx.config = cfg;
            if (ctx.config.n_centroids > static_cast<int>(neighborhoods.size())) {
                log_line("note: n_centroids exceeds canonical neighborhood count; using all " +
                         std::to_string(neighborhoods.size()));
                ctx.config.n_centroids = static_cast<int>(neighborhoods.size());
            }
            ctx.centroid_mode = config_.params.centroid_mode;
            ctx.workers = workers;
            loaded.resolution = resolve::resolve_surfaces(collected, ctx);
        }
        return *loaded.resolution;
    };

    auto save_manifest = [&]() {
        io::write_file_atomic(manifest_path(), manifest.dump(2) + "\n");
    };

    RunResult result;
    const std::vector<Stage> stages = {Stage::kIngest, Stage::kLink, Stage::kResolve,
                                       Stage::kAnalytics};
    for (const Stage stage : stages) {
        const std::string name = stage_name(stage);
        const std::string fingerprint = stage_fingerprint(stage, digests);
        digests[name] = fingerprint;  // downstream fingerprints chain on this

        std::vector<std::string> outputs;
        switch (stage) {
            case Stage::kIngest: outputs = {"assignments.csv", "neighborhood_index.csv"}; break;
            case Stage::kLink: outputs = {"pairs.csv"}; break;
            case Stage::kResolve: outputs = {"resolution.csv", "unresolved.csv"}; break;
            case Stage::kAnalytics:
                outputs = {"metrics.csv", "network.csv", "network.dot", "hulls.geojson",
                           "correlations.csv"};
                break;
        }

        const auto& prior = manifest["stages"].contains(name) ? manifest["stages"][name]
                                                              : ordered_json(nullptr);
        const bool outputs_present = std::all_of(outputs.begin(), outputs.end(),
                                                 [&](const std::string& f) {
                                                     return fs::exists(output_path(f));
                                                 });
        if (!prior.is_null() && prior.value("fingerprint", "") == fingerprint &&
            prior.value("status", "") == "ok" && outputs_present) {
            log_line("[" + name + "] cached");
            loaded.cached_stages.insert(name);
            result.stages.push_back({stage, true});
            if (stage == up_to) break;
            continue;
        }

        log_line("[" + name + "] running");
        try {
            switch (stage) {
                case Stage::kIngest: {
                    auto& listings = ensure_assigned();
                    auto& neighborhoods = ensure_neighborhoods();
                    if (cfg.n_centroids > static_cast<int>(neighborhoods.size()))
                        log_line("note: n_centroids " + std::to_string(cfg.n_centroids) +
                                 " exceeds the " + std::to_string(neighborhoods.size()) +
                                 " canonical neighborhoods");
                    loaded.gentrification =
                        corpus::load_gentrification(config_.inputs.tracts, neighborhoods);
                    if (loaded.gentrification->skipped_tracts)
                        log_line("warning: " +
                                 std::to_string(loaded.gentrification->skipped_tracts) +
                                 " tracts outside every neighborhood were skipped");
                    std::string assignments = "listing_id,neighborhood\n";
                    for (const auto& l : listings)
                        assignments += csv::row({l.id, l.neighborhood.value_or("")});
                    io::write_file_atomic(output_path("assignments.csv"), assignments);
                    std::string index_csv = "neighborhood,index\n";
                    for (const auto& [n, v] : loaded.gentrification->mean_index)
                        index_csv += csv::row({n, io::format_double(v)});
                    io::write_file_atomic(output_path("neighborhood_index.csv"), index_csv);
                    manifest["stages"][name]["skipped_tracts"] =
                        loaded.gentrification->skipped_tracts;
                    break;
                }
                case Stage::kLink: {
                    auto& pairs = ensure_pairs();
                    io::write_file_atomic(output_path("pairs.csv"), stlink::pairs_to_csv(pairs));
                    break;
                }
                case Stage::kResolve: {
                    auto& resolution = ensure_resolution();
                    io::write_file_atomic(output_path("resolution.csv"),
                                          resolve::resolution_to_csv(resolution));
                    io::write_file_atomic(output_path("unresolved.csv"),
                                          resolve::unresolved_to_csv(resolution));
                    break;
                }
                case Stage::kAnalytics: {
                    auto& listings = ensure_assigned();
                    auto& neighborhoods = ensure_neighborhoods();
                    auto& pairs = ensure_pairs();
                    auto& resolution = ensure_resolution();
                    if (!loaded.gentrification)
                        loaded.gentrification =
                            corpus::load_gentrification(config_.inputs.tracts, neighborhoods);
                    const auto canon = resolve::canonical_index(neighborhoods);
                    const auto signals =
                        analytics::build_signals(listings, pairs, resolution, canon);
                    const auto bundle = analytics::compute_metrics(
                        signals, neighborhoods, loaded.gentrification->mean_index,
                        *loaded.projection, cfg, config_.params.span_filter, workers);
                    io::write_file_atomic(output_path("metrics.csv"),
                                          analytics::metrics_to_csv(bundle.metrics));
                    const auto network = analytics::mention_network(signals);
                    const auto pruned = analytics::prune_network(network, cfg.graph_min_degree);
                    const auto communities = analytics::detect_communities(pruned);
                    io::write_file_atomic(output_path("network.csv"),
                                          analytics::network_to_csv(pruned));
                    io::write_file_atomic(output_path("network.dot"),
                                          analytics::network_to_dot(pruned, communities));
                    io::write_file_atomic(output_path("hulls.geojson"),
                                          analytics::hulls_to_geojson(bundle.hulls));
                    const auto correlations = analytics::correlate_metrics(bundle.metrics);
                    io::write_file_atomic(output_path("correlations.csv"),
                                          analytics::correlations_to_csv(correlations));
                    manifest["stages"][name]["modularity"] = communities.modularity;
                    break;
                }
            }
        } catch (const std::exception& e) {
            manifest["stages"][name]["fingerprint"] = fingerprint;
            manifest["stages"][name]["status"] = "failed";
            manifest["stages"][name]["error"] = e.what();
            save_manifest();
            throw;
        }
        manifest["stages"][name]["fingerprint"] = fingerprint;
        manifest["stages"][name]["status"] = "ok";
        manifest["stages"][name]["outputs"] = outputs;
        manifest["stages"][name].erase("error");
        save_manifest();
        result.stages.push_back({stage, false});
        if (stage == up_to) break;
    }
    return result;
}

std::vector<resolve::LabeledSpan> load_gold_spans(const fs::path& path) {
    const auto rows = csv::parse(io::read_file(path));
    std::vector<resolve::LabeledSpan> out;
    size_t row_no = 0;
    for (const auto& row : rows) {
        ++row_no;
        if (row_no == 1 && !row.empty() && text::to_lower(row[0]) == "listing_id") continue;
        if (row.size() != 5)
            throw InputError(path.string() + " row " + std::to_string(row_no) +
                             ": expected 5 fields");
        resolve::LabeledSpan s;
        s.doc = row[0];
        try {
            s.sentence = std::stoi(row[1]);
            s.start = std::stoi(row[2]);
            s.end = std::stoi(row[3]);
        } catch (const std::exception&) {
            throw InputError(path.string() + " row " + std::to_string(row_no) + ": bad span indices");
        }
        s.label = row[4];
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<resolve::LabeledSpan> corpus_spans(std::span<const corpus::Listing> listings) {
    std::vector<resolve::LabeledSpan> out;
    for (const auto& l : listings)
        for (int i = 0; i < static_cast<int>(l.sentences.size()); ++i)
            for (const auto& span : chunking::decode_iob(l.sentences[i], i))
                out.push_back({l.id, i, span.start, span.end, span.label});
    return out;
}

EvalReport evaluate_workspace(const PipelineConfig& config, const fs::path& workspace,
                              const std::optional<fs::path>& gold_resolution,
                              const std::optional<fs::path>& gold_spans) {
    EvalReport report;
    if (gold_resolution) {
        const fs::path resolution_csv = workspace / "resolution.csv";
        if (!fs::exists(resolution_csv))
            throw InputError("no resolution.csv in workspace " + workspace.string() +
                             " (run the resolve stage first)");
        std::map<std::string, std::string> predicted;
        const auto rows = csv::parse(io::read_file(resolution_csv));
        for (size_t i = 1; i < rows.size(); ++i) {
            if (rows[i].size() < 2) continue;
            predicted[rows[i][0]] = rows[i][1];
        }
        report.resolution =
            resolve::eval_resolution(predicted, resolve::load_surface_map(*gold_resolution));
    }
    if (gold_spans) {
        const auto gold = load_gold_spans(*gold_spans);
        if (gold.empty()) throw InputError("gold span file is empty: " + gold_spans->string());
        const auto listings = corpus::parse_corpus_file(config.inputs.corpus);
        report.spans = resolve::span_f1(gold, corpus_spans(listings));
    }
    return report;
}

std::string format_eval_report(const EvalReport& report) {
    std::ostringstream out;
    if (report.resolution) {
        const auto& r = *report.resolution;
        out << "resolution: precision=" << io::format_double(r.precision)
            << " recall=" << io::format_double(r.recall) << " f1=" << io::format_double(r.f1)
            << " (" << r.correct << "/" << r.predicted << " predictions correct, " << r.gold
            << " gold)\n";
    }
    if (report.spans) {
        const auto& s = *report.spans;
        out << "spans: weighted_f1=" << io::format_double(s.weighted_f1) << "\n";
        out << "label,gold,predicted,matched,precision,recall,f1\n";
        for (const auto& [label, row] : s.per_label)
            out << label << "," << row.gold << "," << row.predicted << "," << row.matched << ","
                << io::format_double(row.precision) << "," << io::format_double(row.recall) << ","
                << io::format_double(row.f1) << "\n";
    }
    return out.str();
}

}  // namespace atlas::pipeline
