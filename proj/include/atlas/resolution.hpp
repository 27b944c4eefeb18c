#pragma once

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "atlas/corpus.hpp"
#include "atlas/geometry.hpp"
#include "atlas/spatial_link.hpp"

namespace atlas::resolve {

double jaro(std::string_view a, std::string_view b);

// Jaro-Winkler with standard prefix scaling 0.1 and a maximum rewarded
// prefix of 4.
double jaro_winkler(std::string_view a, std::string_view b);

// Zero-norm vectors score 0.
double cosine_similarity(std::span<const float> a, std::span<const float> b);

struct CandidateScore {
    std::string name;
    int centroid_rank = 0;          // always present for candidates
    double centroid_distance = 0.0; // km, hull centroid to canonical centroid
    std::optional<int> embed_rank_a;
    std::optional<int> embed_rank_b;
    std::optional<int> jw_rank;
    double jw_similarity = 0.0;
    double ensemble_score = 0.0;    // sum of 1/rank over present ranks
};

struct SurfaceResolution {
    std::string assigned;
    std::vector<CandidateScore> candidates;  // centroid order
    bool overridden = false;
};

struct ResolutionMap {
    std::map<std::string, SurfaceResolution> resolved;    // normalized surface -> result
    std::map<std::string, std::string> unresolved;        // normalized surface -> reason

    std::optional<std::string> lookup(std::string_view normalized_surface) const;
};

// Canonical-name index: normalized form -> canonical name.
std::map<std::string, std::string> canonical_index(std::span<const corpus::Neighborhood> neighborhoods);

// Surfaces eligible for resolution: TN:NEIGHBORHOOD toponyms outside the
// canonical set whose paired spatial entity claims membership. Coordinates
// are those of the distinct listings mentioning each surface (lon/lat
// degrees).
std::map<std::string, std::vector<geo::Point>> collect_noncanonical(
    std::span<const stlink::StePair> pairs,
    const std::map<std::string, geo::Point>& listing_coords,
    const std::map<std::string, std::string>& canon_index);

// KDE-filters the mention coordinates then takes their convex hull
// (projected). Returns the failure reason instead when fewer than
// min_hull_points distinct points survive or the survivors are collinear.
struct SurfaceHull {
    std::optional<geo::Hull> hull;  // planar km
    std::string reason;             // set when hull is absent
};
SurfaceHull surface_hull(std::span<const geo::Point> lonlat_coords, const corpus::Config& config,
                         const geo::Projection& projection);

// How the reference point of a canonical neighborhood is computed.
enum class CentroidMode {
    kPolygon,      // area centroid of the boundary polygon
    kListingHull,  // centroid of the hull of listings assigned to it
};

// Reference centroid per canonical name, projected km.
std::map<std::string, geo::Point> canonical_centroids(
    std::span<const corpus::Neighborhood> neighborhoods, const geo::Projection& projection,
    CentroidMode mode, std::span<const corpus::Listing> listings);

// Canonical names ranked by distance between the surface-hull centroid and
// each canonical centroid; at most n results.
std::vector<std::pair<std::string, double>> candidate_centroids(
    const geo::Hull& hull, const std::map<std::string, geo::Point>& centroids, int n);

struct CriterionRanks {
    std::optional<int> embed_a;
    std::optional<int> embed_b;
    std::optional<int> jw;
    double jw_similarity = 0.0;
};

// Ranks of each canonical name among the surface's k nearest embedding
// neighbors (full-vocabulary scan, query key excluded) and its m nearest
// Jaro-Winkler neighbors over the canonical set.
std::map<std::string, CriterionRanks> similarity_ranks(
    const std::string& normalized_surface, std::span<const std::string> canonical_names,
    const corpus::EmbeddingTable* table_a, const corpus::EmbeddingTable* table_b, int k, int m);

// Reciprocal-rank-sum winner over the centroid candidate list. Ties break
// on higher Jaro-Winkler similarity, then smaller centroid distance, then
// name. Returns candidates with scores filled; empty input yields nullopt.
std::optional<SurfaceResolution> ensemble_assign(
    std::vector<std::pair<std::string, double>> candidates,
    const std::map<std::string, CriterionRanks>& ranks);

struct ResolverContext {
    std::span<const corpus::Neighborhood> neighborhoods;
    std::span<const corpus::Listing> listings;
    const corpus::EmbeddingTable* table_a = nullptr;
    const corpus::EmbeddingTable* table_b = nullptr;
    const std::map<std::string, std::string>* overrides = nullptr;  // normalized surface -> canonical
    geo::Projection projection;
    corpus::Config config;
    CentroidMode centroid_mode = CentroidMode::kPolygon;
    int workers = 1;
};

// Full per-surface resolution over collect_noncanonical output.
ResolutionMap resolve_surfaces(const std::map<std::string, std::vector<geo::Point>>& collected,
                               const ResolverContext& context);

struct PrfScores {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    size_t correct = 0;
    size_t predicted = 0;
    size_t gold = 0;
};

// Exact-match scoring of predicted surface assignments against a gold map.
PrfScores eval_resolution(const std::map<std::string, std::string>& predicted,
                          const std::map<std::string, std::string>& gold);

// A labeled span anchored to a document, for tagging evaluation.
struct LabeledSpan {
    std::string doc;
    int sentence = 0;
    int start = 0;
    int end = 0;
    std::string label;
    auto operator<=>(const LabeledSpan&) const = default;
};

struct LabelPrf {
    size_t gold = 0;
    size_t predicted = 0;
    size_t matched = 0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

struct SpanEval {
    std::map<std::string, LabelPrf> per_label;
    double weighted_f1 = 0.0;  // weighted by gold label support
};

// A prediction counts only on an exact (doc, sentence, start, end, label)
// match.
SpanEval span_f1(std::span<const LabeledSpan> gold, std::span<const LabeledSpan> predicted);

// CSV `surface,canonical` (optional header), surfaces normalized on load.
std::map<std::string, std::string> load_surface_map(const std::filesystem::path& path);

std::string resolution_to_csv(const ResolutionMap& map);
std::string unresolved_to_csv(const ResolutionMap& map);

}  // namespace atlas::resolve
