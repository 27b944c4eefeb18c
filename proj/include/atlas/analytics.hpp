#pragma once

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "atlas/corpus.hpp"
#include "atlas/geometry.hpp"
#include "atlas/resolution.hpp"
#include "atlas/spatial_link.hpp"

namespace atlas::analytics {

// Per-listing toponymic signals, resolved to canonical names.
struct ListingSignals {
    std::string id;
    geo::Point coord;  // lon/lat degrees
    std::optional<std::string> neighborhood;
    std::vector<std::string> mentions;           // canonical, sorted unique
    std::vector<std::string> membership_claims;  // canonical, sorted unique
    bool mentions_other_toponym = false;         // any TN:* label besides TN:NEIGHBORHOOD
};

// Decodes neighborhood mentions from listing tags and maps them through the
// canonical index and the resolution map.
std::vector<ListingSignals> build_signals(std::span<const corpus::Listing> listings,
                                          std::span<const stlink::StePair> pairs,
                                          const resolve::ResolutionMap& resolution,
                                          const std::map<std::string, std::string>& canon_index);

// Fraction of a neighborhood's listings that mention it by (resolved) name.
// Neighborhoods without listings are absent.
std::map<std::string, double> self_reference_rates(std::span<const ListingSignals> signals);

// Directed weighted graph over canonical names; edge A -> B counts distinct
// listings assigned to A mentioning B.
struct MentionGraph {
    std::map<std::string, std::map<std::string, int>> edges;  // src -> dst -> weight

    std::set<std::string> nodes() const;
    int total_degree(const std::string& node) const;  // in-edges + out-edges
    size_t edge_count() const;
};

MentionGraph mention_network(std::span<const ListingSignals> signals);

// Largest weak component, then nodes below min_degree dropped to a fixed
// point.
MentionGraph prune_network(const MentionGraph& graph, int min_degree);

struct CommunityResult {
    std::map<std::string, int> community;  // node -> community id
    double modularity = 0.0;
};

// Deterministic greedy modularity maximization over the weight-symmetrized
// graph.
CommunityResult detect_communities(const MentionGraph& graph);

enum class OutlierFilter { kKde, kMahalanobis };

struct SpanAreas {
    size_t mention_points = 0;  // distinct listings mentioning the name
    size_t claim_points = 0;    // distinct listings claiming membership
    size_t filtered_points = 0;
    std::optional<double> raw_area;       // km^2, hull over all mentions
    std::optional<double> filtered_area;  // km^2, membership + outlier filter
    std::optional<double> span_ratio;     // filtered area / canonical polygon area
    std::optional<geo::Hull> raw_hull;
    std::optional<geo::Hull> filtered_hull;
};

// Toponymic span of one canonical neighborhood. Outlier filtering runs on
// the raw lon/lat coordinates; hull areas are measured on the projection.
SpanAreas toponymic_span(const std::string& name, std::span<const ListingSignals> signals,
                         double polygon_area_km2, const geo::Projection& projection,
                         const corpus::Config& config, OutlierFilter filter);

// Fraction of a neighborhood's listings mentioning at least one toponym of
// a TN category other than TN:NEIGHBORHOOD.
std::map<std::string, double> other_toponym_rate(std::span<const ListingSignals> signals);

struct NeighborhoodMetrics {
    std::string name;
    size_t listing_count = 0;
    std::optional<double> self_reference_rate;
    std::optional<double> raw_span_area;
    std::optional<double> filtered_span_area;
    std::optional<double> span_ratio;
    std::optional<double> other_toponym_rate;
    std::optional<double> gentrification_index;
};

// Per-neighborhood hulls for export, reprojected to WGS84.
struct NamedHull {
    std::string name;
    std::string kind;  // "raw" or "filtered"
    std::vector<geo::LonLat> ring;
    double area_km2 = 0.0;
};

struct MetricsBundle {
    std::vector<NeighborhoodMetrics> metrics;  // one row per canonical name, sorted
    std::vector<NamedHull> hulls;
};

MetricsBundle compute_metrics(std::span<const ListingSignals> signals,
                              std::span<const corpus::Neighborhood> neighborhoods,
                              const std::map<std::string, double>& gentrification,
                              const geo::Projection& projection, const corpus::Config& config,
                              OutlierFilter filter, int workers);

struct MetricCorrelation {
    std::string metric;
    size_t pairs = 0;
    std::optional<double> r;  // absent when undefined
};

// Pearson r of each metric against the gentrification index, dropping
// incomplete pairs per metric.
std::vector<MetricCorrelation> correlate_metrics(std::span<const NeighborhoodMetrics> metrics);

std::string metrics_to_csv(std::span<const NeighborhoodMetrics> metrics);
std::string network_to_csv(const MentionGraph& graph);
std::string network_to_dot(const MentionGraph& graph, const CommunityResult& communities);
std::string correlations_to_csv(std::span<const MetricCorrelation> correlations);
std::string hulls_to_geojson(std::span<const NamedHull> hulls);

}  // namespace atlas::analytics
