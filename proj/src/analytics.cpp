#include "atlas/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include <json.hpp>

#include "atlas/csv.hpp"
#include "atlas/error.hpp"
#include "atlas/io.hpp"
#include "atlas/parallel.hpp"
#include "atlas/text.hpp"

namespace atlas::analytics {

namespace {

std::string fmt_opt(const std::optional<double>& v) {
    return v ? io::format_double(*v) : std::string{};
}

std::optional<std::string> resolve_mention(const std::string& surface,
                                           const resolve::ResolutionMap& resolution,
                                           const std::map<std::string, std::string>& canon_index) {
    const std::string norm = text::normalize_surface(surface);
    if (auto it = canon_index.find(norm); it != canon_index.end()) return it->second;
    return resolution.lookup(norm);
}

std::vector<std::string> sorted_unique(std::set<std::string>&& values) {
    return {values.begin(), values.end()};
}

// Undirected weighted view used by community detection.
struct UndirectedGraph {
    std::vector<std::string> names;                    // sorted node names
    std::vector<std::vector<std::pair<int, double>>> adj;  // neighbor, weight
    std::vector<double> self_loop;                     // aggregated internal weight
    double total_weight = 0.0;                         // sum of edge weights (m)
};

UndirectedGraph symmetrize(const MentionGraph& graph) {
    UndirectedGraph g;
    const auto node_set = graph.nodes();
    g.names.assign(node_set.begin(), node_set.end());
    std::map<std::string, int> index;
    for (size_t i = 0; i < g.names.size(); ++i) index[g.names[i]] = static_cast<int>(i);
    std::map<std::pair<int, int>, double> weights;
    for (const auto& [src, dsts] : graph.edges) {
        for (const auto& [dst, w] : dsts) {
            int a = index[src], b = index[dst];
            if (a == b) continue;
            if (a > b) std::swap(a, b);
            weights[{a, b}] += w;
        }
    }
    g.adj.resize(g.names.size());
    g.self_loop.assign(g.names.size(), 0.0);
    for (const auto& [key, w] : weights) {
        g.adj[key.first].emplace_back(key.second, w);
        g.adj[key.second].emplace_back(key.first, w);
        g.total_weight += w;
    }
    return g;
}

double graph_modularity(const UndirectedGraph& g, const std::vector<int>& community) {
    const double m = g.total_weight + [&] {
        double s = 0.0;
        for (const double w : g.self_loop) s += w;
        return s;
    }();
    if (m <= 0.0) return 0.0;
    std::map<int, double> internal, total;
    std::vector<double> degree(g.names.size(), 0.0);
    for (size_t v = 0; v < g.names.size(); ++v) {
        degree[v] = 2.0 * g.self_loop[v];
        for (const auto& [w, wt] : g.adj[v]) degree[v] += wt;
    }
    for (size_t v = 0; v < g.names.size(); ++v) {
        total[community[v]] += degree[v];
        internal[community[v]] += 2.0 * g.self_loop[v];
        for (const auto& [w, wt] : g.adj[v])
            if (community[w] == community[v]) internal[community[v]] += wt;
    }
    double q = 0.0;
    for (const auto& [c, tot] : total) {
        const double in = internal.count(c) ? internal.at(c) : 0.0;
        q += in / (2.0 * m) - (tot / (2.0 * m)) * (tot / (2.0 * m));
    }
    return q;
}

// One Louvain level: greedy node moves in index order until stable.
// Returns the community of each node (compacted) and whether anything moved.
std::pair<std::vector<int>, bool> louvain_level(const UndirectedGraph& g) {
    const size_t n = g.names.size();
    std::vector<int> community(n);
    std::vector<double> degree(n, 0.0);
    for (size_t v = 0; v < n; ++v) {
        community[v] = static_cast<int>(v);
        degree[v] = 2.0 * g.self_loop[v];
        for (const auto& [w, wt] : g.adj[v]) degree[v] += wt;
    }
    double m2 = 0.0;  // 2m
    for (const double d : degree) m2 += d;
    if (m2 <= 0.0) return {community, false};

    std::vector<double> community_total(degree);
    bool any_move = false;
    bool moved = true;
    while (moved) {
        moved = false;
        for (size_t v = 0; v < n; ++v) {
            const int old_c = community[v];
            community_total[old_c] -= degree[v];
            std::map<int, double> links;  // community -> weight from v
            links[old_c] += 0.0;
            for (const auto& [w, wt] : g.adj[v]) links[community[w]] += wt;

            int best_c = old_c;
            double best_gain = links[old_c] - community_total[old_c] * degree[v] / m2;
            for (const auto& [c, wt] : links) {
                const double gain = wt - community_total[c] * degree[v] / m2;
                if (gain > best_gain + 1e-12 ||
                    (std::abs(gain - best_gain) <= 1e-12 && c < best_c)) {
                    best_gain = gain;
                    best_c = c;
                }
            }
            community[v] = best_c;
            community_total[best_c] += degree[v];
            if (best_c != old_c) {
                moved = true;
                any_move = true;
            }
        }
    }
    // Compact ids in order of first appearance.
    std::map<int, int> remap;
    for (size_t v = 0; v < n; ++v)
        if (!remap.count(community[v])) {
            const int id = static_cast<int>(remap.size());
            remap[community[v]] = id;
        }
    for (auto& c : community) c = remap[c];
    return {community, any_move};
}

UndirectedGraph aggregate(const UndirectedGraph& g, const std::vector<int>& community,
                          int n_communities) {
    UndirectedGraph out;
    out.names.resize(n_communities);
    for (int c = 0; c < n_communities; ++c) out.names[c] = std::to_string(c);
    out.adj.resize(n_communities);
    out.self_loop.assign(n_communities, 0.0);
    std::map<std::pair<int, int>, double> weights;
    for (size_t v = 0; v < g.names.size(); ++v) {
        out.self_loop[community[v]] += g.self_loop[v];
        for (const auto& [w, wt] : g.adj[v]) {
            if (static_cast<size_t>(w) < v) continue;  // visit each edge once
            int a = community[v], b = community[w];
            if (a == b) {
                out.self_loop[a] += wt;
            } else {
                if (a > b) std::swap(a, b);
                weights[{a, b}] += wt;
            }
        }
    }
    for (const auto& [key, w] : weights) {
        out.adj[key.first].emplace_back(key.second, w);
        out.adj[key.second].emplace_back(key.first, w);
        out.total_weight += w;
    }
    return out;
}

}  // namespace

std::vector<ListingSignals> build_signals(std::span<const corpus::Listing> listings,
                                          std::span<const stlink::StePair> pairs,
                                          const resolve::ResolutionMap& resolution,
                                          const std::map<std::string, std::string>& canon_index) {
    std::map<std::string, std::set<std::string>> claims_by_listing;
    for (const auto& p : pairs) {
        if (!p.is_membership || p.toponym.label != "TN:NEIGHBORHOOD") continue;
        if (auto name = resolve_mention(p.toponym.surface, resolution, canon_index))
            claims_by_listing[p.listing_id].insert(*name);
    }

    std::vector<ListingSignals> out;
    out.reserve(listings.size());
    for (const auto& listing : listings) {
        ListingSignals s;
        s.id = listing.id;
        s.coord = {listing.lon, listing.lat};
        s.neighborhood = listing.neighborhood;
        std::set<std::string> mentions;
        for (int i = 0; i < static_cast<int>(listing.sentences.size()); ++i) {
            for (const auto& span : chunking::decode_iob(listing.sentences[i], i)) {
                if (span.label == "TN:NEIGHBORHOOD") {
                    if (auto name = resolve_mention(span.surface, resolution, canon_index))
                        mentions.insert(*name);
                } else if (span.label.rfind("TN", 0) == 0) {
                    s.mentions_other_toponym = true;
                }
            }
        }
        s.mentions = sorted_unique(std::move(mentions));
        if (auto it = claims_by_listing.find(listing.id); it != claims_by_listing.end())
            s.membership_claims = sorted_unique(std::move(it->second));
        out.push_back(std::move(s));
    }
    return out;
}

std::map<std::string, double> self_reference_rates(std::span<const ListingSignals> signals) {
    std::map<std::string, std::pair<size_t, size_t>> counts;  // name -> (self, total)
    for (const auto& s : signals) {
        if (!s.neighborhood) continue;
        auto& [self, total] = counts[*s.neighborhood];
        ++total;
        if (std::binary_search(s.mentions.begin(), s.mentions.end(), *s.neighborhood)) ++self;
    }
    std::map<std::string, double> rates;
    for (const auto& [name, c] : counts)
        rates[name] = static_cast<double>(c.first) / static_cast<double>(c.second);
    return rates;
}

std::set<std::string> MentionGraph::nodes() const {
    std::set<std::string> out;
    for (const auto& [src, dsts] : edges) {
        out.insert(src);
        for (const auto& [dst, _] : dsts) out.insert(dst);
    }
    return out;
}

int MentionGraph::total_degree(const std::string& node) const {
    int degree = 0;
    if (auto it = edges.find(node); it != edges.end())
        degree += static_cast<int>(it->second.size());
    for (const auto& [src, dsts] : edges)
        if (src != node && dsts.count(node)) ++degree;
    return degree;
}

size_t MentionGraph::edge_count() const {
    size_t n = 0;
    for (const auto& [_, dsts] : edges) n += dsts.size();
    return n;
}

MentionGraph mention_network(std::span<const ListingSignals> signals) {
    MentionGraph g;
    for (const auto& s : signals) {
        if (!s.neighborhood) continue;
        for (const auto& target : s.mentions) {
            if (target == *s.neighborhood) continue;  // self-reference has its own metric
            ++g.edges[*s.neighborhood][target];
        }
    }
    return g;
}

MentionGraph prune_network(const MentionGraph& graph, int min_degree) {
    const auto node_set = graph.nodes();
    if (node_set.empty()) return {};

    // Largest weak component; size ties go to the one with the smallest name.
    std::map<std::string, std::string> parent;
    for (const auto& n : node_set) parent[n] = n;
    std::function<std::string(std::string)> find = [&](std::string v) {
        while (parent[v] != v) {
            parent[v] = parent[parent[v]];
            v = parent[v];
        }
        return v;
    };
    auto unite = [&](const std::string& a, const std::string& b) {
        auto ra = find(a), rb = find(b);
        if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
    };
    for (const auto& [src, dsts] : graph.edges)
        for (const auto& [dst, _] : dsts) unite(src, dst);

    std::map<std::string, std::vector<std::string>> components;
    for (const auto& n : node_set) components[find(n)].push_back(n);
    const std::vector<std::string>* giant = nullptr;
    for (const auto& [root, members] : components)
        if (!giant || members.size() > giant->size()) giant = &members;

    std::set<std::string> kept(giant->begin(), giant->end());
    auto restrict_graph = [&](const std::set<std::string>& nodes) {
        MentionGraph out;
        for (const auto& [src, dsts] : graph.edges) {
            if (!nodes.count(src)) continue;
            for (const auto& [dst, w] : dsts)
                if (nodes.count(dst)) out.edges[src][dst] = w;
        }
        return out;
    };

    MentionGraph current = restrict_graph(kept);
    for (;;) {
        std::set<std::string> survivors;
        for (const auto& n : kept)
            if (current.total_degree(n) >= min_degree) survivors.insert(n);
        if (survivors.size() == kept.size()) break;
        kept = std::move(survivors);
        current = restrict_graph(kept);
        if (kept.empty()) break;
    }
    return current;
}

CommunityResult detect_communities(const MentionGraph& graph) {
    const UndirectedGraph base = symmetrize(graph);
    CommunityResult result;
    if (base.names.empty()) return result;

    // Multi-level greedy moves; each level aggregates and repeats.
    std::vector<int> assignment(base.names.size());
    for (size_t i = 0; i < assignment.size(); ++i) assignment[i] = static_cast<int>(i);
    UndirectedGraph current = base;
    for (;;) {
        auto [level_community, moved] = louvain_level(current);
        int n_communities = 0;
        for (const int c : level_community) n_communities = std::max(n_communities, c + 1);
        for (auto& a : assignment) a = level_community[a];
        if (!moved || n_communities == static_cast<int>(current.names.size())) break;
        current = aggregate(current, level_community, n_communities);
    }

    // Renumber by first appearance over sorted node names.
    std::map<int, int> remap;
    for (size_t i = 0; i < base.names.size(); ++i)
        if (!remap.count(assignment[i])) {
            const int id = static_cast<int>(remap.size());
            remap[assignment[i]] = id;
        }
    for (size_t i = 0; i < base.names.size(); ++i)
        result.community[base.names[i]] = remap[assignment[i]];

    std::vector<int> flat(base.names.size());
    for (size_t i = 0; i < base.names.size(); ++i) flat[i] = result.community[base.names[i]];
    result.modularity = graph_modularity(base, flat);
    return result;
}

SpanAreas toponymic_span(const std::string& name, std::span<const ListingSignals> signals,
                         double polygon_area_km2, const geo::Projection& projection,
                         const corpus::Config& config, OutlierFilter filter) {
    SpanAreas out;
    std::vector<geo::Point> mention_coords, claim_coords;
    for (const auto& s : signals) {
        if (std::binary_search(s.mentions.begin(), s.mentions.end(), name))
            mention_coords.push_back(s.coord);
        if (std::binary_search(s.membership_claims.begin(), s.membership_claims.end(), name))
            claim_coords.push_back(s.coord);
    }
    out.mention_points = mention_coords.size();
    out.claim_points = claim_coords.size();

    auto hull_of = [&](std::span<const geo::Point> lonlat) -> std::optional<geo::Hull> {
        std::vector<geo::Point> planar;
        planar.reserve(lonlat.size());
        for (const auto& p : lonlat) planar.push_back(projection.to_planar({p.x, p.y}));
        try {
            return geo::convex_hull(planar);
        } catch (const Error&) {
            return std::nullopt;
        }
    };

    if (mention_coords.size() >= static_cast<size_t>(config.min_hull_points)) {
        out.raw_hull = hull_of(mention_coords);
        if (out.raw_hull) out.raw_area = out.raw_hull->area;
    }
    if (claim_coords.size() >= static_cast<size_t>(config.min_hull_points)) {
        const auto filtered = filter == OutlierFilter::kKde
                                  ? geo::kde_filter(claim_coords, config.kde_bandwidth, config.outlier_z)
                                  : geo::mahalanobis_filter(claim_coords, config.outlier_z);
        out.filtered_points = filtered.size();
        out.filtered_hull = hull_of(filtered);
        if (out.filtered_hull) {
            out.filtered_area = out.filtered_hull->area;
            if (polygon_area_km2 > 0.0) out.span_ratio = *out.filtered_area / polygon_area_km2;
        }
    }
    return out;
}

std::map<std::string, double> other_toponym_rate(std::span<const ListingSignals> signals) {
    std::map<std::string, std::pair<size_t, size_t>> counts;
    for (const auto& s : signals) {
        if (!s.neighborhood) continue;
        auto& [hits, total] = counts[*s.neighborhood];
        ++total;
        if (s.mentions_other_toponym) ++hits;
    }
    std::map<std::string, double> rates;
    for (const auto& [name, c] : counts)
        rates[name] = static_cast<double>(c.first) / static_cast<double>(c.second);
    return rates;
}

MetricsBundle compute_metrics(std::span<const ListingSignals> signals,
                              std::span<const corpus::Neighborhood> neighborhoods,
                              const std::map<std::string, double>& gentrification,
                              const geo::Projection& projection, const corpus::Config& config,
                              OutlierFilter filter, int workers) {
    const auto self_rates = self_reference_rates(signals);
    const auto other_rates = other_toponym_rate(signals);
    std::map<std::string, size_t> listing_counts;
    for (const auto& s : signals)
        if (s.neighborhood) ++listing_counts[*s.neighborhood];

    std::vector<SpanAreas> spans(neighborhoods.size());
    parallel_for(neighborhoods.size(), workers, [&](size_t i) {
        const auto& n = neighborhoods[i];
        double area_km2 = 0.0;
        for (const auto& ring : n.rings) {
            std::vector<geo::Point> planar;
            planar.reserve(ring.size());
            for (const auto& p : ring) planar.push_back(projection.to_planar({p.x, p.y}));
            area_km2 += geo::polygon_area(planar);
        }
        spans[i] = toponymic_span(n.name, signals, area_km2, projection, config, filter);
    });

    MetricsBundle bundle;
    bundle.metrics.reserve(neighborhoods.size());
    for (size_t i = 0; i < neighborhoods.size(); ++i) {
        const auto& n = neighborhoods[i];
        NeighborhoodMetrics m;
        m.name = n.name;
        if (auto it = listing_counts.find(n.name); it != listing_counts.end())
            m.listing_count = it->second;
        if (auto it = self_rates.find(n.name); it != self_rates.end()) m.self_reference_rate = it->second;
        if (auto it = other_rates.find(n.name); it != other_rates.end()) m.other_toponym_rate = it->second;
        if (auto it = gentrification.find(n.name); it != gentrification.end())
            m.gentrification_index = it->second;
        m.raw_span_area = spans[i].raw_area;
        m.filtered_span_area = spans[i].filtered_area;
        m.span_ratio = spans[i].span_ratio;
        bundle.metrics.push_back(std::move(m));

        auto push_hull = [&](const std::optional<geo::Hull>& hull, const char* kind) {
            if (!hull) return;
            NamedHull nh;
            nh.name = n.name;
            nh.kind = kind;
            nh.area_km2 = hull->area;
            for (const auto& v : hull->vertices) nh.ring.push_back(projection.to_lonlat(v));
            bundle.hulls.push_back(std::move(nh));
        };
        push_hull(spans[i].raw_hull, "raw");
        push_hull(spans[i].filtered_hull, "filtered");
    }
    return bundle;
}

std::vector<MetricCorrelation> correlate_metrics(std::span<const NeighborhoodMetrics> metrics) {
    struct Extractor {
        const char* name;
        std::function<std::optional<double>(const NeighborhoodMetrics&)> get;
    };
    const std::vector<Extractor> extractors = {
        {"listing_count",
         [](const NeighborhoodMetrics& m) -> std::optional<double> {
             return static_cast<double>(m.listing_count);
         }},
        {"self_reference_rate", [](const NeighborhoodMetrics& m) { return m.self_reference_rate; }},
        {"span_ratio", [](const NeighborhoodMetrics& m) { return m.span_ratio; }},
        {"other_toponym_rate", [](const NeighborhoodMetrics& m) { return m.other_toponym_rate; }},
    };
    std::vector<MetricCorrelation> out;
    for (const auto& ex : extractors) {
        std::vector<double> xs, ys;
        for (const auto& m : metrics) {
            const auto v = ex.get(m);
            if (v && m.gentrification_index) {
                xs.push_back(*v);
                ys.push_back(*m.gentrification_index);
            }
        }
        MetricCorrelation c;
        c.metric = ex.name;
        c.pairs = xs.size();
        if (xs.size() >= 2) {
            try {
                c.r = geo::pearson(xs, ys);
            } catch (const Error&) {
                // constant series; leave r undefined
            }
        }
        out.push_back(std::move(c));
    }
    return out;
}

std::string metrics_to_csv(std::span<const NeighborhoodMetrics> metrics) {
    std::string out =
        "name,listing_count,self_reference_rate,raw_span_area_km2,filtered_span_area_km2,"
        "span_ratio,other_toponym_rate,gentrification_index\n";
    for (const auto& m : metrics)
        out += csv::row({m.name, std::to_string(m.listing_count), fmt_opt(m.self_reference_rate),
                         fmt_opt(m.raw_span_area), fmt_opt(m.filtered_span_area),
                         fmt_opt(m.span_ratio), fmt_opt(m.other_toponym_rate),
                         fmt_opt(m.gentrification_index)});
    return out;
}

std::string network_to_csv(const MentionGraph& graph) {
    std::string out = "src,dst,weight\n";
    for (const auto& [src, dsts] : graph.edges)
        for (const auto& [dst, w] : dsts) out += csv::row({src, dst, std::to_string(w)});
    return out;
}

std::string network_to_dot(const MentionGraph& graph, const CommunityResult& communities) {
    auto quote = [](const std::string& s) {
        std::string out = "\"";
        for (const char c : s) {
            if (c == '"' || c == '\\') out += '\\';
            out += c;
        }
        out += '"';
        return out;
    };
    std::string out = "digraph mentions {\n";
    for (const auto& node : graph.nodes()) {
        out += "  " + quote(node);
        if (auto it = communities.community.find(node); it != communities.community.end())
            out += " [community=" + std::to_string(it->second) + "]";
        out += ";\n";
    }
    for (const auto& [src, dsts] : graph.edges)
        for (const auto& [dst, w] : dsts)
            out += "  " + quote(src) + " -> " + quote(dst) + " [weight=" + std::to_string(w) + "];\n";
    out += "}\n";
    return out;
}

std::string correlations_to_csv(std::span<const MetricCorrelation> correlations) {
    std::string out = "metric,pairs,r\n";
    for (const auto& c : correlations)
        out += csv::row({c.metric, std::to_string(c.pairs), c.r ? io::format_double(*c.r) : ""});
    return out;
}

std::string hulls_to_geojson(std::span<const NamedHull> hulls) {
    nlohmann::ordered_json doc;
    doc["type"] = "FeatureCollection";
    auto features = nlohmann::ordered_json::array();
    for (const auto& h : hulls) {
        nlohmann::ordered_json f;
        f["type"] = "Feature";
        f["properties"] = {{"name", h.name}, {"kind", h.kind}, {"area_km2", h.area_km2}};
        auto ring = nlohmann::ordered_json::array();
        for (const auto& p : h.ring) ring.push_back({p.lon, p.lat});
        if (!h.ring.empty()) ring.push_back({h.ring.front().lon, h.ring.front().lat});
        f["geometry"] = {{"type", "Polygon"}, {"coordinates", nlohmann::ordered_json::array({ring})}};
        features.push_back(std::move(f));
    }
    doc["features"] = std::move(features);
    return doc.dump(2) + "\n";
}

}  // namespace atlas::analytics
