#include "atlas/resolution.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "atlas/csv.hpp"
#include "atlas/error.hpp"
#include "atlas/io.hpp"
#include "atlas/parallel.hpp"
#include "atlas/text.hpp"

namespace atlas::resolve {

namespace {

std::string fmt_opt_rank(const std::optional<int>& r) {
    return r ? std::to_string(*r) : std::string{};
}

// Descending-similarity order with name as the deterministic tiebreak.
struct ScoredName {
    double similarity;
    std::string name;
    bool operator<(const ScoredName& other) const {
        if (similarity != other.similarity) return similarity > other.similarity;
        return name < other.name;
    }
};

// 1-based rank per key of the query's top-k vocabulary neighbors.
std::map<std::string, int> embedding_topk_ranks(const corpus::EmbeddingTable& table,
                                                const std::string& query_key, int k) {
    std::map<std::string, int> ranks;
    const std::vector<float>* query = table.find_key(query_key);
    if (!query) return ranks;
    std::vector<ScoredName> scored;
    scored.reserve(table.size());
    for (const auto& key : table.keys_sorted()) {
        if (key == query_key) continue;  // the query is not its own neighbor
        const auto* vec = table.find_key(key);
        scored.push_back({cosine_similarity(*query, *vec), key});
    }
    const size_t cut = std::min<size_t>(static_cast<size_t>(std::max(k, 0)), scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(cut), scored.end());
    for (size_t i = 0; i < cut; ++i) ranks[scored[i].name] = static_cast<int>(i) + 1;
    return ranks;
}

}  // namespace

double jaro(std::string_view a, std::string_view b) {
    if (a == b) return 1.0;
    if (a.empty() || b.empty()) return 0.0;
    const int la = static_cast<int>(a.size());
    const int lb = static_cast<int>(b.size());
    const int window = std::max(std::max(la, lb) / 2 - 1, 0);

    std::vector<bool> matched_a(la, false), matched_b(lb, false);
    int matches = 0;
    for (int i = 0; i < la; ++i) {
        const int lo = std::max(0, i - window);
        const int hi = std::min(lb - 1, i + window);
        for (int j = lo; j <= hi; ++j) {
            if (matched_b[j] || a[i] != b[j]) continue;
            matched_a[i] = matched_b[j] = true;
            ++matches;
            break;
        }
    }
    if (matches == 0) return 0.0;

    int transpositions = 0;
    int j = 0;
    for (int i = 0; i < la; ++i) {
        if (!matched_a[i]) continue;
        while (!matched_b[j]) ++j;
        if (a[i] != b[j]) ++transpositions;
        ++j;
    }
    const double m = matches;
    return (m / la + m / lb + (m - transpositions / 2.0) / m) / 3.0;
}

double jaro_winkler(std::string_view a, std::string_view b) {
    const double j = jaro(a, b);
    int prefix = 0;
    const size_t limit = std::min({a.size(), b.size(), size_t{4}});
    while (prefix < static_cast<int>(limit) && a[prefix] == b[prefix]) ++prefix;
    return j + prefix * 0.1 * (1.0 - j);
}

double cosine_similarity(std::span<const float> a, std::span<const float> b) {
    if (a.size() != b.size()) throw Error("cosine: vector dimensions differ");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        dot += static_cast<double>(a[i]) * b[i];
        na += static_cast<double>(a[i]) * a[i];
        nb += static_cast<double>(b[i]) * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / std::sqrt(na * nb);
}

std::optional<std::string> ResolutionMap::lookup(std::string_view normalized_surface) const {
    auto it = resolved.find(std::string(normalized_surface));
    if (it == resolved.end()) return std::nullopt;
    return it->second.assigned;
}

std::map<std::string, std::string> canonical_index(
    std::span<const corpus::Neighborhood> neighborhoods) {
    std::map<std::string, std::string> index;
    for (const auto& n : neighborhoods) index[text::normalize_surface(n.name)] = n.name;
    return index;
}

std::map<std::string, std::vector<geo::Point>> collect_noncanonical(
    std::span<const stlink::StePair> pairs,
    const std::map<std::string, geo::Point>& listing_coords,
    const std::map<std::string, std::string>& canon_index) {
    // Distinct listings per surface; one coordinate per mentioning listing.
    std::map<std::string, std::set<std::string>> listings_by_surface;
    for (const auto& p : pairs) {
        if (!p.is_membership) continue;
        if (p.toponym.label != "TN:NEIGHBORHOOD") continue;
        const std::string surface = text::normalize_surface(p.toponym.surface);
        if (surface.empty() || canon_index.count(surface)) continue;
        listings_by_surface[surface].insert(p.listing_id);
    }
    std::map<std::string, std::vector<geo::Point>> out;
    for (const auto& [surface, ids] : listings_by_surface) {
        auto& coords = out[surface];
        for (const auto& id : ids) {
            auto it = listing_coords.find(id);
            if (it != listing_coords.end()) coords.push_back(it->second);
        }
    }
    return out;
}

SurfaceHull surface_hull(std::span<const geo::Point> lonlat_coords, const corpus::Config& config,
                         const geo::Projection& projection) {
    const auto kept = geo::kde_filter(lonlat_coords, config.kde_bandwidth, config.outlier_z);
    std::vector<geo::Point> distinct(kept.begin(), kept.end());
    std::sort(distinct.begin(), distinct.end(), [](const geo::Point& a, const geo::Point& b) {
        return a.x != b.x ? a.x < b.x : a.y < b.y;
    });
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (distinct.size() < static_cast<size_t>(config.min_hull_points))
        return {std::nullopt, "insufficient support"};
    std::vector<geo::Point> planar;
    planar.reserve(distinct.size());
    for (const auto& p : distinct) planar.push_back(projection.to_planar({p.x, p.y}));
    try {
        return {geo::convex_hull(planar), {}};
    } catch (const Error&) {
        return {std::nullopt, "insufficient support"};
    }
}

std::map<std::string, geo::Point> canonical_centroids(
    std::span<const corpus::Neighborhood> neighborhoods, const geo::Projection& projection,
    CentroidMode mode, std::span<const corpus::Listing> listings) {
    std::map<std::string, geo::Point> centroids;
    for (const auto& n : neighborhoods) {
        double total_area = 0.0;
        double cx = 0.0, cy = 0.0;
        for (const auto& ring : n.rings) {
            std::vector<geo::Point> planar;
            planar.reserve(ring.size());
            for (const auto& p : ring) planar.push_back(projection.to_planar({p.x, p.y}));
            const double area = geo::polygon_area(planar);
            const geo::Point c = geo::polygon_centroid(planar);
            cx += c.x * area;
            cy += c.y * area;
            total_area += area;
        }
        centroids[n.name] = {cx / total_area, cy / total_area};
    }
    if (mode == CentroidMode::kListingHull) {
        std::map<std::string, std::vector<geo::Point>> by_neighborhood;
        for (const auto& l : listings)
            if (l.neighborhood)
                by_neighborhood[*l.neighborhood].push_back(projection.to_planar({l.lon, l.lat}));
        for (auto& [name, points] : by_neighborhood) {
            try {
                const geo::Hull hull = geo::convex_hull(points);
                centroids[name] = geo::polygon_centroid(hull.vertices);
            } catch (const Error&) {
                // Too few assigned listings; polygon centroid stands.
            }
        }
    }
    return centroids;
}

std::vector<std::pair<std::string, double>> candidate_centroids(
    const geo::Hull& hull, const std::map<std::string, geo::Point>& centroids, int n) {
    const geo::Point c = geo::polygon_centroid(hull.vertices);
    std::vector<std::pair<std::string, double>> scored;
    scored.reserve(centroids.size());
    for (const auto& [name, p] : centroids)
        scored.emplace_back(name, std::hypot(p.x - c.x, p.y - c.y));
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second < b.second;
        return a.first < b.first;
    });
    if (n >= 0 && scored.size() > static_cast<size_t>(n)) scored.resize(static_cast<size_t>(n));
    return scored;
}

std::map<std::string, CriterionRanks> similarity_ranks(
    const std::string& normalized_surface, std::span<const std::string> canonical_names,
    const corpus::EmbeddingTable* table_a, const corpus::EmbeddingTable* table_b, int k, int m) {
    const std::string query_key = text::embed_key(normalized_surface);
    std::map<std::string, int> ranks_a, ranks_b;
    if (table_a) ranks_a = embedding_topk_ranks(*table_a, query_key, k);
    if (table_b) ranks_b = embedding_topk_ranks(*table_b, query_key, k);

    std::vector<ScoredName> jw_scored;
    jw_scored.reserve(canonical_names.size());
    for (const auto& name : canonical_names)
        jw_scored.push_back({jaro_winkler(normalized_surface, text::normalize_surface(name)), name});
    std::sort(jw_scored.begin(), jw_scored.end());

    std::map<std::string, int> jw_rank;
    std::map<std::string, double> jw_sim;
    for (size_t i = 0; i < jw_scored.size(); ++i) {
        jw_sim[jw_scored[i].name] = jw_scored[i].similarity;
        if (i < static_cast<size_t>(std::max(m, 0))) jw_rank[jw_scored[i].name] = static_cast<int>(i) + 1;
    }

    std::map<std::string, CriterionRanks> out;
    for (const auto& name : canonical_names) {
        CriterionRanks r;
        const std::string key = text::embed_key(name);
        if (auto it = ranks_a.find(key); it != ranks_a.end()) r.embed_a = it->second;
        if (auto it = ranks_b.find(key); it != ranks_b.end()) r.embed_b = it->second;
        if (auto it = jw_rank.find(name); it != jw_rank.end()) r.jw = it->second;
        r.jw_similarity = jw_sim[name];
        out[name] = r;
    }
    return out;
}

std::optional<SurfaceResolution> ensemble_assign(
    std::vector<std::pair<std::string, double>> candidates,
    const std::map<std::string, CriterionRanks>& ranks) {
    if (candidates.empty()) return std::nullopt;
    SurfaceResolution res;
    res.candidates.reserve(candidates.size());
    for (size_t i = 0; i < candidates.size(); ++i) {
        CandidateScore cs;
        cs.name = candidates[i].first;
        cs.centroid_rank = static_cast<int>(i) + 1;
        cs.centroid_distance = candidates[i].second;
        if (auto it = ranks.find(cs.name); it != ranks.end()) {
            cs.embed_rank_a = it->second.embed_a;
            cs.embed_rank_b = it->second.embed_b;
            cs.jw_rank = it->second.jw;
            cs.jw_similarity = it->second.jw_similarity;
        }
        cs.ensemble_score = 1.0 / cs.centroid_rank;
        if (cs.embed_rank_a) cs.ensemble_score += 1.0 / *cs.embed_rank_a;
        if (cs.embed_rank_b) cs.ensemble_score += 1.0 / *cs.embed_rank_b;
        if (cs.jw_rank) cs.ensemble_score += 1.0 / *cs.jw_rank;
        res.candidates.push_back(std::move(cs));
    }
    const CandidateScore* best = &res.candidates.front();
    for (const CandidateScore& cs : res.candidates) {
        if (cs.ensemble_score > best->ensemble_score) {
            best = &cs;
        } else if (cs.ensemble_score == best->ensemble_score) {
            if (cs.jw_similarity > best->jw_similarity ||
                (cs.jw_similarity == best->jw_similarity &&
                 (cs.centroid_distance < best->centroid_distance ||
                  (cs.centroid_distance == best->centroid_distance && cs.name < best->name))))
                best = &cs;
        }
    }
    res.assigned = best->name;
    return res;
}

ResolutionMap resolve_surfaces(const std::map<std::string, std::vector<geo::Point>>& collected,
                               const ResolverContext& context) {
    const auto centroids = canonical_centroids(context.neighborhoods, context.projection,
                                               context.centroid_mode, context.listings);
    std::vector<std::string> canonical_names;
    canonical_names.reserve(context.neighborhoods.size());
    for (const auto& n : context.neighborhoods) canonical_names.push_back(n.name);

    std::vector<const std::pair<const std::string, std::vector<geo::Point>>*> entries;
    entries.reserve(collected.size());
    for (const auto& entry : collected) entries.push_back(&entry);

    struct Slot {
        std::optional<SurfaceResolution> resolution;
        std::string reason;
    };
    std::vector<Slot> slots(entries.size());

    parallel_for(entries.size(), context.workers, [&](size_t i) {
        const auto& [surface, coords] = *entries[i];
        Slot& slot = slots[i];
        if (context.overrides) {
            auto it = context.overrides->find(surface);
            if (it != context.overrides->end()) {
                slot.resolution = SurfaceResolution{it->second, {}, true};
                return;
            }
        }
        const SurfaceHull sh = surface_hull(coords, context.config, context.projection);
        if (!sh.hull) {
            slot.reason = sh.reason;
            return;
        }
        auto candidates = candidate_centroids(*sh.hull, centroids, context.config.n_centroids);
        if (candidates.empty()) {
            slot.reason = "no candidates";
            return;
        }
        const auto ranks = similarity_ranks(surface, canonical_names, context.table_a,
                                            context.table_b, context.config.k_embed,
                                            context.config.m_jw);
        slot.resolution = ensemble_assign(std::move(candidates), ranks);
        if (!slot.resolution) slot.reason = "no candidates";
    });

    ResolutionMap map;
    for (size_t i = 0; i < entries.size(); ++i) {
        const std::string& surface = entries[i]->first;
        if (slots[i].resolution) map.resolved[surface] = std::move(*slots[i].resolution);
        else map.unresolved[surface] = slots[i].reason;
    }
    return map;
}

PrfScores eval_resolution(const std::map<std::string, std::string>& predicted,
                          const std::map<std::string, std::string>& gold) {
    if (gold.empty()) throw InputError("resolution evaluation requires a non-empty gold map");
    PrfScores s;
    s.predicted = predicted.size();
    s.gold = gold.size();
    for (const auto& [surface, assigned] : predicted) {
        auto it = gold.find(surface);
        if (it != gold.end() && it->second == assigned) ++s.correct;
    }
    s.precision = s.predicted ? static_cast<double>(s.correct) / s.predicted : 0.0;
    s.recall = static_cast<double>(s.correct) / s.gold;
    s.f1 = (s.precision + s.recall) > 0.0
               ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
               : 0.0;
    return s;
}

SpanEval span_f1(std::span<const LabeledSpan> gold, std::span<const LabeledSpan> predicted) {
    std::set<LabeledSpan> gold_set(gold.begin(), gold.end());
    SpanEval eval;
    for (const auto& g : gold) ++eval.per_label[g.label].gold;
    for (const auto& p : predicted) {
        auto& row = eval.per_label[p.label];
        ++row.predicted;
        if (gold_set.count(p)) ++row.matched;
    }
    size_t total_gold = 0;
    double weighted = 0.0;
    for (auto& [label, row] : eval.per_label) {
        row.precision = row.predicted ? static_cast<double>(row.matched) / row.predicted : 0.0;
        row.recall = row.gold ? static_cast<double>(row.matched) / row.gold : 0.0;
        row.f1 = (row.precision + row.recall) > 0.0
                     ? 2.0 * row.precision * row.recall / (row.precision + row.recall)
                     : 0.0;
        total_gold += row.gold;
        weighted += row.f1 * static_cast<double>(row.gold);
    }
    eval.weighted_f1 = total_gold ? weighted / static_cast<double>(total_gold) : 0.0;
    return eval;
}

std::map<std::string, std::string> load_surface_map(const std::filesystem::path& path) {
    const auto rows = csv::parse(io::read_file(path));
    std::map<std::string, std::string> out;
    size_t row_no = 0;
    for (const auto& row : rows) {
        ++row_no;
        if (row_no == 1 && row.size() >= 2 && text::to_lower(row[0]) == "surface") continue;
        if (row.size() != 2)
            throw InputError(path.string() + " row " + std::to_string(row_no) +
                             ": expected 2 fields");
        out[text::normalize_surface(row[0])] = row[1];
    }
    return out;
}

std::string resolution_to_csv(const ResolutionMap& map) {
    std::string out = "surface,assigned,score,centroid_rank,embedA_rank,embedB_rank,jw_rank,jw_sim\n";
    for (const auto& [surface, res] : map.resolved) {
        if (res.overridden) {
            out += csv::row({surface, res.assigned, "", "", "", "", "", ""});
            continue;
        }
        const CandidateScore* winner = nullptr;
        for (const auto& cs : res.candidates)
            if (cs.name == res.assigned) winner = &cs;
        out += csv::row({surface, res.assigned,
                         winner ? io::format_double(winner->ensemble_score) : "",
                         winner ? std::to_string(winner->centroid_rank) : "",
                         winner ? fmt_opt_rank(winner->embed_rank_a) : "",
                         winner ? fmt_opt_rank(winner->embed_rank_b) : "",
                         winner ? fmt_opt_rank(winner->jw_rank) : "",
                         winner ? io::format_double(winner->jw_similarity) : ""});
    }
    return out;
}

std::string unresolved_to_csv(const ResolutionMap& map) {
    std::string out = "surface,reason\n";
    for (const auto& [surface, reason] : map.unresolved) out += csv::row({surface, reason});
    return out;
}

}  // namespace atlas::resolve
