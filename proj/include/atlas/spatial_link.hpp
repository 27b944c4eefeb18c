#pragma once

#include <filesystem>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "atlas/chunking.hpp"
#include "atlas/corpus.hpp"

namespace atlas::stlink {

inline constexpr std::string_view kSpatialEntityLabel = "SPAT_TEMP_ENT";

bool is_spatial_entity(const chunking::GraphNode& node);
bool is_toponym(const chunking::GraphNode& node);  // label prefixed "TN"

// A sentence graph with all in-edges of spatio-temporal entity nodes
// removed, plus its weakly connected components (each a sorted node-id
// list; components ordered by smallest member).
struct SplitGraph {
    chunking::SentenceGraph graph;
    std::vector<std::vector<int>> components;
};

SplitGraph split_at_ste(const chunking::SentenceGraph& graph);

// One (spatio-temporal entity, toponym) dependency link.
struct StePair {
    std::string listing_id;
    int sentence = 0;
    chunking::EntitySpan ste;      // label SPAT_TEMP_ENT
    chunking::EntitySpan toponym;  // label prefixed TN
    bool is_membership = false;
    bool operator==(const StePair&) const = default;
};

// Emits pairs for every component holding at least one spatial entity and
// one toponym. A lone spatial entity pairs with every toponym in its
// component; with several, each toponym takes the nearest one by directed
// path, ties (including unreachable) going to the leftmost.
std::vector<StePair> extract_pairs(const SplitGraph& split, const std::string& listing_id,
                                   int sentence_index);

// Normalized phrases that signal a membership claim ("located in", "in the
// heart of", ...).
class MembershipLexicon {
public:
    static MembershipLexicon builtin();
    static MembershipLexicon load(const std::filesystem::path& path);

    bool contains(std::string_view surface) const;  // normalizes the query
    size_t size() const { return phrases_.size(); }

private:
    std::set<std::string> phrases_;
};

bool classify_membership(std::string_view ste_surface, const MembershipLexicon& lexicon);

// Full per-listing extraction: decode spans, build graphs, split, pair,
// classify. Pairs come back sorted by (sentence, toponym start, ste start).
std::vector<StePair> extract_listing_pairs(const corpus::Listing& listing,
                                           const MembershipLexicon& lexicon);

// The built-in membership phrase list, one normalized phrase per entry.
std::span<const std::string_view> builtin_membership_phrases();

std::string pairs_to_csv(std::span<const StePair> pairs);

}  // namespace atlas::stlink
