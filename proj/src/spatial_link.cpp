#include "atlas/spatial_link.hpp"

#include <algorithm>
#include <array>
#include <deque>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <numeric>

#include "atlas/csv.hpp"
#include "atlas/error.hpp"
#include "atlas/text.hpp"

namespace atlas::stlink {

namespace {

constexpr std::array<std::string_view, 97> kMembershipPhrases = {
    "in",
    "in the heart of",
    "located in",
    "located in the heart of",
    "right in the heart of",
    "in the middle of",
    "in the center of",
    "centrally located in",
    "located in the center of",
    "conveniently located in",
    "nestled in the heart of",
    "right in the middle of",
    "situated in the heart of",
    "at the heart of",
    "conveniently located in the heart of",
    "located right in the heart of",
    "nestled in",
    "ideally located in",
    "centrally located in the heart of",
    "located in heart of",
    "located in the middle of",
    "tucked away in",
    "perfectly located in",
    "located in the epicenter of",
    "in the very heart of",
    "located in the best part of",
    "perfectly located in the heart of",
    "located right in the middle of",
    "in the epicenter of",
    "in the",
    "located within",
    "remarkably located in the heart of",
    "absolute heart of",
    "close to the heart of",
    "located in center of",
    "at the center of",
    "in center of",
    "in this part of",
    "centrally located on",
    "ideally located in the heart of",
    "in the hub of",
    "right at the heart of",
    "very right in the middle of",
    "located at the center of",
    "located on the heart of",
    "truly in the heart of",
    "located in the western section of",
    "in a great part of",
    "at the nexus of",
    "conveniently located in the middle of",
    "within the heart of",
    "very centrally located in",
    "conveniently situated in",
    "within walking distance from the heart of",
    "located in the heart",
    "steps away",
    "in the south side of",
    "perfectly situated in the heart of",
    "set in the heart of",
    "located in a very convenient area of",
    "very conveniently located in",
    "in the very center of",
    "locate in",
    "perfectly situated on",
    "best part of",
    "in the midst of",
    "steps away to",
    "short walk away from the heart of",
    "in a great location in",
    "primely located in",
    "inside",
    "convenient location in central area of",
    "in a prime position in",
    "just a few steps away from",
    "in the most desirable part of",
    "in the lower part of",
    "within steps of",
    "footsteps away from",
    "located in the south of",
    "in the best part",
    "located in the midst of",
    "in the heat of",
    "located in a part of",
    "conveniently in",
    "by the heart of",
    "in middle of",
    "located at the nexus of",
    "in the coolest part of",
    "in the northernmost portion of",
    "only steps away from",
    "located conveniently in",
    "strategically situated at the center of",
    "located right in",
    "nestled in the best part of",
    "in the prime location of",
    "convenient in",
    "perfectly placed in the middle of",
};

chunking::EntitySpan span_of_node(const chunking::GraphNode& node, int sentence) {
    return {sentence, node.start, node.end, node.label.value_or(""), node.surface};
}

}  // namespace

bool is_spatial_entity(const chunking::GraphNode& node) {
    return node.label && *node.label == kSpatialEntityLabel;
}

bool is_toponym(const chunking::GraphNode& node) {
    return node.label && node.label->rfind("TN", 0) == 0;
}

SplitGraph split_at_ste(const chunking::SentenceGraph& graph) {
    SplitGraph out;
    out.graph.nodes = graph.nodes;
    for (const chunking::GraphEdge& e : graph.edges) {
        if (is_spatial_entity(graph.nodes[e.to])) continue;
        out.graph.edges.push_back(e);
    }

    // Weak components over the pruned edge set.
    const int n = static_cast<int>(out.graph.nodes.size());
    std::vector<int> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int v) {
        while (parent[v] != v) v = parent[v] = parent[parent[v]];
        return v;
    };
    for (const chunking::GraphEdge& e : out.graph.edges) {
        const int a = find(e.from);
        const int b = find(e.to);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
    std::map<int, std::vector<int>> groups;
    for (int v = 0; v < n; ++v) groups[find(v)].push_back(v);
    for (auto& [root, members] : groups) out.components.push_back(std::move(members));
    return out;
}

std::vector<StePair> extract_pairs(const SplitGraph& split, const std::string& listing_id,
                                   int sentence_index) {
    const auto& g = split.graph;
    std::vector<std::vector<int>> successors(g.nodes.size());
    for (const chunking::GraphEdge& e : g.edges) successors[e.from].push_back(e.to);

    constexpr int kUnreachable = std::numeric_limits<int>::max();
    auto directed_distances = [&](int source) {
        std::vector<int> dist(g.nodes.size(), kUnreachable);
        std::deque<int> queue{source};
        dist[source] = 0;
        while (!queue.empty()) {
            const int v = queue.front();
            queue.pop_front();
            for (const int w : successors[v]) {
                if (dist[w] != kUnreachable) continue;
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
        }
        return dist;
    };

    std::vector<StePair> pairs;
    for (const auto& component : split.components) {
        std::vector<int> stes, toponyms;
        for (const int v : component) {
            if (is_spatial_entity(g.nodes[v])) stes.push_back(v);
            else if (is_toponym(g.nodes[v])) toponyms.push_back(v);
        }
        if (stes.empty() || toponyms.empty()) continue;

        if (stes.size() == 1) {
            for (const int t : toponyms)
                pairs.push_back({listing_id, sentence_index, span_of_node(g.nodes[stes[0]], sentence_index),
                                 span_of_node(g.nodes[t], sentence_index), false});
            continue;
        }
        // Several spatial entities sharing a weak component: each toponym
        // takes the nearest one by directed path; ties (and unreachable
        // toponyms) go to the leftmost entity.
        std::vector<std::vector<int>> dists;
        dists.reserve(stes.size());
        for (const int s : stes) dists.push_back(directed_distances(s));
        for (const int t : toponyms) {
            int best = 0;
            for (size_t i = 1; i < stes.size(); ++i) {
                const auto candidate = std::make_pair(dists[i][t], g.nodes[stes[i]].start);
                const auto incumbent = std::make_pair(dists[best][t], g.nodes[stes[best]].start);
                if (candidate < incumbent) best = static_cast<int>(i);
            }
            pairs.push_back({listing_id, sentence_index, span_of_node(g.nodes[stes[best]], sentence_index),
                             span_of_node(g.nodes[t], sentence_index), false});
        }
    }
    std::sort(pairs.begin(), pairs.end(), [](const StePair& a, const StePair& b) {
        return std::tie(a.sentence, a.toponym.start, a.ste.start) <
               std::tie(b.sentence, b.toponym.start, b.ste.start);
    });
    return pairs;
}

MembershipLexicon MembershipLexicon::builtin() {
    MembershipLexicon lex;
    for (const auto phrase : kMembershipPhrases) lex.phrases_.insert(std::string(phrase));
    return lex;
}

MembershipLexicon MembershipLexicon::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open lexicon file: " + path.string());
    MembershipLexicon lex;
    std::string line;
    while (std::getline(in, line)) {
        const std::string phrase = text::normalize_surface(line);
        if (!phrase.empty()) lex.phrases_.insert(phrase);
    }
    if (lex.phrases_.empty()) throw InputError("lexicon file is empty: " + path.string());
    if (!lex.phrases_.count("in"))
        throw InputError("lexicon file is missing the base phrase 'in': " + path.string());
    return lex;
}

bool MembershipLexicon::contains(std::string_view surface) const {
    return phrases_.count(text::normalize_surface(surface)) > 0;
}

bool classify_membership(std::string_view ste_surface, const MembershipLexicon& lexicon) {
    return lexicon.contains(ste_surface);
}

std::vector<StePair> extract_listing_pairs(const corpus::Listing& listing,
                                           const MembershipLexicon& lexicon) {
    std::vector<StePair> pairs;
    for (int s = 0; s < static_cast<int>(listing.sentences.size()); ++s) {
        const auto& tokens = listing.sentences[s];
        const auto spans = chunking::decode_iob(tokens, s);
        const auto graph = chunking::build_sentence_graph(tokens, spans);
        const auto split = split_at_ste(graph);
        auto sentence_pairs = extract_pairs(split, listing.id, s);
        for (auto& p : sentence_pairs)
            p.is_membership = classify_membership(p.ste.surface, lexicon);
        pairs.insert(pairs.end(), sentence_pairs.begin(), sentence_pairs.end());
    }
    return pairs;
}

std::span<const std::string_view> builtin_membership_phrases() {
    return kMembershipPhrases;
}

std::string pairs_to_csv(std::span<const StePair> pairs) {
    std::string out = "listing_id,sentence,ste_surface,is_membership,toponym_surface,toponym_label\n";
    for (const StePair& p : pairs)
        out += csv::row({p.listing_id, std::to_string(p.sentence), p.ste.surface,
                         p.is_membership ? "true" : "false", p.toponym.surface, p.toponym.label});
    return out;
}

}  // namespace atlas::stlink
