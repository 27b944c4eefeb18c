#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "atlas/corpus.hpp"

namespace atlas::chunking {

// A maximal entity chunk decoded from IOB2 tags.
struct EntitySpan {
    int sentence = 0;
    int start = 0;  // token range [start, end)
    int end = 0;
    std::string label;
    std::string surface;  // space-joined token text
    bool operator==(const EntitySpan&) const = default;
};

// Decodes IOB2 tags into maximal spans, sorted by start. A dangling I-X
// (not preceded by B-X or I-X) is repaired to B-X rather than rejected.
std::vector<EntitySpan> decode_iob(std::span<const corpus::Token> tokens, int sentence_index);

// Inverse of decode_iob for legal span lists; unspanned tokens become "O".
std::vector<std::string> encode_iob(std::span<const EntitySpan> spans, size_t n_tokens);

// Node of the merged dependency graph: either one entity span or one plain
// token.
struct GraphNode {
    int start = 0;
    int end = 0;
    std::optional<std::string> label;
    std::string surface;
    bool is_entity() const { return label.has_value(); }
};

struct GraphEdge {
    int from = 0;  // head node
    int to = 0;    // dependent node
    std::string deprel;
    bool operator==(const GraphEdge&) const = default;
};

// Directed dependency graph over merged nodes. Node token ranges partition
// the sentence; edges between tokens of one span are dropped, and inherited
// duplicates are merged.
struct SentenceGraph {
    std::vector<GraphNode> nodes;  // ordered by start token
    std::vector<GraphEdge> edges;  // sorted by (from, to)

    int node_of_token(int token_index) const;
};

SentenceGraph build_sentence_graph(std::span<const corpus::Token> tokens,
                                   std::span<const EntitySpan> spans);

// Graphviz text for debugging: one `"a" -> "b" [label="deprel"]` line per edge.
std::string to_dot(const SentenceGraph& graph);

}  // namespace atlas::chunking
