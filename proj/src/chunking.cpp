#include "atlas/chunking.hpp"

#include <algorithm>
#include <map>

#include "atlas/error.hpp"

namespace atlas::chunking {

namespace {

std::string join_tokens(std::span<const corpus::Token> tokens, int start, int end) {
    std::string out;
    for (int i = start; i < end; ++i) {
        if (i > start) out += ' ';
        out += tokens[i].text;
    }
    return out;
}

}  // namespace

std::vector<EntitySpan> decode_iob(std::span<const corpus::Token> tokens, int sentence_index) {
    std::vector<EntitySpan> spans;
    int open_start = -1;
    std::string open_label;
    auto close = [&](int end) {
        if (open_start < 0) return;
        spans.push_back({sentence_index, open_start, end, open_label,
                         join_tokens(tokens, open_start, end)});
        open_start = -1;
        open_label.clear();
    };
    for (int i = 0; i < static_cast<int>(tokens.size()); ++i) {
        const std::string& tag = tokens[i].tag;
        if (tag == "O") {
            close(i);
            continue;
        }
        const char prefix = tag[0];
        const std::string label = tag.substr(2);
        if (prefix == 'B' || open_start < 0 || label != open_label) {
            close(i);
            open_start = i;
            open_label = label;
        }
        // I- continuing the open chunk of the same label needs no action.
    }
    close(static_cast<int>(tokens.size()));
    return spans;
}

std::vector<std::string> encode_iob(std::span<const EntitySpan> spans, size_t n_tokens) {
    std::vector<std::string> tags(n_tokens, "O");
    for (const EntitySpan& s : spans) {
        if (s.start < 0 || s.end > static_cast<int>(n_tokens) || s.start >= s.end)
            throw Error("span out of range in encode_iob");
        tags[s.start] = "B-" + s.label;
        for (int i = s.start + 1; i < s.end; ++i) tags[i] = "I-" + s.label;
    }
    return tags;
}

int SentenceGraph::node_of_token(int token_index) const {
    for (int i = 0; i < static_cast<int>(nodes.size()); ++i)
        if (token_index >= nodes[i].start && token_index < nodes[i].end) return i;
    return -1;
}

SentenceGraph build_sentence_graph(std::span<const corpus::Token> tokens,
                                   std::span<const EntitySpan> spans) {
    SentenceGraph g;
    const int n = static_cast<int>(tokens.size());
    std::vector<int> node_of(n, -1);

    int next_span = 0;
    for (int i = 0; i < n;) {
        if (next_span < static_cast<int>(spans.size()) && spans[next_span].start == i) {
            const EntitySpan& s = spans[next_span];
            g.nodes.push_back({s.start, s.end, s.label, s.surface});
            for (int t = s.start; t < s.end; ++t) node_of[t] = static_cast<int>(g.nodes.size()) - 1;
            i = s.end;
            ++next_span;
        } else {
            g.nodes.push_back({i, i + 1, std::nullopt, tokens[i].text});
            node_of[i] = static_cast<int>(g.nodes.size()) - 1;
            ++i;
        }
    }

    // Inherited edges deduplicate on (head node, dependent node); the first
    // member token's relation label wins.
    std::map<std::pair<int, int>, std::string> edges;
    for (int t = 0; t < n; ++t) {
        const int head = tokens[t].head;
        if (head == corpus::kRootHead) continue;
        const int from = node_of[head];
        const int to = node_of[t];
        if (from == to) continue;
        edges.try_emplace({from, to}, tokens[t].deprel);
    }
    g.edges.reserve(edges.size());
    for (const auto& [key, deprel] : edges) g.edges.push_back({key.first, key.second, deprel});
    return g;
}

std::string to_dot(const SentenceGraph& graph) {
    auto quote = [](const std::string& s) {
        std::string out = "\"";
        for (const char c : s) {
            if (c == '"' || c == '\\') out += '\\';
            out += c;
        }
        out += '"';
        return out;
    };
    std::string out = "digraph sentence {\n";
    for (size_t i = 0; i < graph.nodes.size(); ++i) {
        const GraphNode& node = graph.nodes[i];
        std::string name = std::to_string(i) + ":" + node.surface;
        out += "  " + quote(name);
        if (node.is_entity()) out += " [label=" + quote(node.surface + " / " + *node.label) + "]";
        out += ";\n";
    }
    for (const GraphEdge& e : graph.edges) {
        const std::string a = std::to_string(e.from) + ":" + graph.nodes[e.from].surface;
        const std::string b = std::to_string(e.to) + ":" + graph.nodes[e.to].surface;
        out += "  " + quote(a) + " -> " + quote(b) + " [label=" + quote(e.deprel) + "];\n";
    }
    out += "}\n";
    return out;
}

}  // namespace atlas::chunking
