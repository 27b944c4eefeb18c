#include <algorithm>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <doctest.h>

#include "atlas/chunking.hpp"
#include "atlas/corpus.hpp"

using atlas::chunking::EntitySpan;
using atlas::chunking::SentenceGraph;
using atlas::corpus::Token;

namespace {

std::vector<Token> tokens_with_tags(const std::vector<std::string>& tags) {
    std::vector<Token> tokens;
    for (size_t i = 0; i < tags.size(); ++i)
        tokens.push_back({"w" + std::to_string(i),
                          i == 0 ? atlas::corpus::kRootHead : 0, "dep", tags[i]});
    return tokens;
}

// Independent restatement of the repair rule: a dangling I-X becomes B-X.
std::vector<std::string> repair_tags(const std::vector<std::string>& tags) {
    std::vector<std::string> out = tags;
    for (size_t i = 0; i < out.size(); ++i) {
        if (out[i].size() < 2 || out[i][0] != 'I') continue;
        const std::string label = out[i].substr(2);
        const bool continues = i > 0 && out[i - 1] != "O" && out[i - 1].substr(2) == label;
        if (!continues) out[i] = "B-" + label;
    }
    return out;
}

// Enumerates every legal span list over n tokens and the given labels.
void enumerate_span_lists(int n, const std::vector<std::string>& labels, int from,
                          std::vector<EntitySpan>& current,
                          const std::function<void(const std::vector<EntitySpan>&)>& visit) {
    visit(current);
    for (int start = from; start < n; ++start) {
        for (int end = start + 1; end <= n; ++end) {
            for (const auto& label : labels) {
                current.push_back({0, start, end, label, ""});
                enumerate_span_lists(n, labels, end, current, visit);
                current.pop_back();
            }
        }
    }
}

}  // namespace

TEST_CASE("decode merges B/I chunks and sorts spans") {
    const auto tokens = tokens_with_tags({"B-TN:NEIGHBORHOOD", "I-TN:NEIGHBORHOOD", "O"});
    const auto spans = atlas::chunking::decode_iob(tokens, 3);
    REQUIRE(spans.size() == 1);
    CHECK(spans[0].sentence == 3);
    CHECK(spans[0].start == 0);
    CHECK(spans[0].end == 2);
    CHECK(spans[0].label == "TN:NEIGHBORHOOD");
    CHECK(spans[0].surface == "w0 w1");
}

TEST_CASE("decode repairs a dangling I tag to a chunk start") {
    const auto spans = atlas::chunking::decode_iob(tokens_with_tags({"I-TRANSIT", "O"}), 0);
    REQUIRE(spans.size() == 1);
    CHECK(spans[0].start == 0);
    CHECK(spans[0].end == 1);
    CHECK(spans[0].label == "TRANSIT");
}

TEST_CASE("decode of all-O is empty") {
    CHECK(atlas::chunking::decode_iob(tokens_with_tags({"O", "O", "O"}), 0).empty());
}

TEST_CASE("adjacent chunks and label switches split correctly") {
    const auto spans = atlas::chunking::decode_iob(
        tokens_with_tags({"B-TRANSIT", "B-TRANSIT", "I-TN:PARK", "I-TN:PARK"}), 0);
    REQUIRE(spans.size() == 3);
    CHECK(spans[0] == EntitySpan{0, 0, 1, "TRANSIT", "w0"});
    CHECK(spans[1] == EntitySpan{0, 1, 2, "TRANSIT", "w1"});
    CHECK(spans[2] == EntitySpan{0, 2, 4, "TN:PARK", "w2 w3"});
}

TEST_CASE("decode after encode is the identity on random legal span lists") {
    std::mt19937_64 rng(123);
    const std::vector<std::string> labels = {"TRANSIT", "TN:PARK", "GEOG_ENTITY"};
    for (int trial = 0; trial < 500; ++trial) {
        const int n = 1 + static_cast<int>(rng() % 12);
        std::vector<EntitySpan> spans;
        int cursor = 0;
        while (cursor < n) {
            const int start = cursor + static_cast<int>(rng() % 3);
            if (start >= n) break;
            const int end = start + 1 + static_cast<int>(rng() % 3);
            if (end > n) break;
            spans.push_back({0, start, end, labels[rng() % labels.size()], ""});
            cursor = end;
        }
        const auto tags = atlas::chunking::encode_iob(spans, static_cast<size_t>(n));
        auto tokens = tokens_with_tags(tags);
        auto decoded = atlas::chunking::decode_iob(tokens, 0);
        REQUIRE(decoded.size() == spans.size());
        for (size_t i = 0; i < spans.size(); ++i) {
            CHECK(decoded[i].start == spans[i].start);
            CHECK(decoded[i].end == spans[i].end);
            CHECK(decoded[i].label == spans[i].label);
        }
    }
}

TEST_CASE("decode agrees with the exhaustive legal-chunking oracle") {
    // Every tag sequence over {O, B-A, I-A, B-B, I-B} for short sentences:
    // the decoded spans must be the unique legal span list whose encoding
    // equals the independently repaired sequence.
    const std::vector<std::string> tag_choices = {"O", "B-TRANSIT", "I-TRANSIT", "B-TN:PARK",
                                                  "I-TN:PARK"};
    const std::vector<std::string> labels = {"TRANSIT", "TN:PARK"};
    for (int n = 1; n <= 4; ++n) {
        std::vector<size_t> digits(static_cast<size_t>(n), 0);
        for (;;) {
            std::vector<std::string> tags;
            for (const auto d : digits) tags.push_back(tag_choices[d]);

            const auto repaired = repair_tags(tags);
            std::vector<EntitySpan> expected;
            int matches = 0;
            std::vector<EntitySpan> current;
            enumerate_span_lists(n, labels, 0, current, [&](const std::vector<EntitySpan>& spans) {
                if (atlas::chunking::encode_iob(spans, static_cast<size_t>(n)) == repaired) {
                    expected = spans;
                    ++matches;
                }
            });
            REQUIRE(matches == 1);

            const auto decoded = atlas::chunking::decode_iob(tokens_with_tags(tags), 0);
            REQUIRE(decoded.size() == expected.size());
            for (size_t i = 0; i < decoded.size(); ++i) {
                CHECK(decoded[i].start == expected[i].start);
                CHECK(decoded[i].end == expected[i].end);
                CHECK(decoded[i].label == expected[i].label);
            }

            size_t pos = 0;
            while (pos < digits.size() && ++digits[pos] == tag_choices.size()) {
                digits[pos] = 0;
                ++pos;
            }
            if (pos == digits.size()) break;
        }
    }
}

TEST_CASE("sentence graph merges span tokens and inherits external edges") {
    // "Walking distance to Central Park": the spatial entity covers tokens
    // 0-2, the park covers 3-4, and the park's head lies inside the entity.
    std::vector<Token> tokens = {
        {"Walking", 1, "compound", "B-SPAT_TEMP_ENT"},
        {"distance", atlas::corpus::kRootHead, "root", "I-SPAT_TEMP_ENT"},
        {"to", 1, "prep", "I-SPAT_TEMP_ENT"},
        {"Central", 4, "compound", "B-TN:PARK"},
        {"Park", 2, "pobj", "I-TN:PARK"},
    };
    const auto spans = atlas::chunking::decode_iob(tokens, 0);
    REQUIRE(spans.size() == 2);
    const SentenceGraph g = atlas::chunking::build_sentence_graph(tokens, spans);
    REQUIRE(g.nodes.size() == 2);
    CHECK(g.nodes[0].surface == "Walking distance to");
    CHECK(g.nodes[1].surface == "Central Park");
    REQUIRE(g.edges.size() == 1);
    CHECK(g.edges[0].from == 0);
    CHECK(g.edges[0].to == 1);
    CHECK(g.edges[0].deprel == "pobj");
}

TEST_CASE("single-token sentence yields one node and no edges") {
    std::vector<Token> tokens = {{"Hi", atlas::corpus::kRootHead, "root", "O"}};
    const auto g = atlas::chunking::build_sentence_graph(
        tokens, atlas::chunking::decode_iob(tokens, 0));
    CHECK(g.nodes.size() == 1);
    CHECK(g.edges.empty());
}

TEST_CASE("two span members headed by the same outside token dedup to one edge") {
    std::vector<Token> tokens = {
        {"near", atlas::corpus::kRootHead, "root", "O"},
        {"Hudson", 0, "amod", "B-TN:NAT_FEAT"},
        {"River", 0, "pobj", "I-TN:NAT_FEAT"},
    };
    const auto spans = atlas::chunking::decode_iob(tokens, 0);
    const auto g = atlas::chunking::build_sentence_graph(tokens, spans);
    REQUIRE(g.nodes.size() == 2);
    REQUIRE(g.edges.size() == 1);
    CHECK(g.edges[0].from == 0);
    CHECK(g.edges[0].to == 1);
    CHECK(g.edges[0].deprel == "amod");  // first member's relation wins
}

TEST_CASE("node ranges partition the sentence and trees keep few edges") {
    std::mt19937_64 rng(31337);
    const std::vector<std::string> tag_choices = {"O", "B-TRANSIT", "I-TRANSIT", "B-TN:PARK"};
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 1 + static_cast<int>(rng() % 10);
        std::vector<Token> tokens;
        for (int i = 0; i < n; ++i) {
            // Random tree: head of token i is some earlier token or ROOT.
            const int head = i == 0 ? atlas::corpus::kRootHead : static_cast<int>(rng() % i);
            tokens.push_back({"w" + std::to_string(i), head, "dep",
                              tag_choices[rng() % tag_choices.size()]});
        }
        const auto spans = atlas::chunking::decode_iob(tokens, 0);
        const auto g = atlas::chunking::build_sentence_graph(tokens, spans);

        int covered = 0;
        int prev_end = 0;
        for (const auto& node : g.nodes) {
            CHECK(node.start == prev_end);  // contiguous partition
            covered += node.end - node.start;
            prev_end = node.end;
        }
        CHECK(covered == n);
        CHECK(g.edges.size() <= static_cast<size_t>(n > 0 ? n - 1 : 0));
        for (const auto& e : g.edges) CHECK(e.from != e.to);
    }
}

TEST_CASE("dot export lists nodes and labeled edges") {
    std::vector<Token> tokens = {
        {"near", atlas::corpus::kRootHead, "root", "O"},
        {"Chelsea", 0, "pobj", "B-TN:NEIGHBORHOOD"},
    };
    const auto g = atlas::chunking::build_sentence_graph(
        tokens, atlas::chunking::decode_iob(tokens, 0));
    const std::string dot = atlas::chunking::to_dot(g);
    CHECK(dot.find("digraph") != std::string::npos);
    CHECK(dot.find("\"0:near\" -> \"1:Chelsea\" [label=\"pobj\"]") != std::string::npos);
}
