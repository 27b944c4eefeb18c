#include "atlas/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <random>
#include <vector>

#include <json.hpp>

#include "atlas/chunking.hpp"
#include "atlas/corpus.hpp"
#include "atlas/csv.hpp"
#include "atlas/error.hpp"
#include "atlas/io.hpp"
#include "atlas/pipeline.hpp"
#include "atlas/text.hpp"

namespace atlas::synth {

namespace fs = std::filesystem;
using corpus::Token;

namespace {

constexpr std::array<const char*, 8> kNamePool = {
    "Ashford", "East Bellmore", "Crowhill", "Dunmore",
    "Glen Harbor", "Fennwick", "Midvale", "Southport",
};

constexpr double kOriginLon = -74.02;
constexpr double kOriginLat = 40.70;
constexpr double kSquareDeg = 0.02;  // neighborhood square side

double rand01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double round6(double v) {
    return std::round(v * 1e6) / 1e6;
}

std::string listing_id(int n) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "L%05d", n);
    return buf;
}

std::string neighborhood_name(int i) {
    if (i < static_cast<int>(kNamePool.size())) return kNamePool[static_cast<size_t>(i)];
    return "Ward " + std::to_string(i + 1);
}

std::vector<std::string> name_tokens(const std::string& name) {
    return text::split_ws(name);
}

Token tok(std::string text, int head, std::string deprel, std::string tag) {
    return {std::move(text), head, std::move(deprel), std::move(tag)};
}

void append_name_tokens(std::vector<Token>& tokens, const std::vector<std::string>& words,
                        int attach_head, const std::string& label) {
    const int first = static_cast<int>(tokens.size());
    for (size_t w = 0; w < words.size(); ++w) {
        if (w == 0) tokens.push_back(tok(words[w], attach_head, "pobj", "B-" + label));
        else tokens.push_back(tok(words[w], first, "compound", "I-" + label));
    }
}

// "Cozy apartment located in {name} ." with a membership spatial entity.
std::vector<Token> claim_sentence(const std::string& name) {
    std::vector<Token> t;
    t.push_back(tok("Cozy", 1, "amod", "O"));
    t.push_back(tok("apartment", corpus::kRootHead, "root", "O"));
    t.push_back(tok("located", 1, "acl", "B-SPAT_TEMP_ENT"));
    t.push_back(tok("in", 2, "prep", "I-SPAT_TEMP_ENT"));
    append_name_tokens(t, name_tokens(name), 3, "TN:NEIGHBORHOOD");
    t.push_back(tok(".", 1, "punct", "O"));
    return t;
}

// "Just 5 minutes from {name} ." with a non-membership spatial entity.
std::vector<Token> proximity_sentence(const std::string& name) {
    std::vector<Token> t;
    t.push_back(tok("Just", 2, "advmod", "O"));
    t.push_back(tok("5", 2, "nummod", "B-SPAT_TEMP_ENT"));
    t.push_back(tok("minutes", corpus::kRootHead, "root", "I-SPAT_TEMP_ENT"));
    t.push_back(tok("from", 2, "prep", "I-SPAT_TEMP_ENT"));
    append_name_tokens(t, name_tokens(name), 3, "TN:NEIGHBORHOOD");
    t.push_back(tok(".", 2, "punct", "O"));
    return t;
}

// "Steps to Juniper Park ." exercising a non-neighborhood toponym.
std::vector<Token> park_sentence() {
    std::vector<Token> t;
    t.push_back(tok("Steps", corpus::kRootHead, "root", "B-SPAT_TEMP_ENT"));
    t.push_back(tok("to", 0, "prep", "I-SPAT_TEMP_ENT"));
    t.push_back(tok("Juniper", 3, "compound", "B-TN:PARK"));
    t.push_back(tok("Park", 1, "pobj", "I-TN:PARK"));
    t.push_back(tok(".", 0, "punct", "O"));
    return t;
}

std::vector<float> unit_with_noise(int dim, int hot, std::mt19937_64& rng) {
    std::vector<float> v(static_cast<size_t>(dim), 0.0f);
    v[static_cast<size_t>(hot)] = 1.0f;
    for (auto& c : v) c += static_cast<float>(0.05 * (rand01(rng) - 0.5));
    return v;
}

std::string embedding_file(int n_neighborhoods, const std::vector<std::string>& keys,
                           const std::vector<std::vector<float>>& vectors) {
    std::string out = std::to_string(keys.size()) + " " +
                      std::to_string(vectors.front().size()) + "\n";
    for (size_t i = 0; i < keys.size(); ++i) {
        out += keys[i];
        for (const float c : vectors[i]) {
            out += ' ';
            out += io::format_double(round6(static_cast<double>(c)));
        }
        out += '\n';
    }
    (void)n_neighborhoods;
    return out;
}

}  // namespace

std::string misspell(const std::string& name) {
    auto words = name_tokens(name);
    size_t longest = 0;
    for (size_t i = 1; i < words.size(); ++i)
        if (words[i].size() > words[longest].size()) longest = i;
    std::string& w = words[longest];
    if (w.size() >= 4 && w[1] != w[2]) {
        std::swap(w[1], w[2]);
    } else if (w.size() >= 5 && w[2] != w[3]) {
        std::swap(w[2], w[3]);
    } else {
        w.pop_back();
    }
    return text::join(words, " ");
}

FixtureResult generate_fixture(const FixtureSpec& spec, const fs::path& out_dir) {
    if (spec.neighborhoods < 2) throw InputError("fixture needs at least two neighborhoods");
    if (spec.listings < spec.neighborhoods) throw InputError("fixture needs listings >= neighborhoods");
    if (spec.misspell_rate < 0.0 || spec.misspell_rate > 1.0)
        throw InputError("misspell rate must be within [0, 1]");
    fs::create_directories(out_dir);

    const int n = spec.neighborhoods;
    const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));

    struct Square {
        std::string name;
        double lon0, lat0;  // lower-left corner
    };
    std::vector<Square> squares;
    for (int i = 0; i < n; ++i) {
        squares.push_back({neighborhood_name(i), kOriginLon + (i % cols) * kSquareDeg,
                           kOriginLat + (i / cols) * kSquareDeg});
    }

    // neighborhoods.geojson
    {
        nlohmann::ordered_json doc;
        doc["type"] = "FeatureCollection";
        auto features = nlohmann::ordered_json::array();
        for (const auto& sq : squares) {
            nlohmann::ordered_json f;
            f["type"] = "Feature";
            f["properties"] = {{"name", sq.name}, {"borough", "Synthville"}};
            const double x0 = sq.lon0, y0 = sq.lat0;
            const double x1 = sq.lon0 + kSquareDeg, y1 = sq.lat0 + kSquareDeg;
            f["geometry"] = {
                {"type", "Polygon"},
                {"coordinates", nlohmann::ordered_json::array({nlohmann::ordered_json::array(
                                    {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}, {x0, y0}})})},
            };
            features.push_back(std::move(f));
        }
        doc["features"] = std::move(features);
        io::write_file_atomic(out_dir / "neighborhoods.geojson", doc.dump(2) + "\n");
    }

    // tracts.csv: two interior tracts per neighborhood with a fixed index.
    {
        std::string out = "tract_id,lon,lat,index\n";
        for (int i = 0; i < n; ++i) {
            const auto& sq = squares[static_cast<size_t>(i)];
            const double base = 1.0 + 0.6 * i;
            out += csv::row({"T" + std::to_string(i) + "_0",
                             io::format_double(round6(sq.lon0 + 0.3 * kSquareDeg)),
                             io::format_double(round6(sq.lat0 + 0.3 * kSquareDeg)),
                             io::format_double(base)});
            out += csv::row({"T" + std::to_string(i) + "_1",
                             io::format_double(round6(sq.lon0 + 0.7 * kSquareDeg)),
                             io::format_double(round6(sq.lat0 + 0.6 * kSquareDeg)),
                             io::format_double(base + 0.2)});
        }
        io::write_file_atomic(out_dir / "tracts.csv", out);
    }

    // Listings: an even split across neighborhoods plus a final "wide-claim"
    // group that claims the first neighborhood from a box of roughly three
    // times its area.
    std::mt19937_64 rng(spec.seed);
    const int wide_count = spec.listings / 5;
    const int local_total = spec.listings - wide_count;
    std::vector<int> local_counts(static_cast<size_t>(n), local_total / n);
    for (int i = 0; i < local_total % n; ++i) ++local_counts[static_cast<size_t>(i)];

    std::vector<corpus::Listing> listings;
    std::map<std::string, std::string> gold;  // normalized misspelling -> canonical
    int next_id = 0;
    for (int i = 0; i < n; ++i) {
        const auto& sq = squares[static_cast<size_t>(i)];
        const std::string bad_name = misspell(sq.name);
        int n_miss = static_cast<int>(spec.misspell_rate * local_counts[static_cast<size_t>(i)]);
        if (n_miss < 3) n_miss = 0;  // too few mentions to ever form a hull
        if (n_miss > 0) gold[text::normalize_surface(bad_name)] = sq.name;
        for (int j = 0; j < local_counts[static_cast<size_t>(i)]; ++j) {
            corpus::Listing l;
            l.id = listing_id(next_id++);
            l.lon = round6(sq.lon0 + (0.1 + 0.8 * rand01(rng)) * kSquareDeg);
            l.lat = round6(sq.lat0 + (0.1 + 0.8 * rand01(rng)) * kSquareDeg);
            l.sentences.push_back(claim_sentence(j < n_miss ? bad_name : sq.name));
            if (j % 2 == 0)
                l.sentences.push_back(proximity_sentence(squares[static_cast<size_t>((i + 1) % n)].name));
            if (j % 3 == 0) l.sentences.push_back(park_sentence());
            listings.push_back(std::move(l));
        }
    }
    {
        const auto& sq = squares.front();
        const double cx = sq.lon0 + kSquareDeg / 2.0;
        const double cy = sq.lat0 + kSquareDeg / 2.0;
        const double half = kSquareDeg * std::sqrt(3.0) / 2.0;  // box area = 3 squares
        for (int j = 0; j < wide_count; ++j) {
            corpus::Listing l;
            l.id = listing_id(next_id++);
            l.lon = round6(cx + (2.0 * rand01(rng) - 1.0) * half);
            l.lat = round6(cy + (2.0 * rand01(rng) - 1.0) * half);
            l.sentences.push_back(claim_sentence(sq.name));
            listings.push_back(std::move(l));
        }
    }
    io::write_file_atomic(out_dir / "corpus.jsonl", corpus::serialize_corpus(listings));

    // gold_spans.csv mirrors the generated tags exactly.
    {
        std::string out = "listing_id,sentence,start,end,label\n";
        for (const auto& l : listings)
            for (int s = 0; s < static_cast<int>(l.sentences.size()); ++s)
                for (const auto& span : chunking::decode_iob(l.sentences[s], s))
                    out += csv::row({l.id, std::to_string(s), std::to_string(span.start),
                                     std::to_string(span.end), span.label});
        io::write_file_atomic(out_dir / "gold_spans.csv", out);
    }

    // gold_resolution.csv
    {
        std::string out = "surface,canonical\n";
        for (const auto& [surface, canonical] : gold) out += csv::row({surface, canonical});
        io::write_file_atomic(out_dir / "gold_resolution.csv", out);
    }

    // Embedding tables: a hot dimension per neighborhood; each misspelling
    // sits next to its canonical name, fillers live on the spare dimensions.
    {
        const int dim = n + 10;
        const std::vector<std::string> fillers = {"apartment", "cozy", "located", "minutes",
                                                  "steps",     "juniper", "park",  "subway",
                                                  "cafe",      "sunny"};
        for (const char table : {'a', 'b'}) {
            std::mt19937_64 vec_rng(spec.seed ^ (table == 'a' ? 0x5eedull : 0xfeedull));
            std::vector<std::string> keys;
            std::vector<std::vector<float>> vectors;
            for (int i = 0; i < n; ++i) {
                keys.push_back(text::embed_key(squares[static_cast<size_t>(i)].name));
                vectors.push_back(unit_with_noise(dim, i, vec_rng));
            }
            for (int i = 0; i < n; ++i) {
                keys.push_back(text::embed_key(misspell(squares[static_cast<size_t>(i)].name)));
                auto v = vectors[static_cast<size_t>(i)];
                for (auto& c : v) c += static_cast<float>(0.02 * (rand01(vec_rng) - 0.5));
                vectors.push_back(std::move(v));
            }
            for (size_t f = 0; f < fillers.size(); ++f) {
                keys.push_back(fillers[f]);
                vectors.push_back(unit_with_noise(dim, n + static_cast<int>(f % 10), vec_rng));
            }
            io::write_file_atomic(out_dir / (std::string("embeddings_") + table + ".txt"),
                                  embedding_file(n, keys, vectors));
        }
    }

    // config.json with relative input paths, ready for `atlas run`.
    pipeline::PipelineConfig cfg;
    cfg.inputs.corpus = "corpus.jsonl";
    cfg.inputs.neighborhoods = "neighborhoods.geojson";
    cfg.inputs.tracts = "tracts.csv";
    cfg.inputs.embeddings_a = "embeddings_a.txt";
    cfg.inputs.embeddings_b = "embeddings_b.txt";
    cfg.params.config.n_centroids = std::min(20, n);
    cfg.params.config.graph_min_degree = 1;  // the fixture city is small
    io::write_file_atomic(out_dir / "config.json", pipeline::pipeline_config_to_json(cfg));

    FixtureResult result;
    result.config = out_dir / "config.json";
    result.listings_written = next_id;
    result.gold_surfaces = static_cast<int>(gold.size());
    return result;
}

}  // namespace atlas::synth
