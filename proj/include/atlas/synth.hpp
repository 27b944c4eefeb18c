#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

namespace atlas::synth {

// Shape of the generated city. A deterministic function of the seed: a grid
// of square neighborhoods, listings scattered inside them, one designated
// "wide-claim" neighborhood whose name is claimed from an area roughly three
// times its polygon, and one stable misspelling of each neighborhood name
// used by a fraction of its listings.
struct FixtureSpec {
    std::uint64_t seed = 7;
    int neighborhoods = 4;
    int listings = 200;
    double misspell_rate = 0.3;
};

struct FixtureResult {
    std::filesystem::path config;  // ready-to-run pipeline config
    int listings_written = 0;
    int gold_surfaces = 0;
};

// Writes corpus.jsonl, neighborhoods.geojson, tracts.csv, embeddings_a.txt,
// embeddings_b.txt, gold_resolution.csv, gold_spans.csv, and config.json
// into out_dir. Identical inputs produce byte-identical files.
FixtureResult generate_fixture(const FixtureSpec& spec, const std::filesystem::path& out_dir);

// The misspelled variant of a neighborhood name used by the fixture.
std::string misspell(const std::string& name);

}  // namespace atlas::synth
