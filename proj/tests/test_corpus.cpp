#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <doctest.h>

#include "atlas/corpus.hpp"
#include "atlas/error.hpp"
#include "atlas/io.hpp"

using atlas::InputError;
namespace fs = std::filesystem;
namespace corpus = atlas::corpus;

namespace {

fs::path temp_dir() {
    static int counter = 0;
    const fs::path dir =
        fs::temp_directory_path() / ("atlas_corpus_test_" + std::to_string(counter++));
    fs::create_directories(dir);
    return dir;
}

fs::path write_temp(const std::string& name, const std::string& content) {
    const fs::path path = temp_dir() / name;
    atlas::io::write_file_atomic(path, content);
    return path;
}

// Two disjoint unit squares and a small square nested inside the first.
std::string two_squares_geojson(bool with_nested = false, bool duplicate_name = false) {
    std::string nested;
    if (with_nested)
        nested = R"(,{"type":"Feature","properties":{"name":"Nested","borough":"B"},
          "geometry":{"type":"Polygon","coordinates":[[[0.4,0.4],[0.6,0.4],[0.6,0.6],[0.4,0.6],[0.4,0.4]]]}})";
    const std::string second_name = duplicate_name ? "Alpha" : "Beta";
    return std::string(R"({"type":"FeatureCollection","features":[
      {"type":"Feature","properties":{"name":"Alpha","borough":"B"},
       "geometry":{"type":"Polygon","coordinates":[[[0,0],[1,0],[1,1],[0,1],[0,0]]]}},
      {"type":"Feature","properties":{"name":")") +
           second_name + R"(","borough":"B"},
       "geometry":{"type":"Polygon","coordinates":[[[2,0],[3,0],[3,1],[2,1],[2,0]]]}})" + nested +
           "]}";
}

const std::string kListingLine =
    R"({"id":"a1","lon":-73.95,"lat":40.7,"sentences":[[
        {"text":"Cozy","head":1,"deprel":"amod","tag":"O"},
        {"text":"place","head":-1,"deprel":"root","tag":"O"},
        {"text":".","head":1,"deprel":"punct","tag":"O"}]]})";

}  // namespace

TEST_CASE("empty corpus parses to an empty list") {
    std::istringstream in("");
    CHECK(corpus::parse_corpus(in, "test").empty());
}

TEST_CASE("single listing with one sentence parses") {
    std::istringstream in(kListingLine + "\n");
    const auto listings = corpus::parse_corpus(in, "test");
    REQUIRE(listings.size() == 1);
    CHECK(listings[0].id == "a1");
    REQUIRE(listings[0].sentences.size() == 1);
    CHECK(listings[0].sentences[0].size() == 3);
    CHECK(listings[0].sentences[0][1].head == corpus::kRootHead);
}

TEST_CASE("the retired TN:OTHER label is rejected by name") {
    std::istringstream in(
        R"({"id":"a1","lon":0,"lat":0,"sentences":[[{"text":"x","head":-1,"deprel":"r","tag":"B-TN:OTHER"}]]})");
    try {
        corpus::parse_corpus(in, "test");
        FAIL("expected InputError");
    } catch (const InputError& e) {
        CHECK(std::string(e.what()).find("TN:OTHER") != std::string::npos);
        CHECK(std::string(e.what()).find("line 1") != std::string::npos);
    }
}

TEST_CASE("malformed rows report their line number") {
    std::istringstream in(kListingLine + "\n{not json}\n");
    try {
        corpus::parse_corpus(in, "test");
        FAIL("expected InputError");
    } catch (const InputError& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
}

TEST_CASE("duplicate ids, bad heads, and bad tags are rejected") {
    std::istringstream dup(kListingLine + "\n" + kListingLine + "\n");
    CHECK_THROWS_AS(corpus::parse_corpus(dup, "test"), InputError);

    std::istringstream self_head(
        R"({"id":"a","lon":0,"lat":0,"sentences":[[{"text":"x","head":0,"deprel":"r","tag":"O"}]]})");
    CHECK_THROWS_AS(corpus::parse_corpus(self_head, "test"), InputError);

    std::istringstream big_head(
        R"({"id":"a","lon":0,"lat":0,"sentences":[[{"text":"x","head":5,"deprel":"r","tag":"O"}]]})");
    CHECK_THROWS_AS(corpus::parse_corpus(big_head, "test"), InputError);

    std::istringstream bad_tag(
        R"({"id":"a","lon":0,"lat":0,"sentences":[[{"text":"x","head":-1,"deprel":"r","tag":"B-tn:park"}]]})");
    CHECK_THROWS_AS(corpus::parse_corpus(bad_tag, "test"), InputError);

    std::istringstream bad_lon(
        R"({"id":"a","lon":-200,"lat":0,"sentences":[]})");
    CHECK_THROWS_AS(corpus::parse_corpus(bad_lon, "test"), InputError);
}

TEST_CASE("tag validation accepts the 20 active labels and rejects others") {
    for (const auto label : corpus::active_labels()) {
        CHECK_FALSE(corpus::validate_tag("B-" + std::string(label)).has_value());
        CHECK_FALSE(corpus::validate_tag("I-" + std::string(label)).has_value());
    }
    CHECK(corpus::active_labels().size() == 20);
    CHECK_FALSE(corpus::validate_tag("O").has_value());
    CHECK(corpus::validate_tag("B-TN:OTHER").has_value());
    CHECK(corpus::validate_tag("B-WHATEVER").has_value());
    CHECK(corpus::validate_tag("X-TRANSIT").has_value());
    CHECK(corpus::validate_tag("").has_value());
}

TEST_CASE("parse-serialize-parse round-trips the model") {
    const std::string two =
        kListingLine + "\n" +
        R"({"id":"a0","lon":-73.001,"lat":40.5,"sentences":[[
            {"text":"Near","head":-1,"deprel":"root","tag":"O"},
            {"text":"Chelsea","head":0,"deprel":"pobj","tag":"B-TN:NEIGHBORHOOD"}]]})" + "\n";
    std::istringstream in(two);
    const auto first = corpus::parse_corpus(in, "test");
    REQUIRE(first.size() == 2);
    CHECK(first[0].id == "a0");  // sorted by id

    const std::string serialized = corpus::serialize_corpus(first);
    std::istringstream again(serialized);
    const auto second = corpus::parse_corpus(again, "test");
    CHECK(first == second);
}

TEST_CASE("neighborhood loader validates rings and names") {
    const auto ok = corpus::load_neighborhoods(write_temp("ok.geojson", two_squares_geojson()));
    REQUIRE(ok.size() == 2);
    CHECK(ok[0].name == "Alpha");
    CHECK(ok[1].name == "Beta");
    CHECK(ok[0].area_deg2 == doctest::Approx(1.0));

    CHECK_THROWS_AS(
        corpus::load_neighborhoods(write_temp("dup.geojson", two_squares_geojson(false, true))),
        InputError);

    const std::string open_ring = R"({"type":"FeatureCollection","features":[
      {"type":"Feature","properties":{"name":"A","borough":"B"},
       "geometry":{"type":"Polygon","coordinates":[[[0,0],[1,0],[1,1],[0,1]]]}}]})";
    CHECK_THROWS_AS(corpus::load_neighborhoods(write_temp("open.geojson", open_ring)), InputError);

    const std::string bowtie = R"({"type":"FeatureCollection","features":[
      {"type":"Feature","properties":{"name":"A","borough":"B"},
       "geometry":{"type":"Polygon","coordinates":[[[0,0],[1,1],[1,0],[0,1],[0,0]]]}}]})";
    CHECK_THROWS_AS(corpus::load_neighborhoods(write_temp("bowtie.geojson", bowtie)), InputError);
}

TEST_CASE("assignment picks the containing polygon, smallest on ties") {
    const auto polys =
        corpus::load_neighborhoods(write_temp("nested.geojson", two_squares_geojson(true)));
    REQUIRE(polys.size() == 3);

    CHECK(corpus::assign_neighborhood(0.2, 0.2, polys) == "Alpha");
    CHECK(corpus::assign_neighborhood(0.5, 0.5, polys) == "Nested");  // inside both
    CHECK(corpus::assign_neighborhood(2.5, 0.5, polys) == "Beta");
    CHECK_FALSE(corpus::assign_neighborhood(5.0, 5.0, polys).has_value());

    // Permutation invariance.
    std::vector<corpus::Neighborhood> shuffled(polys.begin(), polys.end());
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 6; ++trial) {
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        CHECK(corpus::assign_neighborhood(0.5, 0.5, shuffled) == "Nested");
        CHECK(corpus::assign_neighborhood(0.2, 0.2, shuffled) == "Alpha");
    }
}

TEST_CASE("assigned plus unassigned counts add up") {
    const auto polys = corpus::load_neighborhoods(write_temp("two.geojson", two_squares_geojson()));
    std::vector<corpus::Listing> listings;
    std::mt19937_64 rng(10);
    for (int i = 0; i < 60; ++i) {
        corpus::Listing l;
        l.id = "l" + std::to_string(i);
        l.lon = static_cast<double>(rng() % 400) / 100.0;
        l.lat = static_cast<double>(rng() % 200) / 100.0;
        listings.push_back(l);
    }
    corpus::assign_neighborhoods(listings, polys);
    size_t assigned = 0, unassigned = 0;
    for (const auto& l : listings) l.neighborhood ? ++assigned : ++unassigned;
    CHECK(assigned + unassigned == listings.size());
}

TEST_CASE("gentrification joins tracts by centroid with smallest-area ties") {
    const auto polys =
        corpus::load_neighborhoods(write_temp("g.geojson", two_squares_geojson(true)));

    const auto result = corpus::load_gentrification(
        write_temp("t.csv",
                   "tract_id,lon,lat,index\n"
                   "t1,0.2,0.2,1.0\n"
                   "t2,0.25,0.25,3.0\n"
                   "t3,0.5,0.5,7.0\n"   // inside Alpha and Nested; Nested is smaller
                   "t4,9.0,9.0,5.0\n"), // outside everything
        polys);
    CHECK(result.mean_index.at("Alpha") == doctest::Approx(2.0));
    CHECK(result.mean_index.at("Nested") == doctest::Approx(7.0));
    CHECK(result.mean_index.count("Beta") == 0);
    CHECK(result.skipped_tracts == 1);

    CHECK_THROWS_AS(
        corpus::load_gentrification(write_temp("bad.csv", "t1,0.2,0.2,not_a_number\n"), polys),
        InputError);
}

TEST_CASE("tract exactly on a shared boundary joins the smaller polygon") {
    // Two squares sharing the edge x=1; a third small square also touching it.
    const std::string geojson = R"({"type":"FeatureCollection","features":[
      {"type":"Feature","properties":{"name":"Left","borough":"B"},
       "geometry":{"type":"Polygon","coordinates":[[[0,0],[1,0],[1,1],[0,1],[0,0]]]}},
      {"type":"Feature","properties":{"name":"Small","borough":"B"},
       "geometry":{"type":"Polygon","coordinates":[[[1,0.4],[1.2,0.4],[1.2,0.6],[1,0.6],[1,0.4]]]}}]})";
    const auto polys = corpus::load_neighborhoods(write_temp("shared.geojson", geojson));
    const auto result = corpus::load_gentrification(
        write_temp("shared.csv", "tract_id,lon,lat,index\nt1,1.0,0.5,4.0\n"), polys);
    CHECK(result.mean_index.count("Small") == 1);  // boundary point, smaller area wins
    CHECK(result.mean_index.count("Left") == 0);
}

TEST_CASE("embedding loader handles headers, lookup normalization, duplicates") {
    const auto table = corpus::load_embeddings(
        write_temp("emb.txt", "2 3\nspanish_harlem 0.1 0.2 0.3\nchelsea 1 0 0\n"));
    CHECK(table.size() == 2);
    CHECK(table.dimension() == 3);
    REQUIRE(table.find("Spanish Harlem") != nullptr);
    CHECK((*table.find("Spanish Harlem"))[2] == doctest::Approx(0.3f));

    const auto dup = corpus::load_embeddings(
        write_temp("dup.txt", "a 1 0\nb 0 1\na 0.5 0.5\n"));
    CHECK(dup.size() == 2);
    CHECK(dup.duplicate_keys() == 1);
    CHECK((*dup.find_key("a"))[0] == doctest::Approx(0.5f));

    try {
        corpus::load_embeddings(write_temp("ragged.txt", "a 1 0 0\nbad_key 1 0\n"));
        FAIL("expected InputError");
    } catch (const InputError& e) {
        CHECK(std::string(e.what()).find("bad_key") != std::string::npos);
    }
}

TEST_CASE("embedding loader treats a two-column first row as data when not numeric") {
    const auto table = corpus::load_embeddings(write_temp("nohdr.txt", "word 7\nother 9\n"));
    CHECK(table.size() == 2);
    CHECK(table.dimension() == 1);
}
