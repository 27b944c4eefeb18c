#pragma once

#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "atlas/geometry.hpp"

namespace atlas::corpus {

// Sentinel head index for the syntactic root.
inline constexpr int kRootHead = -1;

// One token of a parsed, tagged sentence.
struct Token {
    std::string text;
    int head = kRootHead;  // index of syntactic head within the sentence, or kRootHead
    std::string deprel;
    std::string tag;  // IOB2 tag, e.g. "B-TN:NEIGHBORHOOD", "I-SPAT_TEMP_ENT", "O"
    bool operator==(const Token&) const = default;
};

struct Listing {
    std::string id;
    double lon = 0.0;
    double lat = 0.0;
    std::vector<std::vector<Token>> sentences;
    std::optional<std::string> neighborhood;  // canonical assignment, filled by assign_neighborhoods
    bool operator==(const Listing&) const = default;
};

struct Neighborhood {
    std::string name;     // canonical, unique
    std::string borough;
    std::vector<std::vector<geo::Point>> rings;  // x = lon, y = lat, open rings
    double area_deg2 = 0.0;  // cached, used for the smallest-polygon tie-break
};

struct TractRecord {
    std::string tract_id;
    double lon = 0.0;
    double lat = 0.0;
    double index_value = 0.0;
};

class EmbeddingTable {
public:
    int dimension() const { return dim_; }
    size_t size() const { return vectors_.size(); }
    size_t duplicate_keys() const { return duplicates_; }

    // Lookup normalizes the query: lowercased, punctuation stripped, spaces
    // to underscores. Returns nullptr when absent.
    const std::vector<float>* find(std::string_view surface) const;
    const std::vector<float>* find_key(const std::string& key) const;

    void insert(std::string key, std::vector<float> vec);
    std::vector<std::string> keys_sorted() const;

private:
    int dim_ = 0;
    size_t duplicates_ = 0;
    std::unordered_map<std::string, std::vector<float>> vectors_;
};

// Tunables shared across the pipeline. Defaults follow the toolkit's
// reference configuration.
struct Config {
    int n_centroids = 20;       // candidate canonical centroids per surface
    int k_embed = 100;          // embedding nearest-neighbor cut
    int m_jw = 100;             // Jaro-Winkler nearest-neighbor cut
    double kde_bandwidth = 1.0; // in the units of the coordinates being filtered
    double outlier_z = 2.0;
    int min_hull_points = 3;
    int graph_min_degree = 10;
    double earth_radius_km = geo::kEarthRadiusKm;
};

// The 20 entity labels accepted in token tags (the schema's 21 minus the
// retired TN:OTHER).
std::span<const std::string_view> active_labels();
bool is_active_label(std::string_view label);

// Validates an IOB2 tag; returns the offending detail on failure.
std::optional<std::string> validate_tag(std::string_view tag);

// JSON-lines corpus. One listing per line:
//   {"id":str,"lon":num,"lat":num,"sentences":[[{"text","head","deprel","tag"},...],...]}
// Returns listings sorted by id. Throws InputError with the line number on
// malformed rows, duplicate ids, or unknown tag labels.
std::vector<Listing> parse_corpus(std::istream& in, const std::string& source_name);
std::vector<Listing> parse_corpus_file(const std::filesystem::path& path);
std::string serialize_corpus(std::span<const Listing> listings);

// GeoJSON FeatureCollection of Polygon/MultiPolygon features with `name`
// and `borough` properties. Validates closed, simple, nonzero-area rings
// and unique names. Returned sorted by name.
std::vector<Neighborhood> load_neighborhoods(const std::filesystem::path& path);

struct GentrificationResult {
    std::map<std::string, double> mean_index;  // canonical name -> mean tract index
    size_t skipped_tracts = 0;                 // centroids outside every polygon
};

// CSV `tract_id,lon,lat,index` (optional header). Each tract joins the
// neighborhood containing its centroid; containment ties go to the
// smallest-area polygon.
GentrificationResult load_gentrification(const std::filesystem::path& path,
                                         std::span<const Neighborhood> neighborhoods);

// Whitespace-delimited text vectors: `key v1 ... vd` rows with an optional
// `count dim` header. Duplicate keys keep the last occurrence.
EmbeddingTable load_embeddings(const std::filesystem::path& path);

// Name of the smallest-area polygon containing the point, if any.
std::optional<std::string> assign_neighborhood(double lon, double lat,
                                               std::span<const Neighborhood> neighborhoods);
void assign_neighborhoods(std::vector<Listing>& listings,
                          std::span<const Neighborhood> neighborhoods);

// Mean of all listing coordinates; the projection origin for the corpus.
geo::LonLat mean_coordinate(std::span<const Listing> listings);

}  // namespace atlas::corpus
