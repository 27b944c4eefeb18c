#include "atlas/corpus.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "atlas/csv.hpp"
#include "atlas/error.hpp"
#include "atlas/io.hpp"
#include "atlas/text.hpp"

namespace atlas::corpus {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

constexpr std::array<std::string_view, 20> kActiveLabels = {
    "GEOG_ENTITY",
    "HOST_BUILDING",
    "SPAT_TEMP_ENT",
    "TN:AIRPORT",
    "TN:BEACH",
    "TN:BOROUGH",
    "TN:BRIDGE_TUNNEL",
    "TN:BUSINESS",
    "TN:CITY",
    "TN:HOSPITAL",
    "TN:NAT_FEAT",
    "TN:NEIGHBORHOOD",
    "TN:PARK",
    "TN:REGION",
    "TN:SCHOOL",
    "TN:STATION",
    "TN:STREET",
    "TN:TOURIST_ATTR",
    "TRANSIT",
    "WALK_RUN_BIKE",
};

bool parse_double(std::string_view s, double& out) {
    const std::string buf(text::trim(s));
    if (buf.empty()) return false;
    char* end = nullptr;
    out = std::strtod(buf.c_str(), &end);
    return end == buf.c_str() + buf.size() && std::isfinite(out);
}

Token token_from_json(const json& j, size_t sentence_len) {
    if (!j.is_object()) throw InputError("token is not an object");
    Token t;
    t.text = j.at("text").get<std::string>();
    t.head = j.at("head").get<int>();
    t.deprel = j.value("deprel", std::string{});
    t.tag = j.at("tag").get<std::string>();
    if (t.head != kRootHead &&
        (t.head < 0 || t.head >= static_cast<int>(sentence_len)))
        throw InputError("token head " + std::to_string(t.head) + " out of range");
    if (auto bad = validate_tag(t.tag)) throw InputError(*bad);
    return t;
}

Listing listing_from_json(const json& j) {
    Listing l;
    l.id = j.at("id").get<std::string>();
    l.lon = j.at("lon").get<double>();
    l.lat = j.at("lat").get<double>();
    if (l.lon < -180.0 || l.lon > 180.0 || l.lat < -90.0 || l.lat > 90.0)
        throw InputError("coordinates out of range for listing " + l.id);
    for (const auto& sent : j.at("sentences")) {
        std::vector<Token> tokens;
        const size_t len = sent.size();
        int idx = 0;
        for (const auto& tj : sent) {
            Token t = token_from_json(tj, len);
            if (t.head == idx)
                throw InputError("token " + std::to_string(idx) + " is its own head");
            tokens.push_back(std::move(t));
            ++idx;
        }
        l.sentences.push_back(std::move(tokens));
    }
    return l;
}

std::vector<geo::Point> ring_from_json(const json& coords, const std::string& feature_name) {
    if (!coords.is_array() || coords.size() < 4)
        throw InputError("ring of '" + feature_name + "' has fewer than four positions");
    std::vector<geo::Point> ring;
    ring.reserve(coords.size());
    for (const auto& pos : coords) {
        if (!pos.is_array() || pos.size() < 2)
            throw InputError("bad position in '" + feature_name + "'");
        ring.push_back({pos[0].get<double>(), pos[1].get<double>()});
    }
    if (!(ring.front() == ring.back()))
        throw InputError("open ring in '" + feature_name + "' (first vertex != last)");
    ring.pop_back();
    if (geo::ring_self_intersects(ring))
        throw InputError("self-intersecting ring in '" + feature_name + "'");
    return ring;
}

}  // namespace

std::span<const std::string_view> active_labels() {
    return kActiveLabels;
}

bool is_active_label(std::string_view label) {
    return std::find(kActiveLabels.begin(), kActiveLabels.end(), label) != kActiveLabels.end();
}

std::optional<std::string> validate_tag(std::string_view tag) {
    if (tag == "O") return std::nullopt;
    if (tag.size() < 3 || (tag[0] != 'B' && tag[0] != 'I') || tag[1] != '-')
        return "malformed tag '" + std::string(tag) + "'";
    const std::string_view label = tag.substr(2);
    for (const char c : label)
        if (!(std::isupper(static_cast<unsigned char>(c)) || c == '_' || c == ':'))
            return "malformed tag '" + std::string(tag) + "'";
    if (!is_active_label(label))
        return "unknown entity label '" + std::string(label) + "'";
    return std::nullopt;
}

const std::vector<float>* EmbeddingTable::find(std::string_view surface) const {
    return find_key(text::embed_key(surface));
}

const std::vector<float>* EmbeddingTable::find_key(const std::string& key) const {
    auto it = vectors_.find(key);
    return it == vectors_.end() ? nullptr : &it->second;
}

void EmbeddingTable::insert(std::string key, std::vector<float> vec) {
    if (dim_ == 0) dim_ = static_cast<int>(vec.size());
    auto [it, inserted] = vectors_.insert_or_assign(std::move(key), std::move(vec));
    if (!inserted) ++duplicates_;
}

std::vector<std::string> EmbeddingTable::keys_sorted() const {
    std::vector<std::string> keys;
    keys.reserve(vectors_.size());
    for (const auto& [k, _] : vectors_) keys.push_back(k);
    std::sort(keys.begin(), keys.end());
    return keys;
}

std::vector<Listing> parse_corpus(std::istream& in, const std::string& source_name) {
    std::vector<Listing> listings;
    std::set<std::string> seen_ids;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        try {
            const json j = json::parse(line);
            Listing l = listing_from_json(j);
            if (!seen_ids.insert(l.id).second)
                throw InputError("duplicate listing id '" + l.id + "'");
            listings.push_back(std::move(l));
        } catch (const InputError& e) {
            throw InputError(source_name + " line " + std::to_string(line_no) + ": " + e.what());
        } catch (const json::exception& e) {
            throw InputError(source_name + " line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    std::sort(listings.begin(), listings.end(),
              [](const Listing& a, const Listing& b) { return a.id < b.id; });
    return listings;
}

std::vector<Listing> parse_corpus_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open corpus file: " + path.string());
    return parse_corpus(in, path.filename().string());
}

std::string serialize_corpus(std::span<const Listing> listings) {
    std::string out;
    for (const Listing& l : listings) {
        ordered_json j;
        j["id"] = l.id;
        j["lon"] = l.lon;
        j["lat"] = l.lat;
        ordered_json sentences = ordered_json::array();
        for (const auto& sent : l.sentences) {
            ordered_json sj = ordered_json::array();
            for (const Token& t : sent) {
                ordered_json tj;
                tj["text"] = t.text;
                tj["head"] = t.head;
                tj["deprel"] = t.deprel;
                tj["tag"] = t.tag;
                sj.push_back(std::move(tj));
            }
            sentences.push_back(std::move(sj));
        }
        j["sentences"] = std::move(sentences);
        out += j.dump();
        out += '\n';
    }
    return out;
}

std::vector<Neighborhood> load_neighborhoods(const std::filesystem::path& path) {
    json doc;
    try {
        doc = json::parse(io::read_file(path));
    } catch (const json::exception& e) {
        throw InputError(path.string() + ": " + e.what());
    }
    if (!doc.is_object() || doc.value("type", "") != "FeatureCollection")
        throw InputError(path.string() + ": expected a FeatureCollection");

    std::vector<Neighborhood> out;
    std::set<std::string> names;
    for (const auto& feature : doc.at("features")) {
        Neighborhood n;
        const auto& props = feature.at("properties");
        n.name = props.at("name").get<std::string>();
        n.borough = props.value("borough", std::string{});
        if (!names.insert(n.name).second)
            throw InputError(path.string() + ": duplicate neighborhood name '" + n.name + "'");

        const auto& geom = feature.at("geometry");
        const std::string type = geom.value("type", "");
        const auto& coords = geom.at("coordinates");
        if (type == "Polygon") {
            for (const auto& ring : coords) n.rings.push_back(ring_from_json(ring, n.name));
        } else if (type == "MultiPolygon") {
            for (const auto& poly : coords)
                for (const auto& ring : poly) n.rings.push_back(ring_from_json(ring, n.name));
        } else {
            throw InputError(path.string() + ": feature '" + n.name +
                             "' has unsupported geometry type '" + type + "'");
        }
        if (n.rings.empty())
            throw InputError(path.string() + ": feature '" + n.name + "' has no rings");
        double area = 0.0;
        for (const auto& ring : n.rings) area += geo::polygon_area(ring);
        if (area <= 0.0)
            throw InputError(path.string() + ": feature '" + n.name + "' has zero area");
        n.area_deg2 = area;
        out.push_back(std::move(n));
    }
    std::sort(out.begin(), out.end(),
              [](const Neighborhood& a, const Neighborhood& b) { return a.name < b.name; });
    return out;
}

GentrificationResult load_gentrification(const std::filesystem::path& path,
                                         std::span<const Neighborhood> neighborhoods) {
    const auto rows = csv::parse(io::read_file(path));
    GentrificationResult result;
    std::map<std::string, std::pair<double, size_t>> sums;
    size_t row_no = 0;
    for (const auto& row : rows) {
        ++row_no;
        if (row_no == 1 && !row.empty() && text::to_lower(row[0]) == "tract_id") continue;
        if (row.size() != 4)
            throw InputError(path.string() + " row " + std::to_string(row_no) +
                             ": expected 4 fields, got " + std::to_string(row.size()));
        TractRecord t;
        t.tract_id = row[0];
        if (!parse_double(row[1], t.lon) || !parse_double(row[2], t.lat))
            throw InputError(path.string() + " row " + std::to_string(row_no) +
                             ": bad coordinates for tract '" + t.tract_id + "'");
        if (!parse_double(row[3], t.index_value))
            throw InputError(path.string() + " row " + std::to_string(row_no) +
                             ": non-numeric index for tract '" + t.tract_id + "'");
        const auto name = assign_neighborhood(t.lon, t.lat, neighborhoods);
        if (!name) {
            ++result.skipped_tracts;
            continue;
        }
        auto& [sum, count] = sums[*name];
        sum += t.index_value;
        ++count;
    }
    for (const auto& [name, sc] : sums)
        result.mean_index[name] = sc.first / static_cast<double>(sc.second);
    return result;
}

EmbeddingTable load_embeddings(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open embeddings file: " + path.string());
    EmbeddingTable table;
    std::string line;
    bool first_content_line = true;
    while (std::getline(in, line)) {
        const auto fields = text::split_ws(line);
        if (fields.empty()) continue;
        if (first_content_line && fields.size() == 2) {
            // Optional "count dim" header.
            int c = 0, d = 0;
            const auto r1 = std::from_chars(fields[0].data(), fields[0].data() + fields[0].size(), c);
            const auto r2 = std::from_chars(fields[1].data(), fields[1].data() + fields[1].size(), d);
            if (r1.ec == std::errc{} && r2.ec == std::errc{} &&
                r1.ptr == fields[0].data() + fields[0].size() &&
                r2.ptr == fields[1].data() + fields[1].size()) {
                first_content_line = false;
                continue;
            }
        }
        first_content_line = false;
        std::vector<float> vec;
        vec.reserve(fields.size() - 1);
        for (size_t i = 1; i < fields.size(); ++i) {
            double v = 0.0;
            if (!parse_double(fields[i], v))
                throw InputError(path.string() + ": non-numeric value in row for '" + fields[0] + "'");
            vec.push_back(static_cast<float>(v));
        }
        if (vec.empty())
            throw InputError(path.string() + ": row for '" + fields[0] + "' has no values");
        if (table.dimension() != 0 && static_cast<int>(vec.size()) != table.dimension())
            throw InputError(path.string() + ": row for '" + fields[0] + "' has " +
                             std::to_string(vec.size()) + " values, expected " +
                             std::to_string(table.dimension()));
        table.insert(text::to_lower(fields[0]), std::move(vec));
    }
    return table;
}

std::optional<std::string> assign_neighborhood(double lon, double lat,
                                               std::span<const Neighborhood> neighborhoods) {
    const Neighborhood* best = nullptr;
    for (const Neighborhood& n : neighborhoods) {
        if (!geo::point_in_polygon({lon, lat}, n.rings)) continue;
        if (!best || n.area_deg2 < best->area_deg2 ||
            (n.area_deg2 == best->area_deg2 && n.name < best->name))
            best = &n;
    }
    if (!best) return std::nullopt;
    return best->name;
}

void assign_neighborhoods(std::vector<Listing>& listings,
                          std::span<const Neighborhood> neighborhoods) {
    for (Listing& l : listings)
        l.neighborhood = assign_neighborhood(l.lon, l.lat, neighborhoods);
}

geo::LonLat mean_coordinate(std::span<const Listing> listings) {
    if (listings.empty()) return {0.0, 0.0};
    double lon = 0.0, lat = 0.0;
    for (const Listing& l : listings) {
        lon += l.lon;
        lat += l.lat;
    }
    const double n = static_cast<double>(listings.size());
    return {lon / n, lat / n};
}

}  // namespace atlas::corpus
