#include "atlas/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "atlas/error.hpp"

namespace atlas::geo {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

std::span<const Point> strip_closing_vertex(std::span<const Point> ring) {
    if (ring.size() >= 2 && ring.front() == ring.back()) return ring.subspan(0, ring.size() - 1);
    return ring;
}

double signed_area(std::span<const Point> ring) {
    double acc = 0.0;
    const size_t n = ring.size();
    for (size_t i = 0; i < n; ++i) {
        const Point& a = ring[i];
        const Point& b = ring[(i + 1) % n];
        acc += a.x * b.y - b.x * a.y;
    }
    return 0.5 * acc;
}

bool on_segment(Point p, Point a, Point b) {
    const double cr = cross(a, b, p);
    const double scale = std::max({std::abs(a.x), std::abs(a.y), std::abs(b.x),
                                   std::abs(b.y), std::abs(p.x), std::abs(p.y), 1.0});
    if (std::abs(cr) > 1e-12 * scale * scale) return false;
    return p.x >= std::min(a.x, b.x) - 1e-12 && p.x <= std::max(a.x, b.x) + 1e-12 &&
           p.y >= std::min(a.y, b.y) - 1e-12 && p.y <= std::max(a.y, b.y) + 1e-12;
}

// Proper intersection of open segments (shared endpoints excluded).
bool segments_properly_intersect(Point a, Point b, Point c, Point d) {
    const double d1 = cross(c, d, a);
    const double d2 = cross(c, d, b);
    const double d3 = cross(a, b, c);
    const double d4 = cross(a, b, d);
    return ((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) &&
           ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0));
}

}  // namespace

Projection::Projection(LonLat origin, double radius_km)
    : origin_(origin), radius_km_(radius_km), cos_lat0_(std::cos(origin.lat * kDegToRad)) {}

Point Projection::to_planar(LonLat p) const {
    return {radius_km_ * cos_lat0_ * (p.lon - origin_.lon) * kDegToRad,
            radius_km_ * (p.lat - origin_.lat) * kDegToRad};
}

LonLat Projection::to_lonlat(Point p) const {
    return {origin_.lon + p.x / (radius_km_ * cos_lat0_) / kDegToRad,
            origin_.lat + p.y / radius_km_ / kDegToRad};
}

double cross(Point o, Point a, Point b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

Hull convex_hull(std::span<const Point> points) {
    std::vector<Point> pts(points.begin(), points.end());
    std::sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) {
        return a.x != b.x ? a.x < b.x : a.y < b.y;
    });
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (pts.size() < 3) throw Error("convex hull needs at least three distinct points");

    std::vector<Point> hull;
    hull.reserve(2 * pts.size());
    // Lower chain, then upper; strict turns drop points interior to an edge.
    for (const Point& p : pts) {
        while (hull.size() >= 2 && cross(hull[hull.size() - 2], hull.back(), p) <= 0)
            hull.pop_back();
        hull.push_back(p);
    }
    const size_t lower = hull.size() + 1;
    for (auto it = pts.rbegin() + 1; it != pts.rend(); ++it) {
        while (hull.size() >= lower && cross(hull[hull.size() - 2], hull.back(), *it) <= 0)
            hull.pop_back();
        hull.push_back(*it);
    }
    hull.pop_back();
    if (hull.size() < 3) throw Error("convex hull degenerate: input points are collinear");

    Hull out;
    out.vertices = std::move(hull);
    out.area = signed_area(out.vertices);
    return out;
}

bool ring_self_intersects(std::span<const Point> ring_in) {
    const auto ring = strip_closing_vertex(ring_in);
    const size_t n = ring.size();
    if (n < 4) return false;  // a triangle cannot properly self-intersect
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = i + 1; j < n; ++j) {
            // Skip adjacent edges (they share an endpoint).
            if (j == i + 1 || (i == 0 && j == n - 1)) continue;
            if (segments_properly_intersect(ring[i], ring[(i + 1) % n],
                                            ring[j], ring[(j + 1) % n]))
                return true;
        }
    }
    return false;
}

double polygon_area(std::span<const Point> ring_in) {
    const auto ring = strip_closing_vertex(ring_in);
    if (ring.size() < 3) throw Error("polygon area needs at least three vertices");
    if (ring_self_intersects(ring)) throw Error("self-intersecting ring");
    return std::abs(signed_area(ring));
}

Point polygon_centroid(std::span<const Point> ring_in) {
    const auto ring = strip_closing_vertex(ring_in);
    if (ring.size() < 3) throw Error("polygon centroid needs at least three vertices");
    const double a = signed_area(ring);
    if (a == 0.0) throw Error("polygon centroid undefined for zero-area ring");
    double cx = 0.0, cy = 0.0;
    const size_t n = ring.size();
    for (size_t i = 0; i < n; ++i) {
        const Point& p = ring[i];
        const Point& q = ring[(i + 1) % n];
        const double w = p.x * q.y - q.x * p.y;
        cx += (p.x + q.x) * w;
        cy += (p.y + q.y) * w;
    }
    return {cx / (6.0 * a), cy / (6.0 * a)};
}

bool point_in_ring(Point p, std::span<const Point> ring_in) {
    const auto ring = strip_closing_vertex(ring_in);
    const size_t n = ring.size();
    if (n < 3) return false;
    for (size_t i = 0; i < n; ++i)
        if (on_segment(p, ring[i], ring[(i + 1) % n])) return true;
    bool inside = false;
    for (size_t i = 0; i < n; ++i) {
        const Point& a = ring[i];
        const Point& b = ring[(i + 1) % n];
        if ((a.y > p.y) != (b.y > p.y)) {
            const double x_int = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if (x_int > p.x) inside = !inside;
        }
    }
    return inside;
}

bool point_in_polygon(Point p, std::span<const std::vector<Point>> rings) {
    int winds = 0;
    for (const auto& ring : rings) {
        const auto open_ring = strip_closing_vertex(ring);
        const size_t n = open_ring.size();
        for (size_t i = 0; i < n; ++i)
            if (on_segment(p, open_ring[i], open_ring[(i + 1) % n])) return true;
        if (point_in_ring(p, ring)) ++winds;
    }
    return winds % 2 == 1;
}

std::vector<double> kde_scores(std::span<const Point> points, double bandwidth) {
    if (bandwidth <= 0.0) throw Error("kde bandwidth must be positive");
    const size_t n = points.size();
    const double inv_2h2 = 1.0 / (2.0 * bandwidth * bandwidth);
    const double norm = 1.0 / (static_cast<double>(n) * 2.0 * std::numbers::pi *
                               bandwidth * bandwidth);
    std::vector<double> scores(n, 0.0);
    for (size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (size_t j = 0; j < n; ++j) {
            const double dx = points[i].x - points[j].x;
            const double dy = points[i].y - points[j].y;
            acc += std::exp(-(dx * dx + dy * dy) * inv_2h2);
        }
        scores[i] = acc * norm;
    }
    return scores;
}

std::vector<Point> kde_filter(std::span<const Point> points, double bandwidth, double z) {
    if (points.empty()) return {};
    const auto scores = kde_scores(points, bandwidth);
    const size_t n = scores.size();
    double mean = 0.0;
    for (const double s : scores) mean += s;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (const double s : scores) var += (s - mean) * (s - mean);
    var /= static_cast<double>(n);
    const double stdev = std::sqrt(var);
    std::vector<Point> kept;
    kept.reserve(n);
    if (stdev == 0.0) {
        kept.assign(points.begin(), points.end());
        return kept;
    }
    const double threshold = mean - z * stdev;
    for (size_t i = 0; i < n; ++i)
        if (scores[i] >= threshold) kept.push_back(points[i]);
    return kept;
}

std::vector<Point> mahalanobis_filter(std::span<const Point> points, double z) {
    const size_t n = points.size();
    std::vector<Point> kept(points.begin(), points.end());
    if (n < 3) return kept;

    double mx = 0.0, my = 0.0;
    for (const Point& p : points) {
        mx += p.x;
        my += p.y;
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);

    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (const Point& p : points) {
        const double dx = p.x - mx;
        const double dy = p.y - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    const double denom = static_cast<double>(n - 1);
    sxx /= denom;
    syy /= denom;
    sxy /= denom;

    const double det = sxx * syy - sxy * sxy;
    const double scale = std::max(sxx * syy, 1e-300);
    if (det <= 1e-12 * scale) return kept;  // singular covariance keeps all

    kept.clear();
    for (const Point& p : points) {
        const double dx = p.x - mx;
        const double dy = p.y - my;
        const double d2 = (syy * dx * dx - 2.0 * sxy * dx * dy + sxx * dy * dy) / det;
        if (std::sqrt(std::max(d2, 0.0)) <= z) kept.push_back(p);
    }
    return kept;
}

double pearson(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) throw Error("pearson: series lengths differ");
    const size_t n = xs.size();
    if (n < 2) throw Error("pearson: need at least two pairs");
    double mx = 0.0, my = 0.0;
    for (size_t i = 0; i < n; ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double dx = xs[i] - mx;
        const double dy = ys[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) throw Error("pearson: correlation undefined for constant series");
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace atlas::geo
