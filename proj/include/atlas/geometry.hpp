#pragma once

#include <span>
#include <vector>

namespace atlas::geo {

inline constexpr double kEarthRadiusKm = 6371.0088;

struct Point {
    double x = 0.0;
    double y = 0.0;
    bool operator==(const Point&) const = default;
};

struct LonLat {
    double lon = 0.0;
    double lat = 0.0;
    bool operator==(const LonLat&) const = default;
};

// Equirectangular projection anchored at an origin; x and y are kilometers.
// Adequate at city scale, and linear, so centroids and hulls commute with it.
class Projection {
public:
    Projection() = default;
    Projection(LonLat origin, double radius_km = kEarthRadiusKm);

    Point to_planar(LonLat p) const;
    LonLat to_lonlat(Point p) const;
    LonLat origin() const { return origin_; }

private:
    LonLat origin_{};
    double radius_km_ = kEarthRadiusKm;
    double cos_lat0_ = 1.0;
};

struct Hull {
    std::vector<Point> vertices;  // counter-clockwise, no repeated last vertex
    double area = 0.0;
};

// cross(o, a, b) > 0 when a->b turns left around o.
double cross(Point o, Point a, Point b);

// Monotone chain. Throws Error on fewer than three distinct points or on
// collinear input. Hull vertices are extreme points only: points interior
// to a hull edge are excluded.
Hull convex_hull(std::span<const Point> points);

// Absolute shoelace area of a simple ring. The ring may or may not repeat
// its first vertex at the end. Throws Error when the ring self-intersects.
double polygon_area(std::span<const Point> ring);

// Signed-area centroid of a simple ring.
Point polygon_centroid(std::span<const Point> ring);

// True when non-adjacent edges properly intersect (ring given open or closed).
bool ring_self_intersects(std::span<const Point> ring);

// Even-odd rule over one or more rings; boundary points count as inside.
bool point_in_polygon(Point p, std::span<const std::vector<Point>> rings);
bool point_in_ring(Point p, std::span<const Point> ring);

// Gaussian-kernel density scores, one per point, bandwidth h:
//   score(p) = sum_q exp(-|p-q|^2 / (2 h^2)) / (n * 2*pi*h^2)
std::vector<double> kde_scores(std::span<const Point> points, double bandwidth);

// Keeps points whose density score is >= mean - z * std of the score
// distribution (population std). Zero std keeps everything.
std::vector<Point> kde_filter(std::span<const Point> points, double bandwidth, double z);

// Keeps points whose Mahalanobis distance from the sample mean (sample
// covariance) is <= z. Singular covariance, or fewer than three points,
// keeps everything.
std::vector<Point> mahalanobis_filter(std::span<const Point> points, double z);

// Sample Pearson product-moment correlation. Throws Error on mismatched
// lengths, fewer than two pairs, or a constant series.
double pearson(std::span<const double> xs, std::span<const double> ys);

}  // namespace atlas::geo
