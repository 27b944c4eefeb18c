#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <vector>

#include <doctest.h>

#include "atlas/error.hpp"
#include "atlas/geometry.hpp"

using atlas::Error;
using atlas::geo::Hull;
using atlas::geo::LonLat;
using atlas::geo::Point;
using atlas::geo::Projection;

namespace {

double rand01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::vector<Point> random_points(std::mt19937_64& rng, size_t n) {
    std::vector<Point> pts(n);
    for (auto& p : pts) p = {rand01(rng), rand01(rng)};
    return pts;
}

// O(n^3) hull oracle: an ordered pair (a, b) is a hull edge when every other
// point lies strictly to its left; hull vertices are the edge endpoints.
std::set<std::pair<double, double>> brute_force_hull_vertices(const std::vector<Point>& pts) {
    std::set<std::pair<double, double>> vertices;
    const size_t n = pts.size();
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            bool all_left = true;
            for (size_t k = 0; k < n; ++k) {
                if (k == i || k == j) continue;
                if (atlas::geo::cross(pts[i], pts[j], pts[k]) <= 0) {
                    all_left = false;
                    break;
                }
            }
            if (all_left) {
                vertices.insert({pts[i].x, pts[i].y});
                vertices.insert({pts[j].x, pts[j].y});
            }
        }
    }
    return vertices;
}

double fan_triangulation_area(const std::vector<Point>& ring) {
    double area = 0.0;
    for (size_t i = 1; i + 1 < ring.size(); ++i)
        area += atlas::geo::cross(ring[0], ring[i], ring[i + 1]) / 2.0;
    return std::abs(area);
}

}  // namespace

TEST_CASE("projection maps origin to zero and degrees to kilometers") {
    const Projection proj(LonLat{-74.0, 40.72});
    const Point origin = proj.to_planar({-74.0, 40.72});
    CHECK(origin.x == doctest::Approx(0.0));
    CHECK(origin.y == doctest::Approx(0.0));

    const Point north = proj.to_planar({-74.0, 40.73});
    CHECK(north.y == doctest::Approx(1.1119).epsilon(1e-4));
    const Point east = proj.to_planar({-73.99, 40.72});
    CHECK(east.x == doctest::Approx(0.8428).epsilon(2e-4));

    const LonLat back = proj.to_lonlat(east);
    CHECK(back.lon == doctest::Approx(-73.99).epsilon(1e-12));
    CHECK(back.lat == doctest::Approx(40.72).epsilon(1e-12));
}

TEST_CASE("one planar kilometer squared stays within 1% at city latitude") {
    const Projection proj(LonLat{-74.0, 40.72});
    // Build a 1 km x 1 km square in lon/lat via the inverse projection.
    const std::vector<LonLat> corners = {
        proj.to_lonlat({0.0, 0.0}),
        proj.to_lonlat({1.0, 0.0}),
        proj.to_lonlat({1.0, 1.0}),
        proj.to_lonlat({0.0, 1.0}),
    };
    std::vector<Point> planar;
    for (const auto& c : corners) planar.push_back(proj.to_planar(c));
    CHECK(atlas::geo::polygon_area(planar) == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("convex hull of square corners plus center is the corners") {
    const std::vector<Point> pts = {{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0.5, 0.5}};
    const Hull hull = atlas::geo::convex_hull(pts);
    CHECK(hull.vertices.size() == 4);
    CHECK(hull.area == doctest::Approx(1.0));
    for (const auto& p : pts) CHECK(atlas::geo::point_in_ring(p, hull.vertices));
}

TEST_CASE("convex hull rejects degenerate input") {
    CHECK_THROWS_AS(atlas::geo::convex_hull(std::vector<Point>{{0, 0}, {1, 1}}), Error);
    CHECK_THROWS_AS(atlas::geo::convex_hull(std::vector<Point>{{0, 0}, {1, 1}, {2, 2}}), Error);
    CHECK_THROWS_AS(atlas::geo::convex_hull(std::vector<Point>{{0, 0}, {0, 0}, {0, 0}, {0, 0}}),
                    Error);
}

TEST_CASE("convex hull matches the brute-force oracle on random sets") {
    std::mt19937_64 rng(20240811);
    for (int trial = 0; trial < 50; ++trial) {
        const auto pts = random_points(rng, 3 + static_cast<size_t>(rand01(rng) * 57));
        const Hull hull = atlas::geo::convex_hull(pts);
        std::set<std::pair<double, double>> got;
        for (const auto& v : hull.vertices) got.insert({v.x, v.y});
        CHECK(got == brute_force_hull_vertices(pts));
        // CCW orientation and containment of every input point.
        CHECK(hull.area > 0.0);
        for (const auto& p : pts) CHECK(atlas::geo::point_in_ring(p, hull.vertices));
    }
}

TEST_CASE("hull is invariant under permutation and translation, quadratic under scale") {
    std::mt19937_64 rng(77);
    auto pts = random_points(rng, 40);
    const Hull base = atlas::geo::convex_hull(pts);

    std::shuffle(pts.begin(), pts.end(), rng);
    const Hull shuffled = atlas::geo::convex_hull(pts);
    CHECK(base.area == doctest::Approx(shuffled.area).epsilon(1e-12));
    CHECK(base.vertices.size() == shuffled.vertices.size());

    std::vector<Point> moved, scaled;
    for (const auto& p : pts) {
        moved.push_back({p.x + 3.5, p.y - 2.25});
        scaled.push_back({p.x * 3.0, p.y * 3.0});
    }
    CHECK(atlas::geo::convex_hull(moved).area == doctest::Approx(base.area).epsilon(1e-9));
    CHECK(atlas::geo::convex_hull(scaled).area == doctest::Approx(base.area * 9.0).epsilon(1e-9));
}

TEST_CASE("polygon area on knowns and against the fan triangulation oracle") {
    const std::vector<Point> square = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    CHECK(atlas::geo::polygon_area(square) == doctest::Approx(1.0));
    const std::vector<Point> closed_square = {{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0, 0}};
    CHECK(atlas::geo::polygon_area(closed_square) == doctest::Approx(1.0));

    const std::vector<Point> triangle = {{0, 0}, {2, 0}, {0, 2}};
    CHECK(atlas::geo::polygon_area(triangle) == doctest::Approx(2.0));

    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 30; ++trial) {
        const auto hull = atlas::geo::convex_hull(random_points(rng, 25));
        const double oracle = fan_triangulation_area(hull.vertices);
        CHECK(atlas::geo::polygon_area(hull.vertices) ==
              doctest::Approx(oracle).epsilon(1e-9));
    }
}

TEST_CASE("self-intersecting rings are rejected") {
    const std::vector<Point> bowtie = {{0, 0}, {1, 1}, {1, 0}, {0, 1}};
    CHECK(atlas::geo::ring_self_intersects(bowtie));
    CHECK_THROWS_AS(atlas::geo::polygon_area(bowtie), Error);
    const std::vector<Point> square = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    CHECK_FALSE(atlas::geo::ring_self_intersects(square));
}

TEST_CASE("point in polygon includes the boundary") {
    const std::vector<std::vector<Point>> rings = {{{0, 0}, {1, 0}, {1, 1}, {0, 1}}};
    CHECK(atlas::geo::point_in_polygon({0.5, 0.5}, rings));
    CHECK(atlas::geo::point_in_polygon({0, 0}, rings));      // vertex
    CHECK(atlas::geo::point_in_polygon({0.5, 0}, rings));    // edge
    CHECK_FALSE(atlas::geo::point_in_polygon({2, 2}, rings));
    CHECK_FALSE(atlas::geo::point_in_polygon({-0.5, 0.5}, rings));
}

TEST_CASE("kde filter keeps identical points and drops a distant outlier") {
    std::vector<Point> same(100, Point{2.0, 3.0});
    CHECK(atlas::geo::kde_filter(same, 1.0, 2.0).size() == 100);

    std::mt19937_64 rng(5);
    std::vector<Point> pts;
    for (int i = 0; i < 100; ++i) pts.push_back({rand01(rng) * 0.1, rand01(rng) * 0.1});
    pts.push_back({50.0, 50.0});  // 50 bandwidths away at h=1
    const auto kept = atlas::geo::kde_filter(pts, 1.0, 2.0);
    CHECK(kept.size() == 100);
    for (const auto& p : kept) CHECK(p.x < 1.0);

    CHECK(atlas::geo::kde_filter(pts, 1.0, 1e6).size() == pts.size());
}

TEST_CASE("kde filter matches a direct-formula oracle") {
    std::mt19937_64 rng(40);
    for (int trial = 0; trial < 25; ++trial) {
        std::vector<Point> pts;
        const size_t n = 2 + static_cast<size_t>(rand01(rng) * 30);
        for (size_t i = 0; i < n; ++i) pts.push_back({rand01(rng) * 4, rand01(rng) * 4});
        const double h = 0.2 + rand01(rng);
        const double z = rand01(rng) * 3;

        // Direct reimplementation of the scoring rule.
        std::vector<double> scores(n, 0.0);
        for (size_t i = 0; i < n; ++i)
            for (size_t j = 0; j < n; ++j) {
                const double dx = pts[i].x - pts[j].x, dy = pts[i].y - pts[j].y;
                scores[i] += std::exp(-(dx * dx + dy * dy) / (2 * h * h));
            }
        for (auto& s : scores) s /= static_cast<double>(n) * 2.0 * std::acos(-1.0) * h * h;
        double mean = 0.0;
        for (const double s : scores) mean += s;
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (const double s : scores) var += (s - mean) * (s - mean);
        const double stdev = std::sqrt(var / static_cast<double>(n));
        std::vector<Point> expected;
        for (size_t i = 0; i < n; ++i)
            if (stdev == 0.0 || scores[i] >= mean - z * stdev) expected.push_back(pts[i]);

        CHECK(atlas::geo::kde_filter(pts, h, z) == expected);
    }
}

TEST_CASE("mahalanobis filter handles degenerate and outlier cases") {
    std::vector<Point> line;
    for (int i = 0; i < 10; ++i) line.push_back({static_cast<double>(i), 2.0 * i});
    CHECK(atlas::geo::mahalanobis_filter(line, 2.0).size() == line.size());

    // Symmetric cross: unit sample variance on each axis, zero covariance,
    // plus one point at 5 sigma.
    std::vector<Point> pts = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    const size_t n_base = pts.size();
    pts.push_back({0, 0});
    pts.push_back({40.0, 0.0});
    const auto kept = atlas::geo::mahalanobis_filter(pts, 2.0);
    CHECK(kept.size() < pts.size());
    for (const auto& p : kept) CHECK(p.x < 40.0);
    CHECK(kept.size() >= n_base);

    CHECK(atlas::geo::mahalanobis_filter(pts, 1e18).size() == pts.size());
}

TEST_CASE("mahalanobis filter matches a direct-formula oracle") {
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 25; ++trial) {
        std::vector<Point> pts;
        const size_t n = 3 + static_cast<size_t>(rand01(rng) * 30);
        for (size_t i = 0; i < n; ++i) pts.push_back({rand01(rng) * 4, rand01(rng) * 2});
        const double z = rand01(rng) * 3;

        double mx = 0, my = 0;
        for (const auto& p : pts) {
            mx += p.x;
            my += p.y;
        }
        mx /= static_cast<double>(n);
        my /= static_cast<double>(n);
        double sxx = 0, syy = 0, sxy = 0;
        for (const auto& p : pts) {
            sxx += (p.x - mx) * (p.x - mx);
            syy += (p.y - my) * (p.y - my);
            sxy += (p.x - mx) * (p.y - my);
        }
        sxx /= static_cast<double>(n - 1);
        syy /= static_cast<double>(n - 1);
        sxy /= static_cast<double>(n - 1);
        const double det = sxx * syy - sxy * sxy;
        std::vector<Point> expected;
        if (det <= 1e-12 * std::max(sxx * syy, 1e-300)) {
            expected = pts;
        } else {
            for (const auto& p : pts) {
                const double dx = p.x - mx, dy = p.y - my;
                const double d2 = (syy * dx * dx - 2 * sxy * dx * dy + sxx * dy * dy) / det;
                if (std::sqrt(d2) <= z) expected.push_back(p);
            }
        }
        CHECK(atlas::geo::mahalanobis_filter(pts, z) == expected);
    }
}

TEST_CASE("filters are monotone in z") {
    std::mt19937_64 rng(42);
    const auto pts = random_points(rng, 30);
    auto contains_all = [](const std::vector<Point>& big, const std::vector<Point>& small) {
        for (const auto& p : small)
            if (std::count(big.begin(), big.end(), p) < std::count(small.begin(), small.end(), p))
                return false;
        return true;
    };
    for (double z = 0.25; z < 4.0; z += 0.25) {
        CHECK(contains_all(atlas::geo::kde_filter(pts, 0.3, z + 0.25),
                           atlas::geo::kde_filter(pts, 0.3, z)));
        CHECK(contains_all(atlas::geo::mahalanobis_filter(pts, z + 0.25),
                           atlas::geo::mahalanobis_filter(pts, z)));
    }
}

TEST_CASE("pearson on hand-computed and affine cases") {
    const std::vector<double> xs = {1, 2, 3};
    const std::vector<double> ys = {2, 1, 4};
    CHECK(atlas::geo::pearson(xs, ys) == doctest::Approx(0.6547).epsilon(1e-4));

    const std::vector<double> lin = {2 * 1 + 1, 2 * 2 + 1, 2 * 3 + 1};
    CHECK(atlas::geo::pearson(xs, lin) == doctest::Approx(1.0).epsilon(1e-12));
    const std::vector<double> neg = {-1, -2, -3};
    CHECK(atlas::geo::pearson(xs, neg) == doctest::Approx(-1.0).epsilon(1e-12));

    const std::vector<double> flat = {5, 5, 5};
    CHECK_THROWS_AS(atlas::geo::pearson(xs, flat), Error);
    CHECK_THROWS_AS(atlas::geo::pearson(std::vector<double>{1}, std::vector<double>{2}), Error);
    CHECK_THROWS_AS(atlas::geo::pearson(xs, std::vector<double>{1, 2}), Error);
}

TEST_CASE("pearson is invariant under positive affine transforms") {
    std::mt19937_64 rng(314);
    for (int trial = 0; trial < 50; ++trial) {
        const size_t n = 3 + static_cast<size_t>(rand01(rng) * 20);
        std::vector<double> xs(n), ys(n);
        for (size_t i = 0; i < n; ++i) {
            xs[i] = rand01(rng) * 10;
            ys[i] = rand01(rng) * 10;
        }
        const double r = atlas::geo::pearson(xs, ys);
        std::vector<double> xt(n), yt(n);
        const double a = 0.5 + rand01(rng) * 4, b = rand01(rng) * 7 - 3;
        const double c = 0.5 + rand01(rng) * 2, d = rand01(rng) * 5;
        for (size_t i = 0; i < n; ++i) {
            xt[i] = a * xs[i] + b;
            yt[i] = c * ys[i] + d;
        }
        CHECK(atlas::geo::pearson(xt, yt) == doctest::Approx(r).epsilon(1e-12));
        for (auto& v : yt) v = -v;
        CHECK(atlas::geo::pearson(xt, yt) == doctest::Approx(-r).epsilon(1e-12));
    }
}
