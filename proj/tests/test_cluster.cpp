#include "doctest.h"
#include "test_support.hpp"

#include "plsq/cluster.hpp"

#include <cmath>
#include <random>

using namespace plsq;
using namespace plsq::testing;

namespace {
SimilarityMatrix from_distances(const std::vector<std::vector<double>>& d) {
    SimilarityMatrix m(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        for (std::size_t j = i + 1; j < d.size(); ++j) m.set(i, j, 1.0 - d[i][j]);
    }
    return m;
}

double dist(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }
}  // namespace

TEST_CASE("similarity matrix of identical tables is all ones") {
    const auto db = film_db();
    const auto t = run("SELECT name FROM films", db);
    const auto m = similarity_matrix({t, t, t}, Comparator(ComparatorKind::table_jaccard));
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 3; ++j) CHECK(m(i, j) == 1.0);
    }
}

TEST_CASE("similarity matrix of three fixture tables") {
    const auto db = film_db();
    // a: names of 120-minute films {Alpha, Gamma}; b: all drama names
    // {Alpha, Gamma}; c: products.
    const auto a = run("SELECT name FROM films WHERE duration = 120", db);
    const auto b = run("SELECT name FROM films WHERE genre = 'drama'", db);
    const auto c = run("SELECT name FROM films WHERE duration > 100", db);  // Alpha, Gamma, Delta
    const auto m = similarity_matrix({a, b, c}, Comparator(ComparatorKind::table_jaccard));
    CHECK(m(0, 1) == doctest::Approx(1.0));
    CHECK(m(0, 2) == doctest::Approx(0.5 + 0.5 * (2.0 / 3.0)));
    CHECK(m(2, 1) == doctest::Approx(0.5 + 0.5 * (2.0 / 3.0)));
    const auto d = run("SELECT product FROM sales", db);
    const auto m2 = similarity_matrix({a, d}, Comparator(ComparatorKind::table_jaccard));
    CHECK(m2(0, 1) == 0.0);
}

TEST_CASE("all-ones matrix forms a single cluster") {
    SimilarityMatrix m(4);
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = i + 1; j < 4; ++j) m.set(i, j, 1.0);
    }
    const auto c = cluster(m, 0.3);
    CHECK(c.k == 1);
    CHECK(c.labels == std::vector<std::size_t>{0, 0, 0, 0});
}

TEST_CASE("separated blocks form two clusters") {
    const auto m = from_distances({{0, 1, 0, 1}, {1, 0, 1, 0}, {0, 1, 0, 1}, {1, 0, 1, 0}});
    const auto c = cluster(m, 0.3);
    CHECK(c.k == 2);
    CHECK(c.labels == std::vector<std::size_t>{0, 1, 0, 1});
    CHECK(cluster(m, 0.3) == c);
}

TEST_CASE("average linkage uses the mean pairwise distance") {
    // 0-1 at 0.2; 2 is 0.25 from 0 and 0.45 from 1, so the average link to
    // {0,1} is 0.35 and stays above a 0.3 cut.
    const auto m = from_distances({{0, 0.2, 0.25}, {0.2, 0, 0.45}, {0.25, 0.45, 0}});
    const auto c = cluster(m, 0.3);
    CHECK(c.k == 2);
    CHECK(c.labels == std::vector<std::size_t>{0, 0, 1});
    CHECK(cluster(m, 0.35).k == 1);
}

TEST_CASE("exact-k clustering and tie order") {
    // all off-diagonal distances equal: merges follow index order
    const auto m = from_distances({{0, .5, .5, .5}, {.5, 0, .5, .5}, {.5, .5, 0, .5}, {.5, .5, .5, 0}});
    CHECK(cluster_k(m, 3).labels == std::vector<std::size_t>{0, 0, 1, 2});
    CHECK(cluster_k(m, 1).k == 1);
    CHECK(cluster_k(m, 10).k == 4);
    CHECK(cluster(m, 0.3).k == 4);
}

TEST_CASE("labels are numbered by smallest member") {
    const auto m = from_distances({{0, 1, 1, 0}, {1, 0, 0, 1}, {1, 0, 0, 1}, {0, 1, 1, 0}});
    CHECK(cluster(m).labels == std::vector<std::size_t>{0, 1, 1, 0});
}

TEST_CASE("layout of one and two points") {
    CHECK(layout2d(SimilarityMatrix(1)) == std::vector<Point>{Point{0, 0}});
    SimilarityMatrix m(2);
    m.set(0, 1, 1.0 - 0.7);
    const auto p = layout2d(m);
    CHECK(std::abs(dist(p[0], p[1]) - 0.7) < 1e-9);
    CHECK(std::abs(p[0].x + p[1].x) < 1e-12);
    CHECK(p[0].x > 0);
}

TEST_CASE("layout reproduces a planar configuration") {
    const std::vector<Point> truth{{0, 0}, {0.3, 0}, {0.3, 0.4}, {0.05, 0.35}};
    std::vector<std::vector<double>> d(4, std::vector<double>(4));
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = 0; j < 4; ++j) d[i][j] = dist(truth[i], truth[j]);
    }
    const auto p = layout2d(from_distances(d));
    double num = 0, den = 0;
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = i + 1; j < 4; ++j) {
            const double e = dist(p[i], p[j]) - d[i][j];
            num += e * e;
            den += d[i][j] * d[i][j];
        }
    }
    CHECK(std::sqrt(num / den) < 0.05);
    CHECK(std::sqrt(num / den) < 1e-9);  // exactly embeddable: isometric
    double cx = 0, cy = 0;
    for (const auto& q : p) {
        cx += q.x;
        cy += q.y;
    }
    CHECK(std::abs(cx) < 1e-12);
    CHECK(std::abs(cy) < 1e-12);
}

TEST_CASE("property: equal outputs share a cluster and layout is reproducible") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 2 + rng() % 10;
        std::vector<ResultTable> tables;
        for (std::size_t i = 0; i < n; ++i) {
            ResultTable t{{"v"}, {}, false};
            const int rows = 1 + static_cast<int>(rng() % 3);
            for (int r = 0; r < rows; ++r) t.rows.push_back({Value(static_cast<std::int64_t>(rng() % 4))});
            tables.push_back(t);
        }
        const auto m = similarity_matrix(tables, Comparator(ComparatorKind::table_jaccard));
        for (double cut : {0.0, 0.1, 0.3, 0.6}) {
            const auto c = cluster(m, cut);
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = 0; j < n; ++j) {
                    if (functionally_equal(tables[i], tables[j])) CHECK(c.labels[i] == c.labels[j]);
                }
            }
            CHECK(cluster(m, cut) == c);
        }
        CHECK(layout2d(m) == layout2d(m));
    }
}
