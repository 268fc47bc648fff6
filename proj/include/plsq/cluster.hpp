#pragma once

#include "plsq/similarity.hpp"

#include <cstddef>
#include <vector>

namespace plsq {

/// Symmetric n×n similarity matrix with unit diagonal, stored row-major.
class SimilarityMatrix {
public:
    SimilarityMatrix() = default;
    explicit SimilarityMatrix(std::size_t n);  // identity

    [[nodiscard]] std::size_t size() const noexcept { return n_; }
    [[nodiscard]] double operator()(std::size_t i, std::size_t j) const { return entries_[i * n_ + j]; }
    /// Sets (i, j) and (j, i).
    void set(std::size_t i, std::size_t j, double value);

    /// Rows and columns restricted to `indices`, in that order.
    [[nodiscard]] SimilarityMatrix submatrix(const std::vector<std::size_t>& indices) const;

    friend bool operator==(const SimilarityMatrix&, const SimilarityMatrix&) = default;

private:
    std::size_t n_{0};
    std::vector<double> entries_;
};

SimilarityMatrix similarity_matrix(const std::vector<ResultTable>& tables, const Comparator& comparator);

struct ClusterAssignment {
    std::vector<std::size_t> labels;  // one per row of the matrix
    std::size_t k{0};

    friend bool operator==(const ClusterAssignment&, const ClusterAssignment&) = default;
};

inline constexpr double default_cluster_cut = 0.3;

/// Average-linkage agglomerative clustering on distance 1 - S. Merges while
/// the closest pair of clusters is within `cut`. Equal distances merge the
/// pair with the lowest (smallest member, smallest member) indices first.
/// Labels are numbered by each cluster's smallest member.
ClusterAssignment cluster(const SimilarityMatrix& matrix, double cut = default_cluster_cut);

/// Same merge order, stopped when exactly min(k, n) clusters remain.
ClusterAssignment cluster_k(const SimilarityMatrix& matrix, std::size_t k);

struct Point {
    double x{0.0};
    double y{0.0};
    friend bool operator==(const Point&, const Point&) = default;
};

/// Classical multidimensional scaling of distance 1 - S onto two axes.
/// Centered at the origin; the first nonzero loading of each axis is
/// positive.
std::vector<Point> layout2d(const SimilarityMatrix& matrix);

}  // namespace plsq
