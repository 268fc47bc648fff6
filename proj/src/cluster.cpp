#include "plsq/cluster.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace plsq {

SimilarityMatrix::SimilarityMatrix(std::size_t n) : n_(n), entries_(n * n, 0.0) {
    for (std::size_t i = 0; i < n; ++i) entries_[i * n + i] = 1.0;
}

void SimilarityMatrix::set(std::size_t i, std::size_t j, double value) {
    entries_[i * n_ + j] = value;
    entries_[j * n_ + i] = value;
}

SimilarityMatrix SimilarityMatrix::submatrix(const std::vector<std::size_t>& indices) const {
    SimilarityMatrix out(indices.size());
    for (std::size_t a = 0; a < indices.size(); ++a) {
        for (std::size_t b = a + 1; b < indices.size(); ++b) out.set(a, b, (*this)(indices[a], indices[b]));
    }
    return out;
}

SimilarityMatrix similarity_matrix(const std::vector<ResultTable>& tables, const Comparator& comparator) {
    SimilarityMatrix m(tables.size());
    for (std::size_t i = 0; i < tables.size(); ++i) {
        for (std::size_t j = i + 1; j < tables.size(); ++j) m.set(i, j, table_similarity(tables[i], tables[j], comparator));
    }
    return m;
}

namespace {

// Members stay sorted, so members.front() is the cluster's smallest index.
using Clusters = std::vector<std::vector<std::size_t>>;

double average_distance(const SimilarityMatrix& m, const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
    double sum = 0.0;
    for (std::size_t i : a) {
        for (std::size_t j : b) sum += 1.0 - m(i, j);
    }
    return sum / static_cast<double>(a.size() * b.size());
}

template <typename Stop>
ClusterAssignment agglomerate(const SimilarityMatrix& m, Stop stop) {
    Clusters clusters;
    for (std::size_t i = 0; i < m.size(); ++i) clusters.push_back({i});
    while (clusters.size() > 1) {
        // clusters are kept ordered by smallest member, so scanning pairs in
        // order and keeping the first strict minimum gives the tie rule
        double best = std::numeric_limits<double>::infinity();
        std::size_t bi = 0, bj = 0;
        for (std::size_t i = 0; i < clusters.size(); ++i) {
            for (std::size_t j = i + 1; j < clusters.size(); ++j) {
                const double d = average_distance(m, clusters[i], clusters[j]);
                if (d < best) {
                    best = d;
                    bi = i;
                    bj = j;
                }
            }
        }
        if (stop(clusters.size(), best)) break;
        auto& target = clusters[bi];
        target.insert(target.end(), clusters[bj].begin(), clusters[bj].end());
        std::sort(target.begin(), target.end());
        clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(bj));
    }
    ClusterAssignment out;
    out.k = clusters.size();
    out.labels.assign(m.size(), 0);
    for (std::size_t c = 0; c < clusters.size(); ++c) {
        for (std::size_t i : clusters[c]) out.labels[i] = c;
    }
    return out;
}

}  // namespace

ClusterAssignment cluster(const SimilarityMatrix& matrix, double cut) {
    return agglomerate(matrix, [cut](std::size_t, double best) { return best > cut; });
}

ClusterAssignment cluster_k(const SimilarityMatrix& matrix, std::size_t k) {
    const std::size_t target = std::max<std::size_t>(k, 1);
    return agglomerate(matrix, [target](std::size_t count, double) { return count <= target; });
}

std::vector<Point> layout2d(const SimilarityMatrix& matrix) {
    const auto n = static_cast<Eigen::Index>(matrix.size());
    std::vector<Point> out(matrix.size());
    if (n < 2) return out;

    Eigen::MatrixXd d2(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            const double d = 1.0 - matrix(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
            d2(i, j) = d * d;
        }
    }
    const Eigen::MatrixXd centering =
        Eigen::MatrixXd::Identity(n, n) - Eigen::MatrixXd::Constant(n, n, 1.0 / static_cast<double>(n));
    Eigen::MatrixXd b = -0.5 * centering * d2 * centering;
    b = 0.5 * (b + b.transpose());

    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(b);
    const Eigen::VectorXd& values = solver.eigenvalues();  // ascending
    const Eigen::MatrixXd& vectors = solver.eigenvectors();

    for (int axis = 0; axis < 2 && axis < n; ++axis) {
        const Eigen::Index col = n - 1 - axis;
        const double scale = std::sqrt(std::max(values(col), 0.0));
        Eigen::VectorXd v = vectors.col(col) * scale;
        const double mean = v.mean();
        v.array() -= mean;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (std::abs(v(i)) > 1e-12) {
                if (v(i) < 0) v = -v;
                break;
            }
        }
        for (Eigen::Index i = 0; i < n; ++i) {
            const double c = std::abs(v(i)) > 1e-15 ? v(i) : 0.0;
            (axis == 0 ? out[static_cast<std::size_t>(i)].x : out[static_cast<std::size_t>(i)].y) = c;
        }
    }
    return out;
}

}  // namespace plsq
