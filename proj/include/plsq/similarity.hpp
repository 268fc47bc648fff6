#pragma once

#include "plsq/executor.hpp"

#include <chrono>
#include <condition_variable>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace plsq {

enum class ComparatorKind { exact, table_jaccard, external_embedding };

std::string_view to_string(ComparatorKind kind) noexcept;
std::optional<ComparatorKind> comparator_from_string(std::string_view name) noexcept;

/// Order-insensitive fingerprint of a result table: the column-name set and
/// the sorted multiset of rows, each row rendered as its sorted
/// (column, value) pairs.
struct TableSignature {
    std::set<std::string> columns;
    std::vector<std::string> rows;

    friend bool operator==(const TableSignature&, const TableSignature&) = default;
};

TableSignature signature(const ResultTable& table);

/// Canonical text form sent to the embedding service: a `columns:` header
/// line, then one sorted signature row per line.
std::string serialize_table(const ResultTable& table);

/// Client for an external similarity service. POSTs
/// `{"texts":[a,b]}` and reads `{"similarity": x}`. At most
/// `max_in_flight` requests run concurrently across all callers.
class EmbeddingClient {
public:
    struct Options {
        std::string endpoint;  // full URL, e.g. http://localhost:9000/similarity
        std::chrono::milliseconds timeout{std::chrono::seconds(10)};
        std::size_t max_in_flight{4};
    };

    explicit EmbeddingClient(Options options);

    /// Similarity of two serialized tables, clamped to [0, 1]. The pair is
    /// sent in lexicographic order so the score is symmetric. Throws
    /// Error(network_error) when the service is unreachable or malformed.
    double similarity(const std::string& a, const std::string& b) const;

private:
    Options options_;
    mutable std::mutex mutex_;
    mutable std::condition_variable slot_free_;
    mutable std::size_t in_flight_{0};
};

/// A similarity function over result tables.
class Comparator {
public:
    Comparator() = default;
    explicit Comparator(ComparatorKind kind) : kind_(kind) {}
    Comparator(ComparatorKind kind, std::shared_ptr<const EmbeddingClient> client)
        : kind_(kind), client_(std::move(client)) {}

    [[nodiscard]] ComparatorKind kind() const noexcept { return kind_; }
    [[nodiscard]] double operator()(const ResultTable& a, const ResultTable& b) const;

private:
    ComparatorKind kind_{ComparatorKind::table_jaccard};
    std::shared_ptr<const EmbeddingClient> client_;
};

/// exact: 1 iff equal column sets and equal row multisets, else 0.
/// table_jaccard: 0.5 * J(column sets) + 0.5 * J(row multisets).
/// external_embedding: delegated to the client (Error(comparator_unavailable)
/// when none is configured).
double table_similarity(const ResultTable& a, const ResultTable& b, const Comparator& comparator);

bool functionally_equal(const ResultTable& a, const ResultTable& b);

/// Multiset Jaccard |A ∩ B| / |A ∪ B| over sorted sequences; 1 for two
/// empty inputs.
double multiset_jaccard(const std::vector<std::string>& sorted_a, const std::vector<std::string>& sorted_b);

}  // namespace plsq
