#pragma once

#include "plsq/sql/ast.hpp"

#include <compare>
#include <set>
#include <string>
#include <string_view>

namespace plsq {

enum class Clause { select, from, join, where, group_by, having, order_by, limit, distinct, set_op };

std::string_view clause_keyword(Clause clause) noexcept;

/// One (clause keyword, canonical value) pair; the unit dimension of a
/// query's binary feature vector. Equal pairs are the same feature.
struct AtomicFeature {
    Clause keyword{Clause::select};
    std::string value;

    /// `KEYWORD value`, e.g. `SELECT opinion` or `GROUP BY films.genre`.
    /// Doubles as the feature id: it is unique per pair and orders features
    /// everywhere ties are broken.
    [[nodiscard]] std::string id() const;

    friend bool operator==(const AtomicFeature&, const AtomicFeature&) = default;
    friend std::strong_ordering operator<=>(const AtomicFeature& a, const AtomicFeature& b) {
        const std::string x = a.id();
        const std::string y = b.id();
        const int c = x.compare(y);
        return c < 0 ? std::strong_ordering::less
                     : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
    }
};

using FeatureSet = std::set<AtomicFeature>;

/// Inverse of AtomicFeature::id(); nullopt when the keyword prefix is not
/// recognised.
std::optional<AtomicFeature> parse_feature_id(std::string_view id);

/// Features of a resolved statement: one per select item, FROM table, join,
/// top-level WHERE conjunct, GROUP BY item, HAVING conjunct, ORDER BY item,
/// LIMIT, DISTINCT and set operation. Both operands of a set operation
/// contribute their clause features.
FeatureSet extract_features(const sql::Ast& ast);

}  // namespace plsq
