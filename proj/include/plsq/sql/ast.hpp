#pragma once

#include "plsq/database.hpp"
#include "plsq/value.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace plsq::sql {

struct Expr;
struct Select;
using ExprPtr = std::unique_ptr<Expr>;
using SelectPtr = std::unique_ptr<Select>;

enum class BinaryOp { add, sub, mul, div, mod, concat, eq, ne, lt, le, gt, ge, logical_and, logical_or };
enum class UnaryOp { negate, logical_not };

struct Literal {
    Value value;
    std::string lexeme;  // rendered verbatim
};

/// Column reference. The resolver fills the binding fields: `depth` counts
/// enclosing SELECT scopes outward (0 = the select that owns the expression),
/// `source` indexes that select's FROM/JOIN list.
struct ColumnRef {
    std::optional<std::string> qualifier;
    std::string name;
    // Resolved binding.
    std::string table;  // canonical name of the bound source
    int depth{-1};
    std::size_t source{0};
    std::size_t column{0};
};

struct Star {
    std::optional<std::string> qualifier;
    std::optional<std::size_t> source;  // set when qualified
    std::string table;
};

/// ORDER BY reference to an already-projected output column (by alias or
/// position).
struct OutputRef {
    std::size_t index{0};
};

struct Unary {
    UnaryOp op;
    ExprPtr operand;
};

struct Binary {
    BinaryOp op;
    ExprPtr lhs;
    ExprPtr rhs;
};

struct IsNull {
    ExprPtr operand;
    bool negated{false};
};

struct Between {
    ExprPtr operand;
    ExprPtr low;
    ExprPtr high;
    bool negated{false};
};

struct InList {
    ExprPtr operand;
    std::vector<ExprPtr> items;
    bool negated{false};
};

struct InSubquery {
    ExprPtr operand;
    SelectPtr subquery;
    bool negated{false};
};

struct Exists {
    SelectPtr subquery;
    bool negated{false};
};

struct ScalarSubquery {
    SelectPtr subquery;
};

struct Like {
    ExprPtr operand;
    ExprPtr pattern;
    bool negated{false};
};

struct Function {
    std::string name;  // lower-case
    std::vector<ExprPtr> args;
    bool distinct{false};
    bool star{false};  // count(*)

    [[nodiscard]] bool is_aggregate() const noexcept;
};

struct Case {
    ExprPtr operand;  // may be null (searched CASE)
    std::vector<std::pair<ExprPtr, ExprPtr>> branches;
    ExprPtr otherwise;  // may be null
};

struct Cast {
    ExprPtr operand;
    ColumnType type{ColumnType::text};
};

struct Expr {
    using Node = std::variant<Literal, ColumnRef, Star, OutputRef, Unary, Binary, IsNull, Between, InList,
                              InSubquery, Exists, ScalarSubquery, Like, Function, Case, Cast>;
    Node node;

    template <typename T>
    explicit Expr(T&& n) : node(std::forward<T>(n)) {}
};

template <typename T>
ExprPtr make_expr(T&& node) {
    return std::make_unique<Expr>(std::forward<T>(node));
}

ExprPtr clone(const Expr& expr);
SelectPtr clone(const Select& select);

enum class JoinKind { none, inner, left, cross };

/// One entry of a FROM list. `JoinKind::none` marks the first table and
/// comma-separated tables; join entries carry their ON condition.
struct Source {
    std::string table;      // as written
    std::string alias;      // empty when not aliased
    std::string canonical;  // base table name, suffixed _k for repeated occurrences
    const TableSpec* spec{nullptr};
    JoinKind join{JoinKind::none};
    ExprPtr on;
};

struct SelectItem {
    ExprPtr expr;
    std::optional<std::string> alias;
};

struct OrderItem {
    ExprPtr expr;
    bool descending{false};
};

enum class SetOpKind { union_distinct, union_all, intersect, except };

struct SetOp {
    SetOpKind kind;
    SelectPtr rhs;
};

/// One SELECT core, optionally chained with a set operation. For compound
/// statements ORDER BY / LIMIT belong to the leftmost select and apply to
/// the combined result.
struct Select {
    bool distinct{false};
    std::vector<SelectItem> items;
    std::vector<Source> sources;
    ExprPtr where;
    std::vector<ExprPtr> group_by;
    ExprPtr having;
    std::optional<SetOp> set_op;
    std::vector<OrderItem> order_by;
    std::optional<std::int64_t> limit;
    std::optional<std::int64_t> offset;

    // Filled by the resolver.
    bool aggregate{false};
    std::vector<std::string> output_names;
};

/// A parsed and resolved SELECT statement.
struct Ast {
    SelectPtr root;
};

}  // namespace plsq::sql
