#pragma once

#include "plsq/database.hpp"
#include "plsq/sql/ast.hpp"

#include <string>
#include <vector>

namespace plsq {

/// Output of one executed query. Rows are a multiset for every comparison
/// purpose; `ordered` only records that the query had an ORDER BY.
struct ResultTable {
    std::vector<std::string> columns;
    std::vector<Row> rows;
    bool ordered{false};

    [[nodiscard]] std::size_t row_count() const noexcept { return rows.size(); }
    [[nodiscard]] std::size_t column_count() const noexcept { return columns.size(); }

    friend bool operator==(const ResultTable&, const ResultTable&) = default;
};

/// Evaluates a resolved statement against the database. NULL handling is
/// three-valued. Division by zero, comparisons between text and numbers,
/// arithmetic on text and multi-row scalar subqueries raise
/// Error(execution_error).
ResultTable execute(const sql::Ast& ast, const DatabaseSpec& db);

}  // namespace plsq
