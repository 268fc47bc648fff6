#pragma once

#include "plsq/value.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace plsq {

struct ColumnSpec {
    std::string name;
    ColumnType type{ColumnType::text};

    friend bool operator==(const ColumnSpec&, const ColumnSpec&) = default;
};

using Row = std::vector<Value>;

struct TableSpec {
    std::string name;
    std::vector<ColumnSpec> columns;
    std::vector<Row> rows;

    /// Index of a column by case-insensitive name.
    [[nodiscard]] std::optional<std::size_t> find_column(std::string_view column) const;

    friend bool operator==(const TableSpec&, const TableSpec&) = default;
};

/// The test database a task's queries run against. Small by construction:
/// a handful of tables with a handful of rows each.
struct DatabaseSpec {
    std::vector<TableSpec> tables;

    [[nodiscard]] const TableSpec* find_table(std::string_view name) const;

    /// Checks name uniqueness, row arity and cell typing; throws
    /// Error(validation_error) describing the first violation.
    void validate() const;

    friend bool operator==(const DatabaseSpec&, const DatabaseSpec&) = default;
};

/// ASCII lower-casing used for every identifier comparison.
std::string fold_case(std::string_view text);
bool iequals(std::string_view a, std::string_view b) noexcept;

}  // namespace plsq
