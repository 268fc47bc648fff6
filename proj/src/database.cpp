#include "plsq/database.hpp"

#include "plsq/error.hpp"

#include <cctype>
#include <set>

namespace plsq {

std::string fold_case(std::string_view text) {
    std::string out(text);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

bool iequals(std::string_view a, std::string_view b) noexcept {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::tolower(static_cast<unsigned char>(a[i])) != std::tolower(static_cast<unsigned char>(b[i]))) {
            return false;
        }
    }
    return true;
}

std::optional<std::size_t> TableSpec::find_column(std::string_view column) const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (iequals(columns[i].name, column)) return i;
    }
    return std::nullopt;
}

const TableSpec* DatabaseSpec::find_table(std::string_view name) const {
    for (const auto& t : tables) {
        if (iequals(t.name, name)) return &t;
    }
    return nullptr;
}

void DatabaseSpec::validate() const {
    std::set<std::string> table_names;
    for (const auto& t : tables) {
        if (t.name.empty()) throw Error(ErrorCode::validation_error, "table with empty name");
        if (!table_names.insert(fold_case(t.name)).second) {
            throw Error(ErrorCode::validation_error, "duplicate table name '" + t.name + "'");
        }
        std::set<std::string> column_names;
        for (const auto& c : t.columns) {
            if (!column_names.insert(fold_case(c.name)).second) {
                throw Error(ErrorCode::validation_error,
                            "duplicate column '" + c.name + "' in table '" + t.name + "'");
            }
        }
        for (std::size_t r = 0; r < t.rows.size(); ++r) {
            const auto& row = t.rows[r];
            if (row.size() != t.columns.size()) {
                throw Error(ErrorCode::validation_error,
                            "row " + std::to_string(r) + " of table '" + t.name + "' has " +
                                std::to_string(row.size()) + " cells, expected " +
                                std::to_string(t.columns.size()));
            }
            for (std::size_t c = 0; c < row.size(); ++c) {
                if (!conforms(row[c], t.columns[c].type)) {
                    throw Error(ErrorCode::validation_error,
                                "cell (" + std::to_string(r) + ", " + t.columns[c].name + ") of table '" +
                                    t.name + "' does not conform to type " +
                                    std::string(to_string(t.columns[c].type)));
                }
            }
        }
    }
}

}  // namespace plsq
