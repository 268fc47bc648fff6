#pragma once

#include "plsq/database.hpp"
#include "plsq/sql/ast.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace plsq::sql {

enum class TokenKind { identifier, quoted_identifier, number, string, symbol, end };

struct Token {
    TokenKind kind;
    std::string text;
    std::size_t offset;
};

/// Splits a statement into tokens; comments are dropped. Throws SyntaxError.
std::vector<Token> tokenize(std::string_view text);

/// Parses a single SELECT-family statement and resolves every table and
/// column reference against `db`. Aliases are replaced by canonical table
/// names. Throws SyntaxError, or Error with resolution_error /
/// unsupported_construct.
Ast parse_sql(std::string_view text, const DatabaseSpec& db);

/// Canonical SQL text of a resolved statement: lower-cased keywords and
/// identifiers, alias-free, columns qualified only when more than one table
/// is in scope, equality operands ordered. Re-parsing the canonical text
/// yields the same canonical text.
std::string canonical_sql(const Ast& ast);
std::string canonical_sql(const Select& select);

/// Canonical rendering of one expression owned by `owner` (which supplies
/// the scope used for qualification). `bare_columns` drops all qualifiers,
/// used for result-table column labels.
std::string render_expr(const Expr& expr, const Select& owner, bool bare_columns = false);

}  // namespace plsq::sql
