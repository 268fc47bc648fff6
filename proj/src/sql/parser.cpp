#include "plsq/sql/parser.hpp"

#include "plsq/error.hpp"

#include <array>
#include <charconv>
#include <cstdlib>
#include <map>
#include <string_view>

namespace plsq::sql {

namespace {

constexpr std::array<std::string_view, 44> reserved_words{
    "select", "from",  "where",  "group",  "by",      "having",    "order",  "limit", "offset",
    "join",   "inner", "left",   "right",  "full",    "outer",     "cross",  "on",    "as",
    "and",    "or",    "not",    "in",     "is",      "null",      "like",   "between", "exists",
    "case",   "when",  "then",   "else",   "end",     "distinct",  "all",    "union", "intersect",
    "except", "asc",   "desc",   "natural", "using",  "window",    "over",   "cast"};

bool is_reserved(std::string_view word) {
    const std::string folded = fold_case(word);
    for (auto r : reserved_words) {
        if (r == folded) return true;
    }
    return false;
}

[[noreturn]] void unsupported(const std::string& what) {
    throw Error(ErrorCode::unsupported_construct, "unsupported construct: " + what);
}

class Parser {
public:
    explicit Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

    SelectPtr statement() {
        if (peek().kind == TokenKind::identifier) {
            static constexpr std::array<std::string_view, 11> other_statements{
                "with", "insert", "update", "delete", "create", "drop",
                "alter", "pragma", "replace", "attach", "values"};
            const std::string word = fold_case(peek().text);
            for (auto w : other_statements) {
                if (w == word) unsupported("'" + word + "' statement");
            }
        }
        if (!is_keyword("select")) fail("expected SELECT");
        auto root = select_core();
        if (auto kind = set_op_keyword()) {
            auto rhs = select_core();
            root->set_op = SetOp{*kind, std::move(rhs)};
            if (set_op_keyword()) unsupported("chained set operations");
        }
        order_and_limit(*root);
        while (accept_symbol(";")) {
            if (peek().kind != TokenKind::end) unsupported("multiple statements");
        }
        if (peek().kind != TokenKind::end) fail("unexpected trailing input '" + peek().text + "'");
        return root;
    }

private:
    std::vector<Token> tokens_;
    std::size_t pos_{0};

    const Token& peek(std::size_t ahead = 0) const {
        const std::size_t i = std::min(pos_ + ahead, tokens_.size() - 1);
        return tokens_[i];
    }
    const Token& advance() {
        const Token& t = tokens_[pos_];
        if (pos_ + 1 < tokens_.size()) ++pos_;
        return t;
    }

    [[noreturn]] void fail(const std::string& message) const { throw SyntaxError(peek().offset, message); }

    bool is_keyword(std::string_view kw, std::size_t ahead = 0) const {
        const Token& t = peek(ahead);
        return t.kind == TokenKind::identifier && iequals(t.text, kw);
    }
    bool accept_keyword(std::string_view kw) {
        if (!is_keyword(kw)) return false;
        advance();
        return true;
    }
    void expect_keyword(std::string_view kw) {
        if (!accept_keyword(kw)) fail("expected " + fold_case(kw));
    }
    bool is_symbol(std::string_view s, std::size_t ahead = 0) const {
        const Token& t = peek(ahead);
        return t.kind == TokenKind::symbol && t.text == s;
    }
    bool accept_symbol(std::string_view s) {
        if (!is_symbol(s)) return false;
        advance();
        return true;
    }
    void expect_symbol(std::string_view s) {
        if (!accept_symbol(s)) fail("expected '" + std::string(s) + "'");
    }

    std::optional<SetOpKind> set_op_keyword() {
        if (accept_keyword("union")) {
            if (accept_keyword("all")) return SetOpKind::union_all;
            accept_keyword("distinct");
            return SetOpKind::union_distinct;
        }
        if (accept_keyword("intersect")) return SetOpKind::intersect;
        if (accept_keyword("except")) return SetOpKind::except;
        return std::nullopt;
    }

    std::string identifier(const char* what) {
        const Token& t = peek();
        if (t.kind == TokenKind::quoted_identifier) return advance().text;
        if (t.kind == TokenKind::identifier && !is_reserved(t.text)) return advance().text;
        fail(std::string("expected ") + what);
    }

    std::optional<std::string> optional_alias() {
        if (accept_keyword("as")) {
            if (peek().kind == TokenKind::string) return advance().text;
            return identifier("alias");
        }
        const Token& t = peek();
        if (t.kind == TokenKind::quoted_identifier) return advance().text;
        if (t.kind == TokenKind::identifier && !is_reserved(t.text)) return advance().text;
        return std::nullopt;
    }

    SelectPtr select_core() {
        expect_keyword("select");
        auto s = std::make_unique<Select>();
        if (accept_keyword("distinct")) {
            s->distinct = true;
        } else {
            accept_keyword("all");
        }
        do {
            s->items.push_back(select_item());
        } while (accept_symbol(","));
        if (accept_keyword("from")) from_list(*s);
        if (accept_keyword("where")) s->where = expr();
        if (accept_keyword("group")) {
            expect_keyword("by");
            do {
                s->group_by.push_back(expr());
            } while (accept_symbol(","));
        }
        if (accept_keyword("having")) s->having = expr();
        if (is_keyword("window")) unsupported("window clause");
        return s;
    }

    SelectItem select_item() {
        if (accept_symbol("*")) return {make_expr(Star{}), std::nullopt};
        if ((peek().kind == TokenKind::identifier || peek().kind == TokenKind::quoted_identifier) &&
            is_symbol(".", 1) && is_symbol("*", 2)) {
            std::string q = advance().text;
            advance();
            advance();
            return {make_expr(Star{q, std::nullopt, {}}), std::nullopt};
        }
        SelectItem item{expr(), std::nullopt};
        item.alias = optional_alias();
        return item;
    }

    void table_ref(Select& s, JoinKind join) {
        if (is_symbol("(")) unsupported("derived table in FROM");
        Source src;
        src.table = identifier("table name");
        if (is_symbol("(")) unsupported("table-valued function");
        if (auto alias = optional_alias()) src.alias = *alias;
        src.join = join;
        s.sources.push_back(std::move(src));
    }

    void from_list(Select& s) {
        table_ref(s, JoinKind::none);
        for (;;) {
            if (accept_symbol(",")) {
                table_ref(s, JoinKind::none);
                continue;
            }
            if (is_keyword("natural")) unsupported("NATURAL JOIN");
            if (is_keyword("right") || is_keyword("full")) unsupported("RIGHT/FULL OUTER JOIN");
            JoinKind kind;
            if (accept_keyword("join")) {
                kind = JoinKind::inner;
            } else if (is_keyword("inner")) {
                advance();
                expect_keyword("join");
                kind = JoinKind::inner;
            } else if (is_keyword("left")) {
                advance();
                accept_keyword("outer");
                expect_keyword("join");
                kind = JoinKind::left;
            } else if (is_keyword("cross")) {
                advance();
                expect_keyword("join");
                kind = JoinKind::cross;
            } else {
                return;
            }
            table_ref(s, kind);
            if (is_keyword("using")) unsupported("JOIN ... USING");
            if (kind != JoinKind::cross && accept_keyword("on")) {
                s.sources.back().on = expr();
            } else if (kind == JoinKind::left) {
                fail("expected ON after LEFT JOIN");
            } else if (kind == JoinKind::inner) {
                s.sources.back().join = JoinKind::cross;
            }
        }
    }

    std::int64_t integer_literal(const char* what) {
        const Token& t = peek();
        if (t.kind != TokenKind::number || t.text.find_first_of(".eE") != std::string::npos) {
            fail(std::string("expected integer ") + what);
        }
        std::int64_t v = 0;
        auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
        if (ec != std::errc{}) fail("integer out of range");
        advance();
        return v;
    }

    void order_and_limit(Select& s) {
        if (accept_keyword("order")) {
            expect_keyword("by");
            do {
                OrderItem item{expr(), false};
                if (accept_keyword("desc")) {
                    item.descending = true;
                } else {
                    accept_keyword("asc");
                }
                if (is_keyword("nulls")) unsupported("NULLS FIRST/LAST");
                s.order_by.push_back(std::move(item));
            } while (accept_symbol(","));
        }
        if (accept_keyword("limit")) {
            const std::int64_t first = integer_literal("after LIMIT");
            if (accept_symbol(",")) {
                s.offset = first;
                s.limit = integer_literal("after LIMIT offset,");
            } else {
                s.limit = first;
                if (accept_keyword("offset")) s.offset = integer_literal("after OFFSET");
            }
        }
    }

    // Expression grammar, loosest binding first.
    ExprPtr expr() { return or_expr(); }

    ExprPtr or_expr() {
        auto lhs = and_expr();
        while (accept_keyword("or")) lhs = make_expr(Binary{BinaryOp::logical_or, std::move(lhs), and_expr()});
        return lhs;
    }

    ExprPtr and_expr() {
        auto lhs = not_expr();
        while (accept_keyword("and")) lhs = make_expr(Binary{BinaryOp::logical_and, std::move(lhs), not_expr()});
        return lhs;
    }

    ExprPtr not_expr() {
        if (accept_keyword("not")) return make_expr(Unary{UnaryOp::logical_not, not_expr()});
        return comparison();
    }

    ExprPtr comparison() {
        auto lhs = additive();
        for (;;) {
            const Token& t = peek();
            if (t.kind == TokenKind::symbol) {
                std::optional<BinaryOp> op;
                if (t.text == "=" || t.text == "==") op = BinaryOp::eq;
                else if (t.text == "!=" || t.text == "<>") op = BinaryOp::ne;
                else if (t.text == "<") op = BinaryOp::lt;
                else if (t.text == "<=") op = BinaryOp::le;
                else if (t.text == ">") op = BinaryOp::gt;
                else if (t.text == ">=") op = BinaryOp::ge;
                if (!op) return lhs;
                advance();
                lhs = make_expr(Binary{*op, std::move(lhs), additive()});
                continue;
            }
            if (accept_keyword("is")) {
                const bool negated = accept_keyword("not");
                expect_keyword("null");
                lhs = make_expr(IsNull{std::move(lhs), negated});
                continue;
            }
            bool negated = false;
            if (is_keyword("not") && (is_keyword("between", 1) || is_keyword("in", 1) || is_keyword("like", 1))) {
                advance();
                negated = true;
            }
            if (accept_keyword("between")) {
                auto low = additive();
                expect_keyword("and");
                auto high = additive();
                lhs = make_expr(Between{std::move(lhs), std::move(low), std::move(high), negated});
                continue;
            }
            if (accept_keyword("in")) {
                expect_symbol("(");
                if (is_keyword("select")) {
                    auto sub = subquery_body();
                    expect_symbol(")");
                    lhs = make_expr(InSubquery{std::move(lhs), std::move(sub), negated});
                } else {
                    std::vector<ExprPtr> items;
                    do {
                        items.push_back(expr());
                    } while (accept_symbol(","));
                    expect_symbol(")");
                    lhs = make_expr(InList{std::move(lhs), std::move(items), negated});
                }
                continue;
            }
            if (accept_keyword("like")) {
                lhs = make_expr(Like{std::move(lhs), additive(), negated});
                if (is_keyword("escape")) unsupported("LIKE ... ESCAPE");
                continue;
            }
            if (is_keyword("glob") || is_keyword("regexp") || is_keyword("ilike")) {
                unsupported(fold_case(peek().text) + " operator");
            }
            return lhs;
        }
    }

    ExprPtr additive() {
        auto lhs = multiplicative();
        for (;;) {
            if (accept_symbol("+")) lhs = make_expr(Binary{BinaryOp::add, std::move(lhs), multiplicative()});
            else if (accept_symbol("-")) lhs = make_expr(Binary{BinaryOp::sub, std::move(lhs), multiplicative()});
            else return lhs;
        }
    }

    ExprPtr multiplicative() {
        auto lhs = concat();
        for (;;) {
            if (accept_symbol("*")) lhs = make_expr(Binary{BinaryOp::mul, std::move(lhs), concat()});
            else if (accept_symbol("/")) lhs = make_expr(Binary{BinaryOp::div, std::move(lhs), concat()});
            else if (accept_symbol("%")) lhs = make_expr(Binary{BinaryOp::mod, std::move(lhs), concat()});
            else return lhs;
        }
    }

    ExprPtr concat() {
        auto lhs = unary();
        while (accept_symbol("||")) lhs = make_expr(Binary{BinaryOp::concat, std::move(lhs), unary()});
        return lhs;
    }

    ExprPtr unary() {
        if (accept_symbol("-")) {
            if (peek().kind == TokenKind::number) return number_literal("-");
            return make_expr(Unary{UnaryOp::negate, unary()});
        }
        if (accept_symbol("+")) return unary();
        return primary();
    }

    ExprPtr number_literal(const std::string& sign) {
        const std::string lexeme = sign + advance().text;
        Literal lit;
        lit.lexeme = lexeme;
        if (lexeme.find_first_of(".eE") == std::string::npos) {
            std::int64_t v = 0;
            auto [ptr, ec] = std::from_chars(lexeme.data(), lexeme.data() + lexeme.size(), v);
            if (ec == std::errc{}) {
                lit.value = v;
                return make_expr(std::move(lit));
            }
        }
        lit.value = std::strtod(lexeme.c_str(), nullptr);
        return make_expr(std::move(lit));
    }

    SelectPtr subquery_body() {
        auto sub = select_core();
        if (auto kind = set_op_keyword()) {
            sub->set_op = SetOp{*kind, select_core()};
        }
        order_and_limit(*sub);
        return sub;
    }

    ColumnType type_name() {
        const Token& t = peek();
        if (t.kind != TokenKind::identifier) fail("expected type name");
        const std::string name = fold_case(advance().text);
        if (accept_symbol("(")) {
            integer_literal("type size");
            if (accept_symbol(",")) integer_literal("type scale");
            expect_symbol(")");
        }
        if (name == "integer" || name == "int" || name == "bigint" || name == "smallint") return ColumnType::integer;
        if (name == "real" || name == "float" || name == "double" || name == "numeric" || name == "decimal") {
            return ColumnType::real;
        }
        if (name == "text" || name == "varchar" || name == "char" || name == "string") return ColumnType::text;
        unsupported("CAST to type '" + name + "'");
    }

    ExprPtr primary() {
        const Token& t = peek();
        switch (t.kind) {
            case TokenKind::number: return number_literal("");
            case TokenKind::string: {
                Literal lit{Value(t.text), {}};
                advance();
                return make_expr(std::move(lit));
            }
            case TokenKind::quoted_identifier: return column_or_call();
            case TokenKind::end: fail("unexpected end of input");
            case TokenKind::symbol:
                if (accept_symbol("(")) {
                    if (is_keyword("select")) {
                        auto sub = subquery_body();
                        expect_symbol(")");
                        return make_expr(ScalarSubquery{std::move(sub)});
                    }
                    auto inner = expr();
                    expect_symbol(")");
                    return inner;
                }
                fail("unexpected '" + t.text + "'");
            case TokenKind::identifier: break;
        }
        if (accept_keyword("null")) return make_expr(Literal{Value(Null{}), "null"});
        if (accept_keyword("true")) return make_expr(Literal{Value(1), "true"});
        if (accept_keyword("false")) return make_expr(Literal{Value(0), "false"});
        if (accept_keyword("exists")) {
            expect_symbol("(");
            auto sub = subquery_body();
            expect_symbol(")");
            return make_expr(Exists{std::move(sub), false});
        }
        if (accept_keyword("case")) {
            Case c;
            if (!is_keyword("when")) c.operand = expr();
            while (accept_keyword("when")) {
                auto when = expr();
                expect_keyword("then");
                c.branches.emplace_back(std::move(when), expr());
            }
            if (c.branches.empty()) fail("expected WHEN");
            if (accept_keyword("else")) c.otherwise = expr();
            expect_keyword("end");
            return make_expr(std::move(c));
        }
        if (accept_keyword("cast")) {
            expect_symbol("(");
            auto operand = expr();
            expect_keyword("as");
            const ColumnType type = type_name();
            expect_symbol(")");
            return make_expr(Cast{std::move(operand), type});
        }
        if (is_reserved(t.text)) fail("unexpected keyword '" + t.text + "'");
        return column_or_call();
    }

    ExprPtr column_or_call() {
        const Token first = advance();
        if (first.kind == TokenKind::identifier && accept_symbol("(")) {
            Function fn;
            fn.name = fold_case(first.text);
            if (accept_symbol("*")) {
                fn.star = true;
            } else if (!is_symbol(")")) {
                if (accept_keyword("distinct")) fn.distinct = true;
                do {
                    fn.args.push_back(expr());
                } while (accept_symbol(","));
            }
            expect_symbol(")");
            if (is_keyword("over") || is_keyword("filter")) unsupported("window function");
            return make_expr(std::move(fn));
        }
        if (accept_symbol(".")) {
            const Token& t = peek();
            if (t.kind != TokenKind::identifier && t.kind != TokenKind::quoted_identifier) {
                fail("expected column name after '.'");
            }
            ColumnRef ref;
            ref.qualifier = first.text;
            ref.name = advance().text;
            return make_expr(std::move(ref));
        }
        ColumnRef ref;
        ref.name = first.text;
        return make_expr(std::move(ref));
    }
};

// ---------------------------------------------------------------------------
// Resolution

struct Scope {
    Select* select;
    const Scope* parent;
};

enum class ExprContext { general, no_aggregates, inside_aggregate };

class Resolver {
public:
    explicit Resolver(const DatabaseSpec& db) : db_(db) {}

    void resolve(Select& s, const Scope* parent) {
        bind_sources(s);
        Scope scope{&s, parent};

        for (auto& item : s.items) {
            if (auto* star = std::get_if<Star>(&item.expr->node)) {
                resolve_star(*star, s);
            } else {
                resolve_expr(item.expr, scope, ExprContext::general, nullptr);
            }
        }
        for (auto& src : s.sources) {
            if (src.on) resolve_expr(src.on, scope, ExprContext::no_aggregates, nullptr);
        }
        if (s.where) resolve_expr(s.where, scope, ExprContext::no_aggregates, nullptr);
        for (auto& g : s.group_by) {
            if (auto* lit = std::get_if<Literal>(&g->node); lit && lit->value.is_integer()) {
                g = item_expr_for_position(s, lit->value.as_integer(), "GROUP BY");
                continue;
            }
            resolve_expr(g, scope, ExprContext::no_aggregates, &s);
        }
        if (s.having) resolve_expr(s.having, scope, ExprContext::general, &s);

        s.aggregate = !s.group_by.empty() || s.having != nullptr;
        for (const auto& item : s.items) s.aggregate = s.aggregate || contains_aggregate(*item.expr);

        s.output_names.clear();
        for (const auto& item : s.items) {
            if (const auto* star = std::get_if<Star>(&item.expr->node)) {
                for (std::size_t i = 0; i < s.sources.size(); ++i) {
                    if (star->source && *star->source != i) continue;
                    for (const auto& col : s.sources[i].spec->columns) s.output_names.push_back(fold_case(col.name));
                }
            } else if (const auto* ref = std::get_if<ColumnRef>(&item.expr->node)) {
                s.output_names.push_back(ref->name);
            } else {
                s.output_names.push_back(render_expr(*item.expr, s, true));
            }
        }

        if (s.set_op) {
            resolve(*s.set_op->rhs, parent);
            if (s.set_op->rhs->output_names.size() != s.output_names.size()) {
                throw Error(ErrorCode::resolution_error, "set operation operands have different column counts");
            }
        }

        for (auto& o : s.order_by) {
            if (auto* lit = std::get_if<Literal>(&o.expr->node); lit && lit->value.is_integer()) {
                const auto k = lit->value.as_integer();
                if (k < 1 || static_cast<std::size_t>(k) > s.output_names.size()) {
                    throw Error(ErrorCode::resolution_error, "ORDER BY position out of range");
                }
                o.expr = make_expr(OutputRef{static_cast<std::size_t>(k - 1)});
                continue;
            }
            if (auto* ref = std::get_if<ColumnRef>(&o.expr->node); ref && !ref->qualifier) {
                if (auto idx = alias_index(s, ref->name)) {
                    o.expr = make_expr(OutputRef{*idx});
                    continue;
                }
                if (s.set_op) {
                    for (std::size_t i = 0; i < s.output_names.size(); ++i) {
                        if (iequals(s.output_names[i], ref->name)) {
                            o.expr = make_expr(OutputRef{i});
                            break;
                        }
                    }
                    if (std::holds_alternative<OutputRef>(o.expr->node)) continue;
                }
            }
            if (s.set_op) unsupported("ORDER BY expression on a compound select");
            resolve_expr(o.expr, scope, ExprContext::general, &s);
            s.aggregate = s.aggregate || contains_aggregate(*o.expr);
        }
        if (s.limit && *s.limit < 0) throw Error(ErrorCode::resolution_error, "negative LIMIT");
        if (s.offset && *s.offset < 0) throw Error(ErrorCode::resolution_error, "negative OFFSET");
    }

private:
    const DatabaseSpec& db_;
    std::map<std::string, int> occurrences_;

    void bind_sources(Select& s) {
        std::map<std::string, int> visible;
        for (auto& src : s.sources) {
            src.spec = db_.find_table(src.table);
            if (!src.spec) throw Error(ErrorCode::resolution_error, "unknown table '" + src.table + "'");
            const std::string base = fold_case(src.spec->name);
            const int k = ++occurrences_[base];
            src.canonical = k == 1 ? base : base + "_" + std::to_string(k);
            const std::string name = fold_case(src.alias.empty() ? src.table : src.alias);
            if (++visible[name] > 1) {
                throw Error(ErrorCode::resolution_error, "table name '" + name + "' specified more than once");
            }
        }
    }

    static std::string visible_name(const Source& src) { return fold_case(src.alias.empty() ? src.table : src.alias); }

    void resolve_star(Star& star, Select& s) {
        if (s.sources.empty()) throw Error(ErrorCode::resolution_error, "'*' without FROM");
        if (!star.qualifier) return;
        for (std::size_t i = 0; i < s.sources.size(); ++i) {
            if (visible_name(s.sources[i]) == fold_case(*star.qualifier)) {
                star.source = i;
                star.table = s.sources[i].canonical;
                return;
            }
        }
        throw Error(ErrorCode::resolution_error, "unknown table or alias '" + *star.qualifier + "'");
    }

    static std::optional<std::size_t> alias_index(const Select& s, std::string_view name) {
        for (std::size_t i = 0; i < s.items.size(); ++i) {
            if (s.items[i].alias && iequals(*s.items[i].alias, name)) return i;
        }
        return std::nullopt;
    }

    // Index into s.items for a 1-based GROUP BY position; Star items are not
    // addressable this way.
    ExprPtr item_expr_for_position(Select& s, std::int64_t k, const char* clause) {
        if (k < 1 || static_cast<std::size_t>(k) > s.items.size() ||
            std::holds_alternative<Star>(s.items[k - 1].expr->node)) {
            throw Error(ErrorCode::resolution_error, std::string(clause) + " position out of range");
        }
        auto e = clone(*s.items[k - 1].expr);
        if (contains_aggregate(*e)) throw Error(ErrorCode::resolution_error, "aggregate in GROUP BY");
        return e;
    }

    bool bind_column(ColumnRef& ref, const Scope& scope) {
        int depth = 0;
        for (const Scope* sc = &scope; sc; sc = sc->parent, ++depth) {
            auto& sources = sc->select->sources;
            if (ref.qualifier) {
                const std::string q = fold_case(*ref.qualifier);
                for (std::size_t i = 0; i < sources.size(); ++i) {
                    if (visible_name(sources[i]) != q) continue;
                    auto col = sources[i].spec->find_column(ref.name);
                    if (!col) {
                        throw Error(ErrorCode::resolution_error,
                                    "no such column '" + *ref.qualifier + "." + ref.name + "'");
                    }
                    set_binding(ref, sources[i], depth, i, *col);
                    return true;
                }
                continue;
            }
            std::optional<std::size_t> found;
            std::size_t column = 0;
            for (std::size_t i = 0; i < sources.size(); ++i) {
                if (auto col = sources[i].spec->find_column(ref.name)) {
                    if (found) throw Error(ErrorCode::resolution_error, "ambiguous column name '" + ref.name + "'");
                    found = i;
                    column = *col;
                }
            }
            if (found) {
                set_binding(ref, sources[*found], depth, *found, column);
                return true;
            }
        }
        return false;
    }

    static void set_binding(ColumnRef& ref, const Source& src, int depth, std::size_t index, std::size_t column) {
        ref.depth = depth;
        ref.source = index;
        ref.column = column;
        ref.table = src.canonical;
        ref.name = fold_case(src.spec->columns[column].name);
    }

    void resolve_subquery(Select& sub, const Scope& scope) { resolve(sub, &scope); }

    void resolve_all(std::vector<ExprPtr>& items, const Scope& scope, ExprContext ctx, Select* alias_source) {
        for (auto& e : items) resolve_expr(e, scope, ctx, alias_source);
    }

    // `alias_source`, when set, lets bare names fall back to select-list
    // aliases (GROUP BY / HAVING / ORDER BY).
    void resolve_expr(ExprPtr& e, const Scope& scope, ExprContext ctx, Select* alias_source) {
        auto recurse = [&](ExprPtr& child) {
            if (child) resolve_expr(child, scope, ctx, alias_source);
        };
        std::visit(
            [&](auto& n) {
                using T = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<T, Literal> || std::is_same_v<T, OutputRef>) {
                } else if constexpr (std::is_same_v<T, ColumnRef>) {
                    if (bind_column(n, scope)) return;
                    if (alias_source && !n.qualifier) {
                        if (auto idx = alias_index(*alias_source, n.name)) {
                            auto substituted = clone(*alias_source->items[*idx].expr);
                            if (ctx == ExprContext::no_aggregates && contains_aggregate(*substituted)) {
                                throw Error(ErrorCode::resolution_error, "aggregate not allowed here");
                            }
                            e = std::move(substituted);
                            return;
                        }
                    }
                    throw Error(ErrorCode::resolution_error,
                                "no such column '" + (n.qualifier ? *n.qualifier + "." : std::string()) + n.name +
                                    "'");
                } else if constexpr (std::is_same_v<T, Star>) {
                    throw Error(ErrorCode::resolution_error, "'*' not allowed in expression");
                } else if constexpr (std::is_same_v<T, Unary>) {
                    recurse(n.operand);
                } else if constexpr (std::is_same_v<T, Binary>) {
                    recurse(n.lhs);
                    recurse(n.rhs);
                } else if constexpr (std::is_same_v<T, IsNull>) {
                    recurse(n.operand);
                } else if constexpr (std::is_same_v<T, Between>) {
                    recurse(n.operand);
                    recurse(n.low);
                    recurse(n.high);
                } else if constexpr (std::is_same_v<T, InList>) {
                    recurse(n.operand);
                    resolve_all(n.items, scope, ctx, alias_source);
                } else if constexpr (std::is_same_v<T, InSubquery>) {
                    recurse(n.operand);
                    resolve_subquery(*n.subquery, scope);
                    if (n.subquery->output_names.size() != 1) {
                        throw Error(ErrorCode::resolution_error, "IN subquery must return one column");
                    }
                } else if constexpr (std::is_same_v<T, Exists>) {
                    resolve_subquery(*n.subquery, scope);
                } else if constexpr (std::is_same_v<T, ScalarSubquery>) {
                    resolve_subquery(*n.subquery, scope);
                    if (n.subquery->output_names.size() != 1) {
                        throw Error(ErrorCode::resolution_error, "scalar subquery must return one column");
                    }
                } else if constexpr (std::is_same_v<T, Like>) {
                    recurse(n.operand);
                    recurse(n.pattern);
                } else if constexpr (std::is_same_v<T, Function>) {
                    check_function(n);
                    if (n.is_aggregate()) {
                        if (ctx == ExprContext::no_aggregates) {
                            throw Error(ErrorCode::resolution_error, "aggregate function not allowed here");
                        }
                        if (ctx == ExprContext::inside_aggregate) {
                            throw Error(ErrorCode::resolution_error, "nested aggregate function");
                        }
                        resolve_all(n.args, scope, ExprContext::inside_aggregate, alias_source);
                    } else {
                        resolve_all(n.args, scope, ctx, alias_source);
                    }
                } else if constexpr (std::is_same_v<T, Case>) {
                    recurse(n.operand);
                    for (auto& [when, then] : n.branches) {
                        recurse(when);
                        recurse(then);
                    }
                    recurse(n.otherwise);
                } else if constexpr (std::is_same_v<T, Cast>) {
                    recurse(n.operand);
                }
            },
            e->node);
    }

    static void check_function(const Function& fn) {
        const std::size_t argc = fn.args.size();
        auto arity = [&](std::size_t lo, std::size_t hi) {
            if (argc < lo || argc > hi) {
                throw Error(ErrorCode::resolution_error, "wrong number of arguments to " + fn.name + "()");
            }
        };
        if (fn.star && fn.name != "count") throw Error(ErrorCode::resolution_error, fn.name + "(*) is not valid");
        if (fn.distinct && !fn.is_aggregate()) {
            throw Error(ErrorCode::resolution_error, "DISTINCT in non-aggregate function " + fn.name + "()");
        }
        if (fn.name == "count") {
            if (!fn.star) arity(1, 1);
        } else if (fn.name == "sum" || fn.name == "avg") {
            arity(1, 1);
        } else if (fn.name == "min" || fn.name == "max") {
            if (argc != 1) unsupported("multi-argument " + fn.name + "()");
        } else if (fn.name == "lower" || fn.name == "upper" || fn.name == "length" || fn.name == "abs" ||
                   fn.name == "trim") {
            arity(1, 1);
        } else if (fn.name == "round") {
            arity(1, 2);
        } else if (fn.name == "coalesce") {
            arity(1, 64);
        } else if (fn.name == "ifnull" || fn.name == "nullif") {
            arity(2, 2);
        } else if (fn.name == "substr" || fn.name == "substring") {
            arity(2, 3);
        } else {
            unsupported("function " + fn.name + "()");
        }
    }

public:
    static bool contains_aggregate(const Expr& e) {
        return std::visit(
            [](const auto& n) -> bool {
                using T = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<T, Function>) {
                    if (n.is_aggregate()) return true;
                    for (const auto& a : n.args) {
                        if (contains_aggregate(*a)) return true;
                    }
                    return false;
                } else if constexpr (std::is_same_v<T, Unary>) {
                    return contains_aggregate(*n.operand);
                } else if constexpr (std::is_same_v<T, Binary>) {
                    return contains_aggregate(*n.lhs) || contains_aggregate(*n.rhs);
                } else if constexpr (std::is_same_v<T, IsNull>) {
                    return contains_aggregate(*n.operand);
                } else if constexpr (std::is_same_v<T, Between>) {
                    return contains_aggregate(*n.operand) || contains_aggregate(*n.low) ||
                           contains_aggregate(*n.high);
                } else if constexpr (std::is_same_v<T, InList>) {
                    if (contains_aggregate(*n.operand)) return true;
                    for (const auto& i : n.items) {
                        if (contains_aggregate(*i)) return true;
                    }
                    return false;
                } else if constexpr (std::is_same_v<T, InSubquery>) {
                    return contains_aggregate(*n.operand);
                } else if constexpr (std::is_same_v<T, Like>) {
                    return contains_aggregate(*n.operand) || contains_aggregate(*n.pattern);
                } else if constexpr (std::is_same_v<T, Case>) {
                    if (n.operand && contains_aggregate(*n.operand)) return true;
                    for (const auto& [w, t] : n.branches) {
                        if (contains_aggregate(*w) || contains_aggregate(*t)) return true;
                    }
                    return n.otherwise && contains_aggregate(*n.otherwise);
                } else if constexpr (std::is_same_v<T, Cast>) {
                    return contains_aggregate(*n.operand);
                } else {
                    return false;
                }
            },
            e.node);
    }
};

}  // namespace

Ast parse_sql(std::string_view text, const DatabaseSpec& db) {
    Parser parser(tokenize(text));
    Ast ast{parser.statement()};
    Resolver resolver(db);
    resolver.resolve(*ast.root, nullptr);
    return ast;
}

}  // namespace plsq::sql
