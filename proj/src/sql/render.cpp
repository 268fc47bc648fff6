#include "plsq/sql/parser.hpp"

namespace plsq::sql {

namespace {

// Binding strength, loosest first.
enum Prec : int {
    prec_or = 1,
    prec_and = 2,
    prec_not = 3,
    prec_compare = 4,
    prec_additive = 5,
    prec_multiplicative = 6,
    prec_concat = 7,
    prec_unary = 8,
    prec_primary = 9,
};

int precedence(BinaryOp op) {
    switch (op) {
        case BinaryOp::logical_or: return prec_or;
        case BinaryOp::logical_and: return prec_and;
        case BinaryOp::eq:
        case BinaryOp::ne:
        case BinaryOp::lt:
        case BinaryOp::le:
        case BinaryOp::gt:
        case BinaryOp::ge: return prec_compare;
        case BinaryOp::add:
        case BinaryOp::sub: return prec_additive;
        case BinaryOp::mul:
        case BinaryOp::div:
        case BinaryOp::mod: return prec_multiplicative;
        case BinaryOp::concat: return prec_concat;
    }
    return prec_primary;
}

const char* spelling(BinaryOp op) {
    switch (op) {
        case BinaryOp::add: return "+";
        case BinaryOp::sub: return "-";
        case BinaryOp::mul: return "*";
        case BinaryOp::div: return "/";
        case BinaryOp::mod: return "%";
        case BinaryOp::concat: return "||";
        case BinaryOp::eq: return "=";
        case BinaryOp::ne: return "<>";
        case BinaryOp::lt: return "<";
        case BinaryOp::le: return "<=";
        case BinaryOp::gt: return ">";
        case BinaryOp::ge: return ">=";
        case BinaryOp::logical_and: return " and ";
        case BinaryOp::logical_or: return " or ";
    }
    return "?";
}

std::string quote(const std::string& text) {
    std::string out = "'";
    for (char c : text) {
        if (c == '\'') out += '\'';
        out += c;
    }
    return out + "'";
}

std::string render_source(const Source& src) {
    const std::string base = fold_case(src.spec ? src.spec->name : src.table);
    if (src.canonical.empty() || src.canonical == base) return base;
    return base + " as " + src.canonical;
}

class Renderer {
public:
    Renderer(const Select& owner, bool bare) : owner_(owner), bare_(bare) {}

    std::string operator()(const Expr& e, int min_prec) const {
        int own = prec_primary;
        std::string text = render(e, own);
        if (own < min_prec) return "(" + text + ")";
        return text;
    }

private:
    const Select& owner_;
    bool bare_;

    std::string sub(const Select& s) const { return canonical_sql(s); }

    std::string render(const Expr& e, int& own) const {
        return std::visit(
            [&](const auto& n) -> std::string {
                using T = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<T, Literal>) {
                    if (n.value.is_text()) return quote(n.value.as_text());
                    if (!n.lexeme.empty()) {
                        if (n.lexeme[0] == '-') own = prec_unary;
                        return fold_case(n.lexeme);
                    }
                    return n.value.canonical();
                } else if constexpr (std::is_same_v<T, ColumnRef>) {
                    if (bare_ || (n.depth == 0 && owner_.sources.size() == 1)) return n.name;
                    return n.table + "." + n.name;
                } else if constexpr (std::is_same_v<T, Star>) {
                    return n.source ? n.table + ".*" : std::string("*");
                } else if constexpr (std::is_same_v<T, OutputRef>) {
                    if (owner_.set_op || n.index >= owner_.items.size() ||
                        std::holds_alternative<Star>(owner_.items[n.index].expr->node)) {
                        return std::to_string(n.index + 1);
                    }
                    return (*this)(*owner_.items[n.index].expr, 0);
                } else if constexpr (std::is_same_v<T, Unary>) {
                    if (n.op == UnaryOp::logical_not) {
                        own = prec_not;
                        return "not " + (*this)(*n.operand, prec_not);
                    }
                    own = prec_unary;
                    std::string inner = (*this)(*n.operand, prec_unary);
                    if (!inner.empty() && inner[0] == '-') inner = "(" + inner + ")";
                    return "-" + inner;
                } else if constexpr (std::is_same_v<T, Binary>) {
                    const int p = precedence(n.op);
                    own = p;
                    const bool non_assoc = p == prec_compare;
                    std::string lhs = (*this)(*n.lhs, non_assoc ? p + 1 : p);
                    std::string rhs = (*this)(*n.rhs, p + 1);
                    if ((n.op == BinaryOp::eq || n.op == BinaryOp::ne) && lhs < rhs) std::swap(lhs, rhs);
                    if (!rhs.empty() && rhs[0] == '-' && p != prec_or && p != prec_and) rhs = "(" + rhs + ")";
                    return lhs + spelling(n.op) + rhs;
                } else if constexpr (std::is_same_v<T, IsNull>) {
                    own = prec_compare;
                    return (*this)(*n.operand, prec_additive) + (n.negated ? " is not null" : " is null");
                } else if constexpr (std::is_same_v<T, Between>) {
                    own = prec_compare;
                    return (*this)(*n.operand, prec_additive) + (n.negated ? " not between " : " between ") +
                           (*this)(*n.low, prec_additive) + " and " + (*this)(*n.high, prec_additive);
                } else if constexpr (std::is_same_v<T, InList>) {
                    own = prec_compare;
                    std::string out = (*this)(*n.operand, prec_additive) + (n.negated ? " not in (" : " in (");
                    for (std::size_t i = 0; i < n.items.size(); ++i) {
                        if (i) out += ",";
                        out += (*this)(*n.items[i], 0);
                    }
                    return out + ")";
                } else if constexpr (std::is_same_v<T, InSubquery>) {
                    own = prec_compare;
                    return (*this)(*n.operand, prec_additive) + (n.negated ? " not in (" : " in (") +
                           sub(*n.subquery) + ")";
                } else if constexpr (std::is_same_v<T, Exists>) {
                    own = n.negated ? prec_not : prec_primary;
                    return std::string(n.negated ? "not exists (" : "exists (") + sub(*n.subquery) + ")";
                } else if constexpr (std::is_same_v<T, ScalarSubquery>) {
                    return "(" + sub(*n.subquery) + ")";
                } else if constexpr (std::is_same_v<T, Like>) {
                    own = prec_compare;
                    return (*this)(*n.operand, prec_additive) + (n.negated ? " not like " : " like ") +
                           (*this)(*n.pattern, prec_additive);
                } else if constexpr (std::is_same_v<T, Function>) {
                    if (n.star) return n.name + "(*)";
                    std::string out = n.name + "(";
                    if (n.distinct) out += "distinct ";
                    for (std::size_t i = 0; i < n.args.size(); ++i) {
                        if (i) out += ",";
                        out += (*this)(*n.args[i], 0);
                    }
                    return out + ")";
                } else if constexpr (std::is_same_v<T, Case>) {
                    std::string out = "case";
                    if (n.operand) out += " " + (*this)(*n.operand, 0);
                    for (const auto& [when, then] : n.branches) {
                        out += " when " + (*this)(*when, 0) + " then " + (*this)(*then, 0);
                    }
                    if (n.otherwise) out += " else " + (*this)(*n.otherwise, 0);
                    return out + " end";
                } else if constexpr (std::is_same_v<T, Cast>) {
                    return "cast(" + (*this)(*n.operand, 0) + " as " + std::string(to_string(n.type)) + ")";
                }
            },
            e.node);
    }
};

}  // namespace

std::string render_expr(const Expr& expr, const Select& owner, bool bare_columns) {
    return Renderer(owner, bare_columns)(expr, 0);
}

std::string canonical_sql(const Select& s) {
    std::string out = "select ";
    if (s.distinct) out += "distinct ";
    for (std::size_t i = 0; i < s.items.size(); ++i) {
        if (i) out += ", ";
        out += render_expr(*s.items[i].expr, s);
    }
    if (!s.sources.empty()) {
        out += " from ";
        for (std::size_t i = 0; i < s.sources.size(); ++i) {
            const auto& src = s.sources[i];
            switch (src.join) {
                case JoinKind::none:
                    if (i) out += ", ";
                    out += render_source(src);
                    break;
                case JoinKind::inner:
                    out += " join " + render_source(src) + " on " + render_expr(*src.on, s);
                    break;
                case JoinKind::left:
                    out += " left join " + render_source(src) + " on " + render_expr(*src.on, s);
                    break;
                case JoinKind::cross:
                    out += " cross join " + render_source(src);
                    break;
            }
        }
    }
    if (s.where) out += " where " + render_expr(*s.where, s);
    if (!s.group_by.empty()) {
        out += " group by ";
        for (std::size_t i = 0; i < s.group_by.size(); ++i) {
            if (i) out += ", ";
            out += render_expr(*s.group_by[i], s);
        }
    }
    if (s.having) out += " having " + render_expr(*s.having, s);
    if (s.set_op) {
        switch (s.set_op->kind) {
            case SetOpKind::union_distinct: out += " union "; break;
            case SetOpKind::union_all: out += " union all "; break;
            case SetOpKind::intersect: out += " intersect "; break;
            case SetOpKind::except: out += " except "; break;
        }
        out += canonical_sql(*s.set_op->rhs);
    }
    if (!s.order_by.empty()) {
        out += " order by ";
        for (std::size_t i = 0; i < s.order_by.size(); ++i) {
            if (i) out += ", ";
            out += render_expr(*s.order_by[i].expr, s) + (s.order_by[i].descending ? " desc" : " asc");
        }
    }
    if (s.limit) out += " limit " + std::to_string(*s.limit);
    if (s.offset) out += " offset " + std::to_string(*s.offset);
    return out;
}

std::string canonical_sql(const Ast& ast) { return canonical_sql(*ast.root); }

}  // namespace plsq::sql
