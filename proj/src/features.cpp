#include "plsq/features.hpp"

#include "plsq/sql/parser.hpp"

#include <array>

namespace plsq {

namespace {

constexpr std::array<std::pair<Clause, std::string_view>, 10> keywords{{
    {Clause::select, "SELECT"},
    {Clause::from, "FROM"},
    {Clause::join, "JOIN"},
    {Clause::where, "WHERE"},
    {Clause::group_by, "GROUP BY"},
    {Clause::having, "HAVING"},
    {Clause::order_by, "ORDER BY"},
    {Clause::limit, "LIMIT"},
    {Clause::distinct, "DISTINCT"},
    {Clause::set_op, "SET OP"},
}};

void split_conjuncts(const sql::Expr& e, std::vector<const sql::Expr*>& out) {
    if (const auto* b = std::get_if<sql::Binary>(&e.node); b && b->op == sql::BinaryOp::logical_and) {
        split_conjuncts(*b->lhs, out);
        split_conjuncts(*b->rhs, out);
        return;
    }
    out.push_back(&e);
}

void collect(const sql::Select& s, FeatureSet& out) {
    using sql::render_expr;
    for (const auto& item : s.items) out.insert({Clause::select, render_expr(*item.expr, s)});
    for (const auto& src : s.sources) {
        std::string name = src.canonical;
        switch (src.join) {
            case sql::JoinKind::none: out.insert({Clause::from, name}); break;
            case sql::JoinKind::inner: out.insert({Clause::join, name + "⋈" + render_expr(*src.on, s)}); break;
            case sql::JoinKind::left:
                out.insert({Clause::join, "left " + name + "⋈" + render_expr(*src.on, s)});
                break;
            case sql::JoinKind::cross: out.insert({Clause::join, "cross " + name}); break;
        }
    }
    std::vector<const sql::Expr*> conjuncts;
    if (s.where) split_conjuncts(*s.where, conjuncts);
    for (const auto* c : conjuncts) out.insert({Clause::where, render_expr(*c, s)});
    for (const auto& g : s.group_by) out.insert({Clause::group_by, render_expr(*g, s)});
    conjuncts.clear();
    if (s.having) split_conjuncts(*s.having, conjuncts);
    for (const auto* c : conjuncts) out.insert({Clause::having, render_expr(*c, s)});
    for (const auto& o : s.order_by) {
        out.insert({Clause::order_by, render_expr(*o.expr, s) + (o.descending ? " desc" : " asc")});
    }
    if (s.limit) {
        std::string v = std::to_string(*s.limit);
        if (s.offset) v += " offset " + std::to_string(*s.offset);
        out.insert({Clause::limit, v});
    }
    if (s.distinct) out.insert({Clause::distinct, ""});
    if (s.set_op) {
        static constexpr std::array<std::string_view, 4> kinds{"union", "union all", "intersect", "except"};
        out.insert({Clause::set_op, std::string(kinds[static_cast<std::size_t>(s.set_op->kind)])});
        collect(*s.set_op->rhs, out);
    }
}

}  // namespace

std::string_view clause_keyword(Clause clause) noexcept {
    for (const auto& [c, kw] : keywords) {
        if (c == clause) return kw;
    }
    return "?";
}

std::string AtomicFeature::id() const {
    std::string out(clause_keyword(keyword));
    if (!value.empty()) {
        out += ' ';
        out += value;
    }
    return out;
}

std::optional<AtomicFeature> parse_feature_id(std::string_view id) {
    // Longest keyword first so "SELECT" never shadows a longer prefix.
    std::optional<AtomicFeature> best;
    std::size_t best_len = 0;
    for (const auto& [c, kw] : keywords) {
        if (id.size() < kw.size() || id.substr(0, kw.size()) != kw) continue;
        if (id.size() > kw.size() && id[kw.size()] != ' ') continue;
        if (kw.size() <= best_len) continue;
        best_len = kw.size();
        const std::string_view rest = id.size() > kw.size() ? id.substr(kw.size() + 1) : std::string_view{};
        best = AtomicFeature{c, std::string(rest)};
    }
    return best;
}

FeatureSet extract_features(const sql::Ast& ast) {
    FeatureSet out;
    collect(*ast.root, out);
    return out;
}

}  // namespace plsq
