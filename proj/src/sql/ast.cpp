#include "plsq/sql/ast.hpp"

#include <algorithm>
#include <array>
#include <string_view>

namespace plsq::sql {

bool Function::is_aggregate() const noexcept {
    static constexpr std::array<std::string_view, 5> names{"count", "sum", "avg", "min", "max"};
    return std::find(names.begin(), names.end(), name) != names.end();
}

namespace {

ExprPtr clone_ptr(const ExprPtr& p) { return p ? clone(*p) : nullptr; }
SelectPtr clone_ptr(const SelectPtr& p) { return p ? clone(*p) : nullptr; }

std::vector<ExprPtr> clone_all(const std::vector<ExprPtr>& items) {
    std::vector<ExprPtr> out;
    out.reserve(items.size());
    for (const auto& e : items) out.push_back(clone_ptr(e));
    return out;
}

struct Cloner {
    ExprPtr operator()(const Literal& n) const { return make_expr(Literal{n}); }
    ExprPtr operator()(const ColumnRef& n) const { return make_expr(ColumnRef{n}); }
    ExprPtr operator()(const Star& n) const { return make_expr(Star{n}); }
    ExprPtr operator()(const OutputRef& n) const { return make_expr(OutputRef{n}); }
    ExprPtr operator()(const Unary& n) const { return make_expr(Unary{n.op, clone_ptr(n.operand)}); }
    ExprPtr operator()(const Binary& n) const {
        return make_expr(Binary{n.op, clone_ptr(n.lhs), clone_ptr(n.rhs)});
    }
    ExprPtr operator()(const IsNull& n) const { return make_expr(IsNull{clone_ptr(n.operand), n.negated}); }
    ExprPtr operator()(const Between& n) const {
        return make_expr(Between{clone_ptr(n.operand), clone_ptr(n.low), clone_ptr(n.high), n.negated});
    }
    ExprPtr operator()(const InList& n) const {
        return make_expr(InList{clone_ptr(n.operand), clone_all(n.items), n.negated});
    }
    ExprPtr operator()(const InSubquery& n) const {
        return make_expr(InSubquery{clone_ptr(n.operand), clone_ptr(n.subquery), n.negated});
    }
    ExprPtr operator()(const Exists& n) const { return make_expr(Exists{clone_ptr(n.subquery), n.negated}); }
    ExprPtr operator()(const ScalarSubquery& n) const { return make_expr(ScalarSubquery{clone_ptr(n.subquery)}); }
    ExprPtr operator()(const Like& n) const {
        return make_expr(Like{clone_ptr(n.operand), clone_ptr(n.pattern), n.negated});
    }
    ExprPtr operator()(const Function& n) const {
        return make_expr(Function{n.name, clone_all(n.args), n.distinct, n.star});
    }
    ExprPtr operator()(const Case& n) const {
        Case c;
        c.operand = clone_ptr(n.operand);
        for (const auto& [when, then] : n.branches) c.branches.emplace_back(clone_ptr(when), clone_ptr(then));
        c.otherwise = clone_ptr(n.otherwise);
        return make_expr(std::move(c));
    }
    ExprPtr operator()(const Cast& n) const { return make_expr(Cast{clone_ptr(n.operand), n.type}); }
};

}  // namespace

ExprPtr clone(const Expr& expr) { return std::visit(Cloner{}, expr.node); }

SelectPtr clone(const Select& s) {
    auto out = std::make_unique<Select>();
    out->distinct = s.distinct;
    for (const auto& item : s.items) out->items.push_back({clone_ptr(item.expr), item.alias});
    for (const auto& src : s.sources) {
        out->sources.push_back({src.table, src.alias, src.canonical, src.spec, src.join, clone_ptr(src.on)});
    }
    out->where = clone_ptr(s.where);
    out->group_by = clone_all(s.group_by);
    out->having = clone_ptr(s.having);
    if (s.set_op) out->set_op = SetOp{s.set_op->kind, clone_ptr(s.set_op->rhs)};
    for (const auto& o : s.order_by) out->order_by.push_back({clone_ptr(o.expr), o.descending});
    out->limit = s.limit;
    out->offset = s.offset;
    out->aggregate = s.aggregate;
    out->output_names = s.output_names;
    return out;
}

}  // namespace plsq::sql
