#include "plsq/executor.hpp"

#include "plsq/error.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <unordered_map>

namespace plsq {

namespace {

using namespace plsq::sql;

[[noreturn]] void fail(const std::string& message) { throw Error(ErrorCode::execution_error, message); }

// Tri-state truth value: nullopt is SQL UNKNOWN.
using Truth = std::optional<bool>;

Value from_truth(Truth t) {
    if (!t) return Value(Null{});
    return Value(*t ? 1 : 0);
}

Truth to_truth(const Value& v) {
    if (v.is_null()) return std::nullopt;
    if (v.is_integer()) return v.as_integer() != 0;
    if (v.is_real()) return v.as_real() != 0.0;
    fail("text value used as a condition");
}

// -1/0/1 comparison, nullopt when either side is NULL.
std::optional<int> compare(const Value& a, const Value& b) {
    if (a.is_null() || b.is_null()) return std::nullopt;
    if (a.is_numeric() != b.is_numeric()) fail("type mismatch in comparison");
    const auto ord = total_order(a, b);
    if (ord < 0) return -1;
    if (ord > 0) return 1;
    return 0;
}

std::string row_key(const Row& row) {
    std::string key;
    for (const auto& v : row) {
        key += v.canonical();
        key += '\x1f';
    }
    return key;
}

std::string text_of(const Value& v) { return v.is_text() ? v.as_text() : v.canonical(); }

bool like_match(std::string_view text, std::string_view pattern) {
    // Iterative wildcard match with backtracking on the last '%'.
    std::size_t t = 0, p = 0, star_p = std::string_view::npos, star_t = 0;
    auto eq = [](char a, char b) {
        return std::tolower(static_cast<unsigned char>(a)) == std::tolower(static_cast<unsigned char>(b));
    };
    while (t < text.size()) {
        if (p < pattern.size() && (pattern[p] == '_' || (pattern[p] != '%' && eq(pattern[p], text[t])))) {
            ++t;
            ++p;
        } else if (p < pattern.size() && pattern[p] == '%') {
            star_p = p++;
            star_t = t;
        } else if (star_p != std::string_view::npos) {
            p = star_p + 1;
            t = ++star_t;
        } else {
            return false;
        }
    }
    while (p < pattern.size() && pattern[p] == '%') ++p;
    return p == pattern.size();
}

Value arithmetic(BinaryOp op, const Value& a, const Value& b) {
    if (a.is_null() || b.is_null()) return Value(Null{});
    if (!a.is_numeric() || !b.is_numeric()) fail("arithmetic on non-numeric value");
    if (a.is_integer() && b.is_integer()) {
        const std::int64_t x = a.as_integer();
        const std::int64_t y = b.as_integer();
        std::int64_t r = 0;
        switch (op) {
            case BinaryOp::add:
                if (__builtin_add_overflow(x, y, &r)) fail("integer overflow");
                return Value(r);
            case BinaryOp::sub:
                if (__builtin_sub_overflow(x, y, &r)) fail("integer overflow");
                return Value(r);
            case BinaryOp::mul:
                if (__builtin_mul_overflow(x, y, &r)) fail("integer overflow");
                return Value(r);
            case BinaryOp::div:
                if (y == 0) fail("division by zero");
                if (x == INT64_MIN && y == -1) fail("integer overflow");
                return Value(x / y);
            case BinaryOp::mod:
                if (y == 0) fail("division by zero");
                if (y == -1) return Value(std::int64_t{0});
                return Value(x % y);
            default: break;
        }
    }
    const double x = a.as_number();
    const double y = b.as_number();
    switch (op) {
        case BinaryOp::add: return Value(x + y);
        case BinaryOp::sub: return Value(x - y);
        case BinaryOp::mul: return Value(x * y);
        case BinaryOp::div:
            if (y == 0.0) fail("division by zero");
            return Value(x / y);
        case BinaryOp::mod:
            if (y == 0.0) fail("division by zero");
            return Value(std::fmod(x, y));
        default: break;
    }
    fail("bad arithmetic operator");
}

using Binding = std::vector<const Row*>;

struct Frame {
    const Select* select{nullptr};
    const Binding* row{nullptr};                 // null inside an empty aggregate group
    const std::vector<Binding>* group{nullptr};  // set in aggregate context
    const Row* outputs{nullptr};                 // projected values, for ORDER BY
    const Frame* parent{nullptr};
};

struct ProducedRow {
    Row values;
    std::vector<Value> sort_keys;
};

class Executor {
public:
    explicit Executor(const DatabaseSpec& db) : db_(db) {}

    // Full statement: core (plus set operation), ordering, offset/limit.
    std::vector<Row> run(const Select& s, const Frame* parent) {
        std::vector<ProducedRow> produced = run_core(s, parent, !s.set_op);
        if (s.set_op) produced = combine(s.set_op->kind, std::move(produced), run_core(*s.set_op->rhs, parent, false));
        if (!s.order_by.empty()) {
            if (s.set_op) {
                for (auto& r : produced) {
                    r.sort_keys.clear();
                    for (const auto& o : s.order_by) {
                        r.sort_keys.push_back(r.values.at(std::get<OutputRef>(o.expr->node).index));
                    }
                }
            }
            std::stable_sort(produced.begin(), produced.end(), [&](const ProducedRow& a, const ProducedRow& b) {
                for (std::size_t i = 0; i < s.order_by.size(); ++i) {
                    auto ord = total_order(a.sort_keys[i], b.sort_keys[i]);
                    if (ord == 0) continue;
                    return s.order_by[i].descending ? ord > 0 : ord < 0;
                }
                return false;
            });
        }
        std::vector<Row> out;
        const std::size_t begin = s.offset ? static_cast<std::size_t>(*s.offset) : 0;
        const std::size_t count = s.limit ? static_cast<std::size_t>(*s.limit) : produced.size();
        for (std::size_t i = begin; i < produced.size() && out.size() < count; ++i) {
            out.push_back(std::move(produced[i].values));
        }
        return out;
    }

private:
    const DatabaseSpec& db_;

    static std::vector<ProducedRow> combine(SetOpKind kind, std::vector<ProducedRow> lhs, std::vector<ProducedRow> rhs) {
        std::vector<ProducedRow> out;
        std::set<std::string> seen;
        auto push_unique = [&](ProducedRow& r) {
            if (seen.insert(row_key(r.values)).second) out.push_back(std::move(r));
        };
        switch (kind) {
            case SetOpKind::union_all:
                out = std::move(lhs);
                for (auto& r : rhs) out.push_back(std::move(r));
                return out;
            case SetOpKind::union_distinct:
                for (auto& r : lhs) push_unique(r);
                for (auto& r : rhs) push_unique(r);
                return out;
            case SetOpKind::intersect:
            case SetOpKind::except: {
                std::set<std::string> right;
                for (const auto& r : rhs) right.insert(row_key(r.values));
                const bool keep_present = kind == SetOpKind::intersect;
                for (auto& r : lhs) {
                    if (right.contains(row_key(r.values)) == keep_present) push_unique(r);
                }
                return out;
            }
        }
        return out;
    }

    std::vector<Binding> join_sources(const Select& s, const Frame* parent) {
        std::vector<Binding> bindings{Binding(s.sources.size(), nullptr)};
        for (std::size_t i = 0; i < s.sources.size(); ++i) {
            const Source& src = s.sources[i];
            std::vector<Binding> next;
            for (const auto& b : bindings) {
                bool matched = false;
                for (const auto& row : src.spec->rows) {
                    Binding candidate = b;
                    candidate[i] = &row;
                    if (src.on) {
                        Frame f{&s, &candidate, nullptr, nullptr, parent};
                        if (to_truth(eval(*src.on, f)) != true) continue;
                    }
                    matched = true;
                    next.push_back(std::move(candidate));
                }
                if (!matched && src.join == JoinKind::left) next.push_back(b);
            }
            bindings = std::move(next);
        }
        return bindings;
    }

    void project(const Select& s, const Frame& f, Row& out) {
        for (const auto& item : s.items) {
            if (const auto* star = std::get_if<Star>(&item.expr->node)) {
                for (std::size_t i = 0; i < s.sources.size(); ++i) {
                    if (star->source && *star->source != i) continue;
                    const Row* r = f.row ? (*f.row)[i] : nullptr;
                    const std::size_t width = s.sources[i].spec->columns.size();
                    for (std::size_t c = 0; c < width; ++c) out.push_back(r ? (*r)[c] : Value(Null{}));
                }
                continue;
            }
            out.push_back(eval(*item.expr, f));
        }
    }

    std::vector<ProducedRow> run_core(const Select& s, const Frame* parent, bool with_sort_keys) {
        std::vector<Binding> bindings = join_sources(s, parent);
        if (s.where) {
            std::vector<Binding> kept;
            for (auto& b : bindings) {
                Frame f{&s, &b, nullptr, nullptr, parent};
                if (to_truth(eval(*s.where, f)) == true) kept.push_back(std::move(b));
            }
            bindings = std::move(kept);
        }

        std::vector<ProducedRow> produced;
        auto emit = [&](const Frame& base) {
            ProducedRow r;
            project(s, base, r.values);
            if (with_sort_keys) {
                Frame f = base;
                f.outputs = &r.values;
                for (const auto& o : s.order_by) r.sort_keys.push_back(eval(*o.expr, f));
            }
            produced.push_back(std::move(r));
        };

        if (s.aggregate) {
            std::vector<std::vector<Binding>> groups;
            if (s.group_by.empty()) {
                groups.push_back(std::move(bindings));
            } else {
                std::unordered_map<std::string, std::size_t> index;
                for (auto& b : bindings) {
                    Frame f{&s, &b, nullptr, nullptr, parent};
                    Row key_values;
                    for (const auto& g : s.group_by) key_values.push_back(eval(*g, f));
                    auto [it, inserted] = index.try_emplace(row_key(key_values), groups.size());
                    if (inserted) groups.emplace_back();
                    groups[it->second].push_back(std::move(b));
                }
            }
            for (const auto& group : groups) {
                Frame f{&s, group.empty() ? nullptr : &group.front(), &group, nullptr, parent};
                if (s.having && to_truth(eval(*s.having, f)) != true) continue;
                emit(f);
            }
        } else {
            for (const auto& b : bindings) emit(Frame{&s, &b, nullptr, nullptr, parent});
        }

        if (s.distinct) {
            std::vector<ProducedRow> unique;
            std::set<std::string> seen;
            for (auto& r : produced) {
                if (seen.insert(row_key(r.values)).second) unique.push_back(std::move(r));
            }
            produced = std::move(unique);
        }
        return produced;
    }

    Value column(const ColumnRef& ref, const Frame& f) {
        const Frame* target = &f;
        for (int d = 0; d < ref.depth; ++d) {
            target = target->parent;
            if (!target) fail("unbound outer reference");
        }
        if (!target->row) return Value(Null{});
        const Row* row = (*target->row)[ref.source];
        if (!row) return Value(Null{});
        return (*row)[ref.column];
    }

    Value aggregate(const Function& fn, const Frame& f) {
        if (!f.group) fail("aggregate outside of aggregate context");
        const auto& group = *f.group;
        if (fn.star) return Value(static_cast<std::int64_t>(group.size()));
        std::vector<Value> values;
        std::set<std::string> seen;
        for (const auto& b : group) {
            Frame inner{f.select, &b, nullptr, nullptr, f.parent};
            Value v = eval(*fn.args[0], inner);
            if (v.is_null()) continue;
            if (fn.distinct && !seen.insert(v.canonical()).second) continue;
            values.push_back(std::move(v));
        }
        if (fn.name == "count") return Value(static_cast<std::int64_t>(values.size()));
        if (values.empty()) return Value(Null{});
        if (fn.name == "sum" || fn.name == "avg") {
            bool all_integer = true;
            std::int64_t isum = 0;
            double rsum = 0.0;
            for (const auto& v : values) {
                if (!v.is_numeric()) fail(fn.name + "() of non-numeric value");
                if (v.is_integer() && all_integer) {
                    if (__builtin_add_overflow(isum, v.as_integer(), &isum)) fail("integer overflow");
                } else {
                    all_integer = false;
                }
                rsum += v.as_number();
            }
            if (fn.name == "avg") return Value(rsum / static_cast<double>(values.size()));
            return all_integer ? Value(isum) : Value(rsum);
        }
        // min / max
        Value best = values.front();
        for (std::size_t i = 1; i < values.size(); ++i) {
            const int c = *compare(values[i], best);
            if ((fn.name == "min" && c < 0) || (fn.name == "max" && c > 0)) best = values[i];
        }
        return best;
    }

    Value scalar_function(const Function& fn, const Frame& f) {
        std::vector<Value> args;
        args.reserve(fn.args.size());
        if (fn.name == "coalesce" || fn.name == "ifnull") {
            for (const auto& a : fn.args) {
                Value v = eval(*a, f);
                if (!v.is_null()) return v;
            }
            return Value(Null{});
        }
        for (const auto& a : fn.args) args.push_back(eval(*a, f));
        if (fn.name == "nullif") {
            auto c = compare(args[0], args[1]);
            return c && *c == 0 ? Value(Null{}) : args[0];
        }
        if (args[0].is_null()) return Value(Null{});
        if (fn.name == "lower" || fn.name == "upper") {
            std::string s = text_of(args[0]);
            for (char& c : s) {
                c = static_cast<char>(fn.name == "lower" ? std::tolower(static_cast<unsigned char>(c))
                                                         : std::toupper(static_cast<unsigned char>(c)));
            }
            return Value(std::move(s));
        }
        if (fn.name == "trim") {
            std::string s = text_of(args[0]);
            const auto b = s.find_first_not_of(' ');
            if (b == std::string::npos) return Value(std::string());
            const auto e = s.find_last_not_of(' ');
            return Value(s.substr(b, e - b + 1));
        }
        if (fn.name == "length") return Value(static_cast<std::int64_t>(text_of(args[0]).size()));
        if (fn.name == "abs") {
            if (!args[0].is_numeric()) fail("abs() of non-numeric value");
            if (args[0].is_integer()) {
                if (args[0].as_integer() == INT64_MIN) fail("integer overflow");
                return Value(static_cast<std::int64_t>(std::llabs(args[0].as_integer())));
            }
            return Value(std::fabs(args[0].as_real()));
        }
        if (fn.name == "round") {
            if (!args[0].is_numeric()) fail("round() of non-numeric value");
            std::int64_t digits = 0;
            if (args.size() == 2) {
                if (!args[1].is_integer()) fail("round() precision must be an integer");
                digits = args[1].as_integer();
            }
            const double scale = std::pow(10.0, static_cast<double>(digits));
            return Value(std::round(args[0].as_number() * scale) / scale);
        }
        if (fn.name == "substr" || fn.name == "substring") {
            const std::string s = text_of(args[0]);
            if (!args[1].is_integer() || (args.size() == 3 && !args[2].is_integer())) {
                fail("substr() bounds must be integers");
            }
            std::int64_t start = args[1].as_integer();
            std::int64_t len = args.size() == 3 ? args[2].as_integer() : static_cast<std::int64_t>(s.size());
            if (start < 1) {
                len += start - 1;
                start = 1;
            }
            if (len <= 0 || start > static_cast<std::int64_t>(s.size())) return Value(std::string());
            return Value(s.substr(static_cast<std::size_t>(start - 1), static_cast<std::size_t>(len)));
        }
        fail("unknown function " + fn.name);
    }

    Value cast(const Value& v, ColumnType type) {
        if (v.is_null()) return v;
        switch (type) {
            case ColumnType::text: return Value(text_of(v));
            case ColumnType::integer:
                if (v.is_integer()) return v;
                if (v.is_real()) return Value(static_cast<std::int64_t>(std::trunc(v.as_real())));
                try {
                    std::size_t used = 0;
                    const long long parsed = std::stoll(v.as_text(), &used);
                    if (used != v.as_text().size()) fail("cannot cast '" + v.as_text() + "' to integer");
                    return Value(static_cast<std::int64_t>(parsed));
                } catch (const std::logic_error&) {
                    fail("cannot cast '" + v.as_text() + "' to integer");
                }
            case ColumnType::real:
                if (v.is_numeric()) return Value(v.as_number());
                try {
                    std::size_t used = 0;
                    const double parsed = std::stod(v.as_text(), &used);
                    if (used != v.as_text().size()) fail("cannot cast '" + v.as_text() + "' to real");
                    return Value(parsed);
                } catch (const std::logic_error&) {
                    fail("cannot cast '" + v.as_text() + "' to real");
                }
        }
        return v;
    }

    Value subquery_scalar(const Select& sub, const Frame& f) {
        auto rows = run(sub, &f);
        if (rows.empty()) return Value(Null{});
        if (rows.size() > 1) fail("scalar subquery returned more than one row");
        return rows.front().front();
    }

    Value eval(const Expr& e, const Frame& f) {
        return std::visit(
            [&](const auto& n) -> Value {
                using T = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<T, Literal>) {
                    return n.value;
                } else if constexpr (std::is_same_v<T, ColumnRef>) {
                    return column(n, f);
                } else if constexpr (std::is_same_v<T, Star>) {
                    fail("'*' evaluated as a value");
                } else if constexpr (std::is_same_v<T, OutputRef>) {
                    if (!f.outputs) fail("output reference outside ORDER BY");
                    return (*f.outputs).at(n.index);
                } else if constexpr (std::is_same_v<T, Unary>) {
                    Value v = eval(*n.operand, f);
                    if (n.op == UnaryOp::logical_not) {
                        Truth t = to_truth(v);
                        return t ? from_truth(!*t) : Value(Null{});
                    }
                    if (v.is_null()) return v;
                    if (v.is_integer()) {
                        if (v.as_integer() == INT64_MIN) fail("integer overflow");
                        return Value(-v.as_integer());
                    }
                    if (v.is_real()) return Value(-v.as_real());
                    fail("negation of non-numeric value");
                } else if constexpr (std::is_same_v<T, Binary>) {
                    return binary(n, f);
                } else if constexpr (std::is_same_v<T, IsNull>) {
                    return Value(eval(*n.operand, f).is_null() != n.negated ? 1 : 0);
                } else if constexpr (std::is_same_v<T, Between>) {
                    Value v = eval(*n.operand, f);
                    auto lo = compare(v, eval(*n.low, f));
                    auto hi = compare(v, eval(*n.high, f));
                    Truth a = lo ? Truth(*lo >= 0) : std::nullopt;
                    Truth b = hi ? Truth(*hi <= 0) : std::nullopt;
                    Truth both;
                    if (a == false || b == false) both = false;
                    else if (a && b) both = true;
                    if (n.negated && both) both = !*both;
                    return from_truth(both);
                } else if constexpr (std::is_same_v<T, InList>) {
                    std::vector<Value> items;
                    for (const auto& i : n.items) items.push_back(eval(*i, f));
                    return membership(eval(*n.operand, f), items, n.negated);
                } else if constexpr (std::is_same_v<T, InSubquery>) {
                    Value v = eval(*n.operand, f);
                    std::vector<Value> items;
                    for (auto& r : run(*n.subquery, &f)) items.push_back(std::move(r.front()));
                    return membership(v, items, n.negated);
                } else if constexpr (std::is_same_v<T, Exists>) {
                    const bool any = !run(*n.subquery, &f).empty();
                    return Value(any != n.negated ? 1 : 0);
                } else if constexpr (std::is_same_v<T, ScalarSubquery>) {
                    return subquery_scalar(*n.subquery, f);
                } else if constexpr (std::is_same_v<T, Like>) {
                    Value v = eval(*n.operand, f);
                    Value p = eval(*n.pattern, f);
                    if (v.is_null() || p.is_null()) return Value(Null{});
                    return Value(like_match(text_of(v), text_of(p)) != n.negated ? 1 : 0);
                } else if constexpr (std::is_same_v<T, Function>) {
                    return n.is_aggregate() ? aggregate(n, f) : scalar_function(n, f);
                } else if constexpr (std::is_same_v<T, Case>) {
                    Value operand = n.operand ? eval(*n.operand, f) : Value(Null{});
                    for (const auto& [when, then] : n.branches) {
                        Value w = eval(*when, f);
                        bool hit = false;
                        if (n.operand) {
                            auto c = compare(operand, w);
                            hit = c && *c == 0;
                        } else {
                            hit = to_truth(w) == true;
                        }
                        if (hit) return eval(*then, f);
                    }
                    return n.otherwise ? eval(*n.otherwise, f) : Value(Null{});
                } else if constexpr (std::is_same_v<T, Cast>) {
                    return cast(eval(*n.operand, f), n.type);
                }
            },
            e.node);
    }

    static Value membership(const Value& v, const std::vector<Value>& items, bool negated) {
        if (v.is_null()) return Value(Null{});
        bool saw_null = false;
        for (const auto& item : items) {
            auto c = compare(v, item);
            if (!c) {
                saw_null = true;
                continue;
            }
            if (*c == 0) return Value(negated ? 0 : 1);
        }
        if (saw_null) return Value(Null{});
        return Value(negated ? 1 : 0);
    }

    Value binary(const Binary& n, const Frame& f) {
        switch (n.op) {
            case BinaryOp::logical_and: {
                Truth a = to_truth(eval(*n.lhs, f));
                if (a == false) return Value(0);
                Truth b = to_truth(eval(*n.rhs, f));
                if (b == false) return Value(0);
                if (a && b) return Value(1);
                return Value(Null{});
            }
            case BinaryOp::logical_or: {
                Truth a = to_truth(eval(*n.lhs, f));
                if (a == true) return Value(1);
                Truth b = to_truth(eval(*n.rhs, f));
                if (b == true) return Value(1);
                if (a && b) return Value(0);
                return Value(Null{});
            }
            default: break;
        }
        Value a = eval(*n.lhs, f);
        Value b = eval(*n.rhs, f);
        switch (n.op) {
            case BinaryOp::concat:
                if (a.is_null() || b.is_null()) return Value(Null{});
                return Value(text_of(a) + text_of(b));
            case BinaryOp::eq:
            case BinaryOp::ne:
            case BinaryOp::lt:
            case BinaryOp::le:
            case BinaryOp::gt:
            case BinaryOp::ge: {
                auto c = compare(a, b);
                if (!c) return Value(Null{});
                bool r = false;
                switch (n.op) {
                    case BinaryOp::eq: r = *c == 0; break;
                    case BinaryOp::ne: r = *c != 0; break;
                    case BinaryOp::lt: r = *c < 0; break;
                    case BinaryOp::le: r = *c <= 0; break;
                    case BinaryOp::gt: r = *c > 0; break;
                    default: r = *c >= 0; break;
                }
                return Value(r ? 1 : 0);
            }
            default: return arithmetic(n.op, a, b);
        }
    }
};

}  // namespace

ResultTable execute(const sql::Ast& ast, const DatabaseSpec& db) {
    Executor exec(db);
    ResultTable out;
    out.columns = ast.root->output_names;
    out.rows = exec.run(*ast.root, nullptr);
    out.ordered = !ast.root->order_by.empty();
    return out;
}

}  // namespace plsq
