#include "plsq/value.hpp"

#include <cmath>
#include <cstdio>

namespace plsq {

std::string_view to_string(ColumnType type) noexcept {
    switch (type) {
        case ColumnType::text: return "text";
        case ColumnType::integer: return "integer";
        case ColumnType::real: return "real";
    }
    return "text";
}

std::optional<ColumnType> column_type_from_string(std::string_view name) noexcept {
    if (name == "text") return ColumnType::text;
    if (name == "integer") return ColumnType::integer;
    if (name == "real") return ColumnType::real;
    return std::nullopt;
}

namespace {

std::string format_real(double v) {
    if (std::isfinite(v) && v == std::trunc(v) && std::fabs(v) < 9.0e15) {
        return std::to_string(static_cast<std::int64_t>(v));
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

}  // namespace

std::string Value::canonical() const {
    if (is_null()) return "NULL";
    if (is_integer()) return std::to_string(as_integer());
    if (is_real()) return format_real(as_real());
    std::string out = "'";
    for (char c : as_text()) {
        if (c == '\'') out += '\'';
        out += c;
    }
    out += '\'';
    return out;
}

std::string Value::display() const {
    if (is_text()) return as_text();
    return canonical();
}

std::strong_ordering total_order(const Value& a, const Value& b) {
    auto rank = [](const Value& v) {
        if (v.is_null()) return 0;
        if (v.is_numeric()) return 1;
        return 2;
    };
    const int ra = rank(a);
    const int rb = rank(b);
    if (ra != rb) return ra <=> rb;
    if (ra == 0) return std::strong_ordering::equal;
    if (ra == 1) {
        if (a.is_integer() && b.is_integer()) return a.as_integer() <=> b.as_integer();
        const double x = a.as_number();
        const double y = b.as_number();
        if (x < y) return std::strong_ordering::less;
        if (x > y) return std::strong_ordering::greater;
        return std::strong_ordering::equal;
    }
    const int c = a.as_text().compare(b.as_text());
    return c < 0 ? std::strong_ordering::less : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
}

bool conforms(const Value& value, ColumnType type) noexcept {
    if (value.is_null()) return true;
    switch (type) {
        case ColumnType::text: return value.is_text();
        case ColumnType::integer: return value.is_integer();
        case ColumnType::real: return value.is_numeric();
    }
    return false;
}

}  // namespace plsq
