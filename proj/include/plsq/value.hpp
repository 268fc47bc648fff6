#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

namespace plsq {

enum class ColumnType { text, integer, real };

std::string_view to_string(ColumnType type) noexcept;
std::optional<ColumnType> column_type_from_string(std::string_view name) noexcept;

struct Null {
    friend bool operator==(Null, Null) noexcept { return true; }
};

/// A single SQL cell. Integer and real are kept apart so that integer
/// arithmetic (truncating division, exact sums) behaves like SQL engines do.
class Value {
public:
    Value() = default;
    Value(Null) {}
    Value(std::int64_t v) : data_(v) {}
    Value(int v) : data_(static_cast<std::int64_t>(v)) {}
    Value(double v) : data_(v) {}
    Value(std::string v) : data_(std::move(v)) {}
    Value(const char* v) : data_(std::string(v)) {}

    [[nodiscard]] bool is_null() const noexcept { return std::holds_alternative<Null>(data_); }
    [[nodiscard]] bool is_integer() const noexcept { return std::holds_alternative<std::int64_t>(data_); }
    [[nodiscard]] bool is_real() const noexcept { return std::holds_alternative<double>(data_); }
    [[nodiscard]] bool is_numeric() const noexcept { return is_integer() || is_real(); }
    [[nodiscard]] bool is_text() const noexcept { return std::holds_alternative<std::string>(data_); }

    [[nodiscard]] std::int64_t as_integer() const { return std::get<std::int64_t>(data_); }
    [[nodiscard]] double as_real() const { return std::get<double>(data_); }
    [[nodiscard]] const std::string& as_text() const { return std::get<std::string>(data_); }
    /// Numeric value widened to double; requires is_numeric().
    [[nodiscard]] double as_number() const { return is_integer() ? static_cast<double>(as_integer()) : as_real(); }

    /// Canonical cell rendering used for row signatures and display:
    /// NULL, integers verbatim, integral reals without a fraction,
    /// other reals with 12 significant digits, text single-quoted.
    [[nodiscard]] std::string canonical() const;
    /// Human-facing rendering (text unquoted).
    [[nodiscard]] std::string display() const;

    friend bool operator==(const Value& a, const Value& b) noexcept { return a.data_ == b.data_; }

    /// Total order for sorting and grouping: NULL < numbers < text;
    /// numbers compare by value regardless of integer/real storage.
    friend std::strong_ordering total_order(const Value& a, const Value& b);

private:
    std::variant<Null, std::int64_t, double, std::string> data_{};
};

/// Whether a value is acceptable in a column of the given declared type.
bool conforms(const Value& value, ColumnType type) noexcept;

}  // namespace plsq
