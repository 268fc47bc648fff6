#include "plsq/error.hpp"
#include "plsq/sql/parser.hpp"

#include <cctype>

namespace plsq::sql {

namespace {

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

}  // namespace

std::vector<Token> tokenize(std::string_view text) {
    std::vector<Token> out;
    std::size_t i = 0;
    const std::size_t n = text.size();
    while (i < n) {
        const char c = text[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        if (c == '-' && i + 1 < n && text[i + 1] == '-') {
            while (i < n && text[i] != '\n') ++i;
            continue;
        }
        if (c == '/' && i + 1 < n && text[i + 1] == '*') {
            const auto close = text.find("*/", i + 2);
            if (close == std::string_view::npos) throw SyntaxError(i, "unterminated comment");
            i = close + 2;
            continue;
        }
        const std::size_t start = i;
        if (is_ident_start(c)) {
            while (i < n && is_ident_char(text[i])) ++i;
            out.push_back({TokenKind::identifier, std::string(text.substr(start, i - start)), start});
            continue;
        }
        if (is_digit(c) || (c == '.' && i + 1 < n && is_digit(text[i + 1]))) {
            while (i < n && is_digit(text[i])) ++i;
            if (i < n && text[i] == '.') {
                ++i;
                while (i < n && is_digit(text[i])) ++i;
            }
            if (i < n && (text[i] == 'e' || text[i] == 'E')) {
                std::size_t j = i + 1;
                if (j < n && (text[j] == '+' || text[j] == '-')) ++j;
                if (j < n && is_digit(text[j])) {
                    i = j;
                    while (i < n && is_digit(text[i])) ++i;
                }
            }
            if (i < n && is_ident_start(text[i])) throw SyntaxError(i, "malformed number");
            out.push_back({TokenKind::number, std::string(text.substr(start, i - start)), start});
            continue;
        }
        if (c == '\'') {
            std::string value;
            ++i;
            for (;;) {
                if (i >= n) throw SyntaxError(start, "unterminated string literal");
                if (text[i] == '\'') {
                    if (i + 1 < n && text[i + 1] == '\'') {
                        value += '\'';
                        i += 2;
                        continue;
                    }
                    ++i;
                    break;
                }
                value += text[i++];
            }
            out.push_back({TokenKind::string, std::move(value), start});
            continue;
        }
        if (c == '"' || c == '`' || c == '[') {
            const char close = c == '[' ? ']' : c;
            const auto end = text.find(close, i + 1);
            if (end == std::string_view::npos) throw SyntaxError(start, "unterminated quoted identifier");
            out.push_back({TokenKind::quoted_identifier, std::string(text.substr(i + 1, end - i - 1)), start});
            i = end + 1;
            continue;
        }
        static constexpr std::string_view two_char[] = {"<=", ">=", "<>", "!=", "==", "||"};
        bool matched = false;
        for (auto op : two_char) {
            if (text.substr(i, 2) == op) {
                out.push_back({TokenKind::symbol, std::string(op), start});
                i += 2;
                matched = true;
                break;
            }
        }
        if (matched) continue;
        static constexpr std::string_view one_char = ",().*+-/%=<>;";
        if (one_char.find(c) != std::string_view::npos) {
            out.push_back({TokenKind::symbol, std::string(1, c), start});
            ++i;
            continue;
        }
        throw SyntaxError(i, std::string("unexpected character '") + c + "'");
    }
    out.push_back({TokenKind::end, "", n});
    return out;
}

}  // namespace plsq::sql
