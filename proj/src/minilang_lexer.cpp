#include "cpglab/minilang.hpp"

#include <cctype>
#include <unordered_set>

namespace cpglab::minilang {

namespace {

const std::unordered_set<std::string>& keywords() {
    static const std::unordered_set<std::string> kw = {
        "fn", "let", "if", "else", "while", "return", "true", "false",
        "int", "bool", "str"};
    return kw;
}

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

}  // namespace

std::vector<Token> tokenize(std::string_view src) {
    std::vector<Token> out;
    int line = 1, col = 1;
    size_t i = 0;
    auto advance = [&](size_t n) {
        for (size_t j = 0; j < n; ++j) {
            if (src[i] == '\n') { ++line; col = 1; } else { ++col; }
            ++i;
        }
    };
    while (i < src.size()) {
        char c = src[i];
        if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
            advance(1);
            continue;
        }
        if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
            while (i < src.size() && src[i] != '\n') advance(1);
            continue;
        }
        Span span{line, col};
        if (is_ident_start(c)) {
            size_t start = i;
            while (i < src.size() && is_ident_char(src[i])) advance(1);
            std::string text(src.substr(start, i - start));
            TokenKind kind = keywords().count(text) ? TokenKind::Keyword : TokenKind::Identifier;
            out.push_back({kind, std::move(text), span});
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            size_t start = i;
            while (i < src.size() && std::isdigit(static_cast<unsigned char>(src[i]))) advance(1);
            out.push_back({TokenKind::IntLiteral, std::string(src.substr(start, i - start)), span});
            continue;
        }
        if (c == '"') {
            size_t start = i;
            advance(1);
            while (i < src.size() && src[i] != '"' && src[i] != '\n') advance(1);
            if (i >= src.size() || src[i] != '"')
                throw SyntaxError(span, "unterminated string literal");
            advance(1);
            out.push_back({TokenKind::StringLiteral, std::string(src.substr(start, i - start)), span});
            continue;
        }
        // two-character operators first
        if (i + 1 < src.size()) {
            std::string two(src.substr(i, 2));
            if (two == "==" || two == "!=" || two == "<=" || two == ">=" || two == "&&" || two == "||") {
                advance(2);
                out.push_back({TokenKind::Operator, two, span});
                continue;
            }
        }
        switch (c) {
            case '+': case '-': case '*': case '/': case '%':
            case '<': case '>': case '=': case '!':
                advance(1);
                out.push_back({TokenKind::Operator, std::string(1, c), span});
                continue;
            case '(': case ')': case '{': case '}': case '[': case ']':
            case ',': case ';': case ':':
                advance(1);
                out.push_back({TokenKind::Punctuation, std::string(1, c), span});
                continue;
            default:
                throw SyntaxError(span, std::string("illegal character '") + c + "'");
        }
    }
    return out;
}

}  // namespace cpglab::minilang
