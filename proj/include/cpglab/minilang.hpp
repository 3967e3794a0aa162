#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cpglab::minilang {

enum class TokenKind { Identifier, IntLiteral, StringLiteral, Keyword, Operator, Punctuation };

struct Span {
    int line = 0;
    int column = 0;
    bool operator==(const Span&) const = default;
    auto operator<=>(const Span&) const = default;
};

struct Token {
    TokenKind kind;
    std::string text;
    Span span;
};

// "line:col: message" diagnostics for both lexing and parsing.
struct SyntaxError : std::runtime_error {
    SyntaxError(Span s, const std::string& msg)
        : std::runtime_error(std::to_string(s.line) + ":" + std::to_string(s.column) + ": " + msg),
          span(s) {}
    Span span;
};

std::vector<Token> tokenize(std::string_view source);

enum class NodeKind {
    Function, Param, Block, Decl, Assign, If, While, Return, Call,
    BinaryOp, UnaryOp, Index, Literal, Var
};

const char* to_string(NodeKind k);
NodeKind node_kind_from_string(std::string_view s);

struct AstNode {
    int id = 0;
    NodeKind kind;
    std::vector<int> children;
    std::vector<Token> tokens;  // tokens owned directly by this node, source order
};

struct Ast {
    std::vector<AstNode> nodes;  // indexed by id, ids assigned pre-order
    int root() const { return 0; }
    const AstNode& at(int id) const { return nodes[static_cast<size_t>(id)]; }
};

Ast parse(const std::vector<Token>& tokens);
Ast parse_source(std::string_view source);

}  // namespace cpglab::minilang
