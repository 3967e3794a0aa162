#include "cpglab/minilang.hpp"

#include <cassert>
#include <functional>

namespace cpglab::minilang {

const char* to_string(NodeKind k) {
    switch (k) {
        case NodeKind::Function: return "Function";
        case NodeKind::Param: return "Param";
        case NodeKind::Block: return "Block";
        case NodeKind::Decl: return "Decl";
        case NodeKind::Assign: return "Assign";
        case NodeKind::If: return "If";
        case NodeKind::While: return "While";
        case NodeKind::Return: return "Return";
        case NodeKind::Call: return "Call";
        case NodeKind::BinaryOp: return "BinaryOp";
        case NodeKind::UnaryOp: return "UnaryOp";
        case NodeKind::Index: return "Index";
        case NodeKind::Literal: return "Literal";
        case NodeKind::Var: return "Var";
    }
    return "?";
}

NodeKind node_kind_from_string(std::string_view s) {
    for (int i = 0; i <= static_cast<int>(NodeKind::Var); ++i) {
        auto k = static_cast<NodeKind>(i);
        if (s == to_string(k)) return k;
    }
    throw std::invalid_argument("unknown node kind: " + std::string(s));
}

namespace {

class Parser {
public:
    explicit Parser(const std::vector<Token>& toks) : toks_(toks) {}

    Ast run() {
        int root = parse_function();
        if (pos_ < toks_.size())
            fail("end of input", cur());
        return renumber(root);
    }

private:
    const std::vector<Token>& toks_;
    size_t pos_ = 0;
    std::vector<AstNode> nodes_;  // creation order; renumbered to pre-order at the end

    const Token& cur() const {
        if (pos_ >= toks_.size()) {
            static Token eof{TokenKind::Punctuation, "<eof>", {0, 0}};
            return eof;
        }
        return toks_[pos_];
    }

    Span here() const {
        if (pos_ < toks_.size()) return toks_[pos_].span;
        return toks_.empty() ? Span{1, 1} : toks_.back().span;
    }

    [[noreturn]] void fail(const std::string& expected, const Token& found) const {
        throw SyntaxError(here(), "expected " + expected + ", found '" + found.text + "'");
    }

    bool at(std::string_view text) const { return pos_ < toks_.size() && cur().text == text; }
    bool at_kind(TokenKind k) const { return pos_ < toks_.size() && cur().kind == k; }

    // consume the current token into `owner`'s token list
    void take(int owner) {
        nodes_[static_cast<size_t>(owner)].tokens.push_back(toks_[pos_]);
        ++pos_;
    }

    void expect(std::string_view text, int owner) {
        if (!at(text)) fail("'" + std::string(text) + "'", cur());
        take(owner);
    }

    void expect_ident(int owner) {
        if (!at_kind(TokenKind::Identifier)) fail("identifier", cur());
        take(owner);
    }

    int make(NodeKind k) {
        nodes_.push_back(AstNode{static_cast<int>(nodes_.size()), k, {}, {}});
        return static_cast<int>(nodes_.size()) - 1;
    }

    void add_child(int parent, int child) {
        nodes_[static_cast<size_t>(parent)].children.push_back(child);
    }

    int parse_function() {
        int fn = make(NodeKind::Function);
        expect("fn", fn);
        expect_ident(fn);
        expect("(", fn);
        if (!at(")")) {
            add_child(fn, parse_param());
            while (at(",")) {
                take(fn);
                add_child(fn, parse_param());
            }
        }
        expect(")", fn);
        add_child(fn, parse_block());
        return fn;
    }

    int parse_param() {
        int p = make(NodeKind::Param);
        expect_ident(p);
        expect(":", p);
        if (at("int") || at("bool") || at("str")) {
            take(p);
            if (at("[")) {
                take(p);
                expect("]", p);
            }
        } else {
            fail("type name", cur());
        }
        return p;
    }

    int parse_block() {
        int b = make(NodeKind::Block);
        expect("{", b);
        while (!at("}")) {
            if (pos_ >= toks_.size()) fail("'}'", cur());
            add_child(b, parse_statement());
        }
        expect("}", b);
        return b;
    }

    int parse_statement() {
        if (at("let")) return parse_decl();
        if (at("if")) return parse_if();
        if (at("while")) return parse_while();
        if (at("return")) return parse_return();
        if (at_kind(TokenKind::Identifier)) {
            // call statement or assignment
            if (pos_ + 1 < toks_.size() && toks_[pos_ + 1].text == "(")
                return parse_call(/*statement=*/true);
            return parse_assign();
        }
        fail("statement", cur());
    }

    int parse_decl() {
        int d = make(NodeKind::Decl);
        expect("let", d);
        expect_ident(d);
        expect("=", d);
        add_child(d, parse_expr());
        expect(";", d);
        return d;
    }

    int parse_assign() {
        int a = make(NodeKind::Assign);
        expect_ident(a);
        if (at("[")) {
            take(a);
            add_child(a, parse_expr());
            expect("]", a);
        }
        expect("=", a);
        add_child(a, parse_expr());
        expect(";", a);
        return a;
    }

    int parse_if() {
        int n = make(NodeKind::If);
        expect("if", n);
        expect("(", n);
        add_child(n, parse_expr());
        expect(")", n);
        add_child(n, parse_block());
        if (at("else")) {
            take(n);
            add_child(n, parse_block());
        }
        return n;
    }

    int parse_while() {
        int n = make(NodeKind::While);
        expect("while", n);
        expect("(", n);
        add_child(n, parse_expr());
        expect(")", n);
        add_child(n, parse_block());
        return n;
    }

    int parse_return() {
        int n = make(NodeKind::Return);
        expect("return", n);
        if (!at(";")) add_child(n, parse_expr());
        expect(";", n);
        return n;
    }

    int parse_call(bool statement) {
        int n = make(NodeKind::Call);
        expect_ident(n);
        expect("(", n);
        if (!at(")")) {
            add_child(n, parse_expr());
            while (at(",")) {
                take(n);
                add_child(n, parse_expr());
            }
        }
        expect(")", n);
        if (statement) expect(";", n);
        return n;
    }

    int parse_expr() { return parse_or(); }

    int parse_or() {
        int lhs = parse_and();
        while (at("||")) {
            int op = make(NodeKind::BinaryOp);
            take(op);
            add_child(op, lhs);
            add_child(op, parse_and());
            lhs = op;
        }
        return lhs;
    }

    int parse_and() {
        int lhs = parse_cmp();
        while (at("&&")) {
            int op = make(NodeKind::BinaryOp);
            take(op);
            add_child(op, lhs);
            add_child(op, parse_cmp());
            lhs = op;
        }
        return lhs;
    }

    int parse_cmp() {
        int lhs = parse_addsub();
        if (at("==") || at("!=") || at("<") || at("<=") || at(">") || at(">=")) {
            int op = make(NodeKind::BinaryOp);
            take(op);
            add_child(op, lhs);
            add_child(op, parse_addsub());
            lhs = op;
        }
        return lhs;
    }

    int parse_addsub() {
        int lhs = parse_muldiv();
        while (at("+") || at("-")) {
            int op = make(NodeKind::BinaryOp);
            take(op);
            add_child(op, lhs);
            add_child(op, parse_muldiv());
            lhs = op;
        }
        return lhs;
    }

    int parse_muldiv() {
        int lhs = parse_unary();
        while (at("*") || at("/") || at("%")) {
            int op = make(NodeKind::BinaryOp);
            take(op);
            add_child(op, lhs);
            add_child(op, parse_unary());
            lhs = op;
        }
        return lhs;
    }

    int parse_unary() {
        if (at("!") || at("-")) {
            int op = make(NodeKind::UnaryOp);
            take(op);
            add_child(op, parse_unary());
            return op;
        }
        return parse_postfix();
    }

    int parse_postfix() {
        int base = parse_primary();
        while (at("[")) {
            int ix = make(NodeKind::Index);
            take(ix);
            add_child(ix, base);
            add_child(ix, parse_expr());
            expect("]", ix);
            base = ix;
        }
        return base;
    }

    int parse_primary() {
        if (at_kind(TokenKind::IntLiteral) || at_kind(TokenKind::StringLiteral) ||
            at("true") || at("false")) {
            int n = make(NodeKind::Literal);
            take(n);
            return n;
        }
        if (at_kind(TokenKind::Identifier)) {
            if (pos_ + 1 < toks_.size() && toks_[pos_ + 1].text == "(")
                return parse_call(/*statement=*/false);
            int n = make(NodeKind::Var);
            take(n);
            return n;
        }
        if (at("(")) {
            // group: parens are attributed to the inner expression node
            Token open = cur();
            ++pos_;
            int inner = parse_expr();
            if (!at(")")) fail("')'", cur());
            nodes_[static_cast<size_t>(inner)].tokens.push_back(open);
            take(inner);
            return inner;
        }
        fail("expression", cur());
    }

    Ast renumber(int root) const {
        Ast out;
        out.nodes.reserve(nodes_.size());
        std::vector<int> remap(nodes_.size(), -1);
        std::function<void(int)> visit = [&](int old_id) {
            int new_id = static_cast<int>(out.nodes.size());
            remap[static_cast<size_t>(old_id)] = new_id;
            out.nodes.push_back(nodes_[static_cast<size_t>(old_id)]);
            out.nodes.back().id = new_id;
            out.nodes.back().children.assign(
                nodes_[static_cast<size_t>(old_id)].children.size(), -1);
            size_t slot = 0;
            for (int c : nodes_[static_cast<size_t>(old_id)].children) {
                visit(c);
                out.nodes[static_cast<size_t>(new_id)].children[slot++] =
                    remap[static_cast<size_t>(c)];
            }
        };
        visit(root);
        return out;
    }
};

}  // namespace

Ast parse(const std::vector<Token>& tokens) { return Parser(tokens).run(); }

Ast parse_source(std::string_view source) { return parse(tokenize(source)); }

}  // namespace cpglab::minilang
