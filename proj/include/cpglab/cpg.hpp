#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "cpglab/minilang.hpp"

namespace cpglab::cpg {

enum class EdgeType { AST, CFG, DDG };

const char* to_string(EdgeType t);
EdgeType edge_type_from_string(std::string_view s);

struct TokenRef {
    std::string text;
    minilang::Span span;  // not serialized; used to keep source order under pruning
};

struct Node {
    int id = 0;
    std::string kind;
    std::vector<TokenRef> tokens;

    std::vector<std::string> token_texts() const;
    bool operator==(const Node& o) const;  // compares id, kind, token texts
};

struct Edge {
    int src = 0;
    int dst = 0;
    EdgeType etype = EdgeType::AST;
    bool operator==(const Edge&) const = default;
    auto operator<=>(const Edge&) const = default;
};

struct GraphMeta {
    std::string function_id;
    std::string part;
    bool pruned = false;
    bool ast_included = true;
    std::vector<int> dead_nodes;  // statement nodes unreachable from Entry
    bool operator==(const GraphMeta&) const = default;
};

struct CodeGraph {
    std::vector<Node> nodes;  // sorted by id
    std::vector<Edge> edges;  // sorted (etype, src, dst)
    int label = 0;
    GraphMeta meta;
    bool operator==(const CodeGraph&) const = default;

    int entry_id() const;  // synthetic Entry node id
    int exit_id() const;
    const Node* find(int id) const;
};

struct BuildOptions {
    bool include_ast_edges = true;
    bool prune_operators = false;
};

// Statement-level def/use sets keyed by AST node id; Entry defines all params.
struct DefUse {
    std::map<int, std::set<std::string>> defs;
    std::map<int, std::set<std::string>> uses;
    std::map<int, bool> strong;  // strong defs kill prior definitions
};

std::vector<int> statement_nodes(const minilang::Ast& ast);
DefUse def_use(const minilang::Ast& ast, int entry_id);

std::vector<Edge> build_cfg(const minilang::Ast& ast);
std::vector<Edge> build_ddg(const std::vector<Edge>& cfg, const minilang::Ast& ast);
CodeGraph build_graph(const minilang::Ast& ast, BuildOptions opts = {});
CodeGraph prune_operator_nodes(const CodeGraph& g);

std::string serialize(const CodeGraph& g);
CodeGraph deserialize(std::string_view bytes);

}  // namespace cpglab::cpg
