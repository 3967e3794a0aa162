#include "cpglab/cpg.hpp"

#include <algorithm>
#include <functional>

namespace cpglab::cpg {

using minilang::Ast;
using minilang::AstNode;
using minilang::NodeKind;

const char* to_string(EdgeType t) {
    switch (t) {
        case EdgeType::AST: return "AST";
        case EdgeType::CFG: return "CFG";
        case EdgeType::DDG: return "DDG";
    }
    return "?";
}

EdgeType edge_type_from_string(std::string_view s) {
    if (s == "AST") return EdgeType::AST;
    if (s == "CFG") return EdgeType::CFG;
    if (s == "DDG") return EdgeType::DDG;
    throw std::invalid_argument("unknown edge type: " + std::string(s));
}

std::vector<std::string> Node::token_texts() const {
    std::vector<std::string> out;
    out.reserve(tokens.size());
    for (const auto& t : tokens) out.push_back(t.text);
    return out;
}

bool Node::operator==(const Node& o) const {
    return id == o.id && kind == o.kind && token_texts() == o.token_texts();
}

int CodeGraph::entry_id() const {
    for (const auto& n : nodes)
        if (n.kind == "Entry") return n.id;
    return -1;
}

int CodeGraph::exit_id() const {
    for (const auto& n : nodes)
        if (n.kind == "Exit") return n.id;
    return -1;
}

const Node* CodeGraph::find(int id) const {
    for (const auto& n : nodes)
        if (n.id == id) return &n;
    return nullptr;
}

namespace {

bool is_statement_kind(NodeKind k) {
    switch (k) {
        case NodeKind::Decl:
        case NodeKind::Assign:
        case NodeKind::If:
        case NodeKind::While:
        case NodeKind::Return:
        case NodeKind::Call:
            return true;
        default:
            return false;
    }
}

void sort_edges(std::vector<Edge>& edges) {
    std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
        if (a.etype != b.etype) return static_cast<int>(a.etype) < static_cast<int>(b.etype);
        if (a.src != b.src) return a.src < b.src;
        return a.dst < b.dst;
    });
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
}

// collect Var names in an expression subtree (never crosses into Blocks)
void collect_vars(const Ast& ast, int id, std::set<std::string>& out) {
    const AstNode& n = ast.at(id);
    if (n.kind == NodeKind::Block) return;
    if (n.kind == NodeKind::Var) out.insert(n.tokens.front().text);
    for (int c : n.children) collect_vars(ast, c, out);
}

struct CfgBuilder {
    const Ast& ast;
    int exit_node;
    std::vector<Edge> edges;

    void connect(const std::vector<int>& frontier, int target) {
        for (int f : frontier) edges.push_back({f, target, EdgeType::CFG});
    }

    std::vector<int> stmt(int id, std::vector<int> frontier) {
        const AstNode& n = ast.at(id);
        connect(frontier, id);
        switch (n.kind) {
            case NodeKind::Decl:
            case NodeKind::Assign:
            case NodeKind::Call:
                return {id};
            case NodeKind::Return:
                edges.push_back({id, exit_node, EdgeType::CFG});
                return {};
            case NodeKind::If: {
                // children: cond, then-block [, else-block]
                std::vector<int> out = seq(ast.at(n.children[1]).children, {id});
                if (n.children.size() == 3) {
                    std::vector<int> else_out = seq(ast.at(n.children[2]).children, {id});
                    out.insert(out.end(), else_out.begin(), else_out.end());
                } else {
                    out.push_back(id);  // fall-through when condition is false
                }
                return out;
            }
            case NodeKind::While: {
                std::vector<int> body_out = seq(ast.at(n.children[1]).children, {id});
                connect(body_out, id);  // back edge
                return {id};            // loop-exit edge goes to the successor
            }
            default:
                return {id};
        }
    }

    std::vector<int> seq(const std::vector<int>& stmts, std::vector<int> frontier) {
        for (int s : stmts) frontier = stmt(s, std::move(frontier));
        return frontier;
    }
};

std::vector<int> function_body(const Ast& ast) {
    const AstNode& fn = ast.at(ast.root());
    int block = fn.children.back();
    return ast.at(block).children;
}

}  // namespace

std::vector<int> statement_nodes(const Ast& ast) {
    std::vector<int> out;
    for (const auto& n : ast.nodes) {
        if (n.kind != NodeKind::Block) continue;
        for (int c : n.children)
            if (is_statement_kind(ast.at(c).kind)) out.push_back(c);
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<Edge> build_cfg(const Ast& ast) {
    int entry = static_cast<int>(ast.nodes.size());
    int exit = entry + 1;
    CfgBuilder b{ast, exit, {}};
    std::vector<int> tail = b.seq(function_body(ast), {entry});
    b.connect(tail, exit);
    sort_edges(b.edges);
    return b.edges;
}

DefUse def_use(const Ast& ast, int entry_id) {
    DefUse du;
    const AstNode& fn = ast.at(ast.root());
    for (size_t i = 0; i + 1 < fn.children.size(); ++i) {
        const AstNode& p = ast.at(fn.children[i]);
        if (p.kind == NodeKind::Param) du.defs[entry_id].insert(p.tokens.front().text);
    }
    du.strong[entry_id] = true;

    for (int s : statement_nodes(ast)) {
        const AstNode& n = ast.at(s);
        switch (n.kind) {
            case NodeKind::Decl: {
                du.defs[s].insert(n.tokens[1].text);  // "let" name
                du.strong[s] = true;
                collect_vars(ast, n.children[0], du.uses[s]);
                break;
            }
            case NodeKind::Assign: {
                const std::string& target = n.tokens.front().text;
                du.defs[s].insert(target);
                if (n.children.size() == 2) {
                    // indexed store: weak update, old array contents survive
                    du.strong[s] = false;
                    du.uses[s].insert(target);
                    collect_vars(ast, n.children[0], du.uses[s]);
                    collect_vars(ast, n.children[1], du.uses[s]);
                } else {
                    du.strong[s] = true;
                    collect_vars(ast, n.children[0], du.uses[s]);
                }
                break;
            }
            case NodeKind::If:
            case NodeKind::While:
                collect_vars(ast, n.children[0], du.uses[s]);
                break;
            case NodeKind::Return:
                if (!n.children.empty()) collect_vars(ast, n.children[0], du.uses[s]);
                break;
            case NodeKind::Call:
                for (int c : n.children) collect_vars(ast, c, du.uses[s]);
                break;
            default:
                break;
        }
    }
    return du;
}

std::vector<Edge> build_ddg(const std::vector<Edge>& cfg, const Ast& ast) {
    int entry = static_cast<int>(ast.nodes.size());
    DefUse du = def_use(ast, entry);

    // enumerate definitions
    std::vector<std::pair<int, std::string>> defs;  // (node, var)
    for (const auto& [node, vars] : du.defs)
        for (const auto& v : vars) defs.emplace_back(node, v);

    std::set<int> cfg_nodes;
    std::map<int, std::vector<int>> preds;
    for (const auto& e : cfg) {
        if (e.etype != EdgeType::CFG) continue;
        cfg_nodes.insert(e.src);
        cfg_nodes.insert(e.dst);
        preds[e.dst].push_back(e.src);
    }
    cfg_nodes.insert(entry);
    for (int s : statement_nodes(ast)) cfg_nodes.insert(s);

    auto def_index = [&](int node, const std::string& v) {
        for (size_t i = 0; i < defs.size(); ++i)
            if (defs[i].first == node && defs[i].second == v) return static_cast<int>(i);
        return -1;
    };

    std::map<int, std::set<int>> in, out;
    bool changed = true;
    while (changed) {
        changed = false;
        for (int n : cfg_nodes) {
            std::set<int> new_in;
            for (int p : preds[n]) new_in.insert(out[p].begin(), out[p].end());
            std::set<int> new_out = new_in;
            auto dit = du.defs.find(n);
            if (dit != du.defs.end()) {
                for (const auto& v : dit->second) {
                    if (du.strong[n]) {
                        for (size_t i = 0; i < defs.size(); ++i)
                            if (defs[i].second == v) new_out.erase(static_cast<int>(i));
                    }
                    new_out.insert(def_index(n, v));
                }
            }
            if (new_in != in[n] || new_out != out[n]) {
                in[n] = std::move(new_in);
                out[n] = std::move(new_out);
                changed = true;
            }
        }
    }

    std::vector<Edge> ddg;
    for (const auto& [u, vars] : du.uses) {
        for (int di : in[u]) {
            if (vars.count(defs[static_cast<size_t>(di)].second))
                ddg.push_back({defs[static_cast<size_t>(di)].first, u, EdgeType::DDG});
        }
    }
    sort_edges(ddg);
    return ddg;
}

CodeGraph build_graph(const Ast& ast, BuildOptions opts) {
    CodeGraph g;
    int entry = static_cast<int>(ast.nodes.size());
    int exit = entry + 1;
    for (const auto& n : ast.nodes) {
        Node out{n.id, to_string(n.kind), {}};
        for (const auto& t : n.tokens) out.tokens.push_back({t.text, t.span});
        g.nodes.push_back(std::move(out));
    }
    g.nodes.push_back({entry, "Entry", {}});
    g.nodes.push_back({exit, "Exit", {}});

    for (const auto& n : ast.nodes)
        for (int c : n.children) g.edges.push_back({n.id, c, EdgeType::AST});

    std::vector<Edge> cfg = build_cfg(ast);
    std::vector<Edge> ddg = build_ddg(cfg, ast);
    g.edges.insert(g.edges.end(), cfg.begin(), cfg.end());
    g.edges.insert(g.edges.end(), ddg.begin(), ddg.end());
    sort_edges(g.edges);

    // dead statements: not CFG-reachable from Entry
    std::map<int, std::vector<int>> succ;
    for (const auto& e : cfg) succ[e.src].push_back(e.dst);
    std::set<int> seen{entry};
    std::vector<int> work{entry};
    while (!work.empty()) {
        int n = work.back();
        work.pop_back();
        for (int s : succ[n])
            if (seen.insert(s).second) work.push_back(s);
    }
    for (int s : statement_nodes(ast))
        if (!seen.count(s)) g.meta.dead_nodes.push_back(s);

    if (opts.prune_operators) g = prune_operator_nodes(g);

    if (!opts.include_ast_edges) {
        std::erase_if(g.edges, [](const Edge& e) { return e.etype == EdgeType::AST; });
        g.meta.ast_included = false;
    }
    return g;
}

}  // namespace cpglab::cpg
