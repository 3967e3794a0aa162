#include "cpglab/cpg.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace cpglab::cpg {

namespace {

bool is_operator_kind(const std::string& k) {
    return k == "BinaryOp" || k == "UnaryOp" || k == "Index";
}

}  // namespace

CodeGraph prune_operator_nodes(const CodeGraph& g) {
    if (g.meta.pruned) return g;  // idempotent

    bool has_operator = false;
    for (const auto& n : g.nodes)
        if (is_operator_kind(n.kind)) { has_operator = true; break; }

    CodeGraph out = g;
    out.meta.pruned = true;
    if (!has_operator) return out;

    std::map<int, std::vector<int>> children;
    std::map<int, int> parent;
    bool has_ast = false;
    for (const auto& e : g.edges) {
        if (e.etype != EdgeType::AST) continue;
        has_ast = true;
        children[e.src].push_back(e.dst);
        parent[e.dst] = e.src;
    }
    if (!has_ast)
        throw std::invalid_argument("prune_operator_nodes: graph has operator nodes but no AST edges");
    for (auto& [p, cs] : children) std::sort(cs.begin(), cs.end());

    std::map<int, const Node*> by_id;
    for (const auto& n : g.nodes) by_id[n.id] = &n;

    // maximal operator-rooted subtrees: operator whose parent is not an operator
    std::vector<int> roots;
    for (const auto& n : g.nodes) {
        if (!is_operator_kind(n.kind)) continue;
        auto pit = parent.find(n.id);
        if (pit == parent.end() || !is_operator_kind(by_id.at(pit->second)->kind))
            roots.push_back(n.id);
    }

    // nearest ancestor sitting directly in a Block (a statement)
    auto statement_ancestor = [&](int id) {
        int cur = id;
        while (true) {
            auto pit = parent.find(cur);
            if (pit == parent.end()) return cur;
            if (by_id.at(pit->second)->kind == "Block") return cur;
            cur = pit->second;
        }
    };

    std::set<int> removed;
    std::map<int, std::vector<TokenRef>> extra;  // ancestor -> collapsed tokens (pre-order)
    for (int root : roots) {
        int anc = statement_ancestor(root);
        std::vector<int> stack{root};
        std::vector<int> subtree;
        while (!stack.empty()) {
            int n = stack.back();
            stack.pop_back();
            subtree.push_back(n);
            for (int c : children[n]) stack.push_back(c);
        }
        std::sort(subtree.begin(), subtree.end());  // ids are pre-order
        for (int n : subtree) {
            removed.insert(n);
            const Node* node = by_id.at(n);
            extra[anc].insert(extra[anc].end(), node->tokens.begin(), node->tokens.end());
        }
    }

    for (auto& n : out.nodes) {
        auto it = extra.find(n.id);
        if (it == extra.end()) continue;
        n.tokens.insert(n.tokens.end(), it->second.begin(), it->second.end());
        // keep source order; spans are (0,0) on deserialized graphs, in which
        // case the stable sort preserves the pre-order concatenation
        std::stable_sort(n.tokens.begin(), n.tokens.end(),
                         [](const TokenRef& a, const TokenRef& b) { return a.span < b.span; });
    }

    std::erase_if(out.nodes, [&](const Node& n) { return removed.count(n.id) > 0; });
    std::erase_if(out.edges, [&](const Edge& e) {
        return e.etype == EdgeType::AST && (removed.count(e.src) || removed.count(e.dst));
    });
    return out;
}

}  // namespace cpglab::cpg
