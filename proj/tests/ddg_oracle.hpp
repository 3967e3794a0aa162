#pragma once

#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "cpglab/cpg.hpp"

namespace cpglab::testing {

// Brute-force data-dependence oracle: enumerate every CFG path from Entry,
// visiting each node at most `max_visits` times (loops unrolled), and record
// def-to-use pairs along each path with kill semantics at strong defs.
inline std::set<cpg::Edge> ddg_by_path_enumeration(const minilang::Ast& ast,
                                                   size_t max_visits = 2) {
    auto cfg = cpg::build_cfg(ast);
    int entry = static_cast<int>(ast.nodes.size());
    cpg::DefUse du = cpg::def_use(ast, entry);

    std::map<int, std::vector<int>> succ;
    for (const auto& e : cfg) succ[e.src].push_back(e.dst);

    std::set<cpg::Edge> found;
    std::map<int, size_t> visits;
    // reaching: variable -> set of defining node ids on the current path
    std::map<std::string, std::set<int>> reaching;

    std::function<void(int)> walk = [&](int node) {
        if (visits[node] >= max_visits) return;
        ++visits[node];
        auto saved = reaching;

        if (auto uit = du.uses.find(node); uit != du.uses.end())
            for (const auto& var : uit->second)
                if (auto rit = reaching.find(var); rit != reaching.end())
                    for (int d : rit->second)
                        found.insert({d, node, cpg::EdgeType::DDG});
        if (auto dit = du.defs.find(node); dit != du.defs.end())
            for (const auto& var : dit->second) {
                if (du.strong.count(node) && du.strong.at(node)) reaching[var].clear();
                reaching[var].insert(node);
            }

        auto sit = succ.find(node);
        if (sit != succ.end())
            for (int next : sit->second) walk(next);

        reaching = saved;
        --visits[node];
    };
    walk(entry);
    return found;
}

}  // namespace cpglab::testing
