#include "cpglab/cpg.hpp"
#include "cpglab/util.hpp"

#include <json.hpp>

namespace cpglab::cpg {

using json = nlohmann::ordered_json;

std::string serialize(const CodeGraph& g) {
    json j;
    j["nodes"] = json::array();
    for (const auto& n : g.nodes) {
        json node;
        node["id"] = n.id;
        node["kind"] = n.kind;
        node["tokens"] = n.token_texts();
        j["nodes"].push_back(std::move(node));
    }
    j["edges"] = json::array();
    for (const auto& e : g.edges) {
        json edge;
        edge["src"] = e.src;
        edge["dst"] = e.dst;
        edge["etype"] = to_string(e.etype);
        j["edges"].push_back(std::move(edge));
    }
    j["label"] = g.label;
    json meta;
    meta["function_id"] = g.meta.function_id;
    meta["part"] = g.meta.part;
    meta["pruned"] = g.meta.pruned;
    meta["ast_included"] = g.meta.ast_included;
    meta["dead_nodes"] = g.meta.dead_nodes;
    j["meta"] = std::move(meta);
    return j.dump();
}

CodeGraph deserialize(std::string_view bytes) {
    json j;
    try {
        j = json::parse(bytes);
    } catch (const json::parse_error& e) {
        throw DataError(std::string("graph payload: ") + e.what());
    }
    CodeGraph g;
    auto require = [](const json& obj, const char* field, const std::string& path) -> const json& {
        if (!obj.contains(field)) throw DataError(path + "." + field + ": missing");
        return obj.at(field);
    };

    std::set<int> ids;
    size_t i = 0;
    for (const auto& jn : require(j, "nodes", "$")) {
        std::string path = "nodes[" + std::to_string(i++) + "]";
        Node n;
        n.id = require(jn, "id", path).get<int>();
        n.kind = require(jn, "kind", path).get<std::string>();
        for (const auto& t : require(jn, "tokens", path))
            n.tokens.push_back({t.get<std::string>(), {0, 0}});
        if (!ids.insert(n.id).second)
            throw DataError(path + ".id: duplicate node id");
        g.nodes.push_back(std::move(n));
    }
    i = 0;
    for (const auto& je : require(j, "edges", "$")) {
        std::string path = "edges[" + std::to_string(i++) + "]";
        Edge e;
        e.src = require(je, "src", path).get<int>();
        e.dst = require(je, "dst", path).get<int>();
        e.etype = edge_type_from_string(require(je, "etype", path).get<std::string>());
        if (!ids.count(e.src)) throw DataError(path + ".src: unknown node " + std::to_string(e.src));
        if (!ids.count(e.dst)) throw DataError(path + ".dst: unknown node " + std::to_string(e.dst));
        g.edges.push_back(e);
    }
    g.label = require(j, "label", "$").get<int>();
    if (g.label != 0 && g.label != 1) throw DataError("label: must be 0 or 1");
    const json& m = require(j, "meta", "$");
    g.meta.function_id = require(m, "function_id", "meta").get<std::string>();
    g.meta.part = require(m, "part", "meta").get<std::string>();
    g.meta.pruned = require(m, "pruned", "meta").get<bool>();
    g.meta.ast_included = require(m, "ast_included", "meta").get<bool>();
    for (const auto& d : require(m, "dead_nodes", "meta")) g.meta.dead_nodes.push_back(d.get<int>());
    return g;
}

}  // namespace cpglab::cpg
