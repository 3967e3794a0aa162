#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <map>
#include <set>
#include <sstream>

#include "cpglab/corpus.hpp"
#include "cpglab/cpg.hpp"
#include "cpglab/generator.hpp"
#include "cpglab/minilang.hpp"
#include "doctest.h"

#include "json.hpp"

using namespace cpglab;
using namespace cpglab::gen;

namespace {

std::vector<corpus::Commit> ingest(const GeneratedCorpus& c) {
    return corpus::ingest_commits_text(c.jsonl).commits;
}

// strictness histogram recounted directly from the JSONL text, independent
// of the ingest path
std::map<int, int> recount_strictness(const std::string& jsonl) {
    std::map<int, int> hist;
    std::istringstream in(jsonl);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto j = nlohmann::json::parse(line);
        hist[static_cast<int>(j.at("changed").size())]++;
    }
    return hist;
}

}  // namespace

TEST_CASE("zero commits produce an empty corpus") {
    GeneratorSpec spec;
    spec.n_commits = 0;
    CHECK(generate_corpus(spec).jsonl.empty());
}

TEST_CASE("degenerate distribution pins every commit's strictness") {
    GeneratorSpec spec;
    spec.n_commits = 10;
    spec.strictness_distribution = {{1, 10.0}};
    spec.seed = 4;
    auto hist = recount_strictness(generate_corpus(spec).jsonl);
    CHECK(hist == std::map<int, int>{{1, 10}});
}

TEST_CASE("strictness histogram tracks the requested weights") {
    GeneratorSpec spec;
    spec.n_commits = 100;
    spec.strictness_distribution = {{1, 50.0}, {2, 25.0}, {3, 25.0}};
    spec.seed = 7;
    auto hist = recount_strictness(generate_corpus(spec).jsonl);
    int total = 0;
    for (const auto& [k, n] : hist) {
        CHECK(k >= 1);
        CHECK(k <= 3);
        total += n;
    }
    CHECK(total == 100);
    // multinomial(100, 0.5) has sd 5; allow 4 sd
    CHECK(hist[1] > 30);
    CHECK(hist[1] < 70);
    CHECK(hist[2] > 5);
    CHECK(hist[3] > 5);
}

TEST_CASE("generation is deterministic per seed") {
    GeneratorSpec spec;
    spec.n_commits = 30;
    spec.seed = 12;
    auto a = generate_corpus(spec);
    auto b = generate_corpus(spec);
    CHECK(a.jsonl == b.jsonl);
    CHECK(a.provenance_jsonl == b.provenance_jsonl);
    spec.seed = 13;
    CHECK(generate_corpus(spec).jsonl != a.jsonl);
}

TEST_CASE("every generated function parses and every pair really differs") {
    GeneratorSpec spec;
    spec.n_commits = 50;
    spec.seed = 3;
    auto commits = ingest(generate_corpus(spec));
    CHECK(commits.size() == 50);
    for (const auto& c : commits) {
        CHECK(c.strictness() >= 1);
        CHECK(c.unchanged.size() >= static_cast<size_t>(spec.unchanged_min));
        CHECK(c.unchanged.size() <= static_cast<size_t>(spec.unchanged_max));
        for (const auto& [before, after] : c.changed) {
            // ingest re-parses everything; also require a semantic token change
            CHECK(before.normalized_hash != after.normalized_hash);
        }
    }
}

TEST_CASE("provenance marks one fix pair per commit, rest noise") {
    GeneratorSpec spec;
    spec.n_commits = 40;
    spec.seed = 8;
    auto c = generate_corpus(spec);
    std::istringstream in(c.provenance_jsonl);
    std::string line;
    int n_commits = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto j = nlohmann::json::parse(line);
        int fixes = 0, noise = 0;
        for (const auto& tag : j.at("pairs")) {
            std::string t = tag.at("kind").get<std::string>();
            if (t.rfind("fix:", 0) == 0)
                ++fixes;
            else if (t.rfind("noise:", 0) == 0)
                ++noise;
            else
                FAIL("unknown provenance tag: ", t);
        }
        CHECK(fixes == 1);
        ++n_commits;
    }
    CHECK(n_commits == 40);
}

TEST_CASE("noise pairs preserve pruned cfg and ddg shape") {
    GeneratorSpec spec;
    spec.n_commits = 30;
    spec.seed = 19;
    auto c = generate_corpus(spec);
    auto commits = ingest(c);

    // align provenance with ingested commits by line
    std::vector<std::vector<std::string>> tags;
    std::istringstream in(c.provenance_jsonl);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto j = nlohmann::json::parse(line);
        std::vector<std::string> row;
        for (const auto& tag : j.at("pairs")) row.push_back(tag.at("kind").get<std::string>());
        tags.push_back(std::move(row));
    }
    REQUIRE(tags.size() == commits.size());

    auto shape = [](const std::string& src) {
        auto ast = minilang::parse_source(src);
        auto cfg_edges = cpg::build_cfg(ast);
        auto ddg_edges = cpg::build_ddg(cfg_edges, ast);
        return std::make_pair(cfg_edges.size(), ddg_edges.size());
    };

    int checked = 0;
    for (size_t ci = 0; ci < commits.size(); ++ci) {
        for (size_t pi = 0; pi < commits[ci].changed.size(); ++pi) {
            if (tags[ci][pi].rfind("noise:", 0) != 0) continue;
            const auto& [before, after] = commits[ci].changed[pi];
            CHECK(shape(before.source) == shape(after.source));
            ++checked;
        }
    }
    CHECK(checked > 0);
}

TEST_CASE("fix pairs change graph structure") {
    GeneratorSpec spec;
    spec.n_commits = 20;
    spec.strictness_distribution = {{1, 1.0}};  // every pair is a fix
    spec.seed = 23;
    auto commits = ingest(generate_corpus(spec));
    for (const auto& c : commits) {
        const auto& [before, after] = c.changed[0];
        auto ga = cpg::build_graph(minilang::parse_source(before.source));
        auto gb = cpg::build_graph(minilang::parse_source(after.source));
        // a guard insertion or bound tightening shows up in nodes or tokens
        bool differs = ga.nodes.size() != gb.nodes.size() || ga.edges.size() != gb.edges.size();
        if (!differs) {
            std::multiset<std::string> ta, tb;
            for (const auto& n : ga.nodes)
                for (const auto& t : n.tokens) ta.insert(t.text);
            for (const auto& n : gb.nodes)
                for (const auto& t : n.tokens) tb.insert(t.text);
            differs = ta != tb;
        }
        CHECK(differs);
    }
}

TEST_CASE("spec validation rejects bad inputs") {
    GeneratorSpec spec;
    spec.n_commits = -1;
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
    spec = GeneratorSpec{};
    spec.strictness_distribution = {{1, -0.5}};
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
    spec = GeneratorSpec{};
    spec.unchanged_min = 9;
    spec.unchanged_max = 3;
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
}
