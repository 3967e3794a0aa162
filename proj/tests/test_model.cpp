#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <map>

#include "cpglab/cpg.hpp"
#include "cpglab/minilang.hpp"
#include "cpglab/model.hpp"
#include "doctest.h"

using namespace cpglab;
using namespace cpglab::model;

namespace {

cpg::CodeGraph graph_of(const std::string& src) {
    return cpg::build_graph(minilang::parse_source(src));
}

// same graph with node ids (and rows) permuted; edges remapped
cpg::CodeGraph permute(const cpg::CodeGraph& g, Rng& rng) {
    std::vector<int> ids;
    for (const auto& n : g.nodes) ids.push_back(n.id);
    std::vector<int> target = ids;
    rng.shuffle(target);
    std::map<int, int> remap;
    for (size_t i = 0; i < ids.size(); ++i) remap[ids[i]] = target[i];

    cpg::CodeGraph out = g;
    for (auto& n : out.nodes) n.id = remap[n.id];
    std::sort(out.nodes.begin(), out.nodes.end(),
              [](const cpg::Node& a, const cpg::Node& b) { return a.id < b.id; });
    for (auto& e : out.edges) {
        e.src = remap[e.src];
        e.dst = remap[e.dst];
    }
    std::sort(out.edges.begin(), out.edges.end());
    return out;
}

std::vector<Example> toy_dataset(std::vector<cpg::CodeGraph>& storage) {
    const char* vuln[] = {
        "fn a(arr: int[], i: int) { return arr[i]; }",
        "fn b(arr: int[], n: int) { let i = 0; while (i <= n) { i = i + 1; } return i; }",
        "fn c(v: int[], k: int) { let x = v[k]; return x; }",
    };
    const char* safe[] = {
        "fn d(a: int, b: int) { return a + b; }",
        "fn e(a: int) { let x = a * 2; return x; }",
        "fn g(a: int, b: int) { if (a < b) { return b; } return a; }",
    };
    for (const char* s : vuln) storage.push_back(graph_of(s));
    for (const char* s : safe) storage.push_back(graph_of(s));
    std::vector<Example> out;
    for (size_t i = 0; i < storage.size(); ++i)
        out.push_back({&storage[i], i < 3 ? 1 : 0});
    return out;
}

ModelConfig tiny_config() {
    ModelConfig cfg;
    cfg.node_hidden_size = 8;
    cfg.token_embedding_size = 4;
    cfg.graph_embedding_size = 12;
    cfg.representation_size = 6;
    cfg.propagation_steps = 2;
    cfg.batch_size = 4;
    cfg.grad_accumulation_steps = 1;
    cfg.learning_rate = 1e-2;
    cfg.max_epochs = 5;
    cfg.patience = 3;
    cfg.seed = 13;
    return cfg;
}

}  // namespace

TEST_CASE("config validation and json round trip") {
    ModelConfig cfg = tiny_config();
    cfg.validate();
    ModelConfig back = ModelConfig::from_json(cfg.to_json());
    CHECK(back.to_json() == cfg.to_json());
    CHECK(back.node_hidden_size == 8);
    CHECK(back.edge_types_used == cfg.edge_types_used);

    cfg.learning_rate = 0.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = tiny_config();
    cfg.edge_types_used.clear();
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("vocabulary is sorted and reserves the unknown slot") {
    auto g = graph_of("fn f(a: int) { return a + 1; }");
    Vocabulary v = Vocabulary::build({&g});
    CHECK(v.lookup("nonexistent-token") == 0);
    CHECK(v.lookup("fn") >= 1);
    // indices are dense and ordered by token text
    size_t prev = 0;
    for (const auto& [tok, idx] : v.index) {
        CHECK(idx == prev + 1);
        prev = idx;
    }
}

TEST_CASE("untrained classifier predicts one half") {
    auto g = graph_of("fn f(a: int) { return a; }");
    ModelConfig cfg = tiny_config();
    TrainedModel m = init_model(cfg, Vocabulary::build({&g}));
    CHECK(predict(m, g) == doctest::Approx(0.5));
}

TEST_CASE("embedding is invariant to node id permutation") {
    auto g = graph_of(
        "fn f(arr: int[], n: int) { let s = 0; let i = 0; while (i < n) { s = s + arr[i]; i = i + 1; } return s; }");
    ModelConfig cfg = tiny_config();
    TrainedModel m = init_model(cfg, Vocabulary::build({&g}));
    // give the classifier nonzero weights so predictions can differ
    for (double& v : m.params.at("cls_W")->value) v = 0.3;

    Rng rng(99);
    double base = predict(m, g);
    for (int rep = 0; rep < 5; ++rep) {
        cpg::CodeGraph p = permute(g, rng);
        CHECK(predict(m, p) == doctest::Approx(base).epsilon(1e-9));
    }
}

TEST_CASE("edge type selection changes the encoding") {
    auto g = graph_of("fn f(a: int) { let x = a + 1; return x; }");
    ModelConfig with_ast = tiny_config();
    ModelConfig without = tiny_config();
    without.edge_types_used = {cpg::EdgeType::CFG, cpg::EdgeType::DDG};

    TrainedModel m1 = init_model(with_ast, Vocabulary::build({&g}));
    TrainedModel m2 = init_model(without, Vocabulary::build({&g}));
    for (double& v : m1.params.at("cls_W")->value) v = 0.3;
    for (double& v : m2.params.at("cls_W")->value) v = 0.3;
    CHECK(predict(m1, g) != predict(m2, g));
    // the AST message parameters exist only when AST edges are used
    CHECK(m1.params.count("msg_W_AST") == 1);
    CHECK(m2.params.count("msg_W_AST") == 0);
}

TEST_CASE("smote balances classes with convex combinations") {
    Rng rng(31);
    std::vector<std::vector<double>> pts;
    std::vector<int> labels;
    for (int i = 0; i < 20; ++i) {
        pts.push_back({rng.normal(), rng.normal()});
        labels.push_back(0);
    }
    for (int i = 0; i < 6; ++i) {
        pts.push_back({5.0 + rng.normal(), 5.0 + rng.normal()});
        labels.push_back(1);
    }

    SmoteResult r = smote_resample(pts, labels, 5, 7);
    int pos = 0, neg = 0;
    for (int l : r.labels) (l ? pos : neg)++;
    CHECK(pos == neg);
    CHECK(r.k_used == 5);
    CHECK(!r.k_reduced);

    // every synthetic point lies on the segment between its recorded base
    // and neighbor, both minority, at the recorded interpolation factor
    REQUIRE(r.synthetic.size() == r.points.size() - pts.size());
    for (size_t s = 0; s < r.synthetic.size(); ++s) {
        const auto& prov = r.synthetic[s];
        CHECK(labels[prov.base] == 1);
        CHECK(labels[prov.neighbor] == 1);
        CHECK(prov.u >= 0.0);
        CHECK(prov.u <= 1.0);
        const auto& made = r.points[pts.size() + s];
        for (size_t d = 0; d < 2; ++d) {
            double want = pts[prov.base][d] + prov.u * (pts[prov.neighbor][d] - pts[prov.base][d]);
            CHECK(made[d] == doctest::Approx(want).epsilon(1e-12));
        }
    }
}

TEST_CASE("smote shrinks k when the minority is tiny and rejects one class") {
    std::vector<std::vector<double>> pts = {{0, 0}, {1, 0}, {0, 1}, {9, 9}, {9, 8}};
    std::vector<int> labels = {0, 0, 0, 1, 1};
    SmoteResult r = smote_resample(pts, labels, 5, 3);
    CHECK(r.k_reduced);
    CHECK(r.k_used == 1);  // only one other minority point available

    CHECK_THROWS_AS(smote_resample({{0, 0}, {1, 1}}, {1, 1}, 5, 3), std::invalid_argument);
}

TEST_CASE("smote on balanced input is the identity") {
    std::vector<std::vector<double>> pts = {{0, 0}, {1, 1}};
    std::vector<int> labels = {0, 1};
    SmoteResult r = smote_resample(pts, labels, 5, 3);
    CHECK(r.points == pts);
    CHECK(r.synthetic.empty());
}

TEST_CASE("majority downsampling equalizes counts deterministically") {
    std::vector<cpg::CodeGraph> storage;
    auto data = toy_dataset(storage);
    data.push_back({&storage[0], 1});  // 4 positive, 3 negative
    auto a = downsample_majority(data, 5);
    auto b = downsample_majority(data, 5);
    int pos = 0, neg = 0;
    for (const auto& e : a) (e.label ? pos : neg)++;
    CHECK(pos == neg);
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) CHECK(a[i].graph == b[i].graph);
}

TEST_CASE("training learns the toy separation and logs both phases") {
    std::vector<cpg::CodeGraph> storage;
    auto data = toy_dataset(storage);
    ModelConfig cfg = tiny_config();
    cfg.use_smote = true;
    cfg.use_representation_learning = true;
    cfg.max_epochs = 30;
    cfg.learning_rate = 3e-2;
    cfg.patience = 30;

    TrainedModel m = train(data, data, cfg);
    bool saw_encoder = false, saw_head = false;
    for (const auto& e : m.log) {
        if (e.phase == "encoder") saw_encoder = true;
        if (e.phase == "head") saw_head = true;
    }
    CHECK(saw_encoder);
    CHECK(saw_head);

    int correct = 0;
    for (const auto& e : data)
        if ((predict(m, *e.graph) > 0.5 ? 1 : 0) == e.label) ++correct;
    CHECK(correct >= 5);  // 6 examples, tolerate one miss
}

TEST_CASE("training rejects single-class input") {
    std::vector<cpg::CodeGraph> storage;
    auto data = toy_dataset(storage);
    std::vector<Example> pos_only(data.begin(), data.begin() + 3);
    CHECK_THROWS_AS(train(pos_only, pos_only, tiny_config()), DataError);
    CHECK_THROWS_AS(train({}, {}, tiny_config()), DataError);
}

TEST_CASE("training is deterministic and checkpoints byte-identically") {
    std::vector<cpg::CodeGraph> storage;
    auto data = toy_dataset(storage);
    ModelConfig cfg = tiny_config();
    cfg.max_epochs = 6;
    TrainedModel m1 = train(data, data, cfg);
    TrainedModel m2 = train(data, data, cfg);
    CHECK(save_model(m1) == save_model(m2));

    cfg.seed = 14;
    TrainedModel m3 = train(data, data, cfg);
    CHECK(save_model(m1) != save_model(m3));
}

TEST_CASE("saved models reload with identical predictions") {
    std::vector<cpg::CodeGraph> storage;
    auto data = toy_dataset(storage);
    ModelConfig cfg = tiny_config();
    cfg.use_smote = true;
    TrainedModel m = train(data, data, cfg);
    TrainedModel back = load_model(save_model(m));
    CHECK(back.config.to_json() == m.config.to_json());
    for (const auto& e : data)
        CHECK(predict(back, *e.graph) == doctest::Approx(predict(m, *e.graph)).epsilon(1e-15));
    CHECK_THROWS_AS(load_model("garbage"), DataError);
}
