#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cpglab/corpus.hpp"
#include "cpglab/generator.hpp"
#include "cpglab/harness.hpp"
#include "doctest.h"

using namespace cpglab;
using namespace cpglab::harness;

namespace {

std::vector<corpus::Commit> small_corpus(int n, uint64_t seed) {
    gen::GeneratorSpec gspec;
    gspec.n_commits = n;
    gspec.seed = seed;
    return corpus::ingest_commits_text(gen::generate_corpus(gspec).jsonl).commits;
}

model::ModelConfig quick_config() {
    model::ModelConfig cfg = desk_config();
    cfg.max_epochs = 4;
    cfg.patience = 2;
    return cfg;
}

metrics::EvalReport fixture_report() {
    metrics::EvalReport r;
    double auc = 0.5;
    for (const std::string& combo : {"P1", "P1+P2"}) {
        for (int k = 1; k <= 3; ++k) {
            metrics::EvalEntry e;
            e.f1 = 0.3;
            e.roc_auc = auc;
            e.n_pos = 4;
            e.n_neg = 4;
            auc += 0.05;
            r.add({k, combo, "P1", 0}, e);
        }
    }
    return r;
}

}  // namespace

TEST_CASE("spearman on hand examples") {
    CHECK(spearman({1, 2, 3, 4}, {10, 20, 30, 40}) == doctest::Approx(1.0));
    CHECK(spearman({1, 2, 3, 4}, {9, 7, 5, 3}) == doctest::Approx(-1.0));
    // a monotone but nonlinear relation is still rho = 1
    CHECK(spearman({1, 2, 3, 4}, {1, 8, 27, 64}) == doctest::Approx(1.0));
    // constant series has no ranking signal
    CHECK(spearman({1, 2, 3}, {5, 5, 5}) == 0.0);
    CHECK_THROWS_AS(spearman({1}, {1}), std::invalid_argument);
    CHECK_THROWS_AS(spearman({1, 2}, {1, 2, 3}), std::invalid_argument);
}

TEST_CASE("spearman averages tied ranks") {
    // ys ties at positions 0,1: ranks 1.5,1.5,3 against xs ranks 1,2,3
    double rho = spearman({1, 2, 3}, {4, 4, 9});
    CHECK(rho > 0.8);
    CHECK(rho < 1.0);
}

TEST_CASE("protocol defaults") {
    model::ModelConfig cfg = desk_config();
    ExperimentSpec rq1 = default_spec("rq1", cfg, 1);
    CHECK(rq1.trials == 10);
    ExperimentSpec rq2 = default_spec("rq2", cfg, 1);
    CHECK(rq2.train_combos.size() == 7);
    CHECK(rq2.trials == 3);
    ExperimentSpec rq3 = default_spec("rq3", cfg, 1);
    REQUIRE(rq3.test_combos.size() == 1);
    CHECK(rq3.test_combos[0] == PartCombo{corpus::Part::P1});
    ExperimentSpec rq4 = default_spec("rq4", cfg, 1);
    CHECK(rq4.task == corpus::TaskKind::T2);
    for (const auto& combo : rq4.train_combos)
        CHECK(std::count(combo.begin(), combo.end(), corpus::Part::P3) == 1);
    ExperimentSpec rq6 = default_spec("rq6", cfg, 1);
    CHECK(rq6.p3_fractions.size() == 5);
    CHECK_THROWS_AS(default_spec("rq9", cfg, 1), DataError);
}

TEST_CASE("partition sweep emits one row per cell and is deterministic") {
    auto commits = small_corpus(30, 44);
    ExperimentSpec spec = default_spec("rq3", quick_config(), 5);
    spec.k_min = 1;
    spec.k_max = 2;
    spec.trials = 1;
    spec.train_combos = {{corpus::Part::P1}, {corpus::Part::P1, corpus::Part::P3}};

    Runner r1(commits, spec);
    metrics::EvalReport a = r1.run();
    CHECK(a.entries.size() == 2u * 2u * 1u);  // k values x train combos x trials

    Runner r2(commits, spec);
    CHECK(r2.run().to_csv() == a.to_csv());
}

TEST_CASE("degenerate combos are flagged rather than fatal") {
    auto commits = small_corpus(25, 91);
    ExperimentSpec spec = default_spec("rq3", quick_config(), 5);
    spec.k_min = 1;
    spec.k_max = 1;
    spec.trials = 1;
    spec.train_combos = {{corpus::Part::P2}};  // empty at k=1
    metrics::EvalReport rep = Runner(commits, spec).run();
    REQUIRE(rep.entries.size() == 1);
    CHECK(rep.entries[0].second.flagged);
    CHECK(rep.median_over_trials().begin()->second.trials == 0);
}

TEST_CASE("rq6 keeps the test set fixed while the train set shrinks") {
    auto commits = small_corpus(30, 17);
    ExperimentSpec spec = default_spec("rq6", quick_config(), 5);
    spec.rq6_k = 2;
    spec.trials = 1;
    spec.p3_fractions = {0.25, 1.0};
    metrics::EvalReport rep = Runner(commits, spec).run();
    REQUIRE(rep.entries.size() == 2);
    // identical test population at both fractions
    CHECK(rep.entries[0].second.n_pos == rep.entries[1].second.n_pos);
    CHECK(rep.entries[0].second.n_neg == rep.entries[1].second.n_neg);
}

TEST_CASE("svg renders one polyline per train combo") {
    std::string svg = render_sweep_svg(fixture_report(), "P1");
    size_t count = 0, pos = 0;
    while ((pos = svg.find("<polyline", pos)) != std::string::npos) {
        ++count;
        ++pos;
    }
    CHECK(count == 2);
    CHECK(svg.find("partition level k") != std::string::npos);
    CHECK(svg.find("P1+P2") != std::string::npos);
}

TEST_CASE("svg output matches the reviewed golden file") {
    std::ifstream in(std::string(TEST_DATA_DIR) + "/golden_sweep.svg", std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    CHECK(render_sweep_svg(fixture_report(), "P1") == ss.str());
}

TEST_CASE("fraction-suffixed combos switch the axis") {
    metrics::EvalReport r;
    for (double f : {0.1, 0.5, 1.0}) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "P1+P2+P3@%.2f", f);
        metrics::EvalEntry e;
        e.roc_auc = 0.7;
        e.n_pos = 1;
        e.n_neg = 1;
        r.add({4, buf, "P1+P2+P3", 0}, e);
    }
    std::string svg = render_sweep_svg(r, "P1+P2+P3");
    CHECK(svg.find("train fraction of P3") != std::string::npos);
    CHECK(svg.find("0.10") != std::string::npos);
    CHECK(svg.find("1.00") != std::string::npos);
}

TEST_CASE("emit writes csv and one svg per test combo") {
    std::string dir = "emit_test_out";
    std::filesystem::create_directories(dir);
    EmittedFiles files = emit_outputs(fixture_report(), "rqx", dir);
    REQUIRE(files.paths.size() == 3);  // results, medians, one test combo
    for (const auto& p : files.paths) CHECK(std::filesystem::exists(p));

    // byte-stable across calls
    std::ifstream in(files.paths[2], std::ios::binary);
    std::ostringstream first;
    first << in.rdbuf();
    emit_outputs(fixture_report(), "rqx", dir);
    std::ifstream in2(files.paths[2], std::ios::binary);
    std::ostringstream second;
    second << in2.rdbuf();
    CHECK(first.str() == second.str());
    std::filesystem::remove_all(dir);
}
