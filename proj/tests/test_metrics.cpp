#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>

#include "cpglab/metrics.hpp"
#include "cpglab/util.hpp"
#include "doctest.h"

using namespace cpglab;
using namespace cpglab::metrics;

namespace {

// Pair-counting definition: P(score+ > score-) with half credit for ties.
double auc_by_pairs(const std::vector<double>& scores, const std::vector<int>& labels) {
    double wins = 0.0;
    long pairs = 0;
    for (size_t i = 0; i < scores.size(); ++i) {
        if (!labels[i]) continue;
        for (size_t j = 0; j < scores.size(); ++j) {
            if (labels[j]) continue;
            ++pairs;
            if (scores[i] > scores[j])
                wins += 1.0;
            else if (scores[i] == scores[j])
                wins += 0.5;
        }
    }
    return wins / static_cast<double>(pairs);
}

}  // namespace

TEST_CASE("f1 basics") {
    CHECK(f1_score({0.9, 0.8, 0.2, 0.1}, {1, 1, 0, 0}) == 1.0);
    // tp=0 is defined as 0, not NaN
    CHECK(f1_score({0.1, 0.2}, {1, 1}) == 0.0);
    CHECK(f1_score({0.9, 0.9}, {0, 0}) == 0.0);
    // tp=1 fp=1 fn=1: precision=recall=0.5
    CHECK(f1_score({0.9, 0.9, 0.1}, {1, 0, 1}) == doctest::Approx(0.5));
}

TEST_CASE("f1 threshold is a strict greater-than boundary at 0.5 scores") {
    // score exactly at threshold counts as negative prediction
    Counts c = confusion({0.5, 0.6}, {1, 1}, 0.5);
    CHECK(c.tp == 1);
    CHECK(c.fn == 1);
}

TEST_CASE("roc auc on hand-worked examples") {
    CHECK(roc_auc({0.9, 0.1}, {1, 0}) == 1.0);
    CHECK(roc_auc({0.1, 0.9}, {1, 0}) == 0.0);
    CHECK(roc_auc({0.5, 0.5}, {1, 0}) == 0.5);
    // scores 0.2,0.4,0.4,0.8 labels 0,1,0,1: pairs (0.4>0.2)=1, (0.4=0.4)=0.5,
    // (0.8>0.2)=1, (0.8>0.4)=1 -> 3.5/4
    CHECK(roc_auc({0.2, 0.4, 0.4, 0.8}, {0, 1, 0, 1}) == doctest::Approx(0.875));
}

TEST_CASE("roc auc rejects single-class input") {
    CHECK_THROWS_AS(roc_auc({0.1, 0.2}, {1, 1}), std::invalid_argument);
    CHECK_THROWS_AS(roc_auc({0.1, 0.2}, {0, 0}), std::invalid_argument);
}

TEST_CASE("roc auc equals pair counting on every small input") {
    // all label vectors of size <= 7 over a fixed tie-heavy score grid
    const std::vector<double> grid = {0.0, 0.25, 0.25, 0.5, 0.75, 0.75, 1.0};
    for (size_t n = 2; n <= grid.size(); ++n) {
        std::vector<double> scores(grid.begin(), grid.begin() + static_cast<long>(n));
        for (unsigned mask = 1; mask + 1 < (1u << n); ++mask) {
            std::vector<int> labels(n);
            for (size_t i = 0; i < n; ++i) labels[i] = (mask >> i) & 1u;
            CHECK(roc_auc(scores, labels) == auc_by_pairs(scores, labels));
        }
    }
}

TEST_CASE("roc auc equals pair counting on random inputs") {
    Rng rng(404);
    for (int rep = 0; rep < 50; ++rep) {
        size_t n = 2 + rng.index(200);
        std::vector<double> scores(n);
        std::vector<int> labels(n);
        bool ok = false;
        for (size_t i = 0; i < n; ++i) {
            // coarse grid forces ties
            scores[i] = static_cast<double>(rng.index(10)) / 10.0;
            labels[i] = static_cast<int>(rng.index(2));
        }
        labels[0] = 0;
        labels[n - 1] = 1;
        (void)ok;
        CHECK(roc_auc(scores, labels) == doctest::Approx(auc_by_pairs(scores, labels)).epsilon(1e-12));
    }
}

TEST_CASE("roc auc invariances") {
    Rng rng(77);
    std::vector<double> scores;
    std::vector<int> labels;
    for (int i = 0; i < 40; ++i) {
        scores.push_back(static_cast<double>(rng.index(8)) / 8.0);
        labels.push_back(static_cast<int>(rng.index(2)));
    }
    labels[0] = 0;
    labels[1] = 1;
    double base = roc_auc(scores, labels);

    // strictly monotone transform of scores leaves AUC unchanged
    std::vector<double> warped = scores;
    for (double& s : warped) s = std::exp(3.0 * s);
    CHECK(roc_auc(warped, labels) == doctest::Approx(base).epsilon(1e-12));

    // complementing labels and negating scores leaves AUC unchanged
    std::vector<double> neg = scores;
    std::vector<int> flip = labels;
    for (double& s : neg) s = -s;
    for (int& l : flip) l = 1 - l;
    CHECK(roc_auc(neg, flip) == doctest::Approx(base).epsilon(1e-12));

    // complementing labels alone gives 1 - AUC
    CHECK(roc_auc(scores, flip) == doctest::Approx(1.0 - base).epsilon(1e-12));
}

TEST_CASE("median of odd and even sized samples") {
    CHECK(median({3.0, 1.0, 2.0}) == 2.0);
    // even length: mean of the middle two
    CHECK(median({4.0, 1.0, 3.0, 2.0}) == 2.5);
    CHECK(median({5.0}) == 5.0);
    CHECK_THROWS_AS(median({}), std::invalid_argument);
}

TEST_CASE("report aggregation skips flagged trials and csv round-trips") {
    EvalReport report;
    EvalEntry good1;
    good1.f1 = 0.4;
    good1.roc_auc = 0.7;
    good1.n_pos = 3;
    good1.n_neg = 5;
    EvalEntry good2 = good1;
    good2.f1 = 0.6;
    good2.roc_auc = 0.9;
    EvalEntry bad;
    bad.flagged = true;
    report.add({2, "P1", "P1", 0}, good1);
    report.add({2, "P1", "P1", 1}, good2);
    report.add({2, "P1", "P1", 2}, bad);

    auto aggs = report.median_over_trials();
    REQUIRE(aggs.size() == 1);
    const Aggregate& a = aggs.begin()->second;
    CHECK(a.trials == 2);
    CHECK(a.median_f1 == doctest::Approx(0.5));
    CHECK(a.median_roc_auc == doctest::Approx(0.8));

    EvalReport back = report_from_csv(report.to_csv());
    CHECK(back.to_csv() == report.to_csv());
}

TEST_CASE("csv rows are sorted and fixed-format") {
    EvalReport report;
    EvalEntry e;
    e.f1 = 0.125;
    e.roc_auc = 0.5;
    report.add({3, "P2", "P1", 0}, e);
    report.add({1, "P1", "P1", 0}, e);
    std::string csv = report.to_csv();
    CHECK(csv.find("k,train_combo,test_combo,trial,f1,roc_auc,n_pos,n_neg") == 0);
    CHECK(csv.find("1,P1,P1,0,0.125000,0.500000,0,0") != std::string::npos);
    CHECK(csv.find("1,P1") < csv.find("3,P2"));
}
