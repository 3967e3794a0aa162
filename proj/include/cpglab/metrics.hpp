#pragma once

#include <map>
#include <string>
#include <vector>

namespace cpglab::metrics {

struct Counts {
    int tp = 0, fp = 0, fn = 0, tn = 0;
};

Counts confusion(const std::vector<double>& scores, const std::vector<int>& labels,
                 double threshold = 0.5);
double f1_score(const std::vector<double>& scores, const std::vector<int>& labels,
                double threshold = 0.5);

// Mann-Whitney rank statistic; ties get half credit. Throws on single-class input.
double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels);

double median(std::vector<double> values);

struct EvalKey {
    int k = 0;
    std::string train_combo;
    std::string test_combo;
    int trial = 0;
    auto operator<=>(const EvalKey&) const = default;
};

struct EvalEntry {
    double f1 = 0.0;
    double roc_auc = 0.0;
    Counts counts;
    int n_pos = 0;
    int n_neg = 0;
    bool flagged = false;  // degenerate cell (single-class test, empty combo, ...)
    std::string note;
};

struct AggKey {
    int k = 0;
    std::string train_combo;
    std::string test_combo;
    auto operator<=>(const AggKey&) const = default;
};

struct Aggregate {
    double median_f1 = 0.0;
    double median_roc_auc = 0.0;
    int trials = 0;
};

struct EvalReport {
    std::vector<std::pair<EvalKey, EvalEntry>> entries;

    void add(const EvalKey& k, const EvalEntry& e) { entries.emplace_back(k, e); }
    std::map<AggKey, Aggregate> median_over_trials() const;

    std::string to_csv() const;           // k,train_combo,test_combo,trial,f1,roc_auc,n_pos,n_neg
    std::string aggregates_to_csv() const;  // k,train_combo,test_combo,trials,median_f1,median_roc_auc
};

EvalReport report_from_csv(const std::string& csv_text);

}  // namespace cpglab::metrics
