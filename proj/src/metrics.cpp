#include "cpglab/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace cpglab::metrics {

namespace {

void check_inputs(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.empty()) throw std::invalid_argument("metrics: empty input");
    if (scores.size() != labels.size())
        throw std::invalid_argument("metrics: scores/labels size mismatch");
    for (int l : labels)
        if (l != 0 && l != 1) throw std::invalid_argument("metrics: labels must be 0/1");
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

}  // namespace

Counts confusion(const std::vector<double>& scores, const std::vector<int>& labels,
                 double threshold) {
    check_inputs(scores, labels);
    Counts c;
    for (size_t i = 0; i < scores.size(); ++i) {
        bool pred = scores[i] > threshold;
        if (labels[i] == 1)
            pred ? ++c.tp : ++c.fn;
        else
            pred ? ++c.fp : ++c.tn;
    }
    return c;
}

double f1_score(const std::vector<double>& scores, const std::vector<int>& labels,
                double threshold) {
    Counts c = confusion(scores, labels, threshold);
    if (c.tp == 0) return 0.0;
    double precision = static_cast<double>(c.tp) / (c.tp + c.fp);
    double recall = static_cast<double>(c.tp) / (c.tp + c.fn);
    return 2.0 * precision * recall / (precision + recall);
}

double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    check_inputs(scores, labels);
    size_t n = scores.size();
    size_t n_pos = 0;
    for (int l : labels) n_pos += static_cast<size_t>(l);
    size_t n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0) throw std::invalid_argument("AUC undefined: single-class labels");

    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return scores[a] < scores[b]; });

    // average ranks over tie groups, 1-based
    double pos_rank_sum = 0.0;
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j < n && scores[order[j]] == scores[order[i]]) ++j;
        double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (size_t t = i; t < j; ++t)
            if (labels[order[t]] == 1) pos_rank_sum += avg_rank;
        i = j;
    }
    double u = pos_rank_sum - static_cast<double>(n_pos) * (static_cast<double>(n_pos) + 1.0) / 2.0;
    return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double median(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("median: empty input");
    std::sort(values.begin(), values.end());
    size_t n = values.size();
    if (n % 2 == 1) return values[n / 2];
    return (values[n / 2 - 1] + values[n / 2]) / 2.0;
}

std::map<AggKey, Aggregate> EvalReport::median_over_trials() const {
    std::map<AggKey, std::pair<std::vector<double>, std::vector<double>>> buckets;
    for (const auto& [key, entry] : entries) {
        auto& b = buckets[{key.k, key.train_combo, key.test_combo}];
        if (entry.flagged) continue;  // key still appears, with zero usable trials
        b.first.push_back(entry.f1);
        b.second.push_back(entry.roc_auc);
    }
    std::map<AggKey, Aggregate> out;
    for (auto& [key, b] : buckets) {
        if (b.first.empty())
            out[key] = {0.0, 0.0, 0};
        else
            out[key] = {median(b.first), median(b.second), static_cast<int>(b.first.size())};
    }
    return out;
}

std::string EvalReport::to_csv() const {
    std::ostringstream out;
    out << "k,train_combo,test_combo,trial,f1,roc_auc,n_pos,n_neg\n";
    auto sorted = entries;
    std::sort(sorted.begin(), sorted.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [key, e] : sorted) {
        out << key.k << ',' << key.train_combo << ',' << key.test_combo << ',' << key.trial << ','
            << fmt(e.f1) << ',' << fmt(e.roc_auc) << ',' << e.n_pos << ',' << e.n_neg << '\n';
    }
    return out.str();
}

std::string EvalReport::aggregates_to_csv() const {
    std::ostringstream out;
    out << "k,train_combo,test_combo,trials,median_f1,median_roc_auc\n";
    for (const auto& [key, agg] : median_over_trials()) {
        out << key.k << ',' << key.train_combo << ',' << key.test_combo << ',' << agg.trials << ','
            << fmt(agg.median_f1) << ',' << fmt(agg.median_roc_auc) << '\n';
    }
    return out.str();
}

EvalReport report_from_csv(const std::string& csv_text) {
    EvalReport report;
    std::istringstream in(csv_text);
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (header) {
            header = false;
            continue;
        }
        std::istringstream ls(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(ls, field, ',')) fields.push_back(field);
        if (fields.size() != 8) throw std::invalid_argument("report csv: bad row: " + line);
        EvalKey key{std::stoi(fields[0]), fields[1], fields[2], std::stoi(fields[3])};
        EvalEntry e;
        e.f1 = std::stod(fields[4]);
        e.roc_auc = std::stod(fields[5]);
        e.n_pos = std::stoi(fields[6]);
        e.n_neg = std::stoi(fields[7]);
        report.add(key, e);
    }
    return report;
}

}  // namespace cpglab::metrics
