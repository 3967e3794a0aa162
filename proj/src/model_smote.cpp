#include "cpglab/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cpglab::model {

SmoteResult smote_resample(const std::vector<std::vector<double>>& points,
                           const std::vector<int>& labels, size_t k_neighbors, uint64_t seed) {
    if (points.size() != labels.size())
        throw std::invalid_argument("smote_resample: points/labels size mismatch");
    size_t n_pos = 0;
    for (int l : labels) n_pos += static_cast<size_t>(l);
    size_t n_neg = points.size() - n_pos;
    if (n_pos == 0 || n_neg == 0)
        throw std::invalid_argument("smote_resample: single-class input");

    SmoteResult out;
    out.points = points;
    out.labels = labels;
    if (n_pos == n_neg) {
        out.k_used = k_neighbors;
        return out;  // already balanced
    }

    int minority_label = n_pos < n_neg ? 1 : 0;
    std::vector<size_t> minority;
    for (size_t i = 0; i < labels.size(); ++i)
        if (labels[i] == minority_label) minority.push_back(i);

    size_t k = k_neighbors;
    if (minority.size() < k + 1) {
        k = minority.size() - 1;
        out.k_reduced = true;
    }
    out.k_used = k;

    // k nearest minority neighbors per minority point (squared Euclidean,
    // ties broken by index for determinism)
    auto dist2 = [&](size_t a, size_t b) {
        double s = 0.0;
        for (size_t c = 0; c < points[a].size(); ++c) {
            double d = points[a][c] - points[b][c];
            s += d * d;
        }
        return s;
    };
    std::vector<std::vector<size_t>> nn(minority.size());
    for (size_t i = 0; i < minority.size(); ++i) {
        std::vector<std::pair<double, size_t>> ds;
        for (size_t j = 0; j < minority.size(); ++j) {
            if (j == i) continue;
            ds.emplace_back(dist2(minority[i], minority[j]), minority[j]);
        }
        std::sort(ds.begin(), ds.end());
        for (size_t t = 0; t < k && t < ds.size(); ++t) nn[i].push_back(ds[t].second);
    }

    size_t need = std::max(n_pos, n_neg) - std::min(n_pos, n_neg);
    Rng rng(Rng::derive(seed, "smote"));
    for (size_t s = 0; s < need; ++s) {
        size_t bi = rng.index(minority.size());
        size_t base = minority[bi];
        size_t neighbor = nn[bi].empty() ? base : nn[bi][rng.index(nn[bi].size())];
        double u = rng.uniform();
        std::vector<double> synth(points[base].size());
        for (size_t c = 0; c < synth.size(); ++c)
            synth[c] = points[base][c] + u * (points[neighbor][c] - points[base][c]);
        out.points.push_back(std::move(synth));
        out.labels.push_back(minority_label);
        out.synthetic.push_back({base, neighbor, u});
    }
    return out;
}

std::vector<Example> downsample_majority(const std::vector<Example>& dataset, uint64_t seed) {
    size_t n_pos = 0;
    for (const auto& e : dataset) n_pos += static_cast<size_t>(e.label);
    size_t n_neg = dataset.size() - n_pos;
    if (n_pos == 0 || n_neg == 0)
        throw std::invalid_argument("downsample_majority: both classes required");
    if (n_pos == n_neg) return dataset;

    int majority_label = n_pos > n_neg ? 1 : 0;
    size_t keep = std::min(n_pos, n_neg);
    std::vector<size_t> majority_idx;
    std::vector<Example> out;
    for (size_t i = 0; i < dataset.size(); ++i) {
        if (dataset[i].label == majority_label)
            majority_idx.push_back(i);
        else
            out.push_back(dataset[i]);
    }
    Rng rng(Rng::derive(seed, "downsample"));
    rng.shuffle(majority_idx);
    majority_idx.resize(keep);
    std::sort(majority_idx.begin(), majority_idx.end());  // preserve input order
    for (size_t i : majority_idx) out.push_back(dataset[i]);
    return out;
}

}  // namespace cpglab::model
