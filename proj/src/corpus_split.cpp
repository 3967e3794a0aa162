#include "cpglab/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace cpglab::corpus {

const char* to_string(Split s) {
    switch (s) {
        case Split::Train: return "train";
        case Split::Validation: return "validation";
        case Split::Test: return "test";
    }
    return "?";
}

std::vector<LabeledRecord> SplitResult::select(Split s) const {
    std::vector<LabeledRecord> out;
    for (const auto& r : records)
        if (r.split == s) out.push_back(r.rec);
    return out;
}

std::vector<LabeledRecord> SplitResult::select(Split s, const std::vector<Part>& combo) const {
    std::vector<LabeledRecord> out;
    for (const auto& r : records) {
        if (r.split != s) continue;
        if (std::find(combo.begin(), combo.end(), r.rec.part) != combo.end()) out.push_back(r.rec);
    }
    return out;
}

SplitResult split_dataset(const Partition& p, const SplitSpec& spec) {
    double total = spec.train_fraction + spec.validation_fraction + spec.test_fraction;
    if (std::abs(total - 1.0) > 1e-9)
        throw DataError("split_dataset: fractions must sum to 1");
    if (spec.train_fraction <= 0 || spec.test_fraction < 0 || spec.validation_fraction < 0)
        throw DataError("split_dataset: invalid fractions");

    SplitResult result;
    for (Part part : {Part::P1, Part::P2, Part::P3}) {
        const auto& records = p.part(part);
        if (records.empty()) continue;

        // strata: by label when stratifying, otherwise one stratum per part
        std::map<int, std::vector<const LabeledRecord*>> strata;
        for (const auto& r : records) strata[spec.stratify_by_label ? r.label : 0].push_back(&r);

        for (auto& [label, stratum] : strata) {
            size_t n = stratum.size();
            size_t n_train = static_cast<size_t>(std::floor(spec.train_fraction * static_cast<double>(n)));
            size_t n_val = static_cast<size_t>(std::floor(spec.validation_fraction * static_cast<double>(n)));
            if (n_train == 0 || (spec.test_fraction > 0 && n - n_train - n_val == 0))
                throw DataError(std::string("split_dataset: part ") + to_string(part) +
                                " too small to stratify");
            Rng rng(Rng::derive(spec.seed, std::string("split-") + to_string(part) + "-" +
                                               std::to_string(label)));
            std::vector<const LabeledRecord*> shuffled = stratum;
            rng.shuffle(shuffled);
            for (size_t i = 0; i < n; ++i) {
                Split s = i < n_train ? Split::Train
                          : i < n_train + n_val ? Split::Validation
                                                : Split::Test;
                result.records.push_back({*shuffled[i], s});
            }
        }
    }

    // leakage rule: a hash seen in train/validation must not appear in test
    std::set<std::string> trained;
    for (const auto& r : result.records)
        if (r.split != Split::Test) trained.insert(r.rec.record.normalized_hash);
    std::vector<SplitRecord> kept;
    for (auto& r : result.records) {
        if (r.split == Split::Test && trained.count(r.rec.record.normalized_hash)) {
            ++result.leakage_removed;
            continue;
        }
        kept.push_back(std::move(r));
    }
    result.records = std::move(kept);
    return result;
}

std::vector<LabeledRecord> relabel_for_task(const std::vector<LabeledRecord>& records,
                                            TaskKind task, const std::vector<Part>& combo) {
    if (task == TaskKind::T0)
        throw DataError("relabel_for_task: T0 is a reporting label, not a training target");
    std::vector<LabeledRecord> out;
    bool has_p3 = false;
    for (const auto& r : records) {
        if (std::find(combo.begin(), combo.end(), r.part) == combo.end()) continue;
        LabeledRecord lr = r;
        if (task == TaskKind::T1) {
            if (r.part == Part::P3) continue;  // T1 is defined on pairs only
        } else {
            lr.label = (r.part == Part::P3) ? 0 : 1;
            if (r.part == Part::P3) has_p3 = true;
        }
        out.push_back(std::move(lr));
    }
    if (task == TaskKind::T2 && !has_p3)
        throw DataError("relabel_for_task: T2 requires a non-empty P3");
    return out;
}

std::string combo_name(const std::vector<Part>& combo) {
    std::string s;
    for (Part p : combo) {
        if (!s.empty()) s += '+';
        s += to_string(p);
    }
    return s;
}

std::vector<Part> combo_from_name(std::string_view name) {
    std::vector<Part> out;
    std::string cur;
    auto flush = [&] {
        if (cur.empty()) return;
        if (cur == "P1" || cur == "p1") out.push_back(Part::P1);
        else if (cur == "P2" || cur == "p2") out.push_back(Part::P2);
        else if (cur == "P3" || cur == "p3") out.push_back(Part::P3);
        else throw DataError("unknown part name: " + cur);
        cur.clear();
    };
    for (char c : name) {
        if (c == '+' || c == ',') flush();
        else cur += c;
    }
    flush();
    if (out.empty()) throw DataError("empty part combo");
    return out;
}

std::string manifest_csv(const SplitResult& r) {
    std::ostringstream out;
    out << "id,part,label,split,normalized_hash\n";
    for (const auto& rec : r.records) {
        out << rec.rec.record.id << ',' << to_string(rec.rec.part) << ',' << rec.rec.label << ','
            << to_string(rec.split) << ',' << rec.rec.record.normalized_hash << '\n';
    }
    return out.str();
}

}  // namespace cpglab::corpus
