#include "cpglab/harness.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cpglab::harness {

using corpus::Part;
using corpus::TaskKind;
using metrics::EvalEntry;
using metrics::EvalKey;
using metrics::EvalReport;

namespace {

const PartCombo kP1{Part::P1};
const PartCombo kP1P2{Part::P1, Part::P2};
const PartCombo kP1P3{Part::P1, Part::P3};
const PartCombo kP2P3{Part::P2, Part::P3};
const PartCombo kAll{Part::P1, Part::P2, Part::P3};

std::vector<corpus::LabeledRecord> filter_combo(const std::vector<corpus::LabeledRecord>& records,
                                                const PartCombo& combo) {
    std::vector<corpus::LabeledRecord> out;
    for (const auto& r : records)
        if (std::find(combo.begin(), combo.end(), r.part) != combo.end()) out.push_back(r);
    return out;
}

std::string frac_tag(double f) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "@%.2f", f);
    return buf;
}

}  // namespace

model::ModelConfig desk_config() {
    model::ModelConfig cfg;
    cfg.node_hidden_size = 32;
    cfg.token_embedding_size = 16;
    cfg.propagation_steps = 4;
    cfg.edge_types_used = {cpg::EdgeType::CFG, cpg::EdgeType::DDG};
    cfg.learning_rate = 3e-3;
    cfg.batch_size = 16;
    cfg.grad_accumulation_steps = 1;
    cfg.patience = 5;
    cfg.max_epochs = 30;
    cfg.representation_size = 32;
    return cfg;
}

ExperimentSpec default_spec(const std::string& rq, const model::ModelConfig& base_config,
                            uint64_t seed) {
    ExperimentSpec spec;
    spec.rq = rq;
    spec.base_config = base_config;
    spec.seed = seed;
    if (rq == "rq1") {
        spec.trials = 10;
        spec.train_combos = {kAll};
        spec.test_combos = {kAll};
    } else if (rq == "rq2") {
        spec.train_combos = {{Part::P1}, {Part::P2}, {Part::P3}, kP1P2, kP1P3, kP2P3, kAll};
        spec.test_combos = {kAll, kP1P3};
    } else if (rq == "rq3") {
        spec.train_combos = {{Part::P1}, {Part::P2}, {Part::P3}, kP1P2, kP1P3, kP2P3, kAll};
        spec.test_combos = {kP1};
    } else if (rq == "rq4") {
        spec.task = TaskKind::T2;
        spec.train_combos = {kP1P3, kP2P3, kAll};
        spec.test_combos = {kP1P3};
    } else if (rq == "rq5") {
        spec.train_combos = {{Part::P2}, kP1P2, kP2P3, kAll};
        spec.test_combos = {kP1P2};
    } else if (rq == "rq6") {
        spec.train_combos = {kAll};
        spec.test_combos = {kAll};
    } else {
        throw DataError("unknown research question: " + rq);
    }
    return spec;
}

Runner::Runner(std::vector<corpus::Commit> commits, const ExperimentSpec& spec)
    : commits_(std::move(commits)), spec_(spec) {
    auto add = [&](const corpus::FunctionRecord& rec) {
        if (graph_cache_.count(rec.normalized_hash)) return;
        auto ast = minilang::parse_source(rec.source);
        cpg::CodeGraph g = cpg::build_graph(ast, spec_.build_options);
        g.meta.function_id = rec.id;
        graph_cache_.emplace(rec.normalized_hash, std::move(g));
    };
    for (const auto& c : commits_) {
        for (const auto& [before, after] : c.changed) {
            add(before);
            add(after);
        }
        for (const auto& f : c.unchanged) add(f);
    }
}

const cpg::CodeGraph* Runner::graph_for(const corpus::FunctionRecord& rec) {
    auto it = graph_cache_.find(rec.normalized_hash);
    if (it == graph_cache_.end()) throw std::logic_error("graph cache miss: " + rec.id);
    return &it->second;
}

Runner::CellData Runner::assemble(int k, const PartCombo& train_combo, const PartCombo& test_combo,
                                  TaskKind task, int trial, double p3_train_fraction) {
    auto pit = partitions_.find(k);
    if (pit == partitions_.end()) {
        corpus::Partition p = corpus::clean_partition(
            corpus::build_partition(commits_, k, Rng::derive(spec_.seed, "partition")));
        pit = partitions_.emplace(k, std::move(p)).first;
    }
    corpus::SplitSpec split_spec = spec_.split_template;
    split_spec.seed = Rng::derive(spec_.seed, "split-k" + std::to_string(k) + "-t" +
                                                 std::to_string(trial));
    corpus::SplitResult split = corpus::split_dataset(pit->second, split_spec);

    auto select = [&](corpus::Split s, const PartCombo& combo) {
        std::vector<corpus::LabeledRecord> recs = split.select(s);
        if (task == TaskKind::T2) return corpus::relabel_for_task(recs, TaskKind::T2, combo);
        return filter_combo(recs, combo);  // natural pair/safe labels
    };

    CellData cell;
    auto to_examples = [&](const std::vector<corpus::LabeledRecord>& recs) {
        std::vector<model::Example> out;
        for (const auto& r : recs) out.push_back({graph_for(r.record), r.label});
        return out;
    };

    std::vector<corpus::LabeledRecord> train = select(corpus::Split::Train, train_combo);
    if (p3_train_fraction < 1.0) {
        std::vector<corpus::LabeledRecord> p3, rest;
        for (auto& r : train) (r.part == Part::P3 ? p3 : rest).push_back(r);
        Rng rng(Rng::derive(spec_.seed, "p3frac-k" + std::to_string(k) + "-t" +
                                            std::to_string(trial) + frac_tag(p3_train_fraction)));
        rng.shuffle(p3);
        size_t keep = static_cast<size_t>(
            std::ceil(p3_train_fraction * static_cast<double>(p3.size())));
        p3.resize(std::min(p3.size(), keep));
        rest.insert(rest.end(), p3.begin(), p3.end());
        train = std::move(rest);
    }
    cell.train = to_examples(train);
    cell.validation = to_examples(select(corpus::Split::Validation, train_combo));
    cell.test = to_examples(select(corpus::Split::Test, test_combo));
    return cell;
}

EvalEntry Runner::run_cell(int k, const PartCombo& train_combo, const PartCombo& test_combo,
                           TaskKind task, int trial, const model::ModelConfig& cfg,
                           double p3_train_fraction) {
    try {
        CellData cell = assemble(k, train_combo, test_combo, task, trial, p3_train_fraction);
        return evaluate_cell(cell, cfg);
    } catch (const std::exception& e) {
        EvalEntry entry;
        entry.flagged = true;
        entry.note = e.what();
        return entry;
    }
}

EvalEntry Runner::evaluate_cell(const CellData& cell, const model::ModelConfig& cfg) {
    EvalEntry entry;
    try {
        model::TrainedModel m = model::train(cell.train, cell.validation, cfg);
        std::vector<double> scores;
        std::vector<int> labels;
        for (const auto& e : cell.test) {
            scores.push_back(model::predict(m, *e.graph));
            labels.push_back(e.label);
            e.label ? ++entry.n_pos : ++entry.n_neg;
        }
        if (scores.empty()) {
            entry.flagged = true;
            entry.note = "empty test set";
            return entry;
        }
        entry.f1 = metrics::f1_score(scores, labels, cfg.f1_threshold);
        entry.counts = metrics::confusion(scores, labels, cfg.f1_threshold);
        if (entry.n_pos > 0 && entry.n_neg > 0) {
            entry.roc_auc = metrics::roc_auc(scores, labels);
        } else {
            entry.flagged = true;
            entry.note = "single-class test set";
        }
    } catch (const std::exception& e) {
        entry.flagged = true;
        entry.note = e.what();
    }
    return entry;
}

EvalReport Runner::run() {
    if (spec_.rq == "rq1") return run_rq1();
    if (spec_.rq == "rq4") return run_rq4();
    if (spec_.rq == "rq6") return run_rq6();
    return run_partition_sweep();
}

EvalReport Runner::run_rq1() {
    EvalReport report;
    struct Config {
        const char* name;
        bool smote_rl;
        bool ast_edges;     // edge_types_used includes AST
        bool prune;
        bool downsample;
    };
    const std::vector<Config> configs = {
        {"baseline", true, true, false, false},
        {"no_smote_rl", false, true, false, false},
        {"no_ast_edges", true, false, false, false},
        {"with_pruning", true, true, true, false},
        {"downsampling", true, true, false, true},
    };

    for (const auto& c : configs) {
        ExperimentSpec cell_spec = spec_;
        cell_spec.build_options.prune_operators = c.prune;
        Runner sub(commits_, cell_spec);
        for (int trial = 0; trial < spec_.trials; ++trial) {
            model::ModelConfig cfg = spec_.base_config;
            cfg.use_smote = c.smote_rl;
            cfg.use_representation_learning = c.smote_rl;
            cfg.downsample_majority = c.downsample;
            cfg.edge_types_used = {cpg::EdgeType::CFG, cpg::EdgeType::DDG};
            if (c.ast_edges) cfg.edge_types_used.insert(cpg::EdgeType::AST);
            cfg.seed = Rng::derive(spec_.seed,
                                   std::string("rq1-") + c.name + "-t" + std::to_string(trial));
            EvalEntry entry =
                sub.run_cell(spec_.rq1_k, kAll, kAll, TaskKind::T1, trial, cfg, 1.0);
            report.add({spec_.rq1_k, c.name, "P1+P2+P3", trial}, entry);
        }
    }
    return report;
}

EvalReport Runner::run_partition_sweep() {
    EvalReport report;
    for (int k = spec_.k_min; k <= spec_.k_max; ++k) {
        for (const auto& train_combo : spec_.train_combos) {
            for (const auto& test_combo : spec_.test_combos) {
                for (int trial = 0; trial < spec_.trials; ++trial) {
                    model::ModelConfig cfg = spec_.base_config;
                    cfg.seed = Rng::derive(
                        spec_.seed, spec_.rq + "-k" + std::to_string(k) + "-" +
                                        corpus::combo_name(train_combo) + "-" +
                                        corpus::combo_name(test_combo) + "-t" +
                                        std::to_string(trial));
                    report.add(
                        {k, corpus::combo_name(train_combo), corpus::combo_name(test_combo),
                         trial},
                        run_cell(k, train_combo, test_combo, spec_.task, trial, cfg, 1.0));
                }
            }
        }
    }
    return report;
}

EvalReport Runner::run_rq4() { return run_partition_sweep(); }

EvalReport Runner::run_rq6() {
    EvalReport report;
    int k = spec_.rq6_k;
    for (double frac : spec_.p3_fractions) {
        for (int trial = 0; trial < spec_.trials; ++trial) {
            model::ModelConfig cfg = spec_.base_config;
            cfg.seed = Rng::derive(spec_.seed, "rq6-k" + std::to_string(k) + frac_tag(frac) +
                                                   "-t" + std::to_string(trial));
            report.add({k, "P1+P2+P3" + frac_tag(frac), "P1+P2+P3", trial},
                       run_cell(k, kAll, kAll, spec_.task, trial, cfg, frac));
        }
    }
    return report;
}

double spearman(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size() || xs.size() < 2)
        throw std::invalid_argument("spearman: need two same-length series");
    auto ranks = [](const std::vector<double>& v) {
        size_t n = v.size();
        std::vector<size_t> order(n);
        for (size_t i = 0; i < n; ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return v[a] < v[b]; });
        std::vector<double> r(n);
        size_t i = 0;
        while (i < n) {
            size_t j = i;
            while (j < n && v[order[j]] == v[order[i]]) ++j;
            double avg = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
            for (size_t t = i; t < j; ++t) r[order[t]] = avg;
            i = j;
        }
        return r;
    };
    std::vector<double> rx = ranks(xs), ry = ranks(ys);
    double mx = 0, my = 0;
    for (size_t i = 0; i < rx.size(); ++i) {
        mx += rx[i];
        my += ry[i];
    }
    mx /= static_cast<double>(rx.size());
    my /= static_cast<double>(ry.size());
    double num = 0, dx = 0, dy = 0;
    for (size_t i = 0; i < rx.size(); ++i) {
        num += (rx[i] - mx) * (ry[i] - my);
        dx += (rx[i] - mx) * (rx[i] - mx);
        dy += (ry[i] - my) * (ry[i] - my);
    }
    if (dx == 0 || dy == 0) return 0.0;
    return num / std::sqrt(dx * dy);
}

}  // namespace cpglab::harness
