#pragma once

#include <map>
#include <string>
#include <vector>

#include "cpglab/corpus.hpp"
#include "cpglab/cpg.hpp"
#include "cpglab/generator.hpp"
#include "cpglab/metrics.hpp"
#include "cpglab/model.hpp"

namespace cpglab::harness {

using PartCombo = std::vector<corpus::Part>;

struct ExperimentSpec {
    std::string rq = "rq2";  // rq1..rq6
    int k_min = 1;
    int k_max = 8;
    std::vector<PartCombo> train_combos;
    std::vector<PartCombo> test_combos;
    int trials = 3;
    corpus::TaskKind task = corpus::TaskKind::T1;
    int rq1_k = 4;   // partition level used for the configuration study
    int rq6_k = 4;   // fixed level for the P3-size sweep
    std::vector<double> p3_fractions = {0.1, 0.25, 0.5, 0.75, 1.0};
    cpg::BuildOptions build_options = {true, true};  // AST edges kept, operators pruned
    model::ModelConfig base_config;
    corpus::SplitSpec split_template;  // seed field is overridden per trial
    uint64_t seed = 0;
};

// Reference protocol defaults for each research question; base_config is the caller's
// desk-scale model configuration.
ExperimentSpec default_spec(const std::string& rq, const model::ModelConfig& base_config,
                            uint64_t seed);

// A desk-scale model configuration small enough for k-sweeps on one core.
model::ModelConfig desk_config();

class Runner {
public:
    Runner(std::vector<corpus::Commit> commits, const ExperimentSpec& spec);

    metrics::EvalReport run();  // dispatches on spec.rq

    metrics::EvalReport run_rq1();
    metrics::EvalReport run_partition_sweep();  // rq2, rq3, rq5
    metrics::EvalReport run_rq4();
    metrics::EvalReport run_rq6();

private:
    struct CellData {
        std::vector<model::Example> train, validation, test;
    };

    const cpg::CodeGraph* graph_for(const corpus::FunctionRecord& rec);
    CellData assemble(int k, const PartCombo& train_combo, const PartCombo& test_combo,
                      corpus::TaskKind task, int trial, double p3_train_fraction = 1.0);
    metrics::EvalEntry run_cell(int k, const PartCombo& train_combo,
                                const PartCombo& test_combo, corpus::TaskKind task, int trial,
                                const model::ModelConfig& cfg, double p3_train_fraction);
    metrics::EvalEntry evaluate_cell(const CellData& cell, const model::ModelConfig& cfg);

    std::vector<corpus::Commit> commits_;
    ExperimentSpec spec_;
    std::map<std::string, cpg::CodeGraph> graph_cache_;  // normalized_hash -> graph
    std::map<int, corpus::Partition> partitions_;        // level k -> cleaned partition
};

// CSV + SVG emission; one results/medians CSV pair per report, one SVG per
// test combo (AUC against k, a polyline per train combo). Byte-stable.
struct EmittedFiles {
    std::vector<std::string> paths;
};

EmittedFiles emit_outputs(const metrics::EvalReport& report, const std::string& rq,
                          const std::string& out_dir);

std::string render_sweep_svg(const metrics::EvalReport& report, const std::string& test_combo);

// rank correlation with average ranks for ties; used for trend checks
double spearman(const std::vector<double>& xs, const std::vector<double>& ys);

}  // namespace cpglab::harness
