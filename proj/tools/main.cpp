#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cpglab/corpus.hpp"
#include "cpglab/cpg.hpp"
#include "cpglab/generator.hpp"
#include "cpglab/harness.hpp"
#include "cpglab/metrics.hpp"
#include "cpglab/minilang.hpp"
#include "cpglab/model.hpp"
#include "cpglab/util.hpp"

namespace {

using namespace cpglab;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    out << body;
}

std::set<cpg::EdgeType> parse_edge_types(const std::string& csv) {
    std::set<cpg::EdgeType> out;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok == "AST")
            out.insert(cpg::EdgeType::AST);
        else if (tok == "CFG")
            out.insert(cpg::EdgeType::CFG);
        else if (tok == "DDG")
            out.insert(cpg::EdgeType::DDG);
        else
            throw CLI::ValidationError("--edge-types", "unknown edge type '" + tok + "'");
    }
    if (out.empty()) throw CLI::ValidationError("--edge-types", "at least one edge type");
    return out;
}

corpus::TaskKind parse_task(const std::string& s) {
    if (s == "T1") return corpus::TaskKind::T1;
    if (s == "T2") return corpus::TaskKind::T2;
    throw CLI::ValidationError("--task", "expected T1 or T2");
}

// shared model flag block; every field of ModelConfig is a flag
void add_model_flags(CLI::App* cmd, model::ModelConfig& cfg, std::string& edge_types_csv) {
    cmd->add_option("--graph-embedding-size", cfg.graph_embedding_size, "graph embedding width")
        ->capture_default_str();
    cmd->add_option("--node-hidden-size", cfg.node_hidden_size, "node state width")
        ->capture_default_str();
    cmd->add_option("--token-embedding-size", cfg.token_embedding_size, "token embedding width")
        ->capture_default_str();
    cmd->add_option("--propagation-steps", cfg.propagation_steps, "message passing rounds")
        ->capture_default_str();
    cmd->add_option("--edge-types", edge_types_csv, "edge types used, comma separated")
        ->capture_default_str();
    cmd->add_flag("--smote", cfg.use_smote, "oversample the minority class in phase two");
    cmd->add_flag("--representation-learning", cfg.use_representation_learning,
                  "train the triplet representation head");
    cmd->add_flag("--downsample", cfg.downsample_majority,
                  "downsample the majority class before training");
    cmd->add_option("--lr", cfg.learning_rate, "learning rate")->capture_default_str();
    cmd->add_option("--weight-decay", cfg.weight_decay, "decoupled weight decay")
        ->capture_default_str();
    cmd->add_option("--batch-size", cfg.batch_size, "training batch size")
        ->capture_default_str();
    cmd->add_option("--max-batches", cfg.max_batches, "total batch budget across phases")
        ->capture_default_str();
    cmd->add_option("--grad-accumulation-steps", cfg.grad_accumulation_steps,
                    "batches per optimizer step")
        ->capture_default_str();
    cmd->add_option("--patience", cfg.patience, "early stopping patience in epochs")
        ->capture_default_str();
    cmd->add_option("--representation-size", cfg.representation_size,
                    "representation head width")
        ->capture_default_str();
    cmd->add_option("--triplet-margin", cfg.triplet_margin, "triplet hinge margin")
        ->capture_default_str();
    cmd->add_option("--triplet-alpha", cfg.triplet_alpha, "triplet loss weight")
        ->capture_default_str();
    cmd->add_option("--projection-l2", cfg.projection_l2, "projection norm penalty")
        ->capture_default_str();
    cmd->add_option("--f1-threshold", cfg.f1_threshold, "decision threshold")
        ->capture_default_str();
    cmd->add_option("--max-epochs", cfg.max_epochs, "epoch cap per phase")
        ->capture_default_str();
    cmd->add_option("--smote-k", cfg.smote_k_neighbors, "neighbor count for oversampling")
        ->capture_default_str();
}

struct DatasetArgs {
    std::string corpus;
    int k = 1;
    std::string combo = "P1+P2+P3";
    std::string task = "T1";
    uint64_t seed = 0;
};

void add_dataset_flags(CLI::App* cmd, DatasetArgs& a) {
    cmd->add_option("--corpus", a.corpus, "commit corpus, one JSON commit per line")
        ->required();
    cmd->add_option("--k", a.k, "partition strictness level")->capture_default_str();
    cmd->add_option("--combo", a.combo, "part combination, e.g. P1+P3")->capture_default_str();
    cmd->add_option("--task", a.task, "labeling task, T1 or T2")->capture_default_str();
    cmd->add_option("--seed", a.seed, "random seed")->capture_default_str();
}

struct PreparedData {
    corpus::SplitResult split;
    std::map<std::string, cpg::CodeGraph> graphs;  // normalized_hash -> graph
};

PreparedData prepare(const DatasetArgs& a, const cpg::BuildOptions& opts) {
    auto ingest = corpus::ingest_commits(a.corpus);
    corpus::Partition part = corpus::clean_partition(
        corpus::build_partition(ingest.commits, a.k, Rng::derive(a.seed, "partition")));
    corpus::SplitSpec sspec;
    sspec.seed = Rng::derive(a.seed, "split");
    PreparedData data;
    data.split = corpus::split_dataset(part, sspec);
    for (const auto& sr : data.split.records) {
        if (data.graphs.count(sr.rec.record.normalized_hash)) continue;
        auto ast = minilang::parse_source(sr.rec.record.source);
        cpg::CodeGraph g = cpg::build_graph(ast, opts);
        g.meta.function_id = sr.rec.record.id;
        data.graphs.emplace(sr.rec.record.normalized_hash, std::move(g));
    }
    return data;
}

std::vector<model::Example> examples_for(const PreparedData& data, corpus::Split split,
                                         const DatasetArgs& a) {
    auto recs = corpus::relabel_for_task(data.split.select(split), parse_task(a.task),
                                         corpus::combo_from_name(a.combo));
    std::vector<model::Example> out;
    for (const auto& r : recs)
        out.push_back({&data.graphs.at(r.record.normalized_hash), r.label});
    return out;
}

int run(int argc, char** argv) {
    CLI::App app{"code property graph vulnerability experiments"};
    app.require_subcommand(1);

    // generate
    auto* gen_cmd = app.add_subcommand("generate", "write a synthetic commit corpus");
    gen::GeneratorSpec gspec;
    std::string gen_out = "corpus.jsonl";
    gen_cmd->add_option("--out", gen_out, "output corpus path")->capture_default_str();
    gen_cmd->add_option("--commits", gspec.n_commits, "number of commits")
        ->capture_default_str();
    gen_cmd->add_option("--unchanged-min", gspec.unchanged_min,
                        "minimum unchanged functions per commit")
        ->capture_default_str();
    gen_cmd->add_option("--unchanged-max", gspec.unchanged_max,
                        "maximum unchanged functions per commit")
        ->capture_default_str();
    gen_cmd->add_option("--seed", gspec.seed, "random seed")->capture_default_str();

    // ingest
    auto* ing_cmd = app.add_subcommand("ingest", "validate a corpus and report diagnostics");
    std::string ing_corpus;
    ing_cmd->add_option("--corpus", ing_corpus, "commit corpus path")->required();

    // partition
    auto* part_cmd = app.add_subcommand("partition", "build the leveled partition and splits");
    DatasetArgs part_args;
    add_dataset_flags(part_cmd, part_args);
    std::string part_out;
    part_cmd->add_option("--out", part_out, "write the split manifest CSV here");

    // graph
    auto* graph_cmd = app.add_subcommand("graph", "build a code property graph from source");
    std::string graph_in, graph_out;
    bool graph_no_ast = false, graph_prune = false;
    int graph_label = 0;
    graph_cmd->add_option("--in", graph_in, "source file with one function")->required();
    graph_cmd->add_option("--out", graph_out, "output graph JSON (stdout when omitted)");
    graph_cmd->add_flag("--no-ast-edges", graph_no_ast, "drop syntax edges from the output");
    graph_cmd->add_flag("--prune", graph_prune, "collapse operator nodes into statements");
    graph_cmd->add_option("--label", graph_label, "graph label, 0 or 1")->capture_default_str();

    // train
    auto* train_cmd = app.add_subcommand("train", "train a model on one partition combo");
    DatasetArgs train_args;
    add_dataset_flags(train_cmd, train_args);
    model::ModelConfig train_cfg;
    std::string train_edge_types = "AST,CFG,DDG";
    add_model_flags(train_cmd, train_cfg, train_edge_types);
    std::string train_out = "model.bin";
    bool train_prune = false;
    train_cmd->add_option("--out", train_out, "model checkpoint path")->capture_default_str();
    train_cmd->add_flag("--prune", train_prune, "train on operator-pruned graphs");

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "evaluate a saved model");
    DatasetArgs eval_args;
    add_dataset_flags(eval_cmd, eval_args);
    std::string eval_model;
    std::string eval_split = "test";
    bool eval_prune = false;
    eval_cmd->add_option("--model", eval_model, "model checkpoint path")->required();
    eval_cmd->add_option("--split", eval_split, "train, validation, or test")
        ->capture_default_str();
    eval_cmd->add_flag("--prune", eval_prune, "evaluate on operator-pruned graphs");

    // experiment
    auto* exp_cmd = app.add_subcommand("experiment", "run a research question protocol");
    std::string exp_rq = "rq2", exp_corpus, exp_out_dir = ".";
    int exp_trials = -1, exp_kmin = 1, exp_kmax = 8, exp_jobs = 1;
    uint64_t exp_seed = 0;
    model::ModelConfig exp_cfg = harness::desk_config();
    std::string exp_edge_types = "CFG,DDG";
    exp_cmd->add_option("--rq", exp_rq, "one of rq1..rq6")->capture_default_str();
    exp_cmd->add_option("--corpus", exp_corpus, "commit corpus path")->required();
    exp_cmd->add_option("--out-dir", exp_out_dir, "artifact directory")->capture_default_str();
    exp_cmd->add_option("--trials", exp_trials, "trials per cell (-1 keeps the protocol default)")
        ->capture_default_str();
    exp_cmd->add_option("--k-min", exp_kmin, "lowest partition level")->capture_default_str();
    exp_cmd->add_option("--k-max", exp_kmax, "highest partition level")->capture_default_str();
    exp_cmd->add_option("--jobs", exp_jobs, "cell-level parallelism (cells stay independent)")
        ->capture_default_str();
    exp_cmd->add_option("--seed", exp_seed, "random seed")->capture_default_str();
    add_model_flags(exp_cmd, exp_cfg, exp_edge_types);

    // plot
    auto* plot_cmd = app.add_subcommand("plot", "re-render plots from a results CSV");
    std::string plot_results, plot_out_dir = ".", plot_rq = "replot";
    plot_cmd->add_option("--results", plot_results, "per-trial results CSV")->required();
    plot_cmd->add_option("--out-dir", plot_out_dir, "artifact directory")
        ->capture_default_str();
    plot_cmd->add_option("--name", plot_rq, "basename prefix for outputs")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    if (gen_cmd->parsed()) {
        gspec.validate();
        gen::write_corpus(gen::generate_corpus(gspec), gen_out);
        std::printf("wrote %s (%d commits)\n", gen_out.c_str(), gspec.n_commits);
        return 0;
    }
    if (ing_cmd->parsed()) {
        auto res = corpus::ingest_commits(ing_corpus);
        std::printf("commits accepted: %d\n", res.diagnostics.commits_accepted);
        std::printf("commits rejected: %d\n", res.diagnostics.commits_rejected);
        std::printf("functions rejected: %d\n", res.diagnostics.functions_rejected);
        for (const auto& n : res.diagnostics.notes) std::printf("note: %s\n", n.c_str());
        return 0;
    }
    if (part_cmd->parsed()) {
        auto ingest = corpus::ingest_commits(part_args.corpus);
        corpus::CleanStats stats;
        corpus::Partition part = corpus::clean_partition(
            corpus::build_partition(ingest.commits, part_args.k,
                                    Rng::derive(part_args.seed, "partition")),
            &stats);
        corpus::SplitSpec sspec;
        sspec.seed = Rng::derive(part_args.seed, "split");
        corpus::SplitResult split = corpus::split_dataset(part, sspec);
        std::printf("k=%d |P1|=%zu |P2|=%zu |P3|=%zu\n", part.level_k, part.p1.size(),
                    part.p2.size(), part.p3.size());
        std::printf("duplicates removed: %d within parts, %d across parts\n",
                    stats.within_part_duplicates, stats.cross_part_removals);
        std::printf("test leakage removed: %d\n", split.leakage_removed);
        if (part.p3_short) std::printf("note: P3 smaller than |P1|+|P2|\n");
        if (!part_out.empty()) {
            write_file(part_out, corpus::manifest_csv(split));
            std::printf("wrote %s\n", part_out.c_str());
        }
        return 0;
    }
    if (graph_cmd->parsed()) {
        auto ast = minilang::parse_source(read_file(graph_in));
        cpg::BuildOptions opts;
        opts.include_ast_edges = !graph_no_ast;
        opts.prune_operators = graph_prune;
        cpg::CodeGraph g = cpg::build_graph(ast, opts);
        g.label = graph_label;
        std::string json = cpg::serialize(g);
        if (graph_out.empty())
            std::printf("%s\n", json.c_str());
        else {
            write_file(graph_out, json + "\n");
            std::printf("wrote %s\n", graph_out.c_str());
        }
        return 0;
    }
    if (train_cmd->parsed()) {
        train_cfg.edge_types_used = parse_edge_types(train_edge_types);
        train_cfg.seed = Rng::derive(train_args.seed, "train");
        cpg::BuildOptions opts;
        opts.prune_operators = train_prune;
        PreparedData data = prepare(train_args, opts);
        auto train_set = examples_for(data, corpus::Split::Train, train_args);
        auto val_set = examples_for(data, corpus::Split::Validation, train_args);
        model::TrainedModel m = model::train(train_set, val_set, train_cfg);
        write_file(train_out, model::save_model(m));
        double best_f1 = 0.0;
        for (const auto& e : m.log) best_f1 = std::max(best_f1, e.val_f1);
        std::printf("trained on %zu graphs, best validation F1 %.6f\n", train_set.size(),
                    best_f1);
        std::printf("wrote %s\n", train_out.c_str());
        return 0;
    }
    if (eval_cmd->parsed()) {
        model::TrainedModel m = model::load_model(read_file(eval_model));
        cpg::BuildOptions opts;
        opts.prune_operators = eval_prune;
        PreparedData data = prepare(eval_args, opts);
        corpus::Split which;
        if (eval_split == "train")
            which = corpus::Split::Train;
        else if (eval_split == "validation")
            which = corpus::Split::Validation;
        else if (eval_split == "test")
            which = corpus::Split::Test;
        else
            throw CLI::ValidationError("--split", "expected train, validation, or test");
        auto set = examples_for(data, which, eval_args);
        if (set.empty()) throw DataError("selected split is empty");
        std::vector<double> scores;
        std::vector<int> labels;
        for (const auto& e : set) {
            scores.push_back(model::predict(m, *e.graph));
            labels.push_back(e.label);
        }
        std::printf("n=%zu\n", set.size());
        std::printf("f1=%.6f\n", metrics::f1_score(scores, labels, m.config.f1_threshold));
        bool has0 = false, has1 = false;
        for (int l : labels) (l ? has1 : has0) = true;
        if (has0 && has1)
            std::printf("roc_auc=%.6f\n", metrics::roc_auc(scores, labels));
        else
            std::printf("roc_auc=undefined (single-class split)\n");
        return 0;
    }
    if (exp_cmd->parsed()) {
        exp_cfg.edge_types_used = parse_edge_types(exp_edge_types);
        auto ingest = corpus::ingest_commits(exp_corpus);
        harness::ExperimentSpec spec = harness::default_spec(exp_rq, exp_cfg, exp_seed);
        if (exp_trials > 0) spec.trials = exp_trials;
        spec.k_min = exp_kmin;
        spec.k_max = exp_kmax;
        (void)exp_jobs;  // cells run sequentially; the flag reserves the interface
        harness::Runner runner(ingest.commits, spec);
        metrics::EvalReport report = runner.run();
        auto files = harness::emit_outputs(report, exp_rq, exp_out_dir);
        for (const auto& p : files.paths) std::printf("wrote %s\n", p.c_str());
        return 0;
    }
    if (plot_cmd->parsed()) {
        metrics::EvalReport report = metrics::report_from_csv(read_file(plot_results));
        if (report.entries.empty()) throw DataError("results CSV has no rows");
        std::set<std::string> combos;
        for (const auto& [key, e] : report.entries) combos.insert(key.test_combo);
        for (const auto& tc : combos) {
            std::string name = tc;
            for (char& c : name)
                if (c == '+' || c == '@' || c == '.') c = '_';
            std::string path = plot_out_dir + "/" + plot_rq + "_auc_" + name + ".svg";
            write_file(path, harness::render_sweep_svg(report, tc));
            std::printf("wrote %s\n", path.c_str());
        }
        return 0;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const CLI::ParseError& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return 1;  // validation errors raised after parsing
    } catch (const cpglab::minilang::SyntaxError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const cpglab::DataError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return 3;
    }
}
