#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "cpglab/cpg.hpp"
#include "cpglab/optim.hpp"
#include "cpglab/tensor.hpp"
#include "cpglab/util.hpp"

namespace cpglab::model {

struct ModelConfig {
    size_t graph_embedding_size = 200;
    size_t node_hidden_size = 128;
    size_t token_embedding_size = 64;
    size_t propagation_steps = 6;
    std::set<cpg::EdgeType> edge_types_used = {cpg::EdgeType::AST, cpg::EdgeType::CFG,
                                              cpg::EdgeType::DDG};
    bool use_smote = false;
    bool use_representation_learning = false;
    bool downsample_majority = false;
    double learning_rate = 1e-4;
    double weight_decay = 1e-3;
    size_t batch_size = 128;
    size_t max_batches = 10000;
    size_t grad_accumulation_steps = 8;
    int patience = 20;
    uint64_t seed = 0;

    // reconstruction details not fixed by the reference setup
    size_t representation_size = 100;
    double triplet_margin = 0.5;
    double triplet_alpha = 0.5;
    double projection_l2 = 1e-3;
    double f1_threshold = 0.5;
    int max_epochs = 200;
    size_t smote_k_neighbors = 5;

    void validate() const;
    std::string to_json() const;
    static ModelConfig from_json(std::string_view);
};

struct Vocabulary {
    std::map<std::string, size_t> index;  // token -> index, 1-based; 0 is <unk>

    size_t table_size() const { return index.size() + 1; }
    size_t lookup(const std::string& tok) const {
        auto it = index.find(tok);
        return it == index.end() ? 0 : it->second;
    }
    static Vocabulary build(const std::vector<const cpg::CodeGraph*>& graphs);
};

struct Example {
    const cpg::CodeGraph* graph = nullptr;
    int label = 0;
};

struct TrainingLogEntry {
    int epoch = 0;
    std::string phase;
    double train_loss = 0.0;
    double val_f1 = 0.0;
};

struct TrainedModel {
    ModelConfig config;
    Vocabulary vocab;
    std::map<std::string, ad::TensorPtr> params;
    std::vector<TrainingLogEntry> log;
};

// Fresh parameters; everything seeded from config.seed, classifier zero-init.
TrainedModel init_model(const ModelConfig& cfg, const Vocabulary& vocab);

// [N, node_hidden]: learned kind embedding + mean token embedding, projected.
ad::TensorPtr featurize_nodes(ad::Tape& tape, const cpg::CodeGraph& g, const TrainedModel& m);

// [1, graph_embedding_size]; throws on empty graphs.
ad::TensorPtr encode(ad::Tape& tape, const cpg::CodeGraph& g, const TrainedModel& m);

// representation head (identity when representation learning is off)
ad::TensorPtr project(ad::Tape& tape, const ad::TensorPtr& emb, const TrainedModel& m);

// probability of the vulnerable class
double predict(const TrainedModel& m, const cpg::CodeGraph& g);

struct SmoteSynthetic {
    size_t base = 0;      // index into the original point list
    size_t neighbor = 0;  // index into the original point list
    double u = 0.0;
};

struct SmoteResult {
    std::vector<std::vector<double>> points;
    std::vector<int> labels;
    std::vector<SmoteSynthetic> synthetic;  // provenance, parallel to appended points
    size_t k_used = 0;
    bool k_reduced = false;
};

SmoteResult smote_resample(const std::vector<std::vector<double>>& points,
                           const std::vector<int>& labels, size_t k_neighbors, uint64_t seed);

std::vector<Example> downsample_majority(const std::vector<Example>& dataset, uint64_t seed);

// CE + alpha * mean triplet hinge + L2 pull on projections. `flagged` reports
// a batch with no valid triplet (loss degrades to CE only).
ad::TensorPtr representation_loss(ad::Tape& tape, const ad::TensorPtr& projected,
                                  const std::vector<int>& labels, double margin, double alpha,
                                  double projection_l2, const ad::TensorPtr& cls_w,
                                  const ad::TensorPtr& cls_b, bool* flagged = nullptr);

TrainedModel train(const std::vector<Example>& train_set, const std::vector<Example>& val_set,
                   const ModelConfig& cfg);

std::string save_model(const TrainedModel& m);
TrainedModel load_model(std::string_view bytes);

}  // namespace cpglab::model
