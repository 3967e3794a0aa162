#include "cpglab/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace cpglab::model {

using ad::Tape;
using ad::TensorPtr;

namespace {

const std::vector<std::string>& node_kinds() {
    static const std::vector<std::string> kinds = {
        "Function", "Param", "Block", "Decl", "Assign", "If", "While", "Return",
        "Call", "BinaryOp", "UnaryOp", "Index", "Literal", "Var", "Entry", "Exit"};
    return kinds;
}

size_t kind_index(const std::string& k) {
    const auto& ks = node_kinds();
    auto it = std::find(ks.begin(), ks.end(), k);
    if (it == ks.end()) throw std::invalid_argument("unknown node kind: " + k);
    return static_cast<size_t>(it - ks.begin());
}

}  // namespace

void ModelConfig::validate() const {
    if (graph_embedding_size == 0 || node_hidden_size == 0 || token_embedding_size == 0)
        throw std::invalid_argument("ModelConfig: sizes must be positive");
    if (propagation_steps == 0) throw std::invalid_argument("ModelConfig: propagation_steps >= 1");
    if (edge_types_used.empty()) throw std::invalid_argument("ModelConfig: edge_types_used empty");
    if (patience < 1) throw std::invalid_argument("ModelConfig: patience >= 1");
    if (learning_rate <= 0.0) throw std::invalid_argument("ModelConfig: learning_rate must be positive");
    if (weight_decay < 0.0) throw std::invalid_argument("ModelConfig: weight_decay must be non-negative");
    if (max_epochs < 1) throw std::invalid_argument("ModelConfig: max_epochs >= 1");
    if (batch_size == 0 || grad_accumulation_steps == 0)
        throw std::invalid_argument("ModelConfig: batch settings must be positive");
}

std::string ModelConfig::to_json() const {
    nlohmann::ordered_json j;
    j["graph_embedding_size"] = graph_embedding_size;
    j["node_hidden_size"] = node_hidden_size;
    j["token_embedding_size"] = token_embedding_size;
    j["propagation_steps"] = propagation_steps;
    std::vector<std::string> ets;
    for (auto e : edge_types_used) ets.push_back(cpg::to_string(e));
    j["edge_types_used"] = ets;
    j["use_smote"] = use_smote;
    j["use_representation_learning"] = use_representation_learning;
    j["downsample_majority"] = downsample_majority;
    j["learning_rate"] = learning_rate;
    j["weight_decay"] = weight_decay;
    j["batch_size"] = batch_size;
    j["max_batches"] = max_batches;
    j["grad_accumulation_steps"] = grad_accumulation_steps;
    j["patience"] = patience;
    j["seed"] = seed;
    j["representation_size"] = representation_size;
    j["triplet_margin"] = triplet_margin;
    j["triplet_alpha"] = triplet_alpha;
    j["projection_l2"] = projection_l2;
    j["f1_threshold"] = f1_threshold;
    j["max_epochs"] = max_epochs;
    j["smote_k_neighbors"] = smote_k_neighbors;
    return j.dump();
}

ModelConfig ModelConfig::from_json(std::string_view text) {
    nlohmann::json j = nlohmann::json::parse(text);
    ModelConfig c;
    c.graph_embedding_size = j.at("graph_embedding_size").get<size_t>();
    c.node_hidden_size = j.at("node_hidden_size").get<size_t>();
    c.token_embedding_size = j.at("token_embedding_size").get<size_t>();
    c.propagation_steps = j.at("propagation_steps").get<size_t>();
    c.edge_types_used.clear();
    for (const auto& e : j.at("edge_types_used"))
        c.edge_types_used.insert(cpg::edge_type_from_string(e.get<std::string>()));
    c.use_smote = j.at("use_smote").get<bool>();
    c.use_representation_learning = j.at("use_representation_learning").get<bool>();
    c.downsample_majority = j.at("downsample_majority").get<bool>();
    c.learning_rate = j.at("learning_rate").get<double>();
    c.weight_decay = j.at("weight_decay").get<double>();
    c.batch_size = j.at("batch_size").get<size_t>();
    c.max_batches = j.at("max_batches").get<size_t>();
    c.grad_accumulation_steps = j.at("grad_accumulation_steps").get<size_t>();
    c.patience = j.at("patience").get<int>();
    c.seed = j.at("seed").get<uint64_t>();
    c.representation_size = j.at("representation_size").get<size_t>();
    c.triplet_margin = j.at("triplet_margin").get<double>();
    c.triplet_alpha = j.at("triplet_alpha").get<double>();
    c.projection_l2 = j.at("projection_l2").get<double>();
    c.f1_threshold = j.at("f1_threshold").get<double>();
    c.max_epochs = j.at("max_epochs").get<int>();
    c.smote_k_neighbors = j.at("smote_k_neighbors").get<size_t>();
    return c;
}

Vocabulary Vocabulary::build(const std::vector<const cpg::CodeGraph*>& graphs) {
    std::set<std::string> tokens;
    for (const auto* g : graphs)
        for (const auto& n : g->nodes)
            for (const auto& t : n.tokens) tokens.insert(t.text);
    Vocabulary v;
    size_t next = 1;
    for (const auto& t : tokens) v.index[t] = next++;
    return v;
}

TrainedModel init_model(const ModelConfig& cfg, const Vocabulary& vocab) {
    cfg.validate();
    TrainedModel m;
    m.config = cfg;
    m.vocab = vocab;
    Rng rng(Rng::derive(cfg.seed, "init"));

    auto param = [&](const std::string& name, std::vector<size_t> shape, bool zero = false) {
        auto t = ad::make_tensor(shape, true);
        if (!zero) {
            double s = 1.0 / std::sqrt(static_cast<double>(shape[0]));
            for (auto& v : t->value) v = s * rng.normal();
        }
        m.params[name] = t;
        return t;
    };

    size_t dt = cfg.token_embedding_size, h = cfg.node_hidden_size, e = cfg.graph_embedding_size;
    // creation order fixed so the rng stream is stable
    param("token_emb", {vocab.table_size(), dt});
    param("kind_emb", {node_kinds().size(), dt});
    param("input_W", {dt, h});
    param("input_b", {1, h}, true);
    for (auto et : {cpg::EdgeType::AST, cpg::EdgeType::CFG, cpg::EdgeType::DDG}) {
        if (!cfg.edge_types_used.count(et)) continue;
        std::string s = cpg::to_string(et);
        param("msg_W_" + s, {h, h});
        param("msg_b_" + s, {1, h}, true);
    }
    for (const char* gate : {"z", "r", "h"}) {
        param(std::string("gru_W") + gate, {h, h});
        param(std::string("gru_U") + gate, {h, h});
        param(std::string("gru_b") + gate, {1, h}, true);
    }
    param("readout_gate_W", {2 * h, e});
    param("readout_gate_b", {1, e}, true);
    param("readout_tr_W", {h, e});
    param("readout_tr_b", {1, e}, true);
    if (cfg.use_representation_learning) {
        param("rep_W", {e, cfg.representation_size});
        param("rep_b", {1, cfg.representation_size}, true);
    }
    size_t cls_in = cfg.use_representation_learning ? cfg.representation_size : e;
    param("cls_W", {cls_in, 1}, true);
    param("cls_b", {1, 1}, true);
    return m;
}

TensorPtr featurize_nodes(Tape& tape, const cpg::CodeGraph& g, const TrainedModel& m) {
    if (g.nodes.empty()) throw std::invalid_argument("empty graph");
    size_t n = g.nodes.size();
    size_t dt = m.config.token_embedding_size;

    std::vector<size_t> kind_idx;
    kind_idx.reserve(n);
    std::vector<size_t> tok_idx;
    std::vector<size_t> tok_owner;
    std::vector<double> tok_weight;
    for (size_t i = 0; i < n; ++i) {
        kind_idx.push_back(kind_index(g.nodes[i].kind));
        const auto& toks = g.nodes[i].tokens;
        for (const auto& t : toks) {
            tok_idx.push_back(m.vocab.lookup(t.text));
            tok_owner.push_back(i);
            tok_weight.push_back(1.0 / static_cast<double>(toks.size()));
        }
    }

    TensorPtr feat = ad::gather_rows(tape, m.params.at("kind_emb"), kind_idx);
    if (!tok_idx.empty()) {
        TensorPtr tok = ad::gather_rows(tape, m.params.at("token_emb"), tok_idx);
        std::vector<double> wts;
        wts.reserve(tok_idx.size() * dt);
        for (double w : tok_weight)
            for (size_t j = 0; j < dt; ++j) wts.push_back(w);
        TensorPtr weights = ad::make_tensor({tok_idx.size(), dt}, std::move(wts));
        TensorPtr weighted = ad::hadamard(tape, tok, weights);
        TensorPtr pooled = ad::scatter_add_rows(tape, weighted, tok_owner, n);
        feat = ad::add(tape, feat, pooled);
    }
    return ad::add_rowvec(tape, ad::matmul(tape, feat, m.params.at("input_W")),
                          m.params.at("input_b"));
}

TensorPtr encode(Tape& tape, const cpg::CodeGraph& g, const TrainedModel& m) {
    if (g.nodes.empty()) throw std::invalid_argument("empty graph");
    const ModelConfig& cfg = m.config;
    size_t n = g.nodes.size();

    // node id -> row
    std::map<int, size_t> row;
    for (size_t i = 0; i < n; ++i) row[g.nodes[i].id] = i;

    struct EdgeList { std::vector<size_t> src, dst; };
    std::map<cpg::EdgeType, EdgeList> by_type;
    for (const auto& e : g.edges) {
        if (!cfg.edge_types_used.count(e.etype)) continue;
        by_type[e.etype].src.push_back(row.at(e.src));
        by_type[e.etype].dst.push_back(row.at(e.dst));
    }

    TensorPtr x = featurize_nodes(tape, g, m);
    TensorPtr h = x;
    TensorPtr ones = ad::make_tensor({n, cfg.node_hidden_size},
                                     std::vector<double>(n * cfg.node_hidden_size, 1.0));

    for (size_t step = 0; step < cfg.propagation_steps; ++step) {
        TensorPtr msg = ad::make_tensor({n, cfg.node_hidden_size});
        bool any = false;
        for (auto& [et, el] : by_type) {
            if (el.src.empty()) continue;
            std::string s = cpg::to_string(et);
            TensorPtr src_states = ad::gather_rows(tape, h, el.src);
            TensorPtr transformed = ad::add_rowvec(
                tape, ad::matmul(tape, src_states, m.params.at("msg_W_" + s)),
                m.params.at("msg_b_" + s));
            TensorPtr agg = ad::scatter_add_rows(tape, transformed, el.dst, n);
            msg = any ? ad::add(tape, msg, agg) : agg;
            any = true;
        }
        TensorPtr z = ad::sigmoid(
            tape, ad::add_rowvec(tape,
                                 ad::add(tape, ad::matmul(tape, msg, m.params.at("gru_Wz")),
                                         ad::matmul(tape, h, m.params.at("gru_Uz"))),
                                 m.params.at("gru_bz")));
        TensorPtr r = ad::sigmoid(
            tape, ad::add_rowvec(tape,
                                 ad::add(tape, ad::matmul(tape, msg, m.params.at("gru_Wr")),
                                         ad::matmul(tape, h, m.params.at("gru_Ur"))),
                                 m.params.at("gru_br")));
        TensorPtr cand = ad::tanh_op(
            tape, ad::add_rowvec(
                      tape,
                      ad::add(tape, ad::matmul(tape, msg, m.params.at("gru_Wh")),
                              ad::matmul(tape, ad::hadamard(tape, r, h), m.params.at("gru_Uh"))),
                      m.params.at("gru_bh")));
        TensorPtr keep = ad::hadamard(tape, ad::sub(tape, ones, z), h);
        h = ad::add(tape, keep, ad::hadamard(tape, z, cand));
    }

    TensorPtr cat = ad::concat_cols(tape, h, x);
    TensorPtr gate = ad::sigmoid(
        tape, ad::add_rowvec(tape, ad::matmul(tape, cat, m.params.at("readout_gate_W")),
                             m.params.at("readout_gate_b")));
    TensorPtr tr = ad::tanh_op(
        tape, ad::add_rowvec(tape, ad::matmul(tape, h, m.params.at("readout_tr_W")),
                             m.params.at("readout_tr_b")));
    return ad::sum_rows(tape, ad::hadamard(tape, gate, tr));
}

TensorPtr project(Tape& tape, const TensorPtr& emb, const TrainedModel& m) {
    if (!m.config.use_representation_learning) return emb;
    return ad::relu(tape, ad::add_rowvec(tape, ad::matmul(tape, emb, m.params.at("rep_W")),
                                         m.params.at("rep_b")));
}

double predict(const TrainedModel& m, const cpg::CodeGraph& g) {
    Tape tape;
    TensorPtr emb = encode(tape, g, m);
    TensorPtr p = project(tape, emb, m);
    TensorPtr logit = ad::add(tape, ad::matmul(tape, p, m.params.at("cls_W")),
                              m.params.at("cls_b"));
    return 1.0 / (1.0 + std::exp(-logit->value[0]));
}

}  // namespace cpglab::model
