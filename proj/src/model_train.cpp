#include "cpglab/model.hpp"

#include "cpglab/util.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "cpglab/checkpoint.hpp"
#include "cpglab/metrics.hpp"

namespace cpglab::model {

using ad::Tape;
using ad::TensorPtr;

ad::TensorPtr representation_loss(Tape& tape, const TensorPtr& projected,
                                  const std::vector<int>& labels, double margin, double alpha,
                                  double projection_l2, const TensorPtr& cls_w,
                                  const TensorPtr& cls_b, bool* flagged) {
    if (projected->shape[0] != labels.size())
        throw std::invalid_argument("representation_loss: batch size mismatch");
    std::vector<double> targets(labels.begin(), labels.end());
    TensorPtr logits = ad::add_rowvec(tape, ad::matmul(tape, projected, cls_w), cls_b);
    TensorPtr loss = ad::bce_with_logits(tape, logits, targets);

    size_t valid = 0;
    TensorPtr trip = ad::triplet_mean(tape, projected, labels, margin, &valid);
    if (flagged) *flagged = (valid == 0);
    loss = ad::add(tape, loss, ad::scale(tape, trip, alpha));

    double l2_coef = projection_l2 / static_cast<double>(projected->shape[0]);
    return ad::add(tape, loss, ad::scale(tape, ad::sumsq(tape, projected), l2_coef));
}

namespace {

struct ParamSnapshot {
    std::map<std::string, std::vector<double>> values;
};

ParamSnapshot snapshot(const std::map<std::string, TensorPtr>& params) {
    ParamSnapshot s;
    for (const auto& [k, t] : params) s.values[k] = t->value;
    return s;
}

void restore(std::map<std::string, TensorPtr>& params, const ParamSnapshot& s) {
    for (auto& [k, t] : params) t->value = s.values.at(k);
}

void zero_grads(std::map<std::string, TensorPtr>& params) {
    for (auto& [k, t] : params) t->zero_grad();
}

double phase1_score(const TrainedModel& m, const cpg::CodeGraph& g, const TensorPtr& w,
                    const TensorPtr& b) {
    Tape tape;
    TensorPtr emb = encode(tape, g, m);
    TensorPtr logit = ad::add(tape, ad::matmul(tape, emb, w), b);
    return 1.0 / (1.0 + std::exp(-logit->value[0]));
}

double f1_of(const std::vector<double>& scores, const std::vector<int>& labels, double thr) {
    if (scores.empty()) return 0.0;
    return metrics::f1_score(scores, labels, thr);
}

std::vector<double> frozen_embedding(const TrainedModel& m, const cpg::CodeGraph& g) {
    Tape tape;
    TensorPtr emb = encode(tape, g, m);
    return emb->value;
}

}  // namespace

TrainedModel train(const std::vector<Example>& train_in, const std::vector<Example>& val_set,
                   const ModelConfig& cfg) {
    cfg.validate();
    if (train_in.empty()) throw DataError("train: empty training set");
    {
        size_t pos = 0;
        for (const auto& e : train_in) pos += static_cast<size_t>(e.label);
        if (pos == 0 || pos == train_in.size())
            throw DataError("train: training data must contain both classes");
    }

    std::vector<Example> train_set = train_in;
    if (cfg.downsample_majority)
        train_set = downsample_majority(train_set, Rng::derive(cfg.seed, "downsample-once"));

    std::vector<const cpg::CodeGraph*> graphs;
    for (const auto& e : train_set) graphs.push_back(e.graph);
    TrainedModel m = init_model(cfg, Vocabulary::build(graphs));

    bool two_phase = cfg.use_smote || cfg.use_representation_learning;
    size_t batches_used = 0;

    // ---- phase 1: encoder (+ a direct classifier on graph embeddings) ----
    std::map<std::string, TensorPtr> p1_params;
    for (const auto& [k, t] : m.params) {
        if (k.rfind("rep_", 0) == 0) continue;
        if (k.rfind("cls_", 0) == 0 && cfg.use_representation_learning) continue;
        p1_params[k] = t;
    }
    // warm-up classifier when the final classifier reads the representation head
    TensorPtr warm_w, warm_b;
    if (cfg.use_representation_learning) {
        warm_w = ad::make_tensor({cfg.graph_embedding_size, 1}, true);
        warm_b = ad::make_tensor({1, 1}, true);
        p1_params["warmup_cls_W"] = warm_w;
        p1_params["warmup_cls_b"] = warm_b;
    } else {
        warm_w = m.params.at("cls_W");
        warm_b = m.params.at("cls_b");
    }

    ad::Adam opt1({cfg.learning_rate, cfg.weight_decay});
    ParamSnapshot best = snapshot(m.params);
    double best_f1 = -1.0;
    int stale = 0;
    zero_grads(p1_params);
    size_t accumulated = 0;

    auto validation_f1 = [&](auto score_fn) {
        const std::vector<Example>& vs = val_set.empty() ? train_set : val_set;
        std::vector<double> scores;
        std::vector<int> labels;
        for (const auto& e : vs) {
            scores.push_back(score_fn(e));
            labels.push_back(e.label);
        }
        return f1_of(scores, labels, cfg.f1_threshold);
    };

    for (int epoch = 1; epoch <= cfg.max_epochs && batches_used < cfg.max_batches; ++epoch) {
        std::vector<size_t> order(train_set.size());
        for (size_t i = 0; i < order.size(); ++i) order[i] = i;
        Rng erng(Rng::derive(cfg.seed, "epoch-" + std::to_string(epoch)));
        erng.shuffle(order);

        double epoch_loss = 0.0;
        size_t epoch_batches = 0;
        for (size_t start = 0; start < order.size() && batches_used < cfg.max_batches;
             start += cfg.batch_size) {
            size_t end = std::min(order.size(), start + cfg.batch_size);
            Tape tape;
            TensorPtr total;
            for (size_t i = start; i < end; ++i) {
                const Example& ex = train_set[order[i]];
                TensorPtr emb = encode(tape, *ex.graph, m);
                TensorPtr logit = ad::add(tape, ad::matmul(tape, emb, warm_w), warm_b);
                TensorPtr l = ad::bce_with_logits(tape, logit,
                                                  {static_cast<double>(ex.label)});
                total = total ? ad::add(tape, l, total) : l;
            }
            TensorPtr loss = ad::scale(tape, total, 1.0 / static_cast<double>(end - start));
            tape.backward(loss);
            epoch_loss += loss->value[0];
            ++epoch_batches;
            ++batches_used;
            if (++accumulated == cfg.grad_accumulation_steps) {
                opt1.step(p1_params);
                zero_grads(p1_params);
                accumulated = 0;
            }
        }
        if (accumulated > 0) {
            opt1.step(p1_params);
            zero_grads(p1_params);
            accumulated = 0;
        }

        double vf1 = validation_f1(
            [&](const Example& e) { return phase1_score(m, *e.graph, warm_w, warm_b); });
        m.log.push_back({epoch, "encoder",
                         epoch_batches ? epoch_loss / static_cast<double>(epoch_batches) : 0.0,
                         vf1});
        if (vf1 > best_f1) {
            best_f1 = vf1;
            best = snapshot(m.params);
            stale = 0;
        } else if (++stale >= cfg.patience) {
            break;
        }
    }
    restore(m.params, best);

    if (!two_phase) return m;

    // ---- phase 2: head on frozen graph embeddings, optional SMOTE ----
    std::vector<std::vector<double>> emb;
    std::vector<int> emb_labels;
    for (const auto& e : train_set) {
        emb.push_back(frozen_embedding(m, *e.graph));
        emb_labels.push_back(e.label);
    }
    std::vector<std::vector<double>> val_emb;
    std::vector<int> val_labels;
    for (const auto& e : val_set) {
        val_emb.push_back(frozen_embedding(m, *e.graph));
        val_labels.push_back(e.label);
    }

    std::map<std::string, TensorPtr> head_params;
    for (const auto& [k, t] : m.params)
        if (k.rfind("rep_", 0) == 0 || k.rfind("cls_", 0) == 0) head_params[k] = t;

    ad::Adam opt2({cfg.learning_rate, cfg.weight_decay});
    ParamSnapshot best_head = snapshot(m.params);
    double best_head_f1 = -1.0;
    stale = 0;
    zero_grads(head_params);
    accumulated = 0;

    auto head_scores = [&](const std::vector<std::vector<double>>& points) {
        std::vector<double> out;
        for (const auto& p : points) {
            Tape tape;
            TensorPtr row = ad::make_tensor({1, p.size()}, p);
            TensorPtr proj = project(tape, row, m);
            TensorPtr logit = ad::add(tape, ad::matmul(tape, proj, m.params.at("cls_W")),
                                      m.params.at("cls_b"));
            out.push_back(1.0 / (1.0 + std::exp(-logit->value[0])));
        }
        return out;
    };

    for (int epoch = 1; epoch <= cfg.max_epochs && batches_used < cfg.max_batches; ++epoch) {
        std::vector<std::vector<double>> pts = emb;
        std::vector<int> lbls = emb_labels;
        if (cfg.use_smote) {
            SmoteResult sm = smote_resample(pts, lbls, cfg.smote_k_neighbors,
                                            Rng::derive(cfg.seed, "smote-" + std::to_string(epoch)));
            pts = std::move(sm.points);
            lbls = std::move(sm.labels);
        }
        std::vector<size_t> order(pts.size());
        for (size_t i = 0; i < order.size(); ++i) order[i] = i;
        Rng erng(Rng::derive(cfg.seed, "head-epoch-" + std::to_string(epoch)));
        erng.shuffle(order);

        double epoch_loss = 0.0;
        size_t epoch_batches = 0;
        for (size_t start = 0; start < order.size() && batches_used < cfg.max_batches;
             start += cfg.batch_size) {
            size_t end = std::min(order.size(), start + cfg.batch_size);
            size_t bsz = end - start;
            std::vector<double> flat;
            std::vector<int> batch_labels;
            flat.reserve(bsz * pts[0].size());
            for (size_t i = start; i < end; ++i) {
                flat.insert(flat.end(), pts[order[i]].begin(), pts[order[i]].end());
                batch_labels.push_back(lbls[order[i]]);
            }
            Tape tape;
            TensorPtr batch = ad::make_tensor({bsz, pts[0].size()}, std::move(flat));
            TensorPtr proj = project(tape, batch, m);
            TensorPtr loss;
            if (cfg.use_representation_learning) {
                loss = representation_loss(tape, proj, batch_labels, cfg.triplet_margin,
                                           cfg.triplet_alpha, cfg.projection_l2,
                                           m.params.at("cls_W"), m.params.at("cls_b"));
            } else {
                std::vector<double> targets(batch_labels.begin(), batch_labels.end());
                TensorPtr logits = ad::add_rowvec(tape, ad::matmul(tape, proj, m.params.at("cls_W")),
                                                  m.params.at("cls_b"));
                loss = ad::bce_with_logits(tape, logits, targets);
            }
            tape.backward(loss);
            epoch_loss += loss->value[0];
            ++epoch_batches;
            ++batches_used;
            if (++accumulated == cfg.grad_accumulation_steps) {
                opt2.step(head_params);
                zero_grads(head_params);
                accumulated = 0;
            }
        }
        if (accumulated > 0) {
            opt2.step(head_params);
            zero_grads(head_params);
            accumulated = 0;
        }

        std::vector<double> vs = head_scores(val_emb.empty() ? emb : val_emb);
        const std::vector<int>& vl = val_emb.empty() ? emb_labels : val_labels;
        double vf1 = f1_of(vs, vl, cfg.f1_threshold);
        m.log.push_back({epoch, "head",
                         epoch_batches ? epoch_loss / static_cast<double>(epoch_batches) : 0.0,
                         vf1});
        if (vf1 > best_head_f1) {
            best_head_f1 = vf1;
            best_head = snapshot(m.params);
            stale = 0;
        } else if (++stale >= cfg.patience) {
            break;
        }
    }
    restore(m.params, best_head);
    return m;
}

std::string save_model(const TrainedModel& m) {
    nlohmann::ordered_json meta;
    meta["format"] = "cpglab-model";
    meta["config"] = nlohmann::ordered_json::parse(m.config.to_json());
    std::vector<std::string> tokens(m.vocab.index.size());
    for (const auto& [tok, idx] : m.vocab.index) tokens[idx - 1] = tok;
    meta["vocabulary"] = tokens;
    return ad::save_checkpoint(m.params, meta.dump());
}

TrainedModel load_model(std::string_view bytes) {
    ad::Checkpoint ck = ad::load_checkpoint(bytes);
    nlohmann::json meta = nlohmann::json::parse(ck.metadata);
    if (!meta.contains("format") || meta.at("format") != "cpglab-model")
        throw std::invalid_argument("load_model: not a model checkpoint");
    TrainedModel m;
    m.config = ModelConfig::from_json(meta.at("config").dump());
    size_t idx = 1;
    for (const auto& t : meta.at("vocabulary")) m.vocab.index[t.get<std::string>()] = idx++;
    m.params = std::move(ck.tensors);
    for (auto& [k, t] : m.params) t->requires_grad = true;
    return m;
}

}  // namespace cpglab::model
