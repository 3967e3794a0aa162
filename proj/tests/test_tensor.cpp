#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdio>
#include <functional>

#include "cpglab/checkpoint.hpp"
#include "cpglab/optim.hpp"
#include "cpglab/tensor.hpp"
#include "cpglab/util.hpp"
#include "doctest.h"

using namespace cpglab;
using namespace cpglab::ad;

namespace {

TensorPtr rand_tensor(Rng& rng, std::vector<size_t> shape) {
    auto t = make_tensor(std::move(shape), true);
    for (double& v : t->value) v = rng.normal() * 0.5;
    return t;
}

// Central finite differences against the tape's analytic gradient.
void check_grad(const std::vector<TensorPtr>& inputs,
                const std::function<TensorPtr(Tape&)>& build, double tol = 1e-4) {
    Tape tape;
    TensorPtr loss = build(tape);
    REQUIRE(loss->size() == 1);
    for (const auto& in : inputs) in->zero_grad();
    tape.backward(loss);

    const double h = 1e-5;
    for (const auto& in : inputs) {
        for (size_t i = 0; i < in->size(); ++i) {
            double saved = in->value[i];
            Tape t1;
            in->value[i] = saved + h;
            double up = build(t1)->value[0];
            Tape t2;
            in->value[i] = saved - h;
            double down = build(t2)->value[0];
            in->value[i] = saved;
            double numeric = (up - down) / (2.0 * h);
            double analytic = in->grad[i];
            double denom = std::max({std::abs(numeric), std::abs(analytic), 1.0});
            CHECK(std::abs(numeric - analytic) / denom < tol);
        }
    }
}

}  // namespace

TEST_CASE("tape accumulates gradients when a tensor is reused") {
    auto x = scalar(3.0, true);
    Tape tape;
    auto y = add(tape, x, x);  // y = 2x
    auto loss = sum_all(tape, hadamard(tape, y, y));  // (2x)^2
    x->zero_grad();
    tape.backward(loss);
    CHECK(loss->value[0] == doctest::Approx(36.0));
    CHECK(x->grad[0] == doctest::Approx(24.0));  // d/dx 4x^2 = 8x
}

TEST_CASE("matmul forward matches a hand example") {
    Tape tape;
    auto a = make_tensor({2, 3}, {1, 2, 3, 4, 5, 6});
    auto b = make_tensor({3, 2}, {7, 8, 9, 10, 11, 12});
    auto c = matmul(tape, a, b);
    CHECK(c->value == std::vector<double>{58, 64, 139, 154});
}

TEST_CASE("shape mismatches name both shapes") {
    Tape tape;
    auto a = make_tensor({2, 3});
    auto b = make_tensor({2, 2});
    CHECK_THROWS_WITH_AS(matmul(tape, a, b), doctest::Contains("[2,3]"),
                         std::invalid_argument);
    CHECK_THROWS_AS(add(tape, a, b), std::invalid_argument);
}

TEST_CASE("finite differences cover every op") {
    Rng rng(2024);
    auto a = rand_tensor(rng, {3, 4});
    auto b = rand_tensor(rng, {3, 4});
    auto m = rand_tensor(rng, {4, 2});
    auto row = rand_tensor(rng, {1, 4});

    check_grad({a, m}, [&](Tape& t) { return sumsq(t, matmul(t, a, m)); });
    check_grad({a, b}, [&](Tape& t) { return sumsq(t, add(t, a, b)); });
    check_grad({a, row}, [&](Tape& t) { return sumsq(t, add_rowvec(t, a, row)); });
    check_grad({a, b}, [&](Tape& t) { return sumsq(t, sub(t, a, b)); });
    check_grad({a, b}, [&](Tape& t) { return sumsq(t, hadamard(t, a, b)); });
    check_grad({a}, [&](Tape& t) { return sumsq(t, scale(t, a, -1.7)); });
    check_grad({a, b}, [&](Tape& t) { return sumsq(t, concat_cols(t, a, b)); });
    check_grad({a}, [&](Tape& t) { return sumsq(t, slice_cols(t, a, 1, 2)); });
    check_grad({a}, [&](Tape& t) { return sumsq(t, sum_rows(t, a)); });
    check_grad({a}, [&](Tape& t) { return sumsq(t, mean_rows(t, a)); });
    check_grad({a}, [&](Tape& t) { return sum_all(t, a); });
    check_grad({a}, [&](Tape& t) { return sumsq(t, sigmoid(t, a)); });
    check_grad({a}, [&](Tape& t) { return sumsq(t, tanh_op(t, a)); });
    check_grad({a}, [&](Tape& t) { return sumsq(t, softmax_rows(t, a)); });
    check_grad({a}, [&](Tape& t) { return sumsq(t, a); });

    // relu and log need inputs away from their kinks/domain edges
    auto pos = rand_tensor(rng, {3, 3});
    for (double& v : pos->value) v = 0.5 + std::abs(v);
    check_grad({pos}, [&](Tape& t) { return sumsq(t, relu(t, pos)); });
    check_grad({pos}, [&](Tape& t) { return sumsq(t, log_op(t, pos)); });

    std::vector<size_t> idx = {2, 0, 0, 1};
    check_grad({a}, [&](Tape& t) { return sumsq(t, gather_rows(t, a, idx)); });
    auto four = rand_tensor(rng, {4, 4});
    check_grad({four}, [&](Tape& t) {
        return sumsq(t, scatter_add_rows(t, four, idx, 3));
    });

    std::vector<double> targets = {1.0, 0.0, 1.0};
    auto logits = rand_tensor(rng, {3, 1});
    check_grad({logits}, [&](Tape& t) { return bce_with_logits(t, logits, targets); });

    std::vector<int> labels = {1, 0, 1, 0};
    auto pts = rand_tensor(rng, {4, 3});
    check_grad({pts}, [&](Tape& t) { return triplet_mean(t, pts, labels, 1.0); });
}

TEST_CASE("bce with logits is stable at extreme logits") {
    Tape tape;
    auto logits = make_tensor({2, 1}, {300.0, -300.0}, true);
    auto loss = bce_with_logits(tape, logits, {1.0, 0.0});
    CHECK(std::isfinite(loss->value[0]));
    CHECK(loss->value[0] == doctest::Approx(0.0));
    logits->zero_grad();
    tape.backward(loss);
    CHECK(std::isfinite(logits->grad[0]));
}

TEST_CASE("triplet mean matches a brute-force evaluation") {
    Rng rng(5);
    auto pts = rand_tensor(rng, {5, 2});
    std::vector<int> labels = {1, 1, 0, 0, 1};
    const double margin = 0.8;

    double expect = 0.0;
    size_t count = 0;
    for (size_t a = 0; a < 5; ++a)
        for (size_t p = 0; p < 5; ++p)
            for (size_t n = 0; n < 5; ++n) {
                if (a == p || labels[a] != labels[p] || labels[a] == labels[n]) continue;
                double dap = 0, dan = 0;
                for (size_t d = 0; d < 2; ++d) {
                    double va = pts->at(a, d);
                    dap += (va - pts->at(p, d)) * (va - pts->at(p, d));
                    dan += (va - pts->at(n, d)) * (va - pts->at(n, d));
                }
                expect += std::max(0.0, dap - dan + margin);
                ++count;
            }
    expect /= static_cast<double>(count);

    Tape tape;
    size_t valid = 0;
    auto loss = triplet_mean(tape, pts, labels, margin, &valid);
    CHECK(valid == count);
    CHECK(loss->value[0] == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("triplet mean with a single class contributes nothing") {
    Tape tape;
    auto pts = make_tensor({3, 2}, {1, 2, 3, 4, 5, 6}, true);
    size_t valid = 7;
    auto loss = triplet_mean(tape, pts, {1, 1, 1}, 0.5, &valid);
    CHECK(valid == 0);
    CHECK(loss->value[0] == 0.0);
}

TEST_CASE("adam first step follows the hand-computed update") {
    // single weight w=1, grad=0.5, lr=0.1, no decay:
    // m=0.05, v=0.00025, mhat=0.5, vhat=0.25, step = lr*mhat/(sqrt(vhat)+eps)
    Tensor p({1, 1});
    p.value = {1.0};
    p.grad = {0.5};
    p.requires_grad = true;
    AdamState st;
    AdamConfig cfg;
    cfg.learning_rate = 0.1;
    cfg.weight_decay = 0.0;
    adam_step(p, st, cfg);
    double expect = 1.0 - 0.1 * 0.5 / (0.5 + cfg.epsilon);
    CHECK(p.value[0] == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("adamw decay is decoupled from the gradient") {
    // zero gradient: the only movement is -lr*wd*w
    Tensor p({1, 1});
    p.value = {2.0};
    p.grad = {0.0};
    p.requires_grad = true;
    AdamState st;
    AdamConfig cfg;
    cfg.learning_rate = 0.1;
    cfg.weight_decay = 0.01;
    adam_step(p, st, cfg);
    CHECK(p.value[0] == doctest::Approx(2.0 - 0.1 * 0.01 * 2.0).epsilon(1e-12));
}

TEST_CASE("checkpoint round trip is exact and byte-stable") {
    Rng rng(9);
    std::map<std::string, TensorPtr> params;
    params["w"] = rand_tensor(rng, {2, 3});
    params["b"] = rand_tensor(rng, {1, 3});
    std::string bytes = save_checkpoint(params, "{\"note\":1}");
    CHECK(bytes == save_checkpoint(params, "{\"note\":1}"));

    Checkpoint ck = load_checkpoint(bytes);
    CHECK(ck.metadata == "{\"note\":1}");
    REQUIRE(ck.tensors.size() == 2);
    CHECK(ck.tensors.at("w")->shape == params["w"]->shape);
    CHECK(ck.tensors.at("w")->value == params["w"]->value);
    CHECK(ck.tensors.at("b")->value == params["b"]->value);
}

TEST_CASE("checkpoint rejects corrupt headers") {
    CHECK_THROWS_AS(load_checkpoint("notacheckpoint"), DataError);
    std::map<std::string, TensorPtr> params;
    params["w"] = make_tensor({1, 1}, std::vector<double>{1.0});
    std::string bytes = save_checkpoint(params, "");
    bytes.resize(bytes.size() / 2);  // truncation
    CHECK_THROWS_AS(load_checkpoint(bytes), DataError);
}
