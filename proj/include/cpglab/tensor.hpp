#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace cpglab::ad {

struct Tensor {
    std::vector<size_t> shape;
    std::vector<double> value;
    std::vector<double> grad;
    bool requires_grad = false;

    Tensor() = default;
    Tensor(std::vector<size_t> s, bool rg = false);

    size_t size() const;
    size_t rows() const { return shape.empty() ? 0 : shape[0]; }
    size_t cols() const { return shape.size() < 2 ? 1 : shape[1]; }
    double& at(size_t r, size_t c) { return value[r * cols() + c]; }
    double at(size_t r, size_t c) const { return value[r * cols() + c]; }
    void zero_grad();
    std::string shape_str() const;
};

using TensorPtr = std::shared_ptr<Tensor>;

TensorPtr make_tensor(std::vector<size_t> shape, bool requires_grad = false);
TensorPtr make_tensor(std::vector<size_t> shape, std::vector<double> values,
                      bool requires_grad = false);
TensorPtr scalar(double v, bool requires_grad = false);

// Records the forward pass; backward() replays it in reverse, accumulating
// into Tensor::grad. One tape per training step.
class Tape {
public:
    TensorPtr track(TensorPtr out, std::function<void()> backward);
    void backward(const TensorPtr& loss);
    void clear() { steps_.clear(); }
    size_t size() const { return steps_.size(); }

private:
    std::vector<std::function<void()>> steps_;
};

// ---- ops -------------------------------------------------------------
TensorPtr matmul(Tape& t, const TensorPtr& a, const TensorPtr& b);
TensorPtr add(Tape& t, const TensorPtr& a, const TensorPtr& b);          // same shape
TensorPtr add_rowvec(Tape& t, const TensorPtr& a, const TensorPtr& b);   // a:[m,n] + b:[1,n]
TensorPtr sub(Tape& t, const TensorPtr& a, const TensorPtr& b);
TensorPtr hadamard(Tape& t, const TensorPtr& a, const TensorPtr& b);
TensorPtr scale(Tape& t, const TensorPtr& a, double c);
TensorPtr concat_cols(Tape& t, const TensorPtr& a, const TensorPtr& b);
TensorPtr slice_cols(Tape& t, const TensorPtr& a, size_t start, size_t len);
TensorPtr sum_rows(Tape& t, const TensorPtr& a);   // [m,n] -> [1,n]
TensorPtr mean_rows(Tape& t, const TensorPtr& a);  // [m,n] -> [1,n]
TensorPtr sum_all(Tape& t, const TensorPtr& a);    // -> [1,1]
TensorPtr sigmoid(Tape& t, const TensorPtr& a);
TensorPtr tanh_op(Tape& t, const TensorPtr& a);
TensorPtr relu(Tape& t, const TensorPtr& a);
TensorPtr log_op(Tape& t, const TensorPtr& a);
TensorPtr softmax_rows(Tape& t, const TensorPtr& a);
TensorPtr gather_rows(Tape& t, const TensorPtr& a, const std::vector<size_t>& idx);
TensorPtr scatter_add_rows(Tape& t, const TensorPtr& a, const std::vector<size_t>& idx,
                           size_t out_rows);
TensorPtr sumsq(Tape& t, const TensorPtr& a);  // -> [1,1], sum of squares

// numerically stable binary cross-entropy on logits; targets are constants
TensorPtr bce_with_logits(Tape& t, const TensorPtr& logits, const std::vector<double>& targets);

// mean hinge triplet loss over all in-batch (anchor, positive, negative)
// triples, squared Euclidean distance; returns [1,1]. valid_triplets reports
// how many triples contributed.
TensorPtr triplet_mean(Tape& t, const TensorPtr& points, const std::vector<int>& labels,
                       double margin, size_t* valid_triplets = nullptr);

}  // namespace cpglab::ad
