#include "cpglab/tensor.hpp"

#include <numeric>
#include <sstream>
#include <stdexcept>

namespace cpglab::ad {

Tensor::Tensor(std::vector<size_t> s, bool rg) : shape(std::move(s)), requires_grad(rg) {
    size_t n = size();
    value.assign(n, 0.0);
    grad.assign(n, 0.0);
}

size_t Tensor::size() const {
    return std::accumulate(shape.begin(), shape.end(), size_t{1}, std::multiplies<>());
}

void Tensor::zero_grad() { grad.assign(grad.size(), 0.0); }

std::string Tensor::shape_str() const {
    std::ostringstream ss;
    ss << '[';
    for (size_t i = 0; i < shape.size(); ++i) ss << (i ? "," : "") << shape[i];
    ss << ']';
    return ss.str();
}

TensorPtr make_tensor(std::vector<size_t> shape, bool requires_grad) {
    return std::make_shared<Tensor>(std::move(shape), requires_grad);
}

TensorPtr make_tensor(std::vector<size_t> shape, std::vector<double> values, bool requires_grad) {
    auto t = std::make_shared<Tensor>(std::move(shape), requires_grad);
    if (values.size() != t->size())
        throw std::invalid_argument("make_tensor: value count does not match shape " +
                                    t->shape_str());
    t->value = std::move(values);
    return t;
}

TensorPtr scalar(double v, bool requires_grad) {
    return make_tensor({1, 1}, {v}, requires_grad);
}

TensorPtr Tape::track(TensorPtr out, std::function<void()> backward) {
    out->requires_grad = true;
    steps_.push_back(std::move(backward));
    return out;
}

void Tape::backward(const TensorPtr& loss) {
    if (loss->size() != 1) throw std::invalid_argument("backward: loss must be scalar");
    loss->grad.assign(1, 1.0);
    for (auto it = steps_.rbegin(); it != steps_.rend(); ++it) (*it)();
}

}  // namespace cpglab::ad
