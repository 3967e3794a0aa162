#include "cpglab/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cpglab::ad {

namespace {

void require_matrix(const TensorPtr& t, const char* op) {
    if (t->shape.size() != 2)
        throw std::invalid_argument(std::string(op) + ": expected matrix, got " + t->shape_str());
}

void require_same_shape(const TensorPtr& a, const TensorPtr& b, const char* op) {
    if (a->shape != b->shape)
        throw std::invalid_argument(std::string(op) + ": shape mismatch " + a->shape_str() +
                                    " vs " + b->shape_str());
}

}  // namespace

TensorPtr matmul(Tape& t, const TensorPtr& a, const TensorPtr& b) {
    require_matrix(a, "matmul");
    require_matrix(b, "matmul");
    size_t m = a->shape[0], k = a->shape[1], n = b->shape[1];
    if (b->shape[0] != k)
        throw std::invalid_argument("matmul: shape mismatch " + a->shape_str() + " vs " +
                                    b->shape_str());
    auto out = make_tensor({m, n});
    for (size_t i = 0; i < m; ++i)
        for (size_t p = 0; p < k; ++p) {
            double av = a->value[i * k + p];
            if (av == 0.0) continue;
            for (size_t j = 0; j < n; ++j) out->value[i * n + j] += av * b->value[p * n + j];
        }
    return t.track(out, [a, b, out, m, k, n] {
        for (size_t i = 0; i < m; ++i)
            for (size_t j = 0; j < n; ++j) {
                double g = out->grad[i * n + j];
                if (g == 0.0) continue;
                for (size_t p = 0; p < k; ++p) {
                    a->grad[i * k + p] += g * b->value[p * n + j];
                    b->grad[p * n + j] += g * a->value[i * k + p];
                }
            }
    });
}

TensorPtr add(Tape& t, const TensorPtr& a, const TensorPtr& b) {
    require_same_shape(a, b, "add");
    auto out = make_tensor(a->shape);
    for (size_t i = 0; i < out->size(); ++i) out->value[i] = a->value[i] + b->value[i];
    return t.track(out, [a, b, out] {
        for (size_t i = 0; i < out->size(); ++i) {
            a->grad[i] += out->grad[i];
            b->grad[i] += out->grad[i];
        }
    });
}

TensorPtr add_rowvec(Tape& t, const TensorPtr& a, const TensorPtr& b) {
    require_matrix(a, "add_rowvec");
    if (b->shape.size() != 2 || b->shape[0] != 1 || b->shape[1] != a->shape[1])
        throw std::invalid_argument("add_rowvec: shape mismatch " + a->shape_str() + " vs " +
                                    b->shape_str());
    size_t m = a->shape[0], n = a->shape[1];
    auto out = make_tensor({m, n});
    for (size_t i = 0; i < m; ++i)
        for (size_t j = 0; j < n; ++j) out->value[i * n + j] = a->value[i * n + j] + b->value[j];
    return t.track(out, [a, b, out, m, n] {
        for (size_t i = 0; i < m; ++i)
            for (size_t j = 0; j < n; ++j) {
                a->grad[i * n + j] += out->grad[i * n + j];
                b->grad[j] += out->grad[i * n + j];
            }
    });
}

TensorPtr sub(Tape& t, const TensorPtr& a, const TensorPtr& b) {
    require_same_shape(a, b, "sub");
    auto out = make_tensor(a->shape);
    for (size_t i = 0; i < out->size(); ++i) out->value[i] = a->value[i] - b->value[i];
    return t.track(out, [a, b, out] {
        for (size_t i = 0; i < out->size(); ++i) {
            a->grad[i] += out->grad[i];
            b->grad[i] -= out->grad[i];
        }
    });
}

TensorPtr hadamard(Tape& t, const TensorPtr& a, const TensorPtr& b) {
    require_same_shape(a, b, "hadamard");
    auto out = make_tensor(a->shape);
    for (size_t i = 0; i < out->size(); ++i) out->value[i] = a->value[i] * b->value[i];
    return t.track(out, [a, b, out] {
        for (size_t i = 0; i < out->size(); ++i) {
            a->grad[i] += out->grad[i] * b->value[i];
            b->grad[i] += out->grad[i] * a->value[i];
        }
    });
}

TensorPtr scale(Tape& t, const TensorPtr& a, double c) {
    auto out = make_tensor(a->shape);
    for (size_t i = 0; i < out->size(); ++i) out->value[i] = a->value[i] * c;
    return t.track(out, [a, out, c] {
        for (size_t i = 0; i < out->size(); ++i) a->grad[i] += out->grad[i] * c;
    });
}

TensorPtr concat_cols(Tape& t, const TensorPtr& a, const TensorPtr& b) {
    require_matrix(a, "concat_cols");
    require_matrix(b, "concat_cols");
    if (a->shape[0] != b->shape[0])
        throw std::invalid_argument("concat_cols: row mismatch " + a->shape_str() + " vs " +
                                    b->shape_str());
    size_t m = a->shape[0], p = a->shape[1], q = b->shape[1];
    auto out = make_tensor({m, p + q});
    for (size_t i = 0; i < m; ++i) {
        for (size_t j = 0; j < p; ++j) out->value[i * (p + q) + j] = a->value[i * p + j];
        for (size_t j = 0; j < q; ++j) out->value[i * (p + q) + p + j] = b->value[i * q + j];
    }
    return t.track(out, [a, b, out, m, p, q] {
        for (size_t i = 0; i < m; ++i) {
            for (size_t j = 0; j < p; ++j) a->grad[i * p + j] += out->grad[i * (p + q) + j];
            for (size_t j = 0; j < q; ++j) b->grad[i * q + j] += out->grad[i * (p + q) + p + j];
        }
    });
}

TensorPtr slice_cols(Tape& t, const TensorPtr& a, size_t start, size_t len) {
    require_matrix(a, "slice_cols");
    size_t m = a->shape[0], n = a->shape[1];
    if (start + len > n)
        throw std::invalid_argument("slice_cols: range out of bounds for " + a->shape_str());
    auto out = make_tensor({m, len});
    for (size_t i = 0; i < m; ++i)
        for (size_t j = 0; j < len; ++j) out->value[i * len + j] = a->value[i * n + start + j];
    return t.track(out, [a, out, m, n, start, len] {
        for (size_t i = 0; i < m; ++i)
            for (size_t j = 0; j < len; ++j) a->grad[i * n + start + j] += out->grad[i * len + j];
    });
}

TensorPtr sum_rows(Tape& t, const TensorPtr& a) {
    require_matrix(a, "sum_rows");
    size_t m = a->shape[0], n = a->shape[1];
    auto out = make_tensor({1, n});
    for (size_t i = 0; i < m; ++i)
        for (size_t j = 0; j < n; ++j) out->value[j] += a->value[i * n + j];
    return t.track(out, [a, out, m, n] {
        for (size_t i = 0; i < m; ++i)
            for (size_t j = 0; j < n; ++j) a->grad[i * n + j] += out->grad[j];
    });
}

TensorPtr mean_rows(Tape& t, const TensorPtr& a) {
    require_matrix(a, "mean_rows");
    size_t m = a->shape[0];
    if (m == 0) throw std::invalid_argument("mean_rows: empty input");
    return scale(t, sum_rows(t, a), 1.0 / static_cast<double>(m));
}

TensorPtr sum_all(Tape& t, const TensorPtr& a) {
    auto out = make_tensor({1, 1});
    for (double v : a->value) out->value[0] += v;
    return t.track(out, [a, out] {
        for (size_t i = 0; i < a->size(); ++i) a->grad[i] += out->grad[0];
    });
}

namespace {

template <class F, class G>
TensorPtr elementwise(Tape& t, const TensorPtr& a, F fwd, G grad_from_out) {
    auto out = make_tensor(a->shape);
    for (size_t i = 0; i < out->size(); ++i) out->value[i] = fwd(a->value[i]);
    return t.track(out, [a, out, grad_from_out] {
        for (size_t i = 0; i < out->size(); ++i)
            a->grad[i] += out->grad[i] * grad_from_out(a->value[i], out->value[i]);
    });
}

}  // namespace

TensorPtr sigmoid(Tape& t, const TensorPtr& a) {
    return elementwise(
        t, a, [](double x) { return 1.0 / (1.0 + std::exp(-x)); },
        [](double, double y) { return y * (1.0 - y); });
}

TensorPtr tanh_op(Tape& t, const TensorPtr& a) {
    return elementwise(
        t, a, [](double x) { return std::tanh(x); }, [](double, double y) { return 1.0 - y * y; });
}

TensorPtr relu(Tape& t, const TensorPtr& a) {
    return elementwise(
        t, a, [](double x) { return x > 0.0 ? x : 0.0; },
        [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

TensorPtr log_op(Tape& t, const TensorPtr& a) {
    return elementwise(
        t, a, [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

TensorPtr softmax_rows(Tape& t, const TensorPtr& a) {
    require_matrix(a, "softmax_rows");
    size_t m = a->shape[0], n = a->shape[1];
    auto out = make_tensor({m, n});
    for (size_t i = 0; i < m; ++i) {
        double mx = a->value[i * n];
        for (size_t j = 1; j < n; ++j) mx = std::max(mx, a->value[i * n + j]);
        double sum = 0.0;
        for (size_t j = 0; j < n; ++j) {
            out->value[i * n + j] = std::exp(a->value[i * n + j] - mx);
            sum += out->value[i * n + j];
        }
        for (size_t j = 0; j < n; ++j) out->value[i * n + j] /= sum;
    }
    return t.track(out, [a, out, m, n] {
        for (size_t i = 0; i < m; ++i) {
            double dot = 0.0;
            for (size_t j = 0; j < n; ++j) dot += out->grad[i * n + j] * out->value[i * n + j];
            for (size_t j = 0; j < n; ++j)
                a->grad[i * n + j] += out->value[i * n + j] * (out->grad[i * n + j] - dot);
        }
    });
}

TensorPtr gather_rows(Tape& t, const TensorPtr& a, const std::vector<size_t>& idx) {
    require_matrix(a, "gather_rows");
    size_t n = a->shape[1];
    for (size_t i : idx)
        if (i >= a->shape[0])
            throw std::invalid_argument("gather_rows: index out of range for " + a->shape_str());
    auto out = make_tensor({idx.size(), n});
    for (size_t r = 0; r < idx.size(); ++r)
        for (size_t j = 0; j < n; ++j) out->value[r * n + j] = a->value[idx[r] * n + j];
    return t.track(out, [a, out, idx, n] {
        for (size_t r = 0; r < idx.size(); ++r)
            for (size_t j = 0; j < n; ++j) a->grad[idx[r] * n + j] += out->grad[r * n + j];
    });
}

TensorPtr scatter_add_rows(Tape& t, const TensorPtr& a, const std::vector<size_t>& idx,
                           size_t out_rows) {
    require_matrix(a, "scatter_add_rows");
    if (idx.size() != a->shape[0])
        throw std::invalid_argument("scatter_add_rows: index count does not match rows of " +
                                    a->shape_str());
    size_t n = a->shape[1];
    for (size_t i : idx)
        if (i >= out_rows) throw std::invalid_argument("scatter_add_rows: index out of range");
    auto out = make_tensor({out_rows, n});
    for (size_t r = 0; r < idx.size(); ++r)
        for (size_t j = 0; j < n; ++j) out->value[idx[r] * n + j] += a->value[r * n + j];
    return t.track(out, [a, out, idx, n] {
        for (size_t r = 0; r < idx.size(); ++r)
            for (size_t j = 0; j < n; ++j) a->grad[r * n + j] += out->grad[idx[r] * n + j];
    });
}

TensorPtr sumsq(Tape& t, const TensorPtr& a) {
    auto out = make_tensor({1, 1});
    for (double v : a->value) out->value[0] += v * v;
    return t.track(out, [a, out] {
        for (size_t i = 0; i < a->size(); ++i) a->grad[i] += out->grad[0] * 2.0 * a->value[i];
    });
}

TensorPtr bce_with_logits(Tape& t, const TensorPtr& logits, const std::vector<double>& targets) {
    if (logits->size() != targets.size())
        throw std::invalid_argument("bce_with_logits: logit count " + logits->shape_str() +
                                    " vs " + std::to_string(targets.size()) + " targets");
    size_t n = targets.size();
    auto out = make_tensor({1, 1});
    double loss = 0.0;
    for (size_t i = 0; i < n; ++i) {
        double x = logits->value[i], y = targets[i];
        // log(1 + e^-|x|) + max(x, 0) - x*y
        loss += std::log1p(std::exp(-std::abs(x))) + std::max(x, 0.0) - x * y;
    }
    out->value[0] = loss / static_cast<double>(n);
    return t.track(out, [logits, out, targets, n] {
        double g = out->grad[0] / static_cast<double>(n);
        for (size_t i = 0; i < n; ++i) {
            double p = 1.0 / (1.0 + std::exp(-logits->value[i]));
            logits->grad[i] += g * (p - targets[i]);
        }
    });
}

TensorPtr triplet_mean(Tape& t, const TensorPtr& points, const std::vector<int>& labels,
                       double margin, size_t* valid_triplets) {
    require_matrix(points, "triplet_mean");
    size_t m = points->shape[0], d = points->shape[1];
    if (labels.size() != m)
        throw std::invalid_argument("triplet_mean: label count does not match " +
                                    points->shape_str());

    auto dist2 = [&](size_t i, size_t j) {
        double s = 0.0;
        for (size_t c = 0; c < d; ++c) {
            double diff = points->value[i * d + c] - points->value[j * d + c];
            s += diff * diff;
        }
        return s;
    };

    struct Active { size_t a, p, n; };
    std::vector<Active> active;
    size_t total = 0;
    double loss = 0.0;
    for (size_t a = 0; a < m; ++a)
        for (size_t p = 0; p < m; ++p) {
            if (p == a || labels[p] != labels[a]) continue;
            for (size_t n = 0; n < m; ++n) {
                if (labels[n] == labels[a]) continue;
                ++total;
                double h = dist2(a, p) - dist2(a, n) + margin;
                if (h > 0.0) {
                    loss += h;
                    active.push_back({a, p, n});
                }
            }
        }
    if (valid_triplets) *valid_triplets = total;

    auto out = make_tensor({1, 1});
    out->value[0] = total == 0 ? 0.0 : loss / static_cast<double>(total);
    if (total == 0) return t.track(out, [] {});

    return t.track(out, [points, out, active, total, d] {
        double g = out->grad[0] / static_cast<double>(total);
        for (const auto& tr : active) {
            for (size_t c = 0; c < d; ++c) {
                double va = points->value[tr.a * d + c];
                double vp = points->value[tr.p * d + c];
                double vn = points->value[tr.n * d + c];
                points->grad[tr.a * d + c] += g * 2.0 * (vn - vp);
                points->grad[tr.p * d + c] += g * 2.0 * (vp - va);
                points->grad[tr.n * d + c] += g * 2.0 * (va - vn);
            }
        }
    });
}

}  // namespace cpglab::ad
