#ifndef WILOC_TENSOR_HPP
#define WILOC_TENSOR_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "wiloc/common.hpp"

// Reverse-mode differentiation on dense 64-bit tensors. One Tape records one
// training step; ops append value computation eagerly and a pullback closure
// for the backward sweep. Dense products go through Eigen, everything indexed
// (gather/scatter/segment) is explicit loops so the evaluation order, and
// therefore every bit of the result, is fixed.

namespace wiloc::ad {

using EMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapM = Eigen::Map<EMat>;
using CMapM = Eigen::Map<const EMat>;

class Tensor {
public:
    std::vector<std::size_t> shape;
    std::vector<double> value;
    std::vector<double> grad;  // allocated iff requires_grad
    bool requires_grad = false;

    std::size_t rows() const { return shape.empty() ? 0 : shape[0]; }
    std::size_t cols() const { return shape.size() > 1 ? shape[1] : 1; }
    std::size_t numel() const { return value.size(); }

    MapM vmap() { return MapM(value.data(), static_cast<Eigen::Index>(rows()), static_cast<Eigen::Index>(cols())); }
    CMapM vmap() const { return CMapM(value.data(), static_cast<Eigen::Index>(rows()), static_cast<Eigen::Index>(cols())); }
    MapM gmap() { return MapM(grad.data(), static_cast<Eigen::Index>(rows()), static_cast<Eigen::Index>(cols())); }

    void ensure_grad() {
        if (grad.size() != value.size()) grad.assign(value.size(), 0.0);
    }
    void zero_grad() { std::fill(grad.begin(), grad.end(), 0.0); }
};

using TensorPtr = std::shared_ptr<Tensor>;

inline TensorPtr make_tensor(std::vector<std::size_t> shape, bool requires_grad = false) {
    auto t = std::make_shared<Tensor>();
    t->shape = std::move(shape);
    std::size_t n = 1;
    for (std::size_t d : t->shape) n *= d;
    t->value.assign(n, 0.0);
    t->requires_grad = requires_grad;
    if (requires_grad) t->grad.assign(n, 0.0);
    return t;
}

inline TensorPtr make_const(std::vector<std::size_t> shape, std::vector<double> values) {
    auto t = make_tensor(std::move(shape), false);
    detail::require(values.size() == t->numel(), "make_const: value count does not match shape");
    t->value = std::move(values);
    return t;
}

inline TensorPtr make_param(std::vector<std::size_t> shape, std::vector<double> values) {
    auto t = make_const(std::move(shape), std::move(values));
    t->requires_grad = true;
    t->ensure_grad();
    return t;
}

inline TensorPtr scalar_const(double v) { return make_const({1}, {v}); }

class Tape {
public:
    void record(std::function<void()> pullback) { nodes_.push_back(std::move(pullback)); }

    bool empty() const { return nodes_.empty(); }
    std::size_t size() const { return nodes_.size(); }

    /// Runs the reverse sweep seeding d(loss)/d(loss) = 1.
    void backward(const TensorPtr& loss) {
        detail::require(loss != nullptr && loss->numel() == 1, "backward: loss must be a scalar");
        detail::require(!nodes_.empty(), "backward: tape is empty");
        detail::require(!consumed_, "backward: tape already consumed; reset before reusing");
        detail::require(std::isfinite(loss->value[0]), "backward: loss is not finite");
        consumed_ = true;
        loss->ensure_grad();
        loss->grad[0] = 1.0;
        for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) (*it)();
    }

    void reset() {
        nodes_.clear();
        consumed_ = false;
    }

private:
    std::vector<std::function<void()>> nodes_;
    bool consumed_ = false;
};

namespace detail_ops {

inline void check_finite(const Tensor& t, const char* op) {
    for (double v : t.value) {
        if (!std::isfinite(v)) throw Error(std::string(op) + ": non-finite value produced");
    }
}

inline TensorPtr out_like(Tape* tape, std::vector<std::size_t> shape, bool any_input_grad) {
    bool rg = tape != nullptr && any_input_grad;
    return make_tensor(std::move(shape), rg);
}

}  // namespace detail_ops

// ---- primitives ----

/// C = A·B.
inline TensorPtr matmul(Tape* tape, const TensorPtr& a, const TensorPtr& b) {
    detail::require(a->cols() == b->rows(), "matmul: inner dimensions differ");
    auto out = detail_ops::out_like(tape, {a->rows(), b->cols()}, a->requires_grad || b->requires_grad);
    out->vmap().noalias() = a->vmap() * b->vmap();
    detail_ops::check_finite(*out, "matmul");
    if (out->requires_grad) {
        tape->record([a, b, out]() {
            if (a->requires_grad) a->gmap().noalias() += out->gmap() * b->vmap().transpose();
            if (b->requires_grad) b->gmap().noalias() += a->vmap().transpose() * out->gmap();
        });
    }
    return out;
}

inline TensorPtr add(Tape* tape, const TensorPtr& a, const TensorPtr& b) {
    detail::require(a->shape == b->shape, "add: shape mismatch");
    auto out = detail_ops::out_like(tape, a->shape, a->requires_grad || b->requires_grad);
    for (std::size_t i = 0; i < out->numel(); ++i) out->value[i] = a->value[i] + b->value[i];
    detail_ops::check_finite(*out, "add");
    if (out->requires_grad) {
        tape->record([a, b, out]() {
            if (a->requires_grad)
                for (std::size_t i = 0; i < out->numel(); ++i) a->grad[i] += out->grad[i];
            if (b->requires_grad)
                for (std::size_t i = 0; i < out->numel(); ++i) b->grad[i] += out->grad[i];
        });
    }
    return out;
}

/// Row-broadcast bias: out[i,:] = x[i,:] + b.
inline TensorPtr add_bias(Tape* tape, const TensorPtr& x, const TensorPtr& b) {
    detail::require(b->rows() == x->cols() && b->cols() == 1, "add_bias: bias must be a vector of length cols(x)");
    auto out = detail_ops::out_like(tape, x->shape, x->requires_grad || b->requires_grad);
    const std::size_t n = x->rows(), d = x->cols();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) out->value[i * d + j] = x->value[i * d + j] + b->value[j];
    detail_ops::check_finite(*out, "add_bias");
    if (out->requires_grad) {
        tape->record([x, b, out, n, d]() {
            if (x->requires_grad)
                for (std::size_t i = 0; i < n * d; ++i) x->grad[i] += out->grad[i];
            if (b->requires_grad)
                for (std::size_t i = 0; i < n; ++i)
                    for (std::size_t j = 0; j < d; ++j) b->grad[j] += out->grad[i * d + j];
        });
    }
    return out;
}

inline TensorPtr concat_cols(Tape* tape, const std::vector<TensorPtr>& parts) {
    detail::require(!parts.empty(), "concat_cols: no inputs");
    std::size_t n = parts[0]->rows(), d = 0;
    bool rg = false;
    for (const auto& p : parts) {
        detail::require(p->rows() == n, "concat_cols: row count mismatch");
        d += p->cols();
        rg = rg || p->requires_grad;
    }
    auto out = detail_ops::out_like(tape, {n, d}, rg);
    std::size_t off = 0;
    for (const auto& p : parts) {
        const std::size_t pd = p->cols();
        for (std::size_t i = 0; i < n; ++i)
            std::copy_n(p->value.data() + i * pd, pd, out->value.data() + i * d + off);
        off += pd;
    }
    detail_ops::check_finite(*out, "concat_cols");
    if (out->requires_grad) {
        tape->record([parts, out, n, d]() {
            std::size_t off2 = 0;
            for (const auto& p : parts) {
                const std::size_t pd = p->cols();
                if (p->requires_grad)
                    for (std::size_t i = 0; i < n; ++i)
                        for (std::size_t j = 0; j < pd; ++j) p->grad[i * pd + j] += out->grad[i * d + off2 + j];
                off2 += pd;
            }
        });
    }
    return out;
}

inline TensorPtr concat_cols(Tape* tape, const TensorPtr& a, const TensorPtr& b) {
    return concat_cols(tape, std::vector<TensorPtr>{a, b});
}

/// Contiguous row slice [r0, r1).
inline TensorPtr slice_rows(Tape* tape, const TensorPtr& x, std::size_t r0, std::size_t r1) {
    detail::require(r0 <= r1 && r1 <= x->rows(), "slice_rows: range out of bounds");
    const std::size_t d = x->cols();
    auto out = detail_ops::out_like(tape, {r1 - r0, d}, x->requires_grad);
    std::copy_n(x->value.data() + r0 * d, (r1 - r0) * d, out->value.data());
    if (out->requires_grad) {
        tape->record([x, out, r0, d]() {
            const std::size_t m = out->rows();
            for (std::size_t i = 0; i < m * d; ++i) x->grad[r0 * d + i] += out->grad[i];
        });
    }
    return out;
}

/// Row gather; also serves as the embedding lookup (x = table).
inline TensorPtr gather_rows(Tape* tape, const TensorPtr& x, std::vector<std::int64_t> idx) {
    const std::size_t d = x->cols(), n = idx.size(), xr = x->rows();
    for (std::int64_t i : idx) detail::require(i >= 0 && static_cast<std::size_t>(i) < xr, "gather_rows: index out of range");
    auto out = detail_ops::out_like(tape, {n, d}, x->requires_grad);
    for (std::size_t i = 0; i < n; ++i)
        std::copy_n(x->value.data() + static_cast<std::size_t>(idx[i]) * d, d, out->value.data() + i * d);
    if (out->requires_grad) {
        auto ids = std::make_shared<std::vector<std::int64_t>>(std::move(idx));
        tape->record([x, out, ids, n, d]() {
            for (std::size_t i = 0; i < n; ++i) {
                double* g = x->grad.data() + static_cast<std::size_t>((*ids)[i]) * d;
                const double* og = out->grad.data() + i * d;
                for (std::size_t j = 0; j < d; ++j) g[j] += og[j];
            }
        });
    }
    return out;
}

/// Scatters per-item feature rows into fixed slots: out[row[i], slot[i]*d .. +d) = x[i,:].
/// Unwritten slots stay zero. Used by the fixed-width control model.
inline TensorPtr scatter_slots(Tape* tape, const TensorPtr& x, const std::vector<std::int64_t>& row,
                               const std::vector<std::int64_t>& slot, std::size_t n_rows, std::size_t n_slots) {
    const std::size_t d = x->cols(), n = x->rows();
    detail::require(row.size() == n && slot.size() == n, "scatter_slots: index length mismatch");
    auto out = detail_ops::out_like(tape, {n_rows, n_slots * d}, x->requires_grad);
    for (std::size_t i = 0; i < n; ++i) {
        detail::require(row[i] >= 0 && static_cast<std::size_t>(row[i]) < n_rows && slot[i] >= 0 &&
                            static_cast<std::size_t>(slot[i]) < n_slots,
                        "scatter_slots: index out of range");
        std::copy_n(x->value.data() + i * d, d,
                    out->value.data() + static_cast<std::size_t>(row[i]) * n_slots * d + static_cast<std::size_t>(slot[i]) * d);
    }
    if (out->requires_grad) {
        auto r = std::make_shared<std::vector<std::int64_t>>(row);
        auto s = std::make_shared<std::vector<std::int64_t>>(slot);
        tape->record([x, out, r, s, n, d, n_slots]() {
            for (std::size_t i = 0; i < n; ++i) {
                const double* og = out->grad.data() + static_cast<std::size_t>((*r)[i]) * n_slots * d +
                                   static_cast<std::size_t>((*s)[i]) * d;
                double* g = x->grad.data() + i * d;
                for (std::size_t j = 0; j < d; ++j) g[j] += og[j];
            }
        });
    }
    return out;
}

inline TensorPtr relu(Tape* tape, const TensorPtr& x) {
    auto out = detail_ops::out_like(tape, x->shape, x->requires_grad);
    for (std::size_t i = 0; i < x->numel(); ++i) out->value[i] = x->value[i] > 0.0 ? x->value[i] : 0.0;
    if (out->requires_grad) {
        tape->record([x, out]() {
            for (std::size_t i = 0; i < x->numel(); ++i)
                if (x->value[i] > 0.0) x->grad[i] += out->grad[i];
        });
    }
    return out;
}

inline TensorPtr leaky_relu(Tape* tape, const TensorPtr& x, double slope = 0.01) {
    auto out = detail_ops::out_like(tape, x->shape, x->requires_grad);
    for (std::size_t i = 0; i < x->numel(); ++i) {
        double v = x->value[i];
        out->value[i] = v > 0.0 ? v : slope * v;
    }
    if (out->requires_grad) {
        tape->record([x, out, slope]() {
            for (std::size_t i = 0; i < x->numel(); ++i)
                x->grad[i] += (x->value[i] > 0.0 ? 1.0 : slope) * out->grad[i];
        });
    }
    return out;
}

/// Elementwise scale by a constant.
inline TensorPtr scale(Tape* tape, const TensorPtr& x, double c) {
    auto out = detail_ops::out_like(tape, x->shape, x->requires_grad);
    for (std::size_t i = 0; i < x->numel(); ++i) out->value[i] = c * x->value[i];
    detail_ops::check_finite(*out, "scale");
    if (out->requires_grad) {
        tape->record([x, out, c]() {
            for (std::size_t i = 0; i < x->numel(); ++i) x->grad[i] += c * out->grad[i];
        });
    }
    return out;
}

/// Per-row scale by fixed coefficients (not differentiated w.r.t. coefs).
inline TensorPtr scale_rows(Tape* tape, const TensorPtr& x, const std::vector<double>& coef) {
    detail::require(coef.size() == x->rows(), "scale_rows: coefficient count mismatch");
    const std::size_t n = x->rows(), d = x->cols();
    auto out = detail_ops::out_like(tape, x->shape, x->requires_grad);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) out->value[i * d + j] = coef[i] * x->value[i * d + j];
    detail_ops::check_finite(*out, "scale_rows");
    if (out->requires_grad) {
        auto c = std::make_shared<std::vector<double>>(coef);
        tape->record([x, out, c, n, d]() {
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < d; ++j) x->grad[i * d + j] += (*c)[i] * out->grad[i * d + j];
        });
    }
    return out;
}

/// out[i,:] = x[i,:] * s[i,0], with gradients to both operands.
inline TensorPtr rowwise_mul(Tape* tape, const TensorPtr& x, const TensorPtr& s) {
    detail::require(s->rows() == x->rows() && s->cols() == 1, "rowwise_mul: scaler must be [n,1]");
    const std::size_t n = x->rows(), d = x->cols();
    auto out = detail_ops::out_like(tape, x->shape, x->requires_grad || s->requires_grad);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) out->value[i * d + j] = x->value[i * d + j] * s->value[i];
    detail_ops::check_finite(*out, "rowwise_mul");
    if (out->requires_grad) {
        tape->record([x, s, out, n, d]() {
            if (x->requires_grad)
                for (std::size_t i = 0; i < n; ++i)
                    for (std::size_t j = 0; j < d; ++j) x->grad[i * d + j] += s->value[i] * out->grad[i * d + j];
            if (s->requires_grad)
                for (std::size_t i = 0; i < n; ++i) {
                    double acc = 0.0;
                    for (std::size_t j = 0; j < d; ++j) acc += x->value[i * d + j] * out->grad[i * d + j];
                    s->grad[i] += acc;
                }
        });
    }
    return out;
}

/// out[seg[i],:] += x[i,:]; segments without rows give zero rows.
inline TensorPtr segment_sum(Tape* tape, const TensorPtr& x, const std::vector<std::int64_t>& seg,
                             std::size_t n_segments) {
    detail::require(seg.size() == x->rows(), "segment_sum: segment id count mismatch");
    const std::size_t n = x->rows(), d = x->cols();
    auto out = detail_ops::out_like(tape, {n_segments, d}, x->requires_grad);
    for (std::size_t i = 0; i < n; ++i) {
        detail::require(seg[i] >= 0 && static_cast<std::size_t>(seg[i]) < n_segments, "segment_sum: id out of range");
        double* o = out->value.data() + static_cast<std::size_t>(seg[i]) * d;
        const double* v = x->value.data() + i * d;
        for (std::size_t j = 0; j < d; ++j) o[j] += v[j];
    }
    detail_ops::check_finite(*out, "segment_sum");
    if (out->requires_grad) {
        auto s = std::make_shared<std::vector<std::int64_t>>(seg);
        tape->record([x, out, s, n, d]() {
            for (std::size_t i = 0; i < n; ++i) {
                const double* og = out->grad.data() + static_cast<std::size_t>((*s)[i]) * d;
                double* g = x->grad.data() + i * d;
                for (std::size_t j = 0; j < d; ++j) g[j] += og[j];
            }
        });
    }
    return out;
}

/// Segment mean; empty segments give zero rows.
inline TensorPtr segment_mean(Tape* tape, const TensorPtr& x, const std::vector<std::int64_t>& seg,
                              std::size_t n_segments) {
    auto sums = segment_sum(tape, x, seg, n_segments);
    std::vector<double> inv(n_segments, 0.0);
    for (std::int64_t s : seg) inv[static_cast<std::size_t>(s)] += 1.0;
    for (double& c : inv) c = c > 0.0 ? 1.0 / c : 0.0;
    return scale_rows(tape, sums, inv);
}

/// Column-independent softmax within each segment. Empty segments are absent
/// from the output by construction (rows only exist for input rows).
inline TensorPtr segment_softmax(Tape* tape, const TensorPtr& x, const std::vector<std::int64_t>& seg,
                                 std::size_t n_segments) {
    detail::require(seg.size() == x->rows(), "segment_softmax: segment id count mismatch");
    const std::size_t n = x->rows(), d = x->cols();
    auto out = detail_ops::out_like(tape, x->shape, x->requires_grad);
    std::vector<double> mx(n_segments * d, -std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < n; ++i) {
        detail::require(seg[i] >= 0 && static_cast<std::size_t>(seg[i]) < n_segments, "segment_softmax: id out of range");
        const std::size_t s = static_cast<std::size_t>(seg[i]);
        for (std::size_t j = 0; j < d; ++j) mx[s * d + j] = std::max(mx[s * d + j], x->value[i * d + j]);
    }
    std::vector<double> denom(n_segments * d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t s = static_cast<std::size_t>(seg[i]);
        for (std::size_t j = 0; j < d; ++j) {
            double e = std::exp(x->value[i * d + j] - mx[s * d + j]);
            out->value[i * d + j] = e;
            denom[s * d + j] += e;
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t s = static_cast<std::size_t>(seg[i]);
        for (std::size_t j = 0; j < d; ++j) out->value[i * d + j] /= denom[s * d + j];
    }
    detail_ops::check_finite(*out, "segment_softmax");
    if (out->requires_grad) {
        auto sids = std::make_shared<std::vector<std::int64_t>>(seg);
        tape->record([x, out, sids, n, d, n_segments]() {
            // dx = y * (dy - sum_seg(dy * y))
            std::vector<double> dot(n_segments * d, 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                const std::size_t s = static_cast<std::size_t>((*sids)[i]);
                for (std::size_t j = 0; j < d; ++j) dot[s * d + j] += out->grad[i * d + j] * out->value[i * d + j];
            }
            for (std::size_t i = 0; i < n; ++i) {
                const std::size_t s = static_cast<std::size_t>((*sids)[i]);
                for (std::size_t j = 0; j < d; ++j)
                    x->grad[i * d + j] += out->value[i * d + j] * (out->grad[i * d + j] - dot[s * d + j]);
            }
        });
    }
    return out;
}

inline TensorPtr mean_all(Tape* tape, const TensorPtr& x) {
    const std::size_t n = x->numel();
    detail::require(n > 0, "mean_all: empty tensor");
    auto out = detail_ops::out_like(tape, {1}, x->requires_grad);
    double acc = 0.0;
    for (double v : x->value) acc += v;
    out->value[0] = acc / static_cast<double>(n);
    detail_ops::check_finite(*out, "mean_all");
    if (out->requires_grad) {
        tape->record([x, out, n]() {
            const double g = out->grad[0] / static_cast<double>(n);
            for (std::size_t i = 0; i < n; ++i) x->grad[i] += g;
        });
    }
    return out;
}

inline TensorPtr sum_all(Tape* tape, const TensorPtr& x) {
    auto out = detail_ops::out_like(tape, {1}, x->requires_grad);
    double acc = 0.0;
    for (double v : x->value) acc += v;
    out->value[0] = acc;
    detail_ops::check_finite(*out, "sum_all");
    if (out->requires_grad) {
        tape->record([x, out]() {
            for (std::size_t i = 0; i < x->numel(); ++i) x->grad[i] += out->grad[0];
        });
    }
    return out;
}

/// Mean squared error against a fixed target.
inline TensorPtr mse_loss(Tape* tape, const TensorPtr& pred, const std::vector<double>& target) {
    detail::require(target.size() == pred->numel(), "mse_loss: target size mismatch");
    const std::size_t n = pred->numel();
    detail::require(n > 0, "mse_loss: empty prediction");
    auto out = detail_ops::out_like(tape, {1}, pred->requires_grad);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double diff = pred->value[i] - target[i];
        acc += diff * diff;
    }
    out->value[0] = acc / static_cast<double>(n);
    detail_ops::check_finite(*out, "mse_loss");
    if (out->requires_grad) {
        auto t = std::make_shared<std::vector<double>>(target);
        tape->record([pred, out, t, n]() {
            const double g = 2.0 * out->grad[0] / static_cast<double>(n);
            for (std::size_t i = 0; i < n; ++i) pred->grad[i] += g * (pred->value[i] - (*t)[i]);
        });
    }
    return out;
}

/// Mean softmax cross-entropy over rows of logits against integer labels.
inline TensorPtr softmax_xent(Tape* tape, const TensorPtr& logits, const std::vector<std::int64_t>& labels) {
    const std::size_t n = logits->rows(), c = logits->cols();
    detail::require(labels.size() == n, "softmax_xent: label count mismatch");
    detail::require(n > 0, "softmax_xent: empty batch");
    auto out = detail_ops::out_like(tape, {1}, logits->requires_grad);
    // keep softmax for the pullback
    auto probs = std::make_shared<std::vector<double>>(n * c);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        detail::require(labels[i] >= 0 && static_cast<std::size_t>(labels[i]) < c, "softmax_xent: label out of range");
        const double* row = logits->value.data() + i * c;
        double m = row[0];
        for (std::size_t j = 1; j < c; ++j) m = std::max(m, row[j]);
        double z = 0.0;
        for (std::size_t j = 0; j < c; ++j) z += std::exp(row[j] - m);
        for (std::size_t j = 0; j < c; ++j) (*probs)[i * c + j] = std::exp(row[j] - m) / z;
        acc += std::log(z) - (row[static_cast<std::size_t>(labels[i])] - m);
    }
    out->value[0] = acc / static_cast<double>(n);
    detail_ops::check_finite(*out, "softmax_xent");
    if (out->requires_grad) {
        auto lab = std::make_shared<std::vector<std::int64_t>>(labels);
        tape->record([logits, out, probs, lab, n, c]() {
            const double g = out->grad[0] / static_cast<double>(n);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < c; ++j) {
                    double p = (*probs)[i * c + j];
                    double y = static_cast<std::size_t>((*lab)[i]) == j ? 1.0 : 0.0;
                    logits->grad[i * c + j] += g * (p - y);
                }
        });
    }
    return out;
}

/// Gradient reversal: identity forward, -alpha scaled gradient backward.
inline TensorPtr grl(Tape* tape, const TensorPtr& x, double alpha) {
    detail::require(alpha >= 0.0, "grl: alpha must be non-negative");
    auto out = detail_ops::out_like(tape, x->shape, x->requires_grad);
    out->value = x->value;  // bit-equal copy
    if (out->requires_grad) {
        tape->record([x, out, alpha]() {
            for (std::size_t i = 0; i < x->numel(); ++i) x->grad[i] += -alpha * out->grad[i];
        });
    }
    return out;
}

/// x·W + b, the everywhere-used affine composite.
inline TensorPtr linear(Tape* tape, const TensorPtr& x, const TensorPtr& w, const TensorPtr& b) {
    return add_bias(tape, matmul(tape, x, w), b);
}

}  // namespace wiloc::ad

#endif  // WILOC_TENSOR_HPP
