#ifndef WILOC_TESTS_ORACLES_HPP
#define WILOC_TESTS_ORACLES_HPP

// Test-side reference implementations, independent of the library's
// computation paths. Everything here is deliberately naive: dense matrices,
// explicit loops, central differences.

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "wiloc/tensor.hpp"

namespace oracles {

// Central finite-difference gradient of f with respect to every entry of the
// given parameters. f must re-run the full forward pass.
inline std::vector<std::vector<double>> fd_gradients(const std::function<double()>& f,
                                                     const std::vector<wiloc::ad::TensorPtr>& params,
                                                     double h = 1e-5) {
    std::vector<std::vector<double>> grads;
    for (const auto& p : params) {
        std::vector<double> g(p->numel());
        for (std::size_t i = 0; i < p->numel(); ++i) {
            const double orig = p->value[i];
            p->value[i] = orig + h;
            const double fp = f();
            p->value[i] = orig - h;
            const double fm = f();
            p->value[i] = orig;
            g[i] = (fp - fm) / (2.0 * h);
        }
        grads.push_back(std::move(g));
    }
    return grads;
}

// Max relative error between analytic and finite-difference gradients.
inline double max_rel_error(const std::vector<wiloc::ad::TensorPtr>& params,
                            const std::vector<std::vector<double>>& fd) {
    double worst = 0.0;
    for (std::size_t k = 0; k < params.size(); ++k) {
        for (std::size_t i = 0; i < params[k]->numel(); ++i) {
            const double a = params[k]->grad[i];
            const double b = fd[k][i];
            const double denom = std::max({std::fabs(a), std::fabs(b), 1e-8});
            worst = std::max(worst, std::fabs(a - b) / denom);
        }
    }
    return worst;
}

// Dense weighted graph convolution: h' = relu(b + D_dst^{-1/2} (E.*A) D_src^{-1/2} H W)
// on an explicit edge list, computed with plain loops.
struct DenseEdge {
    int src, dst;
    double w;
};

inline std::vector<std::vector<double>> dense_weighted_gcn(
    const std::vector<std::vector<double>>& h_src, int n_dst, const std::vector<DenseEdge>& edges,
    const std::vector<std::vector<double>>& w, const std::vector<double>& bias) {
    const std::size_t d_in = w.size(), d_out = w[0].size();
    std::vector<int> outdeg(h_src.size(), 0), indeg(n_dst, 0);
    for (const auto& e : edges) {
        outdeg[e.src]++;
        indeg[e.dst]++;
    }
    // transform then normalized weighted sum
    std::vector<std::vector<double>> hw(h_src.size(), std::vector<double>(d_out, 0.0));
    for (std::size_t i = 0; i < h_src.size(); ++i)
        for (std::size_t a = 0; a < d_in; ++a)
            for (std::size_t b = 0; b < d_out; ++b) hw[i][b] += h_src[i][a] * w[a][b];
    std::vector<std::vector<double>> out(n_dst, std::vector<double>(d_out, 0.0));
    for (const auto& e : edges) {
        const double c = std::sqrt(static_cast<double>(outdeg[e.src])) * std::sqrt(static_cast<double>(indeg[e.dst]));
        for (std::size_t b = 0; b < d_out; ++b) out[e.dst][b] += (e.w / c) * hw[e.src][b];
    }
    for (int i = 0; i < n_dst; ++i)
        for (std::size_t b = 0; b < d_out; ++b) {
            out[i][b] += bias[b];
            out[i][b] = out[i][b] > 0.0 ? out[i][b] : 0.0;
        }
    return out;
}

// Dense single-head graph attention: alpha = softmax_dst(leaky(a_dst.Wh_i + a_src.Wh_j)),
// h'_i = sum_j alpha_ij Wh_j. Isolated destinations give zero rows.
inline std::vector<std::vector<double>> dense_gat_head(
    const std::vector<std::vector<double>>& h_src, const std::vector<std::vector<double>>& h_dst,
    const std::vector<DenseEdge>& edges, const std::vector<std::vector<double>>& w,
    const std::vector<double>& a_src, const std::vector<double>& a_dst, double leaky_slope = 0.01) {
    const std::size_t d_in = w.size(), d_out = w[0].size();
    auto apply_w = [&](const std::vector<std::vector<double>>& h) {
        std::vector<std::vector<double>> hw(h.size(), std::vector<double>(d_out, 0.0));
        for (std::size_t i = 0; i < h.size(); ++i)
            for (std::size_t a = 0; a < d_in; ++a)
                for (std::size_t b = 0; b < d_out; ++b) hw[i][b] += h[i][a] * w[a][b];
        return hw;
    };
    auto hw_src = apply_w(h_src);
    auto hw_dst = apply_w(h_dst);
    std::vector<double> score(edges.size());
    for (std::size_t e = 0; e < edges.size(); ++e) {
        double s = 0.0;
        for (std::size_t b = 0; b < d_out; ++b)
            s += a_dst[b] * hw_dst[edges[e].dst][b] + a_src[b] * hw_src[edges[e].src][b];
        score[e] = s > 0.0 ? s : leaky_slope * s;
    }
    // per-destination softmax
    std::vector<std::vector<double>> out(h_dst.size(), std::vector<double>(d_out, 0.0));
    for (std::size_t i = 0; i < h_dst.size(); ++i) {
        double mx = -1e300;
        bool any = false;
        for (std::size_t e = 0; e < edges.size(); ++e)
            if (edges[e].dst == static_cast<int>(i)) {
                mx = std::max(mx, score[e]);
                any = true;
            }
        if (!any) continue;
        double z = 0.0;
        for (std::size_t e = 0; e < edges.size(); ++e)
            if (edges[e].dst == static_cast<int>(i)) z += std::exp(score[e] - mx);
        for (std::size_t e = 0; e < edges.size(); ++e)
            if (edges[e].dst == static_cast<int>(i)) {
                const double alpha = std::exp(score[e] - mx) / z;
                for (std::size_t b = 0; b < d_out; ++b) out[i][b] += alpha * hw_src[edges[e].src][b];
            }
    }
    return out;
}

// Adam trajectory for a single scalar parameter under a fixed gradient.
inline std::vector<double> adam_updates_for_constant_grad(double g, double lr, int steps, double beta1 = 0.9,
                                                          double beta2 = 0.999, double eps = 1e-8) {
    std::vector<double> deltas;
    double m = 0.0, v = 0.0;
    for (int t = 1; t <= steps; ++t) {
        m = beta1 * m + (1.0 - beta1) * g;
        v = beta2 * v + (1.0 - beta2) * g * g;
        const double mhat = m / (1.0 - std::pow(beta1, t));
        const double vhat = v / (1.0 - std::pow(beta2, t));
        deltas.push_back(-lr * mhat / (std::sqrt(vhat) + eps));
    }
    return deltas;
}

}  // namespace oracles

#endif  // WILOC_TESTS_ORACLES_HPP
