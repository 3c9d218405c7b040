#ifndef WILOC_OPTIM_HPP
#define WILOC_OPTIM_HPP

#include <cmath>
#include <limits>
#include <vector>

#include "wiloc/tensor.hpp"

namespace wiloc::ad {

/// Adam with bias correction over a fixed parameter list.
class Adam {
public:
    explicit Adam(std::vector<TensorPtr> params, double lr = 1e-3, double beta1 = 0.9, double beta2 = 0.999,
                  double eps = 1e-8)
        : params_(std::move(params)), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
        detail::require(lr_ > 0.0, "Adam: lr must be positive");
        m_.resize(params_.size());
        v_.resize(params_.size());
        for (std::size_t i = 0; i < params_.size(); ++i) {
            m_[i].assign(params_[i]->numel(), 0.0);
            v_[i].assign(params_[i]->numel(), 0.0);
        }
    }

    double lr() const { return lr_; }
    void set_lr(double lr) {
        detail::require(lr > 0.0, "Adam: lr must be positive");
        lr_ = lr;
    }
    std::int64_t step_count() const { return t_; }
    const std::vector<TensorPtr>& params() const { return params_; }

    void zero_grad() {
        for (auto& p : params_) p->zero_grad();
    }

    void step() {
        detail::require(lr_ > 0.0, "Adam: lr must be positive");
        ++t_;
        const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
        const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
        for (std::size_t i = 0; i < params_.size(); ++i) {
            Tensor& p = *params_[i];
            for (std::size_t j = 0; j < p.numel(); ++j) {
                const double g = p.grad[j];
                if (!std::isfinite(g)) throw Error("Adam: non-finite gradient");
                m_[i][j] = beta1_ * m_[i][j] + (1.0 - beta1_) * g;
                v_[i][j] = beta2_ * v_[i][j] + (1.0 - beta2_) * g * g;
                const double mhat = m_[i][j] / bc1;
                const double vhat = v_[i][j] / bc2;
                p.value[j] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
            }
        }
    }

private:
    std::vector<TensorPtr> params_;
    std::vector<std::vector<double>> m_, v_;
    double lr_, beta1_, beta2_, eps_;
    std::int64_t t_ = 0;
};

/// Halves the learning rate after `patience` consecutive epochs without
/// validation improvement. The rate never increases.
class PlateauSchedule {
public:
    explicit PlateauSchedule(double lr, int patience = 10, double factor = 0.5)
        : lr_(lr), patience_(patience), factor_(factor) {}

    /// Call once per epoch; returns the (possibly reduced) learning rate.
    double step(double val_loss) {
        if (val_loss < best_) {
            best_ = val_loss;
            stale_ = 0;
        } else {
            ++stale_;
            if (stale_ >= patience_) {
                lr_ *= factor_;
                stale_ = 0;
            }
        }
        return lr_;
    }

    double lr() const { return lr_; }
    double best() const { return best_; }
    int stale_count() const { return stale_; }

private:
    double lr_;
    int patience_;
    double factor_;
    double best_ = std::numeric_limits<double>::infinity();
    int stale_ = 0;
};

}  // namespace wiloc::ad

#endif  // WILOC_OPTIM_HPP
