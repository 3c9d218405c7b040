#include <gtest/gtest.h>

#include <cmath>
#include <cstring>

#include "oracles.hpp"
#include "wiloc/optim.hpp"
#include "wiloc/rng.hpp"
#include "wiloc/tensor.hpp"

using namespace wiloc;
using namespace wiloc::ad;

namespace {

TensorPtr random_param(std::vector<std::size_t> shape, Rng& rng, double scale = 1.0) {
    std::size_t n = 1;
    for (auto d : shape) n *= d;
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform(-scale, scale);
    return make_param(std::move(shape), std::move(v));
}

void expect_fd_close(const std::function<TensorPtr(Tape*)>& forward, const std::vector<TensorPtr>& params,
                     double tol = 1e-4) {
    for (const auto& p : params) p->zero_grad();
    Tape tape;
    auto loss = forward(&tape);
    tape.backward(loss);
    auto fd = oracles::fd_gradients([&]() { return forward(nullptr)->value[0]; }, params);
    EXPECT_LT(oracles::max_rel_error(params, fd), tol);
}

}  // namespace

TEST(Backward, SumGivesOnes) {
    auto w = make_param({2, 2}, {1.0, -2.0, 3.0, 0.5});
    Tape tape;
    auto loss = sum_all(&tape, w);
    tape.backward(loss);
    for (double g : w->grad) EXPECT_DOUBLE_EQ(g, 1.0);
}

TEST(Backward, MseAtMinimumIsZero) {
    auto a = make_param({3}, {1.0, 2.0, 3.0});
    Tape tape;
    auto loss = mse_loss(&tape, a, {1.0, 2.0, 3.0});
    tape.backward(loss);
    EXPECT_DOUBLE_EQ(loss->value[0], 0.0);
    for (double g : a->grad) EXPECT_DOUBLE_EQ(g, 0.0);
}

TEST(Backward, ThreeLayerNetMatchesFiniteDifferences) {
    Rng rng(42);
    auto x = make_const({4, 5}, [&] {
        std::vector<double> v(20);
        for (double& e : v) e = rng.uniform(-1, 1);
        return v;
    }());
    auto w1 = random_param({5, 6}, rng);
    auto b1 = random_param({6}, rng, 0.2);
    auto w2 = random_param({6, 6}, rng);
    auto b2 = random_param({6}, rng, 0.2);
    auto w3 = random_param({6, 2}, rng);
    auto b3 = random_param({2}, rng, 0.2);
    auto forward = [&](Tape* t) {
        auto h1 = relu(t, linear(t, x, w1, b1));
        auto h2 = leaky_relu(t, linear(t, h1, w2, b2));
        auto out = linear(t, h2, w3, b3);
        return mse_loss(t, out, std::vector<double>(8, 0.25));
    };
    expect_fd_close(forward, {w1, b1, w2, b2, w3, b3});
}

TEST(Backward, SecondCallWithoutResetThrows) {
    auto w = make_param({2}, {1.0, 2.0});
    Tape tape;
    auto loss = sum_all(&tape, w);
    tape.backward(loss);
    EXPECT_THROW(tape.backward(loss), Error);
    tape.reset();
    auto loss2 = sum_all(&tape, w);
    EXPECT_NO_THROW(tape.backward(loss2));
}

TEST(Backward, NonScalarLossThrows) {
    auto w = make_param({2}, {1.0, 2.0});
    Tape tape;
    auto y = relu(&tape, w);
    EXPECT_THROW(tape.backward(y), Error);
}

TEST(Backward, NonFiniteValueThrows) {
    auto w = make_param({2}, {1e308, 1e308});
    Tape tape;
    EXPECT_THROW(scale(&tape, w, 1e10), Error);
}

// per-primitive finite-difference checks

TEST(Primitive, Matmul) {
    Rng rng(1);
    auto a = random_param({3, 4}, rng);
    auto b = random_param({4, 2}, rng);
    expect_fd_close([&](Tape* t) { return mean_all(t, matmul(t, a, b)); }, {a, b});
}

TEST(Primitive, AddAndBias) {
    Rng rng(2);
    auto a = random_param({3, 3}, rng);
    auto b = random_param({3, 3}, rng);
    auto c = random_param({3}, rng);
    expect_fd_close([&](Tape* t) { return mean_all(t, add_bias(t, add(t, a, b), c)); }, {a, b, c});
}

TEST(Primitive, ConcatAndSlice) {
    Rng rng(3);
    auto a = random_param({3, 2}, rng);
    auto b = random_param({3, 4}, rng);
    expect_fd_close(
        [&](Tape* t) {
            auto c = concat_cols(t, a, b);
            auto s = slice_rows(t, c, 1, 3);
            return mean_all(t, s);
        },
        {a, b});
}

TEST(Primitive, SliceValues) {
    auto x = make_const({3, 2}, {1, 2, 3, 4, 5, 6});
    auto s = slice_rows(nullptr, x, 1, 2);
    EXPECT_EQ(s->rows(), 1u);
    EXPECT_DOUBLE_EQ(s->value[0], 3.0);
    EXPECT_DOUBLE_EQ(s->value[1], 4.0);
}

TEST(Primitive, EmbeddingLookup) {
    Rng rng(4);
    auto table = random_param({5, 3}, rng);
    std::vector<std::int64_t> ids{0, 3, 3, 1};
    expect_fd_close([&](Tape* t) { return mean_all(t, gather_rows(t, table, ids)); }, {table});
    // duplicate ids accumulate
    table->zero_grad();
    Tape tape;
    auto out = gather_rows(&tape, table, ids);
    tape.backward(sum_all(&tape, out));
    EXPECT_DOUBLE_EQ(table->grad[3 * 3], 2.0);
}

TEST(Primitive, ScatterSlots) {
    Rng rng(5);
    auto x = random_param({3, 2}, rng);
    std::vector<std::int64_t> row{0, 0, 1}, slot{1, 0, 2};
    expect_fd_close([&](Tape* t) { return mean_all(t, scatter_slots(t, x, row, slot, 2, 3)); }, {x});
    auto out = scatter_slots(nullptr, x, row, slot, 2, 3);
    EXPECT_EQ(out->cols(), 6u);
    EXPECT_DOUBLE_EQ(out->value[0 * 6 + 2], x->value[0]);  // row 0 slot 1
    EXPECT_DOUBLE_EQ(out->value[1 * 6 + 4], x->value[4]);  // row 1 slot 2
    EXPECT_DOUBLE_EQ(out->value[1 * 6 + 0], 0.0);          // untouched slot stays zero
}

TEST(Primitive, ReluLeakyScale) {
    Rng rng(6);
    auto a = random_param({4, 3}, rng);
    expect_fd_close([&](Tape* t) { return mean_all(t, relu(t, a)); }, {a});
    expect_fd_close([&](Tape* t) { return mean_all(t, leaky_relu(t, a, 0.01)); }, {a});
    expect_fd_close([&](Tape* t) { return mean_all(t, scale(t, a, -2.5)); }, {a});
}

TEST(Primitive, RowScaling) {
    Rng rng(7);
    auto a = random_param({4, 3}, rng);
    auto s = random_param({4, 1}, rng);
    expect_fd_close([&](Tape* t) { return mean_all(t, scale_rows(t, a, {0.5, -1.0, 2.0, 0.0})); }, {a});
    expect_fd_close([&](Tape* t) { return mean_all(t, rowwise_mul(t, a, s)); }, {a, s});
}

TEST(Primitive, SegmentSumAndMean) {
    Rng rng(8);
    auto x = random_param({5, 2}, rng);
    std::vector<std::int64_t> seg{0, 1, 0, 2, 1};
    expect_fd_close([&](Tape* t) { return mean_all(t, segment_sum(t, x, seg, 4)); }, {x});
    expect_fd_close([&](Tape* t) { return mean_all(t, segment_mean(t, x, seg, 4)); }, {x});
    auto m = segment_mean(nullptr, x, seg, 4);
    EXPECT_DOUBLE_EQ(m->value[0 * 2], (x->value[0] + x->value[4]) / 2.0);
    EXPECT_DOUBLE_EQ(m->value[3 * 2], 0.0);  // empty segment
}

TEST(Primitive, SegmentSoftmax) {
    Rng rng(9);
    auto x = random_param({6, 2}, rng, 3.0);
    std::vector<std::int64_t> seg{0, 0, 0, 1, 1, 2};
    expect_fd_close([&](Tape* t) { return mse_loss(t, segment_softmax(t, x, seg, 3), std::vector<double>(12, 0.3)); },
                    {x});
    // outputs non-negative and sum to one within each segment
    auto y = segment_softmax(nullptr, x, seg, 3);
    std::vector<double> sums(3 * 2, 0.0);
    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = 0; j < 2; ++j) {
            EXPECT_GE(y->value[i * 2 + j], 0.0);
            sums[static_cast<std::size_t>(seg[i]) * 2 + j] += y->value[i * 2 + j];
        }
    for (double s : sums) EXPECT_NEAR(s, 1.0, 1e-9);
}

TEST(Primitive, Losses) {
    Rng rng(10);
    auto pred = random_param({3, 2}, rng);
    expect_fd_close([&](Tape* t) { return mse_loss(t, pred, {0.1, 0.2, 0.3, 0.4, 0.5, 0.6}); }, {pred});
    auto logits = random_param({4, 3}, rng, 2.0);
    std::vector<std::int64_t> labels{0, 2, 1, 2};
    expect_fd_close([&](Tape* t) { return softmax_xent(t, logits, labels); }, {logits});
}

TEST(Primitive, ConcatGradSplitsWithoutLoss) {
    Rng rng(11);
    auto a = random_param({3, 2}, rng);
    auto b = random_param({3, 5}, rng);
    auto r = make_const({3, 7}, [&] {
        std::vector<double> v(21);
        for (double& e : v) e = rng.uniform(-1, 1);
        return v;
    }());
    Tape tape;
    auto c = concat_cols(&tape, a, b);
    // weighted sum so the concat output receives a dense, non-uniform gradient
    std::vector<double> zeros(21, 0.0);
    auto prod = add(&tape, c, r);
    auto loss = mse_loss(&tape, prod, zeros);
    tape.backward(loss);
    double n_c = 0.0, n_a = 0.0, n_b = 0.0;
    for (std::size_t i = 0; i < c->numel(); ++i) n_c += c->grad[i] * c->grad[i];
    for (double g : a->grad) n_a += g * g;
    for (double g : b->grad) n_b += g * g;
    EXPECT_NEAR(n_c, n_a + n_b, 1e-12 * std::max(1.0, n_c));
}

// gradient reversal

TEST(Grl, ForwardIsBitEqualIdentity) {
    Rng rng(12);
    auto x = random_param({4, 4}, rng);
    auto y = grl(nullptr, x, 0.7);
    ASSERT_EQ(y->numel(), x->numel());
    EXPECT_EQ(std::memcmp(y->value.data(), x->value.data(), x->numel() * sizeof(double)), 0);
}

TEST(Grl, BackwardScalesByMinusAlpha) {
    auto x = make_param({1}, {3.0});
    Tape tape;
    auto y = grl(&tape, x, 0.5);
    auto loss = scale(&tape, y, 2.0);  // incoming grad at y is 2.0
    tape.backward(loss);
    EXPECT_DOUBLE_EQ(x->grad[0], -1.0);
}

TEST(Grl, AlphaZeroBlocksGradient) {
    auto x = make_param({1}, {3.0});
    Tape tape;
    auto y = grl(&tape, x, 0.0);
    auto loss = scale(&tape, y, 2.0);
    tape.backward(loss);
    EXPECT_DOUBLE_EQ(x->grad[0], 0.0);
}

TEST(Grl, FiniteDifferenceThroughComposite) {
    // FD sees the true function (identity), so compare against the analytic
    // claim directly: grad-through-grl == -alpha * grad-without-grl.
    Rng rng(13);
    auto x = random_param({3, 3}, rng);
    auto w = random_param({3, 2}, rng);
    const double alpha = 0.37;
    Tape t1;
    auto l1 = mean_all(&t1, matmul(&t1, grl(&t1, x, alpha), w));
    t1.backward(l1);
    std::vector<double> with_grl = x->grad;
    x->zero_grad();
    Tape t2;
    auto l2 = mean_all(&t2, matmul(&t2, x, w));
    t2.backward(l2);
    for (std::size_t i = 0; i < x->numel(); ++i) EXPECT_NEAR(with_grl[i], -alpha * x->grad[i], 1e-15);
}

// optimizer

TEST(Adam, ZeroGradientLeavesParamsUnchanged) {
    auto w = make_param({3}, {1.0, -2.0, 0.5});
    std::vector<double> before = w->value;
    Adam opt({w}, 1e-3);
    opt.zero_grad();
    opt.step();
    EXPECT_EQ(w->value, before);
}

TEST(Adam, FirstStepMagnitude) {
    auto w = make_param({2}, {1.0, -1.0});
    Adam opt({w}, 1e-3);
    w->grad = {0.3, -4.0};
    double before0 = w->value[0], before1 = w->value[1];
    opt.step();
    const double d0 = before0 - w->value[0];
    const double d1 = before1 - w->value[1];
    // first bias-corrected step moves by ~lr against the gradient sign
    EXPECT_GT(d0, 0.0009);
    EXPECT_LE(d0, 0.001);
    EXPECT_LT(d1, -0.0009);
    EXPECT_GE(d1, -0.001);
}

TEST(Adam, ConstantGradientTrajectoryMatchesClosedForm) {
    const double g = 0.7, lr = 1e-3;
    auto expected = oracles::adam_updates_for_constant_grad(g, lr, 5);
    auto w = make_param({1}, {0.0});
    Adam opt({w}, lr);
    double prev = w->value[0];
    double prev_mag = 1e9;
    for (int t = 0; t < 5; ++t) {
        w->grad = {g};
        opt.step();
        const double delta = w->value[0] - prev;
        prev = w->value[0];
        EXPECT_NEAR(delta, expected[static_cast<std::size_t>(t)], 1e-15);
        const double mag = std::fabs(delta);
        EXPECT_LE(mag, prev_mag * (1.0 + 1e-12));  // never grows
        prev_mag = mag;
    }
}

TEST(Adam, RejectsNonPositiveLr) {
    auto w = make_param({1}, {0.0});
    EXPECT_THROW(Adam({w}, 0.0), Error);
    EXPECT_THROW(Adam({w}, -1.0), Error);
}

TEST(Adam, NonFiniteGradientThrows) {
    auto w = make_param({1}, {0.0});
    Adam opt({w}, 1e-3);
    w->grad = {std::numeric_limits<double>::quiet_NaN()};
    EXPECT_THROW(opt.step(), Error);
}

// plateau schedule

TEST(Plateau, ImprovingLossKeepsLr) {
    PlateauSchedule sched(1e-3);
    for (int e = 0; e < 30; ++e) EXPECT_DOUBLE_EQ(sched.step(1.0 / (e + 1)), 1e-3);
}

TEST(Plateau, TenStaleEpochsHalve) {
    PlateauSchedule sched(1e-3);
    sched.step(1.0);
    for (int e = 0; e < 9; ++e) EXPECT_DOUBLE_EQ(sched.step(2.0), 1e-3);
    EXPECT_DOUBLE_EQ(sched.step(2.0), 0.0005);
}

TEST(Plateau, TwentyStaleEpochsQuarter) {
    PlateauSchedule sched(1e-3);
    sched.step(1.0);
    double lr = 1e-3;
    for (int e = 0; e < 20; ++e) lr = sched.step(2.0);
    EXPECT_DOUBLE_EQ(lr, 0.00025);
}

TEST(Plateau, LrNeverIncreases) {
    PlateauSchedule sched(1e-3);
    Rng rng(77);
    double last = sched.lr();
    for (int e = 0; e < 100; ++e) {
        double lr = sched.step(rng.uniform(0.0, 1.0));
        EXPECT_LE(lr, last);
        last = lr;
    }
}
