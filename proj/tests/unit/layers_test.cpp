#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "scin/layers.hpp"

using namespace scin;
using scin::testing::check_gradient;
using scin::testing::dot;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "no scin::Error thrown";
    return ErrorKind::io;
}

}  // namespace

TEST(Conv, AllOnesValidGivesNine) {
    Conv2D<double> conv(TensorD({1, 1, 3, 3}, 1.0), TensorD({1}, 0.0), 1, Padding::valid);
    const auto out = conv.forward(TensorD({1, 3, 3}, 1.0));
    ASSERT_EQ(out.shape(), (Shape{1, 1, 1}));
    EXPECT_EQ(out[0], 9.0);
}

TEST(Conv, DeltaKernelIsIdentity) {
    TensorD k({1, 1, 3, 3}, 0.0);
    k.at({0, 0, 1, 1}) = 1.0;
    Conv2D<double> conv(k, TensorD({1}, 0.0), 1, Padding::same);
    Rng rng(1);
    const auto x = rng_uniform<double>(rng, {1, 7, 5}, -1, 1);
    EXPECT_EQ(conv.forward(x), x);
}

TEST(Conv, SmallInstanceMatchesOracle) {
    Rng rng(2);
    const auto x = rng_uniform<double>(rng, {1, 5, 5}, -1, 1);
    const auto k = rng_uniform<double>(rng, {2, 1, 3, 3}, -1, 1);
    const auto b = rng_uniform<double>(rng, {2}, -1, 1);
    Conv2D<double> conv(k, b, 2, Padding::same);
    const auto got = conv.forward(x);
    const auto want = scin::testing::naive_conv(x, k, b, 2, Padding::same);
    ASSERT_EQ(got.shape(), want.shape());
    for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], want[i], 1e-6);
}

TEST(Conv, StrideTwoSameHalvesEverySize) {
    for (std::size_t n = 1; n <= 64; ++n) {
        const auto g = WindowGeometry::make(n, n, 3, 2, Padding::same);
        EXPECT_EQ(g.out_h, (n + 1) / 2) << n;
    }
}

TEST(Conv, ChannelMismatchIsShapeError) {
    Conv2D<double> conv(TensorD({2, 3, 3, 3}, 0.1), TensorD({2}, 0.0), 1, Padding::same);
    EXPECT_EQ(kind_of([&] { conv.forward(TensorD({2, 5, 5}, 1.0)); }), ErrorKind::shape_mismatch);
    const auto x = TensorD({3, 5, 5}, 1.0);
    EXPECT_EQ(kind_of([&] { conv.backward(x, TensorD({2, 4, 4}, 1.0)); }), ErrorKind::shape_mismatch);
}

TEST(Conv, ZeroGradOutGivesZeroGradients) {
    Rng rng(3);
    Conv2D<double> conv(rng_uniform<double>(rng, {4, 2, 3, 3}, -1, 1), TensorD({4}, 0.5), 2, Padding::same);
    const auto x = rng_uniform<double>(rng, {2, 6, 6}, -1, 1);
    const auto g = conv.backward(x, TensorD(conv.output_shape(x.shape()), 0.0));
    for (const auto* t : {&g.input, &g.kernels, &g.bias}) {
        for (double v : t->data()) EXPECT_EQ(v, 0.0);
    }
}

TEST(Conv, BiasGradIsChannelSum) {
    Rng rng(4);
    Conv2D<double> conv(rng_uniform<double>(rng, {3, 2, 3, 3}, -1, 1), TensorD({3}, 0.0), 1, Padding::same);
    const auto x = rng_uniform<double>(rng, {2, 5, 5}, -1, 1);
    const auto go = rng_uniform<double>(rng, conv.output_shape(x.shape()), -1, 1);
    const auto g = conv.backward(x, go);
    for (std::size_t f = 0; f < 3; ++f) {
        double s = 0.0;
        for (std::size_t i = 0; i < 25; ++i) s += go[f * 25 + i];
        EXPECT_NEAR(g.bias[f], s, 1e-12);
    }
}

TEST(Conv, BatchedForwardMatchesPerSample) {
    Rng rng(5);
    Conv2D<double> conv(rng_uniform<double>(rng, {3, 2, 3, 3}, -1, 1), rng_uniform<double>(rng, {3}, -1, 1), 2,
                        Padding::same);
    const auto batch = rng_uniform<double>(rng, {4, 2, 6, 6}, -1, 1);
    const auto out = conv.forward(batch);
    ASSERT_EQ(out.shape(), (Shape{4, 3, 3, 3}));
    for (std::size_t b = 0; b < 4; ++b) {
        TensorD one({2, 6, 6}, std::vector<double>(batch.data().begin() + b * 72, batch.data().begin() + (b + 1) * 72));
        const auto single = conv.forward(one);
        for (std::size_t i = 0; i < single.size(); ++i) EXPECT_EQ(out[b * 27 + i], single[i]);
    }
}

TEST(Conv, FiniteDifferences) {
    Rng rng(6);
    for (Padding p : {Padding::same, Padding::valid}) {
        for (std::size_t stride : {1u, 2u}) {
            Conv2D<double> conv(rng_uniform<double>(rng, {3, 2, 3, 3}, -1, 1), rng_uniform<double>(rng, {3}, -1, 1),
                                stride, p);
            auto x = rng_uniform<double>(rng, {2, 7, 6}, -1, 1);
            const auto r = rng_uniform<double>(rng, conv.output_shape(x.shape()), -1, 1);
            const auto g = conv.backward(x, r);
            auto loss = [&] { return dot(conv.forward(x), r); };
            auto res = check_gradient(x, g.input, loss, 100, rng);
            res = scin::testing::merge(res, check_gradient(conv.kernels(), g.kernels, loss, 100, rng));
            res = scin::testing::merge(res, check_gradient(conv.bias(), g.bias, loss, 100, rng));
            EXPECT_LE(res.max_rel_error, 1e-4);
        }
    }
}

TEST(Activation, LeakyAndReluValues) {
    const Activation leaky(ActivationKind::leaky_relu, 0.01);
    TensorD x({3}, std::vector<double>{2.0, -1.0, 0.0});
    const auto y = leaky.forward(x);
    EXPECT_EQ(y[0], 2.0);
    EXPECT_DOUBLE_EQ(y[1], -0.01);
    EXPECT_EQ(y[2], 0.0);
    const auto g = leaky.backward(x, TensorD({3}, 1.0));
    EXPECT_EQ(g[0], 1.0);
    EXPECT_DOUBLE_EQ(g[1], 0.01);
    EXPECT_EQ(g[2], 1.0);  // x >= 0 branch at the kink

    const Activation relu(ActivationKind::relu);
    EXPECT_EQ(relu.forward(TensorD({1}, -1.0))[0], 0.0);
    EXPECT_EQ(relu.backward(TensorD({1}, -1.0), TensorD({1}, 1.0))[0], 0.0);
}

TEST(Activation, LeakyGradientNonzeroAwayFromZero) {
    const Activation leaky{};
    Rng rng(7);
    const auto x = scin::testing::away_from_zero(rng, {500});
    const auto g = leaky.backward(x, TensorD({500}, 1.0));
    for (double v : g.data()) EXPECT_NE(v, 0.0);
}

TEST(Activation, AlphaValidated) {
    EXPECT_EQ(kind_of([] { Activation(ActivationKind::leaky_relu, 1.0); }), ErrorKind::invalid_hyperparameter);
    EXPECT_EQ(kind_of([] { Activation(ActivationKind::leaky_relu, -0.1); }), ErrorKind::invalid_hyperparameter);
}

TEST(Activation, FiniteDifferences) {
    Rng rng(8);
    for (ActivationKind kind : {ActivationKind::relu, ActivationKind::leaky_relu}) {
        const Activation act(kind, 0.1);
        auto x = scin::testing::away_from_zero(rng, {4, 5, 6});
        const auto r = rng_uniform<double>(rng, x.shape(), -1, 1);
        const auto g = act.backward(x, r);
        const auto res = check_gradient(x, g, [&] { return dot(act.forward(x), r); }, 120, rng);
        EXPECT_GE(res.checked, 100u);
        EXPECT_LE(res.max_rel_error, 1e-4);
    }
}

TEST(MaxPool, SingleWindowMaximum) {
    TensorD x({1, 3, 3});
    std::iota(x.data().begin(), x.data().end(), 1.0);
    const MaxPool2D pool(3, 1, Padding::valid);
    EXPECT_EQ(pool.forward(x).output[0], 9.0);
}

TEST(MaxPool, TiesRouteToFirstPosition) {
    const MaxPool2D pool(3, 3, Padding::valid);
    const TensorD x({1, 6, 6}, 2.0);
    const auto r = pool.forward(x);
    for (double v : r.output.data()) EXPECT_EQ(v, 2.0);
    const auto g = pool.backward(x.shape(), r.argmax, TensorD(r.output.shape(), 1.0));
    for (std::size_t i = 0; i < 6; ++i) {
        for (std::size_t j = 0; j < 6; ++j) {
            EXPECT_EQ(g.at({0, i, j}), (i % 3 == 0 && j % 3 == 0) ? 1.0 : 0.0) << i << "," << j;
        }
    }
}

TEST(MaxPool, MatchesWindowScanOracle) {
    Rng rng(9);
    for (Padding p : {Padding::same, Padding::valid}) {
        const MaxPool2D pool(3, 2, p);
        const auto x = rng_uniform<double>(rng, {2, 6, 6}, -1, 1);
        const auto got = pool.forward(x).output;
        const auto want = scin::testing::naive_maxpool(x, pool.geometry(6, 6));
        EXPECT_EQ(got, want);
    }
}

TEST(MaxPool, FiniteDifferences) {
    Rng rng(10);
    const MaxPool2D pool;
    auto x = rng_uniform<double>(rng, {3, 8, 8}, -1, 1);
    const auto fwd = pool.forward(x);
    const auto r = rng_uniform<double>(rng, fwd.output.shape(), -1, 1);
    const auto g = pool.backward(x.shape(), fwd.argmax, r);
    const auto res = check_gradient(x, g, [&] { return dot(pool.forward(x).output, r); }, 150, rng);
    EXPECT_LE(res.max_rel_error, 1e-4);
}

TEST(Dense, IdentityAndZeroInput) {
    TensorD w({3, 3}, 0.0);
    for (std::size_t i = 0; i < 3; ++i) w.at({i, i}) = 1.0;
    const Dense<double> id(w, TensorD({3}, 0.0));
    const TensorD x({3}, std::vector<double>{1, -2, 3});
    EXPECT_EQ(id.forward(x), x);

    const TensorD b({2}, std::vector<double>{0.5, -0.5});
    const Dense<double> fc(TensorD({2, 3}, 0.7), b);
    EXPECT_EQ(fc.forward(TensorD({3}, 0.0)), b);
    EXPECT_EQ(kind_of([&] { fc.forward(TensorD({4}, 0.0)); }), ErrorKind::shape_mismatch);
}

TEST(Dense, FiniteDifferences) {
    Rng rng(11);
    Dense<double> fc(rng_uniform<double>(rng, {12, 20}, -1, 1), rng_uniform<double>(rng, {12}, -1, 1));
    auto x = rng_uniform<double>(rng, {5, 20}, -1, 1);
    const auto r = rng_uniform<double>(rng, {5, 12}, -1, 1);
    const auto g = fc.backward(x, r);
    auto loss = [&] { return dot(fc.forward(x), r); };
    auto res = check_gradient(x, g.input, loss, 100, rng);
    res = scin::testing::merge(res, check_gradient(fc.weights(), g.weights, loss, 100, rng));
    res = scin::testing::merge(res, check_gradient(fc.bias(), g.bias, loss, 100, rng));
    EXPECT_LE(res.max_rel_error, 1e-4);
}

TEST(Dropout, KeepOneAndInferenceAreIdentity) {
    Rng rng(12);
    const auto x = rng_uniform<double>(rng, {50}, -1, 1);
    const Dropout keep_all(1.0);
    EXPECT_EQ(keep_all.forward(x, true, rng).output, x);
    EXPECT_EQ(keep_all.forward(x, false, rng).output, x);
    const Dropout half(0.3);
    const auto inf = half.forward(x, false, rng);
    EXPECT_EQ(inf.output, x);
    EXPECT_TRUE(inf.mask.empty());
}

TEST(Dropout, InvertedExpectation) {
    Rng rng(13);
    const Dropout d(0.5);
    const auto out = d.forward(TensorD({100000}, 1.0), true, rng);
    double s = 0.0;
    for (double v : out.output.data()) {
        ASSERT_TRUE(v == 0.0 || v == 2.0);
        s += v;
    }
    EXPECT_NEAR(s / 100000, 1.0, 0.02);
}

TEST(Dropout, KeepValidated) {
    EXPECT_EQ(kind_of([] { Dropout(0.0); }), ErrorKind::invalid_hyperparameter);
    EXPECT_EQ(kind_of([] { Dropout(1.5); }), ErrorKind::invalid_hyperparameter);
}

TEST(Dropout, FiniteDifferencesWithFixedMask) {
    Rng rng(14);
    const Dropout d(0.6);
    auto x = rng_uniform<double>(rng, {200}, -1, 1);
    const auto mask = d.sample_mask<double>(x.shape(), rng);
    const auto r = rng_uniform<double>(rng, x.shape(), -1, 1);
    const auto g = d.backward(mask, r);
    auto loss = [&] {
        double s = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * mask[i] * r[i];
        return s;
    };
    const auto res = check_gradient(x, g, loss, 200, rng);
    EXPECT_EQ(res.checked, 200u);
    EXPECT_LE(res.max_rel_error, 1e-4);
}

TEST(Softmax, UniformLogits) {
    const auto r = softmax_cross_entropy(TensorD({3}, 0.7), std::size_t{1});
    for (double p : r.probs.data()) EXPECT_NEAR(p, 1.0 / 3, 1e-12);
    EXPECT_NEAR(r.loss, std::log(3.0), 1e-12);
}

TEST(Softmax, ExtremeLogitsStayFinite) {
    const auto r = softmax_cross_entropy(TensorD({2}, std::vector<double>{1000, 0}), std::size_t{0});
    EXPECT_NEAR(r.probs[0], 1.0, 1e-12);
    EXPECT_NEAR(r.probs[1], 0.0, 1e-12);
    EXPECT_TRUE(std::isfinite(r.loss));
    const auto wrong = softmax_cross_entropy(TensorD({2}, std::vector<double>{1000, 0}), std::size_t{1});
    EXPECT_NEAR(wrong.loss, 1000.0, 1e-9);
}

TEST(Softmax, ProbabilitiesAndGradientSums) {
    Rng rng(15);
    for (int trial = 0; trial < 20; ++trial) {
        const auto logits = rng_uniform<double>(rng, {4, 5}, -10, 10);
        const std::vector<std::size_t> labels{0, 4, 2, 2};
        const auto r = softmax_cross_entropy(logits, std::span<const std::size_t>(labels));
        for (std::size_t b = 0; b < 4; ++b) {
            double p = 0.0, g = 0.0;
            for (std::size_t c = 0; c < 5; ++c) {
                EXPECT_GE(r.probs[b * 5 + c], 0.0);
                p += r.probs[b * 5 + c];
                g += r.grad_logits[b * 5 + c];
            }
            EXPECT_NEAR(p, 1.0, 1e-6);
            EXPECT_NEAR(g, 0.0, 1e-12);
        }
    }
}

TEST(Softmax, LabelOutOfRange) {
    EXPECT_EQ(kind_of([] { softmax_cross_entropy(TensorD({3}, 0.0), std::size_t{3}); }), ErrorKind::invalid_label);
}

TEST(Softmax, FiniteDifferences) {
    Rng rng(16);
    auto logits = rng_uniform<double>(rng, {25, 6}, -3, 3);
    std::vector<std::size_t> labels(25);
    for (auto& l : labels) l = rng.below(6);
    const auto r = softmax_cross_entropy(logits, std::span<const std::size_t>(labels));
    auto loss = [&] { return softmax_cross_entropy(logits, std::span<const std::size_t>(labels)).loss; };
    const auto res = check_gradient(logits, r.grad_logits, loss, 150, rng);
    EXPECT_EQ(res.checked, 150u);
    EXPECT_LE(res.max_rel_error, 1e-4);
}
