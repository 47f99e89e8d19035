#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "scin/rng.hpp"
#include "scin/tensor.hpp"

namespace scin {

// Layers are stateless with respect to a forward pass: anything the backward
// pass needs (pool argmax, dropout mask) is returned to the caller, which owns
// it per worker. Inputs are either a single sample ([C,H,W] / [D]) or a batch
// with a leading batch axis ([B,C,H,W] / [B,D]); outputs keep the input rank.

enum class Padding {
    same,   // output spatial size ceil(in / stride)
    valid,  // no padding, output (in - k) / stride + 1
};

std::string_view to_string(Padding p) noexcept;
Padding padding_from_string(std::string_view s);

/// Spatial bookkeeping shared by convolution and pooling.
struct WindowGeometry {
    std::size_t in_h = 0, in_w = 0;
    std::size_t out_h = 0, out_w = 0;
    std::size_t window = 3;
    std::size_t stride = 1;
    std::size_t pad_top = 0, pad_left = 0;

    /// Same padding splits the total pad as (total / 2) before, the rest after.
    static WindowGeometry make(std::size_t in_h, std::size_t in_w, std::size_t window,
                               std::size_t stride, Padding padding);
};

template <typename T>
struct ConvGrads {
    BasicTensor<T> input;  // left empty when not requested
    BasicTensor<T> kernels;
    BasicTensor<T> bias;
};

/// 3x3 (by default) convolution with F output maps.
///
/// Computes cross-correlation, out[f,i,j] = b[f] + sum_{c,m,n} x[c, i*s+m-pt, j*s+n-pl] * k[f,c,m,n].
/// A true convolution is the same operator with the kernel rotated by 180
/// degrees; since kernels are learned the two are interchangeable.
template <typename T>
class Conv2D {
public:
    Conv2D() = default;
    Conv2D(std::size_t in_channels, std::size_t out_channels, std::size_t stride = 2,
           Padding padding = Padding::same, std::size_t kernel_size = 3);
    Conv2D(BasicTensor<T> kernels, BasicTensor<T> bias, std::size_t stride, Padding padding);

    std::size_t in_channels() const { return kernels_.dim(1); }
    std::size_t out_channels() const { return kernels_.dim(0); }
    std::size_t kernel_size() const { return kernels_.dim(2); }
    std::size_t stride() const noexcept { return stride_; }
    Padding padding() const noexcept { return padding_; }

    BasicTensor<T>& kernels() noexcept { return kernels_; }
    const BasicTensor<T>& kernels() const noexcept { return kernels_; }
    BasicTensor<T>& bias() noexcept { return bias_; }
    const BasicTensor<T>& bias() const noexcept { return bias_; }

    WindowGeometry geometry(std::size_t in_h, std::size_t in_w) const;
    Shape output_shape(const Shape& input) const;

    BasicTensor<T> forward(const BasicTensor<T>& input) const;
    ConvGrads<T> backward(const BasicTensor<T>& input, const BasicTensor<T>& grad_out,
                          bool want_input_grad = true) const;

private:
    BasicTensor<T> kernels_;  // [F, C, k, k]
    BasicTensor<T> bias_;     // [F]
    std::size_t stride_ = 1;
    Padding padding_ = Padding::same;
};

enum class ActivationKind { relu, leaky_relu };

std::string_view to_string(ActivationKind k) noexcept;
ActivationKind activation_from_string(std::string_view s);

/// f(x) = x for x >= 0, alpha * x otherwise (alpha forced to 0 for plain ReLU).
/// The derivative at exactly 0 takes the x >= 0 branch.
struct Activation {
    ActivationKind kind = ActivationKind::leaky_relu;
    double alpha = 0.01;

    Activation() = default;
    Activation(ActivationKind kind, double alpha = 0.01);

    double negative_slope() const noexcept { return kind == ActivationKind::relu ? 0.0 : alpha; }

    template <typename T>
    BasicTensor<T> forward(const BasicTensor<T>& x) const;
    template <typename T>
    BasicTensor<T> backward(const BasicTensor<T>& x, const BasicTensor<T>& grad_out) const;

    bool operator==(const Activation&) const = default;
};

template <typename T>
struct PoolResult {
    BasicTensor<T> output;
    std::vector<std::uint32_t> argmax;  // linear input offset of each output's winner
};

/// Max pooling over window x window regions. Padded positions never win; ties
/// go to the first position in row-major scan order.
class MaxPool2D {
public:
    MaxPool2D(std::size_t window = 3, std::size_t stride = 2, Padding padding = Padding::same);

    std::size_t window() const noexcept { return window_; }
    std::size_t stride() const noexcept { return stride_; }
    Padding padding() const noexcept { return padding_; }

    WindowGeometry geometry(std::size_t in_h, std::size_t in_w) const;
    Shape output_shape(const Shape& input) const;

    template <typename T>
    PoolResult<T> forward(const BasicTensor<T>& input) const;
    template <typename T>
    BasicTensor<T> backward(const Shape& input_shape, std::span<const std::uint32_t> argmax,
                            const BasicTensor<T>& grad_out) const;

private:
    std::size_t window_;
    std::size_t stride_;
    Padding padding_;
};

template <typename T>
struct DenseGrads {
    BasicTensor<T> input;
    BasicTensor<T> weights;
    BasicTensor<T> bias;
};

/// y = W x + b.
template <typename T>
class Dense {
public:
    Dense() = default;
    Dense(std::size_t in_dim, std::size_t out_dim);
    Dense(BasicTensor<T> weights, BasicTensor<T> bias);

    std::size_t in_dim() const { return weights_.dim(1); }
    std::size_t out_dim() const { return weights_.dim(0); }

    BasicTensor<T>& weights() noexcept { return weights_; }
    const BasicTensor<T>& weights() const noexcept { return weights_; }
    BasicTensor<T>& bias() noexcept { return bias_; }
    const BasicTensor<T>& bias() const noexcept { return bias_; }

    BasicTensor<T> forward(const BasicTensor<T>& x) const;
    DenseGrads<T> backward(const BasicTensor<T>& x, const BasicTensor<T>& grad_out) const;

private:
    BasicTensor<T> weights_;  // [out, in]
    BasicTensor<T> bias_;     // [out]
};

template <typename T>
struct DropoutResult {
    BasicTensor<T> output;
    BasicTensor<T> mask;  // empty in inference mode
};

/// Inverted dropout: during training each element survives with probability
/// keep_prob and is scaled by 1/keep_prob, so inference is the identity.
class Dropout {
public:
    explicit Dropout(double keep_prob = 0.5);

    double keep_prob() const noexcept { return keep_prob_; }

    template <typename T>
    DropoutResult<T> forward(const BasicTensor<T>& x, bool training, Rng& rng) const;
    template <typename T>
    BasicTensor<T> backward(const BasicTensor<T>& mask, const BasicTensor<T>& grad_out) const;

    /// Draws a fresh mask with the same shape as `like`.
    template <typename T>
    BasicTensor<T> sample_mask(const Shape& shape, Rng& rng) const;

private:
    double keep_prob_;
};

template <typename T>
struct SoftmaxResult {
    BasicTensor<T> probs;
    double loss = 0.0;        // mean over the batch
    BasicTensor<T> grad_logits;  // gradient of the mean loss
};

template <typename T>
BasicTensor<T> softmax(const BasicTensor<T>& logits);

/// Softmax followed by cross-entropy. Logits are [N] with one label or [B,N]
/// with B labels.
template <typename T>
SoftmaxResult<T> softmax_cross_entropy(const BasicTensor<T>& logits,
                                       std::span<const std::size_t> labels);

template <typename T>
SoftmaxResult<T> softmax_cross_entropy(const BasicTensor<T>& logits, std::size_t label) {
    return softmax_cross_entropy(logits, std::span<const std::size_t>(&label, 1));
}

}  // namespace scin
