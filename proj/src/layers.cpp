#include "scin/layers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Core>

namespace scin {

namespace {

template <typename T>
using MatR = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;
template <typename T>
using RowVec = Eigen::Matrix<T, 1, Eigen::Dynamic>;

struct ImageBatch {
    std::size_t batch, channels, height, width;
    bool batched;
};

ImageBatch image_batch(const Shape& s, const char* who) {
    if (s.size() == 3) return {1, s[0], s[1], s[2], false};
    if (s.size() == 4) return {s[0], s[1], s[2], s[3], true};
    fail(ErrorKind::shape_mismatch, std::string(who) + " expects [C,H,W] or [B,C,H,W], got " +
                                        shape_to_string(s));
}

Shape image_shape(const ImageBatch& b, std::size_t c, std::size_t h, std::size_t w) {
    return b.batched ? Shape{b.batch, c, h, w} : Shape{c, h, w};
}

struct VectorBatch {
    std::size_t batch, dim;
    bool batched;
};

VectorBatch vector_batch(const Shape& s, const char* who) {
    if (s.size() == 1) return {1, s[0], false};
    if (s.size() == 2) return {s[0], s[1], true};
    fail(ErrorKind::shape_mismatch, std::string(who) + " expects [D] or [B,D], got " + shape_to_string(s));
}

// Unfolds one [C,H,W] sample into a [C*k*k, out_h*out_w] column matrix.
template <typename T>
void im2col(const T* image, std::size_t channels, const WindowGeometry& g, T* cols) {
    const std::size_t k = g.window;
    const std::size_t plane = g.out_h * g.out_w;
    for (std::size_t c = 0; c < channels; ++c) {
        const T* src = image + c * g.in_h * g.in_w;
        for (std::size_t m = 0; m < k; ++m) {
            for (std::size_t n = 0; n < k; ++n) {
                T* row = cols + ((c * k + m) * k + n) * plane;
                for (std::size_t i = 0; i < g.out_h; ++i) {
                    const auto y = static_cast<std::ptrdiff_t>(i * g.stride + m) -
                                   static_cast<std::ptrdiff_t>(g.pad_top);
                    T* dst = row + i * g.out_w;
                    if (y < 0 || y >= static_cast<std::ptrdiff_t>(g.in_h)) {
                        std::fill(dst, dst + g.out_w, T{0});
                        continue;
                    }
                    const T* line = src + static_cast<std::size_t>(y) * g.in_w;
                    for (std::size_t j = 0; j < g.out_w; ++j) {
                        const auto x = static_cast<std::ptrdiff_t>(j * g.stride + n) -
                                       static_cast<std::ptrdiff_t>(g.pad_left);
                        dst[j] = (x < 0 || x >= static_cast<std::ptrdiff_t>(g.in_w))
                                     ? T{0}
                                     : line[static_cast<std::size_t>(x)];
                    }
                }
            }
        }
    }
}

// Adjoint of im2col: scatters columns back onto the image, accumulating.
template <typename T>
void col2im(const T* cols, std::size_t channels, const WindowGeometry& g, T* image) {
    const std::size_t k = g.window;
    const std::size_t plane = g.out_h * g.out_w;
    for (std::size_t c = 0; c < channels; ++c) {
        T* dst = image + c * g.in_h * g.in_w;
        for (std::size_t m = 0; m < k; ++m) {
            for (std::size_t n = 0; n < k; ++n) {
                const T* row = cols + ((c * k + m) * k + n) * plane;
                for (std::size_t i = 0; i < g.out_h; ++i) {
                    const auto y = static_cast<std::ptrdiff_t>(i * g.stride + m) -
                                   static_cast<std::ptrdiff_t>(g.pad_top);
                    if (y < 0 || y >= static_cast<std::ptrdiff_t>(g.in_h)) continue;
                    T* line = dst + static_cast<std::size_t>(y) * g.in_w;
                    const T* src = row + i * g.out_w;
                    for (std::size_t j = 0; j < g.out_w; ++j) {
                        const auto x = static_cast<std::ptrdiff_t>(j * g.stride + n) -
                                       static_cast<std::ptrdiff_t>(g.pad_left);
                        if (x < 0 || x >= static_cast<std::ptrdiff_t>(g.in_w)) continue;
                        line[static_cast<std::size_t>(x)] += src[j];
                    }
                }
            }
        }
    }
}

}  // namespace

std::string_view to_string(Padding p) noexcept {
    return p == Padding::same ? "same" : "valid";
}

Padding padding_from_string(std::string_view s) {
    if (s == "same") return Padding::same;
    if (s == "valid") return Padding::valid;
    fail(ErrorKind::config, "unknown padding mode '" + std::string(s) + "'");
}

WindowGeometry WindowGeometry::make(std::size_t in_h, std::size_t in_w, std::size_t window,
                                    std::size_t stride, Padding padding) {
    if (stride == 0) fail(ErrorKind::config, "stride must be >= 1");
    WindowGeometry g;
    g.in_h = in_h;
    g.in_w = in_w;
    g.window = window;
    g.stride = stride;
    if (padding == Padding::valid) {
        if (in_h < window || in_w < window) {
            fail(ErrorKind::shape_mismatch, "input " + std::to_string(in_h) + "x" + std::to_string(in_w) +
                                                " smaller than window in valid mode");
        }
        g.out_h = (in_h - window) / stride + 1;
        g.out_w = (in_w - window) / stride + 1;
        return g;
    }
    g.out_h = (in_h + stride - 1) / stride;
    g.out_w = (in_w + stride - 1) / stride;
    const auto total = [&](std::size_t out, std::size_t in) {
        const std::size_t span = (out - 1) * stride + window;
        return span > in ? span - in : 0;
    };
    g.pad_top = total(g.out_h, in_h) / 2;
    g.pad_left = total(g.out_w, in_w) / 2;
    return g;
}

// ---------------------------------------------------------------- Conv2D

template <typename T>
Conv2D<T>::Conv2D(std::size_t in_channels, std::size_t out_channels, std::size_t stride,
                  Padding padding, std::size_t kernel_size)
    : kernels_({out_channels, in_channels, kernel_size, kernel_size}),
      bias_({out_channels}),
      stride_(stride),
      padding_(padding) {
    if (stride == 0) fail(ErrorKind::config, "stride must be >= 1");
}

template <typename T>
Conv2D<T>::Conv2D(BasicTensor<T> kernels, BasicTensor<T> bias, std::size_t stride, Padding padding)
    : kernels_(std::move(kernels)), bias_(std::move(bias)), stride_(stride), padding_(padding) {
    if (kernels_.rank() != 4 || kernels_.dim(2) != kernels_.dim(3)) {
        fail(ErrorKind::shape_mismatch, "kernels must be [F,C,k,k], got " + shape_to_string(kernels_.shape()));
    }
    if (bias_.shape() != Shape{kernels_.dim(0)}) {
        fail(ErrorKind::shape_mismatch, "bias must be [F], got " + shape_to_string(bias_.shape()));
    }
    if (stride == 0) fail(ErrorKind::config, "stride must be >= 1");
}

template <typename T>
WindowGeometry Conv2D<T>::geometry(std::size_t in_h, std::size_t in_w) const {
    return WindowGeometry::make(in_h, in_w, kernel_size(), stride_, padding_);
}

template <typename T>
Shape Conv2D<T>::output_shape(const Shape& input) const {
    const ImageBatch b = image_batch(input, "conv");
    if (b.channels != in_channels()) {
        fail(ErrorKind::shape_mismatch, "conv expects " + std::to_string(in_channels()) +
                                            " input channels, got " + std::to_string(b.channels));
    }
    const WindowGeometry g = geometry(b.height, b.width);
    return image_shape(b, out_channels(), g.out_h, g.out_w);
}

template <typename T>
BasicTensor<T> Conv2D<T>::forward(const BasicTensor<T>& input) const {
    const ImageBatch b = image_batch(input.shape(), "conv");
    BasicTensor<T> out(output_shape(input.shape()));
    const WindowGeometry g = geometry(b.height, b.width);
    const std::size_t filters = out_channels();
    const std::size_t ck = b.channels * g.window * g.window;
    const std::size_t plane = g.out_h * g.out_w;

    AlignedVector<T> cols(ck * plane);
    Eigen::Map<const MatR<T>> kmat(kernels_.raw(), static_cast<Eigen::Index>(filters),
                                   static_cast<Eigen::Index>(ck));
    Eigen::Map<const Vec<T>> bvec(bias_.raw(), static_cast<Eigen::Index>(filters));
    for (std::size_t s = 0; s < b.batch; ++s) {
        im2col(input.raw() + s * b.channels * b.height * b.width, b.channels, g, cols.data());
        Eigen::Map<const MatR<T>> cmat(cols.data(), static_cast<Eigen::Index>(ck),
                                       static_cast<Eigen::Index>(plane));
        Eigen::Map<MatR<T>> omat(out.raw() + s * filters * plane, static_cast<Eigen::Index>(filters),
                                 static_cast<Eigen::Index>(plane));
        omat.noalias() = kmat * cmat;
        omat.colwise() += bvec;
    }
    return out;
}

template <typename T>
ConvGrads<T> Conv2D<T>::backward(const BasicTensor<T>& input, const BasicTensor<T>& grad_out,
                                 bool want_input_grad) const {
    const ImageBatch b = image_batch(input.shape(), "conv");
    if (grad_out.shape() != output_shape(input.shape())) {
        fail(ErrorKind::shape_mismatch, "conv grad_out shape " + shape_to_string(grad_out.shape()) +
                                            " != output shape " +
                                            shape_to_string(output_shape(input.shape())));
    }
    const WindowGeometry g = geometry(b.height, b.width);
    const std::size_t filters = out_channels();
    const std::size_t ck = b.channels * g.window * g.window;
    const std::size_t plane = g.out_h * g.out_w;
    const std::size_t image = b.channels * b.height * b.width;

    ConvGrads<T> grads{{}, BasicTensor<T>(kernels_.shape()), BasicTensor<T>(bias_.shape())};
    if (want_input_grad) grads.input = BasicTensor<T>(input.shape());

    AlignedVector<T> cols(ck * plane);
    AlignedVector<T> grad_cols(want_input_grad ? ck * plane : 0);
    Eigen::Map<const MatR<T>> kmat(kernels_.raw(), static_cast<Eigen::Index>(filters),
                                   static_cast<Eigen::Index>(ck));
    Eigen::Map<MatR<T>> gk(grads.kernels.raw(), static_cast<Eigen::Index>(filters),
                           static_cast<Eigen::Index>(ck));
    Eigen::Map<Vec<T>> gb(grads.bias.raw(), static_cast<Eigen::Index>(filters));
    for (std::size_t s = 0; s < b.batch; ++s) {
        Eigen::Map<const MatR<T>> gmat(grad_out.raw() + s * filters * plane,
                                       static_cast<Eigen::Index>(filters), static_cast<Eigen::Index>(plane));
        im2col(input.raw() + s * image, b.channels, g, cols.data());
        Eigen::Map<const MatR<T>> cmat(cols.data(), static_cast<Eigen::Index>(ck),
                                       static_cast<Eigen::Index>(plane));
        gk.noalias() += gmat * cmat.transpose();
        gb += gmat.rowwise().sum();
        if (want_input_grad) {
            Eigen::Map<MatR<T>> gc(grad_cols.data(), static_cast<Eigen::Index>(ck),
                                   static_cast<Eigen::Index>(plane));
            gc.noalias() = kmat.transpose() * gmat;
            col2im(grad_cols.data(), b.channels, g, grads.input.raw() + s * image);
        }
    }
    return grads;
}

// ------------------------------------------------------------ Activation

std::string_view to_string(ActivationKind k) noexcept {
    return k == ActivationKind::relu ? "relu" : "leaky_relu";
}

ActivationKind activation_from_string(std::string_view s) {
    if (s == "relu") return ActivationKind::relu;
    if (s == "leaky_relu") return ActivationKind::leaky_relu;
    fail(ErrorKind::config, "unknown activation '" + std::string(s) + "'");
}

Activation::Activation(ActivationKind kind_, double alpha_) : kind(kind_), alpha(alpha_) {
    if (!(alpha >= 0.0 && alpha < 1.0)) {
        fail(ErrorKind::invalid_hyperparameter, "activation alpha must lie in [0, 1)");
    }
}

template <typename T>
BasicTensor<T> Activation::forward(const BasicTensor<T>& x) const {
    const T slope = static_cast<T>(negative_slope());
    BasicTensor<T> y(x.shape());
    const T* in = x.raw();
    T* out = y.raw();
    for (std::size_t k = 0; k < x.size(); ++k) out[k] = in[k] >= T{0} ? in[k] : slope * in[k];
    return y;
}

template <typename T>
BasicTensor<T> Activation::backward(const BasicTensor<T>& x, const BasicTensor<T>& grad_out) const {
    if (x.shape() != grad_out.shape()) fail(ErrorKind::shape_mismatch, "activation grad shape mismatch");
    const T slope = static_cast<T>(negative_slope());
    BasicTensor<T> g(x.shape());
    const T* in = x.raw();
    const T* go = grad_out.raw();
    T* out = g.raw();
    for (std::size_t k = 0; k < x.size(); ++k) out[k] = in[k] >= T{0} ? go[k] : slope * go[k];
    return g;
}

// ------------------------------------------------------------- MaxPool2D

MaxPool2D::MaxPool2D(std::size_t window, std::size_t stride, Padding padding)
    : window_(window), stride_(stride), padding_(padding) {
    if (window == 0 || stride == 0) fail(ErrorKind::config, "pool window and stride must be >= 1");
}

WindowGeometry MaxPool2D::geometry(std::size_t in_h, std::size_t in_w) const {
    return WindowGeometry::make(in_h, in_w, window_, stride_, padding_);
}

Shape MaxPool2D::output_shape(const Shape& input) const {
    const ImageBatch b = image_batch(input, "maxpool");
    const WindowGeometry g = geometry(b.height, b.width);
    return image_shape(b, b.channels, g.out_h, g.out_w);
}

template <typename T>
PoolResult<T> MaxPool2D::forward(const BasicTensor<T>& input) const {
    const ImageBatch b = image_batch(input.shape(), "maxpool");
    const WindowGeometry g = geometry(b.height, b.width);
    PoolResult<T> r{BasicTensor<T>(image_shape(b, b.channels, g.out_h, g.out_w)), {}};
    r.argmax.resize(r.output.size());
    const T* in = input.raw();
    std::size_t o = 0;
    for (std::size_t plane = 0; plane < b.batch * b.channels; ++plane) {
        const std::size_t base = plane * g.in_h * g.in_w;
        for (std::size_t i = 0; i < g.out_h; ++i) {
            for (std::size_t j = 0; j < g.out_w; ++j, ++o) {
                T best = -std::numeric_limits<T>::infinity();
                std::size_t best_at = std::numeric_limits<std::size_t>::max();
                for (std::size_t m = 0; m < g.window; ++m) {
                    const auto y = static_cast<std::ptrdiff_t>(i * g.stride + m) -
                                   static_cast<std::ptrdiff_t>(g.pad_top);
                    if (y < 0 || y >= static_cast<std::ptrdiff_t>(g.in_h)) continue;
                    for (std::size_t n = 0; n < g.window; ++n) {
                        const auto x = static_cast<std::ptrdiff_t>(j * g.stride + n) -
                                       static_cast<std::ptrdiff_t>(g.pad_left);
                        if (x < 0 || x >= static_cast<std::ptrdiff_t>(g.in_w)) continue;
                        const std::size_t at = base + static_cast<std::size_t>(y) * g.in_w +
                                               static_cast<std::size_t>(x);
                        if (best_at == std::numeric_limits<std::size_t>::max() || in[at] > best) {
                            best = in[at];
                            best_at = at;
                        }
                    }
                }
                r.output[o] = best;
                r.argmax[o] = static_cast<std::uint32_t>(best_at);
            }
        }
    }
    return r;
}

template <typename T>
BasicTensor<T> MaxPool2D::backward(const Shape& input_shape, std::span<const std::uint32_t> argmax,
                                   const BasicTensor<T>& grad_out) const {
    if (grad_out.shape() != output_shape(input_shape) || argmax.size() != grad_out.size()) {
        fail(ErrorKind::shape_mismatch, "maxpool grad_out shape " + shape_to_string(grad_out.shape()) +
                                            " does not match forward output");
    }
    BasicTensor<T> g(input_shape);
    for (std::size_t o = 0; o < argmax.size(); ++o) g[argmax[o]] += grad_out[o];
    return g;
}

// ----------------------------------------------------------------- Dense

template <typename T>
Dense<T>::Dense(std::size_t in_dim, std::size_t out_dim) : weights_({out_dim, in_dim}), bias_({out_dim}) {}

template <typename T>
Dense<T>::Dense(BasicTensor<T> weights, BasicTensor<T> bias)
    : weights_(std::move(weights)), bias_(std::move(bias)) {
    if (weights_.rank() != 2 || bias_.shape() != Shape{weights_.dim(0)}) {
        fail(ErrorKind::shape_mismatch, "dense expects weights [out,in] and bias [out]");
    }
}

template <typename T>
BasicTensor<T> Dense<T>::forward(const BasicTensor<T>& x) const {
    const VectorBatch v = vector_batch(x.shape(), "dense");
    if (v.dim != in_dim()) {
        fail(ErrorKind::shape_mismatch, "dense expects input length " + std::to_string(in_dim()) + ", got " +
                                            std::to_string(v.dim));
    }
    BasicTensor<T> y(v.batched ? Shape{v.batch, out_dim()} : Shape{out_dim()});
    const auto rows = static_cast<Eigen::Index>(v.batch);
    Eigen::Map<const MatR<T>> xm(x.raw(), rows, static_cast<Eigen::Index>(in_dim()));
    Eigen::Map<const MatR<T>> wm(weights_.raw(), static_cast<Eigen::Index>(out_dim()),
                                 static_cast<Eigen::Index>(in_dim()));
    Eigen::Map<const RowVec<T>> bm(bias_.raw(), static_cast<Eigen::Index>(out_dim()));
    Eigen::Map<MatR<T>> ym(y.raw(), rows, static_cast<Eigen::Index>(out_dim()));
    ym.noalias() = xm * wm.transpose();
    ym.rowwise() += bm;
    return y;
}

template <typename T>
DenseGrads<T> Dense<T>::backward(const BasicTensor<T>& x, const BasicTensor<T>& grad_out) const {
    const VectorBatch v = vector_batch(x.shape(), "dense");
    const VectorBatch gv = vector_batch(grad_out.shape(), "dense");
    if (v.dim != in_dim() || gv.dim != out_dim() || gv.batch != v.batch) {
        fail(ErrorKind::shape_mismatch, "dense backward shape mismatch");
    }
    DenseGrads<T> g{BasicTensor<T>(x.shape()), BasicTensor<T>(weights_.shape()), BasicTensor<T>(bias_.shape())};
    const auto rows = static_cast<Eigen::Index>(v.batch);
    const auto in = static_cast<Eigen::Index>(in_dim());
    const auto out = static_cast<Eigen::Index>(out_dim());
    Eigen::Map<const MatR<T>> xm(x.raw(), rows, in);
    Eigen::Map<const MatR<T>> gm(grad_out.raw(), rows, out);
    Eigen::Map<const MatR<T>> wm(weights_.raw(), out, in);
    Eigen::Map<MatR<T>>(g.weights.raw(), out, in).noalias() = gm.transpose() * xm;
    Eigen::Map<RowVec<T>>(g.bias.raw(), out) = gm.colwise().sum();
    Eigen::Map<MatR<T>>(g.input.raw(), rows, in).noalias() = gm * wm;
    return g;
}

// --------------------------------------------------------------- Dropout

Dropout::Dropout(double keep_prob) : keep_prob_(keep_prob) {
    if (!(keep_prob > 0.0 && keep_prob <= 1.0)) {
        fail(ErrorKind::invalid_hyperparameter,
             "dropout keep probability must lie in (0, 1], got " + std::to_string(keep_prob));
    }
}

template <typename T>
BasicTensor<T> Dropout::sample_mask(const Shape& shape, Rng& rng) const {
    BasicTensor<T> mask(shape);
    const T scale = static_cast<T>(1.0 / keep_prob_);
    for (auto& m : mask.data()) m = rng.uniform() < keep_prob_ ? scale : T{0};
    return mask;
}

template <typename T>
DropoutResult<T> Dropout::forward(const BasicTensor<T>& x, bool training, Rng& rng) const {
    if (!training) return {x, {}};
    DropoutResult<T> r{x, sample_mask<T>(x.shape(), rng)};
    for (std::size_t k = 0; k < x.size(); ++k) r.output[k] *= r.mask[k];
    return r;
}

template <typename T>
BasicTensor<T> Dropout::backward(const BasicTensor<T>& mask, const BasicTensor<T>& grad_out) const {
    if (mask.empty()) return grad_out;
    if (mask.shape() != grad_out.shape()) fail(ErrorKind::shape_mismatch, "dropout mask shape mismatch");
    BasicTensor<T> g = grad_out;
    for (std::size_t k = 0; k < g.size(); ++k) g[k] *= mask[k];
    return g;
}

// --------------------------------------------------------------- Softmax

template <typename T>
BasicTensor<T> softmax(const BasicTensor<T>& logits) {
    const VectorBatch v = vector_batch(logits.shape(), "softmax");
    BasicTensor<T> probs(logits.shape());
    for (std::size_t b = 0; b < v.batch; ++b) {
        const T* z = logits.raw() + b * v.dim;
        T* p = probs.raw() + b * v.dim;
        const T zmax = *std::max_element(z, z + v.dim);
        T sum = 0;
        for (std::size_t i = 0; i < v.dim; ++i) {
            p[i] = std::exp(z[i] - zmax);
            sum += p[i];
        }
        for (std::size_t i = 0; i < v.dim; ++i) p[i] /= sum;
    }
    return probs;
}

template <typename T>
SoftmaxResult<T> softmax_cross_entropy(const BasicTensor<T>& logits, std::span<const std::size_t> labels) {
    const VectorBatch v = vector_batch(logits.shape(), "softmax_cross_entropy");
    if (labels.size() != v.batch) {
        fail(ErrorKind::shape_mismatch, "expected " + std::to_string(v.batch) + " labels, got " +
                                            std::to_string(labels.size()));
    }
    SoftmaxResult<T> r{BasicTensor<T>(logits.shape()), 0.0, BasicTensor<T>(logits.shape())};
    const T inv_batch = T{1} / static_cast<T>(v.batch);
    double total = 0.0;
    for (std::size_t b = 0; b < v.batch; ++b) {
        const std::size_t label = labels[b];
        if (label >= v.dim) {
            fail(ErrorKind::invalid_label, "label " + std::to_string(label) + " out of range for " +
                                               std::to_string(v.dim) + " classes");
        }
        const T* z = logits.raw() + b * v.dim;
        T* p = r.probs.raw() + b * v.dim;
        T* g = r.grad_logits.raw() + b * v.dim;
        const T zmax = *std::max_element(z, z + v.dim);
        T sum = 0;
        for (std::size_t i = 0; i < v.dim; ++i) {
            p[i] = std::exp(z[i] - zmax);
            sum += p[i];
        }
        for (std::size_t i = 0; i < v.dim; ++i) p[i] /= sum;
        // -log p[label] evaluated as log-sum-exp so extreme logits stay finite.
        total += static_cast<double>(std::log(sum) - (z[label] - zmax));
        for (std::size_t i = 0; i < v.dim; ++i) g[i] = (p[i] - (i == label ? T{1} : T{0})) * inv_batch;
    }
    r.loss = total / static_cast<double>(v.batch);
    return r;
}

#define SCIN_INSTANTIATE_LAYERS(T)                                                                  \
    template class Conv2D<T>;                                                                       \
    template class Dense<T>;                                                                        \
    template BasicTensor<T> Activation::forward<T>(const BasicTensor<T>&) const;                    \
    template BasicTensor<T> Activation::backward<T>(const BasicTensor<T>&, const BasicTensor<T>&)   \
        const;                                                                                      \
    template PoolResult<T> MaxPool2D::forward<T>(const BasicTensor<T>&) const;                      \
    template BasicTensor<T> MaxPool2D::backward<T>(const Shape&, std::span<const std::uint32_t>,    \
                                                   const BasicTensor<T>&) const;                    \
    template BasicTensor<T> Dropout::sample_mask<T>(const Shape&, Rng&) const;                      \
    template DropoutResult<T> Dropout::forward<T>(const BasicTensor<T>&, bool, Rng&) const;         \
    template BasicTensor<T> Dropout::backward<T>(const BasicTensor<T>&, const BasicTensor<T>&)      \
        const;                                                                                      \
    template BasicTensor<T> softmax<T>(const BasicTensor<T>&);                                      \
    template SoftmaxResult<T> softmax_cross_entropy<T>(const BasicTensor<T>&,                       \
                                                       std::span<const std::size_t>);

SCIN_INSTANTIATE_LAYERS(float)
SCIN_INSTANTIATE_LAYERS(double)

#undef SCIN_INSTANTIATE_LAYERS

}  // namespace scin
