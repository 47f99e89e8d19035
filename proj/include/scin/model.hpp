#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "scin/layers.hpp"
#include "scin/rng.hpp"
#include "scin/tensor.hpp"

namespace scin {

/// Declarative description of the classifier.
///
/// Layer order: conv_1 -> act -> ... -> conv_D -> act -> maxpool -> flatten
/// -> fc_1 -> act -> dropout -> fc_2 -> act -> dropout -> fc_out -> softmax.
///
/// Filter counts, pooling stride and the activation slope are free
/// parameters; defaults are [32, 64], 2 and 0.01.
struct ArchitectureConfig {
    std::size_t input_channels = 3;
    std::size_t input_height = 32;
    std::size_t input_width = 32;

    std::size_t conv_depth = 2;
    std::vector<std::size_t> filters_per_conv{32, 64};
    std::size_t kernel_size = 3;
    std::size_t conv_stride = 2;
    Padding conv_padding = Padding::same;

    Activation activation{};

    std::size_t pool_window = 3;
    std::size_t pool_stride = 2;
    Padding pool_padding = Padding::same;

    std::vector<std::size_t> fc_sizes{256, 512};
    std::size_t num_classes = 3;
    double dropout_keep = 0.5;

    /// Filter counts used when only a depth is given: [32], [32,64], [32,32,64,64].
    static std::vector<std::size_t> default_filters(std::size_t depth);
    static ArchitectureConfig canonical(std::size_t num_classes, std::size_t depth = 2);

    /// Throws ErrorKind::config when fields are inconsistent.
    void validate() const;

    bool operator==(const ArchitectureConfig&) const = default;
};

nlohmann::json to_json(const ArchitectureConfig& cfg);
/// Missing keys fall back to `base`.
ArchitectureConfig architecture_from_json(const nlohmann::json& j, ArchitectureConfig base = {});

/// Per-layer spatial sizes of a built network, input first.
struct ShapeTrace {
    std::vector<std::size_t> conv_sizes;  // spatial side after each conv
    std::vector<std::size_t> conv_strides;
    std::size_t pooled = 0;
    std::size_t flatten = 0;
};

class Network {
public:
    /// All parameters zero; see build_network() for initialised networks.
    explicit Network(ArchitectureConfig cfg);

    const ArchitectureConfig& config() const noexcept { return cfg_; }
    std::size_t num_classes() const noexcept { return cfg_.num_classes; }

    const std::vector<Conv2D<float>>& convs() const noexcept { return convs_; }
    std::vector<Conv2D<float>>& convs() noexcept { return convs_; }
    const std::vector<Dense<float>>& fcs() const noexcept { return fcs_; }
    std::vector<Dense<float>>& fcs() noexcept { return fcs_; }
    const MaxPool2D& pool() const noexcept { return pool_; }
    const Activation& activation() const noexcept { return cfg_.activation; }
    const Dropout& dropout() const noexcept { return dropout_; }
    const ShapeTrace& trace() const noexcept { return trace_; }

    /// Per-channel input mean removed from patches before they reach the
    /// network; travels with checkpoints.
    const std::vector<float>& input_mean() const noexcept { return input_mean_; }
    void set_input_mean(std::vector<float> mean);

    /// Parameters in checkpoint order: conv kernels/bias per conv, then
    /// weights/bias per fully connected layer.
    std::vector<std::string> parameter_names() const;
    std::vector<Tensor*> parameters();
    std::vector<const Tensor*> parameters() const;
    std::size_t parameter_count() const;

    Shape input_shape() const { return {cfg_.input_channels, cfg_.input_height, cfg_.input_width}; }

private:
    ArchitectureConfig cfg_;
    std::vector<Conv2D<float>> convs_;
    MaxPool2D pool_;
    std::vector<Dense<float>> fcs_;
    Dropout dropout_;
    ShapeTrace trace_;
    std::vector<float> input_mean_;
};

/// Parameter count as a pure function of the configuration.
std::size_t parameter_count(const ArchitectureConfig& cfg);

/// He initialisation: weights ~ N(0, 2 / fan_in), biases zero. Draw order
/// follows parameter order.
Network build_network(const ArchitectureConfig& cfg, Rng& rng);

/// Intermediate activations retained for the backward pass.
struct ForwardCache {
    Tensor input;
    std::vector<Tensor> conv_pre;   // conv outputs before activation
    std::vector<Tensor> conv_post;  // after activation
    std::vector<std::uint32_t> pool_argmax;
    Shape pooled_shape;
    std::vector<Tensor> fc_in;      // input of each fully connected layer
    std::vector<Tensor> fc_pre;     // hidden fc outputs before activation
    std::vector<Tensor> masks;      // dropout masks, one per hidden fc
};

struct ForwardPass {
    Tensor logits;
    Tensor probs;
    ForwardCache cache;  // populated only when training
};

/// Runs a patch [C,H,W] or a batch [B,C,H,W]. Dropout draws from `rng` only
/// when training.
ForwardPass forward(const Network& net, const Tensor& input, bool training, Rng& rng);

/// Inference-mode class probabilities, no caches.
Tensor predict(const Network& net, const Tensor& input);

struct Gradients {
    double loss = 0.0;
    std::vector<Tensor> params;  // same order as Network::parameters()
};

/// Mean cross-entropy over the batch and its parameter gradients.
Gradients loss_and_gradients(const Network& net, const ForwardPass& pass,
                             std::span<const std::size_t> labels);

}  // namespace scin
