#include "scin/model.hpp"

#include <cmath>

namespace scin {

namespace {

std::size_t effective_stride(const ArchitectureConfig& cfg, std::size_t h, std::size_t w) {
    // Deep variants would otherwise collapse the map below 1x1: once the
    // spatial side is 4 or less, further convolutions keep it.
    return std::min(h, w) <= 4 ? 1 : cfg.conv_stride;
}

struct Plan {
    std::vector<std::size_t> strides;
    ShapeTrace trace;
};

Plan plan(const ArchitectureConfig& cfg) {
    Plan p;
    std::size_t h = cfg.input_height;
    std::size_t w = cfg.input_width;
    try {
        for (std::size_t i = 0; i < cfg.conv_depth; ++i) {
            const std::size_t s = effective_stride(cfg, h, w);
            const auto g = WindowGeometry::make(h, w, cfg.kernel_size, s, cfg.conv_padding);
            h = g.out_h;
            w = g.out_w;
            p.strides.push_back(s);
            p.trace.conv_strides.push_back(s);
            p.trace.conv_sizes.push_back(h);
        }
        const auto g = WindowGeometry::make(h, w, cfg.pool_window, cfg.pool_stride, cfg.pool_padding);
        p.trace.pooled = g.out_h;
        p.trace.flatten = cfg.filters_per_conv.back() * g.out_h * g.out_w;
    } catch (const Error& e) {
        fail(ErrorKind::config, std::string("incompatible shape chain: ") + e.what());
    }
    return p;
}

}  // namespace

std::vector<std::size_t> ArchitectureConfig::default_filters(std::size_t depth) {
    switch (depth) {
    case 1: return {32};
    case 2: return {32, 64};
    case 4: return {32, 32, 64, 64};
    default: {
        std::vector<std::size_t> f(depth, 32);
        for (std::size_t i = depth / 2; i < depth; ++i) f[i] = 64;
        return f;
    }
    }
}

ArchitectureConfig ArchitectureConfig::canonical(std::size_t num_classes, std::size_t depth) {
    ArchitectureConfig cfg;
    cfg.num_classes = num_classes;
    cfg.conv_depth = depth;
    cfg.filters_per_conv = default_filters(depth);
    return cfg;
}

void ArchitectureConfig::validate() const {
    auto require = [](bool ok, const std::string& what) {
        if (!ok) fail(ErrorKind::config, "invalid architecture: " + what);
    };
    require(input_channels >= 1 && input_height >= 1 && input_width >= 1, "input dimensions must be >= 1");
    require(conv_depth >= 1, "conv_depth must be >= 1");
    require(filters_per_conv.size() == conv_depth, "conv_depth (" + std::to_string(conv_depth) +
                                                       ") must equal length of filters_per_conv (" +
                                                       std::to_string(filters_per_conv.size()) + ")");
    for (std::size_t f : filters_per_conv) require(f >= 1, "filter counts must be >= 1");
    require(kernel_size >= 1, "kernel_size must be >= 1");
    require(conv_stride >= 1 && pool_stride >= 1 && pool_window >= 1, "strides and windows must be >= 1");
    for (std::size_t f : fc_sizes) require(f >= 1, "fc sizes must be >= 1");
    require(num_classes >= 1, "num_classes must be >= 1");
    if (!(activation.alpha >= 0.0 && activation.alpha < 1.0)) {
        fail(ErrorKind::invalid_hyperparameter, "activation alpha must lie in [0, 1)");
    }
    Dropout{dropout_keep};
    plan(*this);
}

nlohmann::json to_json(const ArchitectureConfig& cfg) {
    return {
        {"input", {{"channels", cfg.input_channels}, {"height", cfg.input_height}, {"width", cfg.input_width}}},
        {"conv_depth", cfg.conv_depth},
        {"filters_per_conv", cfg.filters_per_conv},
        {"kernel_size", cfg.kernel_size},
        {"conv_stride", cfg.conv_stride},
        {"conv_padding", std::string(to_string(cfg.conv_padding))},
        {"activation", {{"kind", std::string(to_string(cfg.activation.kind))}, {"alpha", cfg.activation.alpha}}},
        {"pool", {{"window", cfg.pool_window}, {"stride", cfg.pool_stride},
                  {"padding", std::string(to_string(cfg.pool_padding))}}},
        {"fc_sizes", cfg.fc_sizes},
        {"num_classes", cfg.num_classes},
        {"dropout_keep", cfg.dropout_keep},
    };
}

ArchitectureConfig architecture_from_json(const nlohmann::json& j, ArchitectureConfig cfg) {
    try {
        if (j.contains("input")) {
            const auto& in = j.at("input");
            cfg.input_channels = in.value("channels", cfg.input_channels);
            cfg.input_height = in.value("height", cfg.input_height);
            cfg.input_width = in.value("width", cfg.input_width);
        }
        if (j.contains("filters_per_conv")) {
            cfg.filters_per_conv = j.at("filters_per_conv").get<std::vector<std::size_t>>();
            cfg.conv_depth = cfg.filters_per_conv.size();
        }
        if (j.contains("conv_depth")) {
            cfg.conv_depth = j.at("conv_depth").get<std::size_t>();
            if (!j.contains("filters_per_conv")) cfg.filters_per_conv = ArchitectureConfig::default_filters(cfg.conv_depth);
        }
        cfg.kernel_size = j.value("kernel_size", cfg.kernel_size);
        cfg.conv_stride = j.value("conv_stride", cfg.conv_stride);
        if (j.contains("conv_padding")) cfg.conv_padding = padding_from_string(j.at("conv_padding").get<std::string>());
        if (j.contains("activation")) {
            const auto& a = j.at("activation");
            if (a.is_string()) {
                cfg.activation.kind = activation_from_string(a.get<std::string>());
            } else {
                if (a.contains("kind")) cfg.activation.kind = activation_from_string(a.at("kind").get<std::string>());
                cfg.activation.alpha = a.value("alpha", cfg.activation.alpha);
            }
        }
        if (j.contains("pool")) {
            const auto& p = j.at("pool");
            cfg.pool_window = p.value("window", cfg.pool_window);
            cfg.pool_stride = p.value("stride", cfg.pool_stride);
            if (p.contains("padding")) cfg.pool_padding = padding_from_string(p.at("padding").get<std::string>());
        }
        if (j.contains("fc_sizes")) cfg.fc_sizes = j.at("fc_sizes").get<std::vector<std::size_t>>();
        cfg.num_classes = j.value("num_classes", cfg.num_classes);
        cfg.dropout_keep = j.value("dropout_keep", cfg.dropout_keep);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::config, std::string("bad architecture config: ") + e.what());
    }
    return cfg;
}

// ---------------------------------------------------------------- Network

Network::Network(ArchitectureConfig cfg)
    : cfg_(std::move(cfg)),
      pool_(cfg_.pool_window, cfg_.pool_stride, cfg_.pool_padding),
      dropout_(cfg_.dropout_keep) {
    cfg_.validate();
    const Plan p = plan(cfg_);
    trace_ = p.trace;
    std::size_t channels = cfg_.input_channels;
    for (std::size_t i = 0; i < cfg_.conv_depth; ++i) {
        convs_.emplace_back(channels, cfg_.filters_per_conv[i], p.strides[i], cfg_.conv_padding, cfg_.kernel_size);
        channels = cfg_.filters_per_conv[i];
    }
    std::size_t width = trace_.flatten;
    for (std::size_t f : cfg_.fc_sizes) {
        fcs_.emplace_back(width, f);
        width = f;
    }
    fcs_.emplace_back(width, cfg_.num_classes);
    input_mean_.assign(cfg_.input_channels, 0.0f);
}

void Network::set_input_mean(std::vector<float> mean) {
    if (mean.size() != cfg_.input_channels) {
        fail(ErrorKind::shape_mismatch, "input mean needs one value per channel");
    }
    input_mean_ = std::move(mean);
}

std::vector<std::string> Network::parameter_names() const {
    std::vector<std::string> names;
    for (std::size_t i = 0; i < convs_.size(); ++i) {
        names.push_back("conv" + std::to_string(i + 1) + ".kernels");
        names.push_back("conv" + std::to_string(i + 1) + ".bias");
    }
    for (std::size_t i = 0; i < fcs_.size(); ++i) {
        names.push_back("fc" + std::to_string(i + 1) + ".weights");
        names.push_back("fc" + std::to_string(i + 1) + ".bias");
    }
    return names;
}

std::vector<Tensor*> Network::parameters() {
    std::vector<Tensor*> out;
    for (auto& c : convs_) {
        out.push_back(&c.kernels());
        out.push_back(&c.bias());
    }
    for (auto& f : fcs_) {
        out.push_back(&f.weights());
        out.push_back(&f.bias());
    }
    return out;
}

std::vector<const Tensor*> Network::parameters() const {
    std::vector<const Tensor*> out;
    for (const auto& c : convs_) {
        out.push_back(&c.kernels());
        out.push_back(&c.bias());
    }
    for (const auto& f : fcs_) {
        out.push_back(&f.weights());
        out.push_back(&f.bias());
    }
    return out;
}

std::size_t Network::parameter_count() const {
    std::size_t n = 0;
    for (const Tensor* t : parameters()) n += t->size();
    return n;
}

std::size_t parameter_count(const ArchitectureConfig& cfg) {
    cfg.validate();
    const Plan p = plan(cfg);
    const std::size_t kk = cfg.kernel_size * cfg.kernel_size;
    std::size_t n = 0;
    std::size_t channels = cfg.input_channels;
    for (std::size_t f : cfg.filters_per_conv) {
        n += f * channels * kk + f;
        channels = f;
    }
    std::size_t width = p.trace.flatten;
    for (std::size_t f : cfg.fc_sizes) {
        n += f * width + f;
        width = f;
    }
    return n + cfg.num_classes * width + cfg.num_classes;
}

Network build_network(const ArchitectureConfig& cfg, Rng& rng) {
    Network net(cfg);
    for (auto& conv : net.convs()) {
        const double fan_in = static_cast<double>(conv.in_channels() * conv.kernel_size() * conv.kernel_size());
        conv.kernels() = rng_gaussian<float>(rng, conv.kernels().shape(), 0.0, std::sqrt(2.0 / fan_in));
    }
    for (auto& fc : net.fcs()) {
        const double fan_in = static_cast<double>(fc.in_dim());
        fc.weights() = rng_gaussian<float>(rng, fc.weights().shape(), 0.0, std::sqrt(2.0 / fan_in));
    }
    return net;
}

// ------------------------------------------------------------ forward/back

ForwardPass forward(const Network& net, const Tensor& input, bool training, Rng& rng) {
    const Shape expected = net.input_shape();
    const bool single = input.rank() == 3;
    const bool ok = single ? input.shape() == expected
                           : input.rank() == 4 &&
                                 Shape(input.shape().begin() + 1, input.shape().end()) == expected;
    if (!ok) {
        fail(ErrorKind::shape_mismatch, "network expects patches " + shape_to_string(expected) + ", got " +
                                            shape_to_string(input.shape()));
    }
    const std::size_t batch = single ? 1 : input.dim(0);
    const Activation& act = net.activation();

    ForwardPass pass;
    ForwardCache& cache = pass.cache;
    Tensor a = single ? input.reshaped({1, expected[0], expected[1], expected[2]}) : input;
    if (training) cache.input = a;
    for (const auto& conv : net.convs()) {
        Tensor z = conv.forward(a);
        a = act.forward(z);
        if (training) {
            cache.conv_pre.push_back(std::move(z));
            cache.conv_post.push_back(a);
        }
    }
    PoolResult<float> pooled = net.pool().forward(a);
    Tensor h = std::move(pooled.output);
    if (training) {
        cache.pool_argmax = std::move(pooled.argmax);
        cache.pooled_shape = h.shape();
    }
    h = std::move(h).reshaped({batch, net.trace().flatten});

    const auto& fcs = net.fcs();
    for (std::size_t i = 0; i + 1 < fcs.size(); ++i) {
        Tensor z = fcs[i].forward(h);
        Tensor post = act.forward(z);
        DropoutResult<float> d = net.dropout().forward(post, training, rng);
        if (training) {
            cache.fc_in.push_back(std::move(h));
            cache.fc_pre.push_back(std::move(z));
            cache.masks.push_back(std::move(d.mask));
        }
        h = std::move(d.output);
    }
    pass.logits = fcs.back().forward(h);
    if (training) cache.fc_in.push_back(std::move(h));
    pass.probs = softmax(pass.logits);
    if (single) {
        pass.logits = std::move(pass.logits).reshaped({net.num_classes()});
        pass.probs = std::move(pass.probs).reshaped({net.num_classes()});
    }
    return pass;
}

Tensor predict(const Network& net, const Tensor& input) {
    Rng unused(0);
    return forward(net, input, false, unused).probs;
}

Gradients loss_and_gradients(const Network& net, const ForwardPass& pass, std::span<const std::size_t> labels) {
    const ForwardCache& cache = pass.cache;
    if (cache.fc_in.empty()) fail(ErrorKind::config, "backward requires a training-mode forward pass");
    const Tensor logits = pass.logits.rank() == 1 ? pass.logits.reshaped({1, net.num_classes()}) : pass.logits;
    SoftmaxResult<float> sm = softmax_cross_entropy(logits, labels);

    const auto& convs = net.convs();
    const auto& fcs = net.fcs();
    const Activation& act = net.activation();

    Gradients out;
    out.loss = sm.loss;
    out.params.resize(2 * (convs.size() + fcs.size()));
    const std::size_t fc_base = 2 * convs.size();

    Tensor g = std::move(sm.grad_logits);
    for (std::size_t i = fcs.size(); i-- > 0;) {
        if (i + 1 < fcs.size()) {
            g = net.dropout().backward(cache.masks[i], g);
            g = act.backward(cache.fc_pre[i], g);
        }
        DenseGrads<float> dg = fcs[i].backward(cache.fc_in[i], g);
        out.params[fc_base + 2 * i] = std::move(dg.weights);
        out.params[fc_base + 2 * i + 1] = std::move(dg.bias);
        g = std::move(dg.input);
    }
    g = std::move(g).reshaped(cache.pooled_shape);
    g = net.pool().backward<float>(cache.conv_post.back().shape(), cache.pool_argmax, g);
    for (std::size_t i = convs.size(); i-- > 0;) {
        g = act.backward(cache.conv_pre[i], g);
        const Tensor& in = i == 0 ? cache.input : cache.conv_post[i - 1];
        ConvGrads<float> cg = convs[i].backward(in, g, i > 0);
        out.params[2 * i] = std::move(cg.kernels);
        out.params[2 * i + 1] = std::move(cg.bias);
        g = std::move(cg.input);
    }
    return out;
}

}  // namespace scin
