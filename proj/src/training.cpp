#include "scin/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "scin/hash.hpp"
#include "scin/logging.hpp"

namespace scin {

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0)) fail(ErrorKind::config, "learning_rate must be > 0");
    if (!(momentum >= 0.0 && momentum < 1.0)) fail(ErrorKind::config, "momentum must lie in [0, 1)");
    if (batch_size < 1) fail(ErrorKind::config, "batch_size must be >= 1");
    if (epochs < 1) fail(ErrorKind::config, "epochs must be >= 1");
    if (!(lr_decay > 0.0)) fail(ErrorKind::config, "lr_decay must be > 0");
    if (lr_step < 1) fail(ErrorKind::config, "lr_step must be >= 1");
}

double TrainConfig::learning_rate_at(std::size_t epoch) const {
    return learning_rate * std::pow(lr_decay, static_cast<double>(epoch / lr_step));
}

nlohmann::json to_json(const TrainConfig& c) {
    return {{"learning_rate", c.learning_rate}, {"momentum", c.momentum}, {"batch_size", c.batch_size},
            {"epochs", c.epochs},               {"seed", c.seed},         {"lr_decay", c.lr_decay},
            {"lr_step", c.lr_step}};
}

TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig c) {
    try {
        c.learning_rate = j.value("learning_rate", c.learning_rate);
        c.momentum = j.value("momentum", c.momentum);
        c.batch_size = j.value("batch_size", c.batch_size);
        c.epochs = j.value("epochs", c.epochs);
        c.seed = j.value("seed", c.seed);
        c.lr_decay = j.value("lr_decay", c.lr_decay);
        c.lr_step = j.value("lr_step", c.lr_step);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::config, std::string("bad training config: ") + e.what());
    }
    return c;
}

void MomentumSgd::step(std::span<Tensor* const> params, std::span<const Tensor> grads, double learning_rate) {
    if (params.size() != grads.size()) fail(ErrorKind::shape_mismatch, "one gradient per parameter required");
    if (velocity_.empty()) {
        for (const Tensor* p : params) velocity_.emplace_back(p->shape());
    }
    const auto mu = static_cast<float>(momentum_);
    const auto lr = static_cast<float>(learning_rate);
    for (std::size_t i = 0; i < params.size(); ++i) {
        Tensor& p = *params[i];
        Tensor& v = velocity_[i];
        const Tensor& g = grads[i];
        if (g.shape() != p.shape()) fail(ErrorKind::shape_mismatch, "gradient shape mismatch");
        for (std::size_t k = 0; k < p.size(); ++k) {
            v[k] = mu * v[k] - lr * g[k];
            p[k] += v[k];
        }
    }
}

Tensor gather_batch(const PatchDataset& data, std::span<const std::size_t> indices) {
    if (indices.empty()) fail(ErrorKind::shape_mismatch, "empty batch");
    const Shape& ps = data.patches.at(indices.front()).pixels.shape();
    Shape shape{indices.size()};
    shape.insert(shape.end(), ps.begin(), ps.end());
    Tensor batch(shape);
    const std::size_t stride = shape_size(ps);
    for (std::size_t b = 0; b < indices.size(); ++b) {
        const Tensor& px = data.patches.at(indices[b]).pixels;
        std::copy(px.raw(), px.raw() + stride, batch.raw() + b * stride);
    }
    return batch;
}

TrainHistory train_fold(Network& net, const PatchDataset& train, const TrainConfig& cfg, Rng& rng) {
    cfg.validate();
    if (train.patches.empty()) fail(ErrorKind::config, "training set is empty");
    if (net.num_classes() != train.num_classes()) {
        fail(ErrorKind::config, "network has " + std::to_string(net.num_classes()) + " classes but dataset has " +
                                    std::to_string(train.num_classes()));
    }
    MomentumSgd opt(cfg.momentum);
    const auto params = net.parameters();
    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<std::size_t> labels;
    TrainHistory history;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double lr = cfg.learning_rate_at(epoch);
        rng.shuffle(std::span<std::size_t>(order));
        double sum = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size, ++batches) {
            const std::size_t end = std::min(order.size(), start + cfg.batch_size);
            const std::span<const std::size_t> idx(order.data() + start, end - start);
            labels.clear();
            for (std::size_t i : idx) labels.push_back(train.patches[i].label);
            const ForwardPass pass = forward(net, gather_batch(train, idx), true, rng);
            Gradients g = loss_and_gradients(net, pass, labels);
            if (!std::isfinite(g.loss)) {
                throw DivergenceError(static_cast<int>(epoch + 1), static_cast<int>(batches + 1), g.loss);
            }
            opt.step(params, g.params, lr);
            history.batch_loss.push_back(g.loss);
            sum += g.loss;
        }
        history.epoch_loss.push_back(sum / static_cast<double>(batches));
        log_info("epoch " + std::to_string(epoch + 1) + " loss " + std::to_string(history.epoch_loss.back()));
    }
    return history;
}

// -------------------------------------------------------- ConfusionMatrix

void ConfusionMatrix::add(std::size_t truth, std::size_t predicted, std::uint64_t count) {
    if (truth >= n_ || predicted >= n_) fail(ErrorKind::invalid_label, "confusion matrix index out of range");
    counts_[truth * n_ + predicted] += count;
}

std::uint64_t ConfusionMatrix::total() const noexcept {
    return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
}

std::uint64_t ConfusionMatrix::trace() const noexcept {
    std::uint64_t t = 0;
    for (std::size_t i = 0; i < n_; ++i) t += counts_[i * n_ + i];
    return t;
}

double ConfusionMatrix::accuracy() const {
    const auto n = total();
    if (n == 0) fail(ErrorKind::evaluation, "accuracy of an empty confusion matrix");
    return static_cast<double>(trace()) / static_cast<double>(n);
}

double ConfusionMatrix::precision(std::size_t cls) const {
    std::uint64_t col = 0;
    for (std::size_t t = 0; t < n_; ++t) col += at(t, cls);
    return col == 0 ? std::nan("") : static_cast<double>(at(cls, cls)) / static_cast<double>(col);
}

double ConfusionMatrix::recall(std::size_t cls) const {
    std::uint64_t row = 0;
    for (std::size_t p = 0; p < n_; ++p) row += at(cls, p);
    return row == 0 ? std::nan("") : static_cast<double>(at(cls, cls)) / static_cast<double>(row);
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
    if (other.n_ != n_) fail(ErrorKind::shape_mismatch, "confusion matrices differ in size");
    for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
    return *this;
}

std::string ConfusionMatrix::to_csv(std::span<const std::string> names) const {
    auto name = [&](std::size_t i) { return i < names.size() ? names[i] : std::to_string(i); };
    std::string s = "true\\predicted";
    for (std::size_t p = 0; p < n_; ++p) s += "," + name(p);
    s += "\n";
    for (std::size_t t = 0; t < n_; ++t) {
        s += name(t);
        for (std::size_t p = 0; p < n_; ++p) s += "," + std::to_string(at(t, p));
        s += "\n";
    }
    return s;
}

nlohmann::json ConfusionMatrix::to_json() const {
    auto rows = nlohmann::json::array();
    for (std::size_t t = 0; t < n_; ++t) {
        std::vector<std::uint64_t> row(counts_.begin() + static_cast<std::ptrdiff_t>(t * n_),
                                       counts_.begin() + static_cast<std::ptrdiff_t>((t + 1) * n_));
        rows.push_back(row);
    }
    return rows;
}

// ------------------------------------------------------------- evaluation

Evaluation evaluate(const Network& net, const PatchDataset& test) {
    if (test.patches.empty()) fail(ErrorKind::evaluation, "test set is empty");
    if (net.num_classes() != test.num_classes()) {
        fail(ErrorKind::config, "class-count mismatch: network has " + std::to_string(net.num_classes()) +
                                    " classes, dataset has " + std::to_string(test.num_classes()));
    }
    constexpr std::size_t chunk = 256;
    Evaluation ev{0.0, ConfusionMatrix(test.num_classes()), {}, 0.0};
    ev.predictions.reserve(test.size());
    std::vector<std::size_t> idx;
    for (std::size_t start = 0; start < test.size(); start += chunk) {
        idx.clear();
        for (std::size_t i = start; i < std::min(test.size(), start + chunk); ++i) idx.push_back(i);
        const Tensor probs = predict(net, gather_batch(test, idx));
        const std::size_t n = net.num_classes();
        for (std::size_t b = 0; b < idx.size(); ++b) {
            const float* row = probs.raw() + b * n;
            const auto pred = static_cast<std::size_t>(std::max_element(row, row + n) - row);
            ev.predictions.push_back(pred);
            ev.confusion.add(test.patches[idx[b]].label, pred);
        }
    }
    ev.accuracy = ev.confusion.accuracy();
    ev.image_vote_accuracy = majority_vote_accuracy(test, ev.predictions);
    return ev;
}

std::string records_hash(std::span<const ImageRecord> records) {
    Fnv1a64 h;
    for (const auto& r : records) {
        h.update(r.image_id);
        h.update(std::string(",") + std::string(to_string(r.sensor)) + ",");
        h.update(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(r.pixels.raw()),
                                               r.pixels.size() * sizeof(float)));
    }
    return hex64(h.digest());
}

FoldResult run_fold(const std::vector<ImageRecord>& records, const FoldAssignment& assignment, std::size_t fold,
                    LabelMode mode, const ArchitectureConfig& arch, const TrainConfig& train, Network* trained,
                    const std::vector<std::vector<Patch>>* patch_cache) {
    if (arch.num_classes != num_classes(mode)) {
        fail(ErrorKind::config, "architecture has " + std::to_string(arch.num_classes) + " classes but " +
                                    std::string(to_string(mode)) + "-level mode needs " +
                                    std::to_string(num_classes(mode)));
    }
    if (fold >= assignment.folds) fail(ErrorKind::config, "fold index out of range");
    const auto train_idx = assignment.train_indices(fold);
    const auto test_idx = assignment.test_indices(fold);

    auto dataset = [&](const std::vector<std::size_t>& indices) {
        if (!patch_cache) return make_dataset(records, indices, mode);
        PatchDataset ds = make_empty_dataset(mode);
        for (std::size_t i : indices) {
            for (const Patch& p : (*patch_cache)[i]) {
                ds.patches.push_back(p);
                ds.patches.back().label = records[i].label(mode);
            }
        }
        return ds;
    };
    PatchDataset train_ds = dataset(train_idx);
    PatchDataset test_ds = dataset(test_idx);
    const ChannelStats stats = compute_channel_stats(train_ds);
    train_ds = normalize(std::move(train_ds), stats);
    test_ds = normalize(std::move(test_ds), stats);

    Rng rng = Rng::fork(train.seed, 1 + fold);
    Network net = build_network(arch, rng);
    net.set_input_mean(std::vector<float>(stats.mean.begin(), stats.mean.end()));

    FoldResult result;
    result.fold = fold;
    result.history = train_fold(net, train_ds, train, rng);
    const Evaluation ev = evaluate(net, test_ds);
    result.accuracy = ev.accuracy;
    result.image_vote_accuracy = ev.image_vote_accuracy;
    result.confusion = ev.confusion;
    result.train_patches = train_ds.size();
    result.test_patches = test_ds.size();
    for (std::size_t i : test_idx) result.test_image_ids.push_back(records[i].image_id);
    if (trained) *trained = std::move(net);
    return result;
}

ExperimentReport cross_validate(const std::vector<ImageRecord>& records, LabelMode mode,
                                const ArchitectureConfig& arch, const TrainConfig& train,
                                const CrossValidationOptions& options) {
    const auto started = std::chrono::steady_clock::now();
    train.validate();
    arch.validate();
    Rng split_rng(train.seed);
    const FoldAssignment assignment = split_by_image(records, options.folds, split_rng);

    std::vector<std::vector<Patch>> cache;
    cache.reserve(records.size());
    for (const auto& r : records) cache.push_back(extract_patches(r, mode));

    ExperimentReport report;
    report.mode = mode;
    report.class_names = class_names(mode);
    report.confusion = ConfusionMatrix(num_classes(mode));
    report.architecture = arch;
    report.training = train;
    report.fold_count = options.folds;
    report.fold_hash = assignment.hash();
    report.data_hash = records_hash(records);
    report.images = records.size();

    double vote_sum = 0.0;
    for (std::size_t k = 0; k < options.folds; ++k) {
        Network net(arch);
        FoldResult r = run_fold(records, assignment, k, mode, arch, train, &net, &cache);
        if (options.on_fold) options.on_fold(k, net, r);
        report.fold_accuracies.push_back(r.accuracy);
        report.confusion += r.confusion;
        vote_sum += r.image_vote_accuracy;
        report.folds.push_back(std::move(r));
    }
    report.mean_accuracy = std::accumulate(report.fold_accuracies.begin(), report.fold_accuracies.end(), 0.0) /
                           static_cast<double>(report.fold_accuracies.size());
    report.mean_image_vote_accuracy = vote_sum / static_cast<double>(options.folds);
    report.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return report;
}

// --------------------------------------------------------------- ablation

std::string_view to_string(SweepKind k) noexcept {
    switch (k) {
    case SweepKind::topology: return "topology";
    case SweepKind::activation: return "activation";
    case SweepKind::dropout: return "dropout";
    }
    return "unknown";
}

SweepKind sweep_from_string(std::string_view s) {
    if (s == "topology") return SweepKind::topology;
    if (s == "activation") return SweepKind::activation;
    if (s == "dropout") return SweepKind::dropout;
    fail(ErrorKind::config, "unknown sweep '" + std::string(s) + "' (expected topology, activation or dropout)");
}

std::vector<AblationVariant> sweep_variants(SweepKind kind, const ArchitectureConfig& base) {
    std::vector<AblationVariant> out;
    auto add = [&](std::string name, std::string value, ArchitectureConfig cfg) {
        out.push_back({std::move(name), std::move(value), std::move(cfg), std::nullopt, {}});
    };
    switch (kind) {
    case SweepKind::topology:
        for (std::size_t depth : {1, 2, 4}) {
            ArchitectureConfig cfg = base;
            cfg.conv_depth = depth;
            cfg.filters_per_conv = ArchitectureConfig::default_filters(depth);
            add("depth=" + std::to_string(depth), std::to_string(depth), cfg);
        }
        break;
    case SweepKind::activation:
        for (ActivationKind k : {ActivationKind::relu, ActivationKind::leaky_relu}) {
            ArchitectureConfig cfg = base;
            cfg.activation.kind = k;
            add("activation=" + std::string(to_string(k)), std::string(to_string(k)), cfg);
        }
        break;
    case SweepKind::dropout:
        for (const char* p : {"0.35", "0.45", "0.5", "0.55"}) {
            ArchitectureConfig cfg = base;
            cfg.dropout_keep = std::stod(p);
            add(std::string("p=") + p, p, cfg);
        }
        break;
    }
    return out;
}

std::vector<AblationVariant> run_ablation(SweepKind kind, const std::vector<ImageRecord>& records, LabelMode mode,
                                          const ArchitectureConfig& base_arch, const TrainConfig& train,
                                          const CrossValidationOptions& options) {
    auto variants = sweep_variants(kind, base_arch);
    for (auto& v : variants) {
        try {
            v.report = cross_validate(records, mode, v.architecture, train, options);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::config && e.kind() != ErrorKind::invalid_hyperparameter &&
                e.kind() != ErrorKind::divergence) {
                throw;
            }
            v.error = e.what();
            log_warning("variant " + v.name + " skipped: " + v.error);
        }
    }
    return variants;
}

}  // namespace scin
