#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "scin/data.hpp"
#include "scin/model.hpp"
#include "scin/rng.hpp"

namespace scin {

/// Optimiser and schedule. lr at epoch e (0-based) is
/// learning_rate * lr_decay^(e / lr_step).
struct TrainConfig {
    double learning_rate = 0.01;
    double momentum = 0.9;
    std::size_t batch_size = 128;
    std::size_t epochs = 30;
    std::uint64_t seed = 1;
    double lr_decay = 0.5;
    std::size_t lr_step = 10;

    void validate() const;
    double learning_rate_at(std::size_t epoch) const;

    bool operator==(const TrainConfig&) const = default;
};

nlohmann::json to_json(const TrainConfig& cfg);
TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig base = {});

/// v <- momentum * v - lr * g;  p <- p + v.
class MomentumSgd {
public:
    explicit MomentumSgd(double momentum) : momentum_(momentum) {}

    void step(std::span<Tensor* const> params, std::span<const Tensor> grads, double learning_rate);

private:
    double momentum_;
    std::vector<Tensor> velocity_;
};

struct TrainHistory {
    std::vector<double> epoch_loss;  // mean batch loss per epoch
    std::vector<double> batch_loss;
};

/// Copies the listed patches into a [B,C,H,W] batch.
Tensor gather_batch(const PatchDataset& data, std::span<const std::size_t> indices);

/// Shuffled mini-batch momentum SGD for cfg.epochs epochs. The shuffle draws
/// from `rng`, then dropout masks for the batch draw from it too.
TrainHistory train_fold(Network& net, const PatchDataset& train, const TrainConfig& cfg, Rng& rng);

/// Rows are true classes, columns predictions.
class ConfusionMatrix {
public:
    explicit ConfusionMatrix(std::size_t classes = 0) : n_(classes), counts_(classes * classes, 0) {}

    std::size_t classes() const noexcept { return n_; }
    void add(std::size_t truth, std::size_t predicted, std::uint64_t count = 1);
    std::uint64_t at(std::size_t truth, std::size_t predicted) const { return counts_.at(truth * n_ + predicted); }
    std::uint64_t total() const noexcept;
    std::uint64_t trace() const noexcept;
    double accuracy() const;
    /// NaN when the class was never predicted / never present.
    double precision(std::size_t cls) const;
    double recall(std::size_t cls) const;

    ConfusionMatrix& operator+=(const ConfusionMatrix& other);
    bool operator==(const ConfusionMatrix&) const = default;

    std::string to_csv(std::span<const std::string> names) const;
    nlohmann::json to_json() const;

private:
    std::size_t n_;
    std::vector<std::uint64_t> counts_;
};

struct Evaluation {
    double accuracy = 0.0;
    ConfusionMatrix confusion;
    std::vector<std::size_t> predictions;
    double image_vote_accuracy = 0.0;
};

/// Inference-mode argmax predictions over the whole set.
Evaluation evaluate(const Network& net, const PatchDataset& test);

struct FoldResult {
    std::size_t fold = 0;
    double accuracy = 0.0;
    double image_vote_accuracy = 0.0;
    ConfusionMatrix confusion;
    TrainHistory history;
    std::size_t train_patches = 0;
    std::size_t test_patches = 0;
    std::vector<std::string> test_image_ids;
};

struct ExperimentReport {
    LabelMode mode = LabelMode::model_level;
    std::vector<std::string> class_names;
    std::vector<FoldResult> folds;
    std::vector<double> fold_accuracies;
    double mean_accuracy = 0.0;
    double mean_image_vote_accuracy = 0.0;
    ConfusionMatrix confusion;
    ArchitectureConfig architecture;
    TrainConfig training;
    std::size_t fold_count = 0;
    std::string fold_hash;
    std::string data_hash;
    std::size_t images = 0;
    double wall_clock_seconds = 0.0;
};

/// Report JSON: fold_accuracies, mean_accuracy, confusion_matrix, configs,
/// seed, per-class precision/recall and fold details. Wall-clock timings are
/// added only when requested, so reports stay byte-identical across reruns.
nlohmann::json to_json(const ExperimentReport& report, bool include_timings = false);

/// FNV-1a over image ids, labels and pixel bytes of the records.
std::string records_hash(std::span<const ImageRecord> records);

/// Trains a fresh network on every fold but `fold` and tests on `fold`.
/// The network is seeded with Rng::fork(train.seed, 1 + fold); the
/// training-fold channel means are stored on the returned network.
FoldResult run_fold(const std::vector<ImageRecord>& records, const FoldAssignment& assignment, std::size_t fold,
                    LabelMode mode, const ArchitectureConfig& arch, const TrainConfig& train,
                    Network* trained = nullptr, const std::vector<std::vector<Patch>>* patch_cache = nullptr);

struct CrossValidationOptions {
    std::size_t folds = 10;
    /// Called after each round with the trained network.
    std::function<void(std::size_t fold, const Network&, const FoldResult&)> on_fold;
};

/// Image-level stratified k-fold cross-validation. The fold assignment uses
/// Rng(train.seed).
ExperimentReport cross_validate(const std::vector<ImageRecord>& records, LabelMode mode,
                                const ArchitectureConfig& arch, const TrainConfig& train,
                                const CrossValidationOptions& options = {});

enum class SweepKind { topology, activation, dropout };

std::string_view to_string(SweepKind k) noexcept;
SweepKind sweep_from_string(std::string_view s);

struct AblationVariant {
    std::string name;   // e.g. "depth=2", "activation=relu", "p=0.5"
    std::string value;  // swept value alone
    ArchitectureConfig architecture;
    std::optional<ExperimentReport> report;
    std::string error;  // set when the variant could not be built or trained
};

/// Variant configurations for a sweep derived from `base`.
std::vector<AblationVariant> sweep_variants(SweepKind kind, const ArchitectureConfig& base);

/// One cross-validation per variant, all sharing records, seed and therefore
/// fold assignment. A failing variant is recorded and the sweep continues.
std::vector<AblationVariant> run_ablation(SweepKind kind, const std::vector<ImageRecord>& records, LabelMode mode,
                                          const ArchitectureConfig& base_arch, const TrainConfig& train,
                                          const CrossValidationOptions& options = {});

/// CSV with columns variant,value,mean_accuracy,fold_hash,status.
std::string ablation_summary_csv(std::span<const AblationVariant> variants);
nlohmann::json ablation_summary_json(SweepKind kind, std::span<const AblationVariant> variants);

}  // namespace scin
