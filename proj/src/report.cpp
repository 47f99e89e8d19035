#include <cmath>
#include <cstdio>

#include "scin/training.hpp"

namespace scin {

namespace {

nlohmann::json finite_or_null(double v) {
    return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

std::string format_accuracy(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

}  // namespace

nlohmann::json to_json(const ExperimentReport& r, bool include_timings) {
    nlohmann::json j;
    j["mode"] = std::string(to_string(r.mode));
    j["class_names"] = r.class_names;
    j["fold_count"] = r.fold_count;
    j["fold_accuracies"] = r.fold_accuracies;
    j["mean_accuracy"] = r.mean_accuracy;
    j["accuracy_granularity"] = "patch";
    std::vector<double> votes;
    for (const auto& f : r.folds) votes.push_back(f.image_vote_accuracy);
    j["image_majority_vote"] = {{"description", "per-image majority vote over patch predictions"},
                                {"fold_accuracies", votes},
                                {"mean_accuracy", r.mean_image_vote_accuracy}};
    j["confusion_matrix"] = r.confusion.to_json();
    auto per_class = nlohmann::json::array();
    for (std::size_t c = 0; c < r.confusion.classes(); ++c) {
        per_class.push_back({{"class", c < r.class_names.size() ? r.class_names[c] : std::to_string(c)},
                             {"precision", finite_or_null(r.confusion.precision(c))},
                             {"recall", finite_or_null(r.confusion.recall(c))}});
    }
    j["per_class"] = per_class;
    j["configs"] = {
        {"architecture", to_json(r.architecture)},
        {"training", to_json(r.training)},
        // Not given by the architecture description; reported with every run.
        {"free_parameters",
         {{"filters_per_conv", r.architecture.filters_per_conv},
          {"pool_stride", r.architecture.pool_stride},
          {"activation_alpha", r.architecture.activation.alpha},
          {"dropout_keep", r.architecture.dropout_keep}}},
    };
    j["seed"] = r.training.seed;
    j["data"] = {{"images", r.images}, {"records_hash", r.data_hash}, {"fold_hash", r.fold_hash}};
    auto folds = nlohmann::json::array();
    for (const auto& f : r.folds) {
        folds.push_back({{"fold", f.fold},
                         {"accuracy", f.accuracy},
                         {"image_vote_accuracy", f.image_vote_accuracy},
                         {"train_patches", f.train_patches},
                         {"test_patches", f.test_patches},
                         {"loss_history", f.history.epoch_loss},
                         {"confusion_matrix", f.confusion.to_json()},
                         {"test_images", f.test_image_ids}});
    }
    j["folds"] = folds;
    if (include_timings) j["timings"] = {{"wall_clock_seconds", r.wall_clock_seconds}};
    return j;
}

std::string ablation_summary_csv(std::span<const AblationVariant> variants) {
    std::string s = "variant,value,mean_accuracy,fold_hash,status\n";
    for (const auto& v : variants) {
        s += v.name + "," + v.value + ",";
        if (v.report) {
            s += format_accuracy(v.report->mean_accuracy) + "," + v.report->fold_hash + ",ok\n";
        } else {
            s += ",,error\n";
        }
    }
    return s;
}

nlohmann::json ablation_summary_json(SweepKind kind, std::span<const AblationVariant> variants) {
    auto rows = nlohmann::json::array();
    for (const auto& v : variants) {
        nlohmann::json row{{"variant", v.name}, {"value", v.value}};
        if (v.report) {
            row["mean_accuracy"] = v.report->mean_accuracy;
            row["fold_accuracies"] = v.report->fold_accuracies;
            row["fold_hash"] = v.report->fold_hash;
            row["status"] = "ok";
        } else {
            row["mean_accuracy"] = nullptr;
            row["status"] = "error";
            row["error"] = v.error;
        }
        rows.push_back(row);
    }
    return {{"sweep", std::string(to_string(kind))}, {"variants", rows}};
}

}  // namespace scin
