#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "scin/rng.hpp"
#include "scin/tensor.hpp"

namespace scin {

// Class tokens of the two experiments. Sensor order doubles as the class
// index in sensor-level mode; device order in model-level mode.
enum class Device { IP5, SG4, SGT2 };
enum class Sensor { IP5_F, IP5_B, SG4_F, SG4_B, SGT2_F };

inline constexpr std::size_t device_count = 3;
inline constexpr std::size_t sensor_count = 5;

std::string_view to_string(Device d) noexcept;
std::string_view to_string(Sensor s) noexcept;
std::optional<Device> parse_device(std::string_view token) noexcept;
std::optional<Sensor> parse_sensor(std::string_view token) noexcept;
Device device_of(Sensor s) noexcept;

enum class LabelMode { model_level, sensor_level };

std::string_view to_string(LabelMode m) noexcept;
/// Accepts "model" / "sensor" (and the long forms).
LabelMode label_mode_from_string(std::string_view s);
std::size_t num_classes(LabelMode m) noexcept;
std::vector<std::string> class_names(LabelMode m);

struct ImageRecord {
    std::string image_id;
    Tensor pixels;  // [3,H,W] in [0,1]
    Device device = Device::IP5;
    Sensor sensor = Sensor::IP5_F;

    std::size_t label(LabelMode mode) const noexcept {
        return mode == LabelMode::model_level ? static_cast<std::size_t>(device) : static_cast<std::size_t>(sensor);
    }
};

inline constexpr std::size_t patch_size = 32;
inline constexpr std::size_t patches_per_side = 16;  // 512 / 32

struct Patch {
    Tensor pixels;  // [3,32,32]
    std::size_t label = 0;
    std::string source_image_id;
    std::size_t row = 0;  // top-left pixel in the source image
    std::size_t col = 0;
};

struct PatchDataset {
    std::vector<Patch> patches;
    LabelMode mode = LabelMode::model_level;
    std::vector<std::string> class_names;

    std::size_t num_classes() const noexcept { return class_names.size(); }
    std::size_t size() const noexcept { return patches.size(); }
};

PatchDataset make_empty_dataset(LabelMode mode);

struct ManifestRow {
    std::string path;
    Device device;
    Sensor sensor;
};

/// Reads a CSV manifest with header `path,device,sensor`. Relative paths are
/// resolved against the manifest's directory; the path as written becomes the
/// image id.
std::vector<ImageRecord> load_manifest(const std::filesystem::path& manifest, bool allow_jpeg = false);
std::vector<ManifestRow> parse_manifest(const std::filesystem::path& manifest);
void write_manifest(const std::filesystem::path& manifest, std::span<const ManifestRow> rows);

/// Non-overlapping 32x32 tiles from a centred grid of at most 16x16 tiles
/// (the centred 512x512 crop when the image is large enough). Tiles are
/// emitted in row-major order.
std::vector<Patch> extract_patches(const ImageRecord& image, LabelMode mode);

/// Image-level partition into folds, stratified by sensor class.
///
/// Images are grouped by sensor (in sensor order), shuffled within each group
/// and dealt round-robin with a fold cursor that carries over between groups,
/// so folds are balanced per sensor and per device.
struct FoldAssignment {
    std::size_t folds = 0;
    std::vector<std::string> image_ids;
    std::vector<std::size_t> fold_of;  // parallel to the record list

    std::vector<std::size_t> test_indices(std::size_t fold) const;
    std::vector<std::size_t> train_indices(std::size_t fold) const;
    /// FNV-1a over fold count and (image id, fold) pairs.
    std::string hash() const;
};

FoldAssignment split_by_image(std::span<const ImageRecord> records, std::size_t folds, Rng& rng);

/// Patches of the selected records, in index order.
PatchDataset make_dataset(std::span<const ImageRecord> records, std::span<const std::size_t> indices,
                          LabelMode mode);

struct ChannelStats {
    std::vector<double> mean;
};

ChannelStats compute_channel_stats(const PatchDataset& train);

/// Subtracts the per-channel means (computed on training folds only).
PatchDataset normalize(PatchDataset patches, const ChannelStats& stats);

/// Majority label over each source image's patches; ties go to the lowest
/// class index. Returns the fraction of images whose vote is correct.
double majority_vote_accuracy(const PatchDataset& data, std::span<const std::size_t> predictions);

}  // namespace scin
