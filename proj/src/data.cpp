#include "scin/data.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include "scin/hash.hpp"
#include "scin/image_io.hpp"
#include "scin/logging.hpp"

namespace scin {

namespace {

constexpr std::array<std::string_view, device_count> device_tokens{"IP5", "SG4", "SGT2"};
constexpr std::array<std::string_view, sensor_count> sensor_tokens{"IP5_F", "IP5_B", "SG4_F", "SG4_B", "SGT2_F"};

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(trim(field));
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

}  // namespace

std::string_view to_string(Device d) noexcept { return device_tokens[static_cast<std::size_t>(d)]; }
std::string_view to_string(Sensor s) noexcept { return sensor_tokens[static_cast<std::size_t>(s)]; }

std::optional<Device> parse_device(std::string_view token) noexcept {
    for (std::size_t i = 0; i < device_tokens.size(); ++i) {
        if (device_tokens[i] == token) return static_cast<Device>(i);
    }
    return std::nullopt;
}

std::optional<Sensor> parse_sensor(std::string_view token) noexcept {
    for (std::size_t i = 0; i < sensor_tokens.size(); ++i) {
        if (sensor_tokens[i] == token) return static_cast<Sensor>(i);
    }
    return std::nullopt;
}

Device device_of(Sensor s) noexcept {
    switch (s) {
    case Sensor::IP5_F:
    case Sensor::IP5_B: return Device::IP5;
    case Sensor::SG4_F:
    case Sensor::SG4_B: return Device::SG4;
    case Sensor::SGT2_F: return Device::SGT2;
    }
    return Device::IP5;
}

std::string_view to_string(LabelMode m) noexcept {
    return m == LabelMode::model_level ? "model" : "sensor";
}

LabelMode label_mode_from_string(std::string_view s) {
    if (s == "model" || s == "model_level") return LabelMode::model_level;
    if (s == "sensor" || s == "sensor_level") return LabelMode::sensor_level;
    fail(ErrorKind::config, "unknown label mode '" + std::string(s) + "' (expected model or sensor)");
}

std::size_t num_classes(LabelMode m) noexcept {
    return m == LabelMode::model_level ? device_count : sensor_count;
}

std::vector<std::string> class_names(LabelMode m) {
    std::vector<std::string> names;
    if (m == LabelMode::model_level) {
        for (auto t : device_tokens) names.emplace_back(t);
    } else {
        for (auto t : sensor_tokens) names.emplace_back(t);
    }
    return names;
}

PatchDataset make_empty_dataset(LabelMode mode) {
    return PatchDataset{{}, mode, class_names(mode)};
}

// -------------------------------------------------------------- manifests

std::vector<ManifestRow> parse_manifest(const std::filesystem::path& manifest) {
    std::ifstream in(manifest);
    if (!in) fail(ErrorKind::ingest, "cannot open manifest " + manifest.string());
    std::vector<ManifestRow> rows;
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string text = trim(line);
        if (text.empty()) continue;
        const auto fields = split_csv(text);
        if (!header_seen) {
            header_seen = true;
            if (fields != std::vector<std::string>{"path", "device", "sensor"}) {
                fail(ErrorKind::manifest, manifest.string() + ": expected header 'path,device,sensor', got '" + text + "'");
            }
            continue;
        }
        const std::string where = manifest.string() + " row " + std::to_string(line_no);
        if (fields.size() != 3 || fields[0].empty()) {
            fail(ErrorKind::manifest, where + ": expected 3 fields 'path,device,sensor', got '" + text + "'");
        }
        const auto device = parse_device(fields[1]);
        if (!device) fail(ErrorKind::manifest, where + ": unknown device label '" + fields[1] + "'");
        const auto sensor = parse_sensor(fields[2]);
        if (!sensor) fail(ErrorKind::manifest, where + ": unknown sensor label '" + fields[2] + "'");
        if (device_of(*sensor) != *device) {
            fail(ErrorKind::manifest, where + ": sensor " + fields[2] + " is inconsistent with device " + fields[1]);
        }
        rows.push_back({fields[0], *device, *sensor});
    }
    return rows;
}

std::vector<ImageRecord> load_manifest(const std::filesystem::path& manifest, bool allow_jpeg) {
    const auto rows = parse_manifest(manifest);
    if (rows.empty()) log_warning("manifest " + manifest.string() + " lists no images");
    std::vector<ImageRecord> records;
    records.reserve(rows.size());
    std::set<std::string> seen;
    const auto dir = manifest.parent_path();
    for (const auto& row : rows) {
        if (!seen.insert(row.path).second) {
            fail(ErrorKind::manifest, manifest.string() + ": duplicate image '" + row.path + "'");
        }
        std::filesystem::path p(row.path);
        if (p.is_relative()) p = dir / p;
        ImageRecord r;
        r.image_id = row.path;
        try {
            r.pixels = read_image(p, allow_jpeg);
        } catch (const Error& e) {
            fail(ErrorKind::ingest, "cannot ingest " + p.string() + ": " + e.what());
        }
        r.device = row.device;
        r.sensor = row.sensor;
        records.push_back(std::move(r));
    }
    return records;
}

void write_manifest(const std::filesystem::path& manifest, std::span<const ManifestRow> rows) {
    std::ofstream out(manifest, std::ios::trunc);
    if (!out) fail(ErrorKind::io, "cannot open " + manifest.string() + " for writing");
    out << "path,device,sensor\n";
    for (const auto& r : rows) out << r.path << ',' << to_string(r.device) << ',' << to_string(r.sensor) << '\n';
    if (!out) fail(ErrorKind::io, "failed writing " + manifest.string());
}

// ---------------------------------------------------------------- patches

std::vector<Patch> extract_patches(const ImageRecord& image, LabelMode mode) {
    const Tensor& px = image.pixels;
    if (px.rank() != 3 || px.dim(0) != 3) {
        fail(ErrorKind::shape_mismatch, image.image_id + ": pixels must be [3,H,W]");
    }
    const std::size_t h = px.dim(1), w = px.dim(2);
    if (h < patch_size || w < patch_size) {
        fail(ErrorKind::too_small, image.image_id + " is " + std::to_string(h) + "x" + std::to_string(w) +
                                       ", smaller than one " + std::to_string(patch_size) + "x" +
                                       std::to_string(patch_size) + " patch");
    }
    const std::size_t rows = std::min(h / patch_size, patches_per_side);
    const std::size_t cols = std::min(w / patch_size, patches_per_side);
    const std::size_t top = (h - rows * patch_size) / 2;
    const std::size_t left = (w - cols * patch_size) / 2;

    std::vector<Patch> out;
    out.reserve(rows * cols);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            Patch p;
            p.pixels = Tensor({3, patch_size, patch_size});
            p.label = image.label(mode);
            p.source_image_id = image.image_id;
            p.row = top + r * patch_size;
            p.col = left + c * patch_size;
            for (std::size_t ch = 0; ch < 3; ++ch) {
                for (std::size_t y = 0; y < patch_size; ++y) {
                    const float* src = px.raw() + (ch * h + p.row + y) * w + p.col;
                    std::copy(src, src + patch_size, p.pixels.raw() + (ch * patch_size + y) * patch_size);
                }
            }
            out.push_back(std::move(p));
        }
    }
    return out;
}

// ------------------------------------------------------------------ folds

std::vector<std::size_t> FoldAssignment::test_indices(std::size_t fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < fold_of.size(); ++i) {
        if (fold_of[i] == fold) out.push_back(i);
    }
    return out;
}

std::vector<std::size_t> FoldAssignment::train_indices(std::size_t fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < fold_of.size(); ++i) {
        if (fold_of[i] != fold) out.push_back(i);
    }
    return out;
}

std::string FoldAssignment::hash() const {
    Fnv1a64 h;
    h.update(std::to_string(folds));
    for (std::size_t i = 0; i < image_ids.size(); ++i) {
        h.update("\n");
        h.update(image_ids[i]);
        h.update("=" + std::to_string(fold_of[i]));
    }
    return hex64(h.digest());
}

FoldAssignment split_by_image(std::span<const ImageRecord> records, std::size_t folds, Rng& rng) {
    if (folds < 2) fail(ErrorKind::config, "need at least 2 folds");
    std::set<std::string_view> ids;
    for (const auto& r : records) {
        if (!ids.insert(r.image_id).second) fail(ErrorKind::manifest, "duplicate image id '" + r.image_id + "'");
    }
    std::array<std::vector<std::size_t>, sensor_count> groups;
    for (std::size_t i = 0; i < records.size(); ++i) groups[static_cast<std::size_t>(records[i].sensor)].push_back(i);

    FoldAssignment a;
    a.folds = folds;
    a.fold_of.assign(records.size(), 0);
    for (const auto& r : records) a.image_ids.push_back(r.image_id);

    std::size_t cursor = 0;
    for (std::size_t s = 0; s < sensor_count; ++s) {
        auto& group = groups[s];
        if (group.empty()) continue;
        if (group.size() < folds) {
            fail(ErrorKind::stratification, "class " + std::string(sensor_tokens[s]) + " has " +
                                                std::to_string(group.size()) + " images, fewer than " +
                                                std::to_string(folds) + " folds");
        }
        rng.shuffle(std::span<std::size_t>(group));
        for (std::size_t i : group) {
            a.fold_of[i] = cursor;
            cursor = (cursor + 1) % folds;
        }
    }
    return a;
}

PatchDataset make_dataset(std::span<const ImageRecord> records, std::span<const std::size_t> indices,
                          LabelMode mode) {
    PatchDataset ds = make_empty_dataset(mode);
    for (std::size_t i : indices) {
        auto patches = extract_patches(records[i], mode);
        std::move(patches.begin(), patches.end(), std::back_inserter(ds.patches));
    }
    return ds;
}

// ---------------------------------------------------------- normalisation

ChannelStats compute_channel_stats(const PatchDataset& train) {
    ChannelStats stats;
    if (train.patches.empty()) return stats;
    const std::size_t channels = train.patches.front().pixels.dim(0);
    std::vector<double> sum(channels, 0.0);
    std::size_t per_channel = 0;
    for (const auto& p : train.patches) {
        const std::size_t plane = p.pixels.size() / channels;
        for (std::size_t c = 0; c < channels; ++c) {
            const float* v = p.pixels.raw() + c * plane;
            double s = 0.0;
            for (std::size_t k = 0; k < plane; ++k) s += v[k];
            sum[c] += s;
        }
        per_channel += plane;
    }
    for (double& s : sum) s /= static_cast<double>(per_channel);
    stats.mean = std::move(sum);
    return stats;
}

PatchDataset normalize(PatchDataset patches, const ChannelStats& stats) {
    if (stats.mean.empty()) return patches;
    for (auto& p : patches.patches) {
        const std::size_t channels = p.pixels.dim(0);
        if (channels != stats.mean.size()) {
            fail(ErrorKind::shape_mismatch, "channel statistics do not match patch channels");
        }
        const std::size_t plane = p.pixels.size() / channels;
        for (std::size_t c = 0; c < channels; ++c) {
            const auto m = static_cast<float>(stats.mean[c]);
            float* v = p.pixels.raw() + c * plane;
            for (std::size_t k = 0; k < plane; ++k) v[k] -= m;
        }
    }
    return patches;
}

double majority_vote_accuracy(const PatchDataset& data, std::span<const std::size_t> predictions) {
    if (predictions.size() != data.patches.size()) {
        fail(ErrorKind::shape_mismatch, "one prediction per patch required");
    }
    struct Votes {
        std::vector<std::size_t> counts;
        std::size_t label;
    };
    std::map<std::string, Votes> by_image;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const Patch& p = data.patches[i];
        auto [it, inserted] = by_image.try_emplace(p.source_image_id, Votes{std::vector<std::size_t>(data.num_classes(), 0), p.label});
        if (predictions[i] < data.num_classes()) ++it->second.counts[predictions[i]];
    }
    if (by_image.empty()) return 0.0;
    std::size_t correct = 0;
    for (const auto& [id, v] : by_image) {
        const auto winner = static_cast<std::size_t>(std::max_element(v.counts.begin(), v.counts.end()) - v.counts.begin());
        correct += winner == v.label ? 1 : 0;
    }
    return static_cast<double>(correct) / static_cast<double>(by_image.size());
}

}  // namespace scin
