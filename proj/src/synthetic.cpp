#include "scin/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cstdio>

#include "scin/hash.hpp"

namespace scin {

namespace {

constexpr std::array<double, 5> binomial{1.0 / 16, 4.0 / 16, 6.0 / 16, 4.0 / 16, 1.0 / 16};
// Std of a unit-variance white field after the 2-D binomial blur: sum of squared 1-D weights.
constexpr double blurred_std = 70.0 / 256.0;

std::size_t clamp_index(std::ptrdiff_t i, std::size_t n) {
    return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(i, 0, static_cast<std::ptrdiff_t>(n) - 1));
}

}  // namespace

void validate(const SyntheticOptions& o) {
    if (o.num_classes < 1 || o.num_classes > sensor_count) {
        fail(ErrorKind::invalid_parameter, "synthetic class count must be in 1.." + std::to_string(sensor_count));
    }
    if (!(o.sigma_f >= 0.0)) fail(ErrorKind::invalid_parameter, "sigma_f must be >= 0");
    if (!(o.sigma_r >= 0.0)) fail(ErrorKind::invalid_parameter, "sigma_r must be >= 0");
    if (!(o.delta_std >= 0.0)) fail(ErrorKind::invalid_parameter, "delta must be >= 0");
    if (!(o.base_contrast >= 0.0)) fail(ErrorKind::invalid_parameter, "base contrast must be >= 0");
    if (o.height < patch_size || o.width < patch_size) {
        fail(ErrorKind::invalid_parameter, "synthetic images must be at least 32x32");
    }
}

std::vector<SyntheticCameraSpec> make_camera_specs(const SyntheticOptions& opts, Rng& rng) {
    validate(opts);
    const Shape shape{3, patch_size, patch_size};
    std::vector<SyntheticCameraSpec> specs;
    if (!opts.correlated) {
        for (std::size_t k = 0; k < opts.num_classes; ++k) {
            specs.push_back({k, static_cast<Sensor>(k), rng_gaussian<float>(rng, shape, 0.0, opts.sigma_f),
                             opts.sigma_r, std::nullopt});
        }
        return specs;
    }
    std::array<std::optional<Tensor>, device_count> group_patterns;
    for (std::size_t k = 0; k < opts.num_classes; ++k) {
        const auto sensor = static_cast<Sensor>(k);
        const auto group = static_cast<std::size_t>(device_of(sensor));
        if (!group_patterns[group]) group_patterns[group] = rng_gaussian<float>(rng, shape, 0.0, opts.sigma_f);
        Tensor fp = rng_gaussian<float>(rng, shape, 0.0, opts.delta_std);
        for (std::size_t i = 0; i < fp.size(); ++i) fp[i] += (*group_patterns[group])[i];
        specs.push_back({k, sensor, std::move(fp), opts.sigma_r, group});
    }
    return specs;
}

Tensor smooth_field(std::size_t height, std::size_t width, Rng& rng) {
    const Tensor white = rng_gaussian<float>(rng, {height, width}, 0.0, 1.0);
    std::vector<double> rows(height * width, 0.0);
    for (std::size_t y = 0; y < height; ++y) {
        for (std::size_t x = 0; x < width; ++x) {
            double s = 0.0;
            for (std::size_t t = 0; t < binomial.size(); ++t) {
                s += binomial[t] * white[y * width + clamp_index(static_cast<std::ptrdiff_t>(x + t) - 2, width)];
            }
            rows[y * width + x] = s;
        }
    }
    Tensor field({height, width});
    for (std::size_t y = 0; y < height; ++y) {
        for (std::size_t x = 0; x < width; ++x) {
            double s = 0.0;
            for (std::size_t t = 0; t < binomial.size(); ++t) {
                s += binomial[t] * rows[clamp_index(static_cast<std::ptrdiff_t>(y + t) - 2, height) * width + x];
            }
            field[y * width + x] = static_cast<float>(s / blurred_std);
        }
    }
    return field;
}

std::vector<ImageRecord> generate_synthetic(const std::vector<SyntheticCameraSpec>& specs,
                                            std::size_t images_per_class, Rng& rng,
                                            const SyntheticOptions& opts) {
    validate(opts);
    if (specs.empty()) fail(ErrorKind::invalid_parameter, "at least one camera spec is required");
    if (images_per_class < 1) fail(ErrorKind::invalid_parameter, "images_per_class must be >= 1");
    for (const auto& s : specs) {
        if (!(s.readout_std >= 0.0)) fail(ErrorKind::invalid_parameter, "readout std must be >= 0");
        if (s.fingerprint.shape() != Shape{3, patch_size, patch_size}) {
            fail(ErrorKind::invalid_parameter, "fingerprint must be [3,32,32]");
        }
    }
    const std::size_t h = opts.height, w = opts.width;
    const std::uint64_t master = rng.next_u64();
    std::vector<ImageRecord> records;
    records.reserve(specs.size() * images_per_class);
    std::uint64_t index = 0;
    for (const auto& spec : specs) {
        for (std::size_t n = 0; n < images_per_class; ++n, ++index) {
            Rng local = Rng::fork(master, index);
            ImageRecord r;
            char name[64];
            std::snprintf(name, sizeof name, "c%zu_%s_%05zu.png", spec.class_id,
                          std::string(to_string(spec.sensor)).c_str(), n);
            r.image_id = name;
            r.sensor = spec.sensor;
            r.device = device_of(spec.sensor);
            r.pixels = Tensor({3, h, w});
            for (std::size_t c = 0; c < 3; ++c) {
                const Tensor field = smooth_field(h, w, local);
                for (std::size_t y = 0; y < h; ++y) {
                    for (std::size_t x = 0; x < w; ++x) {
                        const double base = opts.base_mean + opts.base_contrast * field[y * w + x];
                        const double f = spec.fingerprint[(c * patch_size + y % patch_size) * patch_size + x % patch_size];
                        const double v = base * (1.0 + f) + spec.readout_std * local.gaussian();
                        r.pixels[(c * h + y) * w + x] = static_cast<float>(std::clamp(v, 0.0, 1.0));
                    }
                }
            }
            records.push_back(std::move(r));
        }
    }
    return records;
}

nlohmann::json to_json(const SyntheticOptions& o) {
    return {{"num_classes", o.num_classes}, {"sigma_f", o.sigma_f},      {"sigma_r", o.sigma_r},
            {"correlated", o.correlated},   {"delta_std", o.delta_std},  {"height", o.height},
            {"width", o.width},             {"base_mean", o.base_mean}, {"base_contrast", o.base_contrast}};
}

nlohmann::json to_json(const SyntheticCameraSpec& s) {
    const auto bytes = std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(s.fingerprint.raw()),
                                                     s.fingerprint.size() * sizeof(float));
    nlohmann::json j{{"class_id", s.class_id},
                     {"sensor", std::string(to_string(s.sensor))},
                     {"device", std::string(to_string(device_of(s.sensor)))},
                     {"readout_std", s.readout_std},
                     {"fingerprint_shape", s.fingerprint.shape()},
                     {"fingerprint_hash", hex64(fnv1a64(bytes))}};
    j["correlation_group"] = s.correlation_group ? nlohmann::json(*s.correlation_group) : nlohmann::json(nullptr);
    return j;
}

}  // namespace scin
