#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "json.hpp"
#include "scin/data.hpp"
#include "scin/rng.hpp"

namespace scin {

/// One simulated camera sensor. The fingerprint is a fixed multiplicative
/// pattern tiled over every image the sensor produces.
struct SyntheticCameraSpec {
    std::size_t class_id = 0;
    Sensor sensor = Sensor::IP5_F;
    Tensor fingerprint;  // [3,32,32]
    double readout_std = 0.01;
    std::optional<std::size_t> correlation_group;
};

struct SyntheticOptions {
    std::size_t num_classes = 5;  // first N sensors in class order
    double sigma_f = 0.05;        // fingerprint std
    double sigma_r = 0.01;        // readout noise std
    bool correlated = false;      // sensors of one device share a pattern
    double delta_std = 0.01;      // per-sensor deviation from the shared pattern
    std::size_t height = 64;
    std::size_t width = 64;
    double base_mean = 0.5;
    double base_contrast = 0.2;   // std of the scene field
};

void validate(const SyntheticOptions& opts);

/// Draws fingerprints from `rng`. Uncorrelated: N(0, sigma_f^2) per pixel.
/// Correlated: group pattern N(0, sigma_f^2) per device plus N(0, delta^2)
/// per sensor.
std::vector<SyntheticCameraSpec> make_camera_specs(const SyntheticOptions& opts, Rng& rng);

/// Each image is clamp(base * (1 + fingerprint) + readout, 0, 1).
///
/// base = base_mean + base_contrast * field, where field is i.i.d. N(0,1)
/// noise blurred by the separable 5x5 binomial kernel [1 4 6 4 1]/16 (edges
/// clamped) and rescaled to unit variance; it is redrawn per image and per
/// channel. readout is fresh N(0, sigma_r^2) per pixel.
///
/// One master seed is drawn from `rng`; image k (class-major order) uses
/// Rng::fork(master, k), so images can be produced independently.
std::vector<ImageRecord> generate_synthetic(const std::vector<SyntheticCameraSpec>& specs,
                                            std::size_t images_per_class, Rng& rng,
                                            const SyntheticOptions& opts = {});

/// Scene field alone, exposed for tests.
Tensor smooth_field(std::size_t height, std::size_t width, Rng& rng);

nlohmann::json to_json(const SyntheticOptions& opts);
nlohmann::json to_json(const SyntheticCameraSpec& spec);

}  // namespace scin
