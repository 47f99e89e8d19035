#pragma once

#include <filesystem>

#include "scin/tensor.hpp"

namespace scin {

enum class ImageFormat { png, ppm, jpeg, unknown };

/// Sniffs the leading bytes of a file.
ImageFormat detect_image_format(const std::filesystem::path& path);

/// Decodes an 8-bit PNG or binary PPM (P6) into a [3,H,W] tensor scaled to
/// [0,1]. Grayscale is replicated across channels and alpha dropped. JPEG is
/// refused unless `allow_jpeg` is set, since recompression disturbs sensor
/// noise.
Tensor read_image(const std::filesystem::path& path, bool allow_jpeg = false);

/// Quantises a [3,H,W] tensor in [0,1] to 8 bits (round to nearest, clamped).
void write_png(const std::filesystem::path& path, const Tensor& image);
void write_ppm(const std::filesystem::path& path, const Tensor& image);

}  // namespace scin
