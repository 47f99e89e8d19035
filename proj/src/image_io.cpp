#include "scin/image_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <memory>
#include <vector>

#include <jpeglib.h>
#include <png.h>

#include "scin/logging.hpp"

namespace scin {

namespace {

Tensor from_interleaved(const std::vector<std::uint8_t>& rgb, std::size_t h, std::size_t w) {
    Tensor t({3, h, w});
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            for (std::size_t c = 0; c < 3; ++c) {
                t[(c * h + y) * w + x] = static_cast<float>(rgb[(y * w + x) * 3 + c]) / 255.0f;
            }
        }
    }
    return t;
}

std::vector<std::uint8_t> to_interleaved(const Tensor& image) {
    if (image.rank() != 3 || image.dim(0) != 3) {
        fail(ErrorKind::shape_mismatch, "image must be [3,H,W], got " + shape_to_string(image.shape()));
    }
    const std::size_t h = image.dim(1), w = image.dim(2);
    std::vector<std::uint8_t> rgb(3 * h * w);
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            for (std::size_t c = 0; c < 3; ++c) {
                const double v = std::clamp(static_cast<double>(image[(c * h + y) * w + x]), 0.0, 1.0);
                rgb[(y * w + x) * 3 + c] = static_cast<std::uint8_t>(std::lround(v * 255.0));
            }
        }
    }
    return rgb;
}

Tensor read_png(const std::filesystem::path& path) {
    png_image img;
    std::memset(&img, 0, sizeof img);
    img.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&img, path.c_str())) {
        fail(ErrorKind::ingest, "cannot decode PNG " + path.string() + ": " + img.message);
    }
    img.format = PNG_FORMAT_RGB;
    std::vector<std::uint8_t> rgb(PNG_IMAGE_SIZE(img));
    if (!png_image_finish_read(&img, nullptr, rgb.data(), 0, nullptr)) {
        std::string msg = img.message;
        png_image_free(&img);
        fail(ErrorKind::ingest, "cannot decode PNG " + path.string() + ": " + msg);
    }
    return from_interleaved(rgb, img.height, img.width);
}

Tensor read_ppm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    const std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::size_t pos = 2;
    auto bad = [&](const std::string& why) { fail(ErrorKind::ingest, "cannot decode PPM " + path.string() + ": " + why); };
    auto next_number = [&]() -> std::size_t {
        while (pos < bytes.size()) {
            if (bytes[pos] == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
            } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
                ++pos;
            } else {
                break;
            }
        }
        std::size_t v = 0;
        bool any = false;
        while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
            v = v * 10 + static_cast<std::size_t>(bytes[pos++] - '0');
            any = true;
        }
        if (!any) bad("malformed header");
        return v;
    };
    const std::size_t w = next_number();
    const std::size_t h = next_number();
    const std::size_t maxval = next_number();
    if (w == 0 || h == 0) bad("zero dimension");
    if (maxval == 0 || maxval > 255) bad("only 8-bit PPM is supported");
    ++pos;  // single whitespace before raster
    if (bytes.size() < pos + 3 * w * h) bad("truncated raster");
    std::vector<std::uint8_t> rgb(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                                  bytes.begin() + static_cast<std::ptrdiff_t>(pos + 3 * w * h));
    if (maxval != 255) {
        for (auto& v : rgb) v = static_cast<std::uint8_t>(std::lround(v * 255.0 / static_cast<double>(maxval)));
    }
    return from_interleaved(rgb, h, w);
}

struct JpegErrorManager {
    jpeg_error_mgr base;
    std::jmp_buf jump;
    char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo) {
    auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
    (*cinfo->err->format_message)(cinfo, err->message);
    std::longjmp(err->jump, 1);
}

Tensor read_jpeg(const std::filesystem::path& path) {
    std::unique_ptr<std::FILE, int (*)(std::FILE*)> file(std::fopen(path.c_str(), "rb"), &std::fclose);
    if (!file) fail(ErrorKind::ingest, "cannot open " + path.string());
    jpeg_decompress_struct cinfo;
    JpegErrorManager err;
    cinfo.err = jpeg_std_error(&err.base);
    err.base.error_exit = jpeg_error_exit;
    std::vector<std::uint8_t> rgb;
    std::size_t h = 0, w = 0;
    if (setjmp(err.jump)) {
        jpeg_destroy_decompress(&cinfo);
        fail(ErrorKind::ingest, "cannot decode JPEG " + path.string() + ": " + err.message);
    }
    jpeg_create_decompress(&cinfo);
    jpeg_stdio_src(&cinfo, file.get());
    jpeg_read_header(&cinfo, TRUE);
    cinfo.out_color_space = JCS_RGB;
    jpeg_start_decompress(&cinfo);
    h = cinfo.output_height;
    w = cinfo.output_width;
    rgb.resize(3 * h * w);
    while (cinfo.output_scanline < cinfo.output_height) {
        JSAMPROW row = rgb.data() + static_cast<std::size_t>(cinfo.output_scanline) * 3 * w;
        jpeg_read_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);
    return from_interleaved(rgb, h, w);
}

}  // namespace

ImageFormat detect_image_format(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::ingest, "cannot open image " + path.string());
    unsigned char head[8] = {};
    in.read(reinterpret_cast<char*>(head), sizeof head);
    const auto n = in.gcount();
    if (n >= 8 && std::memcmp(head, "\x89PNG\r\n\x1a\n", 8) == 0) return ImageFormat::png;
    if (n >= 2 && head[0] == 'P' && head[1] == '6') return ImageFormat::ppm;
    if (n >= 3 && head[0] == 0xFF && head[1] == 0xD8 && head[2] == 0xFF) return ImageFormat::jpeg;
    return ImageFormat::unknown;
}

Tensor read_image(const std::filesystem::path& path, bool allow_jpeg) {
    switch (detect_image_format(path)) {
    case ImageFormat::png: return read_png(path);
    case ImageFormat::ppm: return read_ppm(path);
    case ImageFormat::jpeg:
        if (!allow_jpeg) {
            fail(ErrorKind::ingest, "JPEG input " + path.string() + " refused (lossy compression perturbs sensor noise; enable explicitly to accept)");
        }
        log_warning("decoding JPEG " + path.string() + "; compression artefacts may mask sensor noise");
        return read_jpeg(path);
    case ImageFormat::unknown: break;
    }
    fail(ErrorKind::ingest, "unsupported image format: " + path.string());
}

void write_png(const std::filesystem::path& path, const Tensor& image) {
    const auto rgb = to_interleaved(image);
    png_image img;
    std::memset(&img, 0, sizeof img);
    img.version = PNG_IMAGE_VERSION;
    img.width = static_cast<png_uint_32>(image.dim(2));
    img.height = static_cast<png_uint_32>(image.dim(1));
    img.format = PNG_FORMAT_RGB;
    if (!png_image_write_to_file(&img, path.c_str(), 0, rgb.data(), 0, nullptr)) {
        fail(ErrorKind::io, "cannot write PNG " + path.string() + ": " + img.message);
    }
}

void write_ppm(const std::filesystem::path& path, const Tensor& image) {
    const auto rgb = to_interleaved(image);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::io, "cannot open " + path.string() + " for writing");
    out << "P6\n" << image.dim(2) << ' ' << image.dim(1) << "\n255\n";
    out.write(reinterpret_cast<const char*>(rgb.data()), static_cast<std::streamsize>(rgb.size()));
    if (!out) fail(ErrorKind::io, "failed writing " + path.string());
}

}  // namespace scin
