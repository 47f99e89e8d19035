#include "scin/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <optional>

#include "scin/hash.hpp"

namespace scin {

namespace {

constexpr std::uint8_t magic[4] = {'S', 'C', 'I', 'N'};
constexpr std::size_t prefix_size = 9;
constexpr std::size_t checksum_size = 8;

template <typename U>
void put_le(std::vector<std::uint8_t>& out, U value) {
    for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<std::uint8_t>(value >> (8 * i)));
}

template <typename U>
U get_le(const std::uint8_t* p) {
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(p[i]) << (8 * i);
    return v;
}

}  // namespace

std::string hex64(std::uint64_t value) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i, value >>= 4) s[static_cast<std::size_t>(i)] = digits[value & 0xF];
    return s;
}

std::vector<std::uint8_t> encode_checkpoint(const Network& net) {
    nlohmann::json header;
    header["config"] = to_json(net.config());
    header["input_mean"] = net.input_mean();
    header["parameter_count"] = net.parameter_count();
    auto& params = header["parameters"] = nlohmann::json::array();
    const auto names = net.parameter_names();
    const auto tensors = net.parameters();
    for (std::size_t i = 0; i < names.size(); ++i) {
        params.push_back({{"name", names[i]}, {"shape", tensors[i]->shape()}});
    }
    const std::string text = header.dump();

    std::vector<std::uint8_t> out(std::begin(magic), std::end(magic));
    out.push_back(checkpoint_version);
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(text.size()));
    out.insert(out.end(), text.begin(), text.end());
    out.reserve(out.size() + 4 * net.parameter_count() + checksum_size);
    for (const Tensor* t : tensors) {
        for (float v : t->data()) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(v));
    }
    put_le<std::uint64_t>(out, fnv1a64(out));
    return out;
}

Network decode_checkpoint(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 4 || std::memcmp(bytes.data(), magic, 4) != 0) {
        throw CorruptCheckpointError("magic", "missing SCIN signature");
    }
    if (bytes.size() < 5 || bytes[4] != checkpoint_version) {
        throw CorruptCheckpointError("version", bytes.size() < 5 ? "file ends before version byte"
                                                                 : "unsupported version " +
                                                                       std::to_string(bytes[4]));
    }
    if (bytes.size() < prefix_size) throw CorruptCheckpointError("header_length", "file ends inside prefix");
    const std::uint32_t header_len = get_le<std::uint32_t>(bytes.data() + 5);
    if (bytes.size() < prefix_size + header_len + checksum_size) {
        throw CorruptCheckpointError("header_length", "header length " + std::to_string(header_len) +
                                                          " exceeds file size " + std::to_string(bytes.size()));
    }
    const std::size_t body = bytes.size() - checksum_size;
    const std::uint64_t stored = get_le<std::uint64_t>(bytes.data() + body);
    if (fnv1a64(bytes.first(body)) != stored) {
        throw CorruptCheckpointError("checksum", "stored " + hex64(stored) + " does not match contents");
    }

    nlohmann::json header;
    try {
        header = nlohmann::json::parse(bytes.begin() + prefix_size, bytes.begin() + prefix_size + header_len);
    } catch (const nlohmann::json::exception& e) {
        throw CorruptCheckpointError("header", e.what());
    }

    std::optional<Network> net;
    try {
        net.emplace(architecture_from_json(header.at("config")));
        net->set_input_mean(header.at("input_mean").get<std::vector<float>>());
    } catch (const nlohmann::json::exception& e) {
        throw CorruptCheckpointError("header", e.what());
    } catch (const Error& e) {
        throw CorruptCheckpointError("config", e.what());
    }

    const auto names = net->parameter_names();
    auto tensors = net->parameters();
    try {
        const auto& declared = header.at("parameters");
        if (!declared.is_array() || declared.size() != names.size()) {
            throw CorruptCheckpointError("parameters", "parameter list does not match architecture");
        }
        for (std::size_t i = 0; i < names.size(); ++i) {
            if (declared[i].at("name").get<std::string>() != names[i] ||
                declared[i].at("shape").get<Shape>() != tensors[i]->shape()) {
                throw CorruptCheckpointError("parameters", "entry " + std::to_string(i) + " expected " +
                                                               names[i] + " " +
                                                               shape_to_string(tensors[i]->shape()));
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw CorruptCheckpointError("parameters", e.what());
    }

    const std::size_t payload = body - prefix_size - header_len;
    if (payload != 4 * net->parameter_count()) {
        throw CorruptCheckpointError("payload", "payload holds " + std::to_string(payload) + " bytes, expected " +
                                                    std::to_string(4 * net->parameter_count()));
    }
    const std::uint8_t* p = bytes.data() + prefix_size + header_len;
    for (Tensor* t : tensors) {
        for (float& v : t->data()) {
            v = std::bit_cast<float>(get_le<std::uint32_t>(p));
            p += 4;
        }
    }
    return std::move(*net);
}

void save_checkpoint(const Network& net, const std::filesystem::path& path) {
    const auto bytes = encode_checkpoint(net);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::io, "cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) fail(ErrorKind::io, "failed writing " + path.string());
}

Network load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::io, "cannot open checkpoint " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_checkpoint(bytes);
}

}  // namespace scin
