#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace scin {

/// 64-bit FNV-1a. Used for checkpoint integrity and for fingerprinting
/// inputs and fold assignments in reports.
class Fnv1a64 {
public:
    static constexpr std::uint64_t offset_basis = 0xcbf29ce484222325ULL;
    static constexpr std::uint64_t prime = 0x100000001b3ULL;

    void update(std::span<const std::uint8_t> bytes) noexcept {
        for (std::uint8_t b : bytes) {
            state_ ^= b;
            state_ *= prime;
        }
    }
    void update(std::string_view s) noexcept {
        update(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
    }
    std::uint64_t digest() const noexcept { return state_; }

private:
    std::uint64_t state_ = offset_basis;
};

inline std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes) noexcept {
    Fnv1a64 h;
    h.update(bytes);
    return h.digest();
}

std::string hex64(std::uint64_t value);

}  // namespace scin
