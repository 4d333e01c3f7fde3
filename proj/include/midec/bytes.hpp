#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <stdexcept>
#include <string>
#include <vector>

namespace midec {

// Float blocks are little-endian on disk regardless of host order.
inline std::string floats_to_le_bytes(const std::vector<float>& v) {
    std::string bytes(v.size() * 4, '\0');
    if constexpr (std::endian::native == std::endian::little) {
        std::memcpy(bytes.data(), v.data(), bytes.size());
    } else {
        for (std::size_t i = 0; i < v.size(); ++i) {
            const auto u = std::bit_cast<std::uint32_t>(v[i]);
            bytes[4 * i + 0] = static_cast<char>(u & 0xff);
            bytes[4 * i + 1] = static_cast<char>((u >> 8) & 0xff);
            bytes[4 * i + 2] = static_cast<char>((u >> 16) & 0xff);
            bytes[4 * i + 3] = static_cast<char>((u >> 24) & 0xff);
        }
    }
    return bytes;
}

inline std::vector<float> le_bytes_to_floats(const std::string& bytes) {
    if (bytes.size() % 4 != 0)
        throw std::runtime_error("float block size is not a multiple of 4 bytes");
    std::vector<float> v(bytes.size() / 4);
    if constexpr (std::endian::native == std::endian::little) {
        std::memcpy(v.data(), bytes.data(), bytes.size());
    } else {
        for (std::size_t i = 0; i < v.size(); ++i) {
            const auto u = static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[4 * i])) |
                           (static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[4 * i + 1]))
                            << 8) |
                           (static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[4 * i + 2]))
                            << 16) |
                           (static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[4 * i + 3]))
                            << 24);
            v[i] = std::bit_cast<float>(u);
        }
    }
    return v;
}

} // namespace midec
