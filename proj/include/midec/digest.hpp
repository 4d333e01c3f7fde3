#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

namespace midec {

// CRC-64/XZ (reflected, poly 0x42F0E1EBA9EA3693). Used as the integrity
// digest of dataset blocks and checkpoint payloads; detects any single-bit
// corruption.
class Crc64 {
public:
    Crc64() { init_table(); }

    std::uint64_t compute(const void* data, std::size_t len) const {
        const auto* p = static_cast<const unsigned char*>(data);
        std::uint64_t crc = ~std::uint64_t{0};
        for (std::size_t i = 0; i < len; ++i) {
            crc = table_[(crc ^ p[i]) & 0xFF] ^ (crc >> 8);
        }
        return ~crc;
    }

private:
    void init_table() {
        // reflected form of the ECMA-182 polynomial
        const std::uint64_t poly = 0xC96C5795D7870F42ULL;
        for (std::uint64_t i = 0; i < 256; ++i) {
            std::uint64_t c = i;
            for (int k = 0; k < 8; ++k) {
                c = (c & 1) ? poly ^ (c >> 1) : (c >> 1);
            }
            table_[i] = c;
        }
    }

    std::uint64_t table_[256];
};

inline std::uint64_t crc64(const void* data, std::size_t len) {
    static const Crc64 instance;
    return instance.compute(data, len);
}

std::string to_hex_u64(std::uint64_t v);
std::uint64_t parse_hex_u64(const std::string& s);

} // namespace midec
