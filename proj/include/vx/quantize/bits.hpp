#pragma once

#include <bit>
#include <cstdint>

namespace vx {

/// ceil(log2 k), with 0 bits for k <= 1.
inline unsigned bits_for(std::uint64_t k) {
    return k <= 1 ? 0u : static_cast<unsigned>(std::bit_width(k - 1));
}

inline size_t bytes_for_bits(size_t bits) { return (bits + 7) / 8; }

/// Packs fixed-width fields LSB-first into a zero-initialized byte buffer.
class BitWriter {
public:
    explicit BitWriter(std::uint8_t* out) : out_(out) {}

    void write(std::uint64_t value, unsigned nbits) {
        for (unsigned i = 0; i < nbits; ++i, ++pos_) {
            if ((value >> i) & 1u) out_[pos_ >> 3] |= static_cast<std::uint8_t>(1u << (pos_ & 7));
        }
    }

private:
    std::uint8_t* out_;
    size_t pos_ = 0;
};

class BitReader {
public:
    explicit BitReader(const std::uint8_t* in) : in_(in) {}

    std::uint64_t read(unsigned nbits) {
        std::uint64_t v = 0;
        for (unsigned i = 0; i < nbits; ++i, ++pos_) {
            v |= static_cast<std::uint64_t>((in_[pos_ >> 3] >> (pos_ & 7)) & 1u) << i;
        }
        return v;
    }

private:
    const std::uint8_t* in_;
    size_t pos_ = 0;
};

} // namespace vx
