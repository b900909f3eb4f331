#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "vx/quantize/bits.hpp"
#include "vx/quantize/codec.hpp"

namespace vx {

/// Per-dimension uniform quantizer with 2^b levels over the trained
/// [vmin, vmin + vdiff] range, reconstructing at bin centers.
class ScalarCodec : public Codec {
public:
    ScalarCodec(size_t d, unsigned bits) : Codec(d), bits_(bits) {
        detail::require_arg(bits == 4 || bits == 6 || bits == 8, "scalar codec supports 4, 6 or 8 bits");
    }

    unsigned bits() const { return bits_; }
    size_t levels() const { return size_t{1} << bits_; }
    size_t code_size() const override { return bytes_for_bits(d_ * bits_); }
    std::span<const float> vmin() const { return vmin_; }
    std::span<const float> vdiff() const { return vdiff_; }

    void train(const VectorSet& x) override {
        detail::require_dim(x.d, d_, "ScalarCodec::train");
        detail::require_arg(x.n >= 1, "scalar codec training needs data");
        vmin_.assign(d_, std::numeric_limits<float>::infinity());
        std::vector<float> vmax(d_, -std::numeric_limits<float>::infinity());
        for (size_t i = 0; i < x.n; ++i) {
            for (size_t j = 0; j < d_; ++j) {
                vmin_[j] = std::min(vmin_[j], x.ptr(i)[j]);
                vmax[j] = std::max(vmax[j], x.ptr(i)[j]);
            }
        }
        vdiff_.resize(d_);
        for (size_t j = 0; j < d_; ++j) vdiff_[j] = vmax[j] - vmin_[j];
        is_trained_ = true;
    }

    void set_ranges(std::vector<float> vmin, std::vector<float> vdiff) {
        detail::require_arg(vmin.size() == d_ && vdiff.size() == d_, "ranges must have d entries");
        for (float v : vdiff) detail::require_arg(v >= 0.0f, "vdiff must be >= 0");
        vmin_ = std::move(vmin);
        vdiff_ = std::move(vdiff);
        is_trained_ = true;
    }

    std::uint32_t quantize(size_t dim, float v) const {
        if (vdiff_[dim] <= 0.0f) return 0;
        double t = (static_cast<double>(v) - vmin_[dim]) / vdiff_[dim] * static_cast<double>(levels());
        if (!(t > 0.0)) return 0;
        double top = static_cast<double>(levels() - 1);
        return static_cast<std::uint32_t>(std::min(std::floor(t), top));
    }

    /// vmin + (c + 0.5) * vdiff / 2^b
    float reproduction_value(size_t dim, std::uint32_t c) const {
        return static_cast<float>(vmin_[dim] + (static_cast<double>(c) + 0.5) * vdiff_[dim] /
                                                   static_cast<double>(levels()));
    }

    void encode_one(const float* x, std::uint8_t* code) const override {
        BitWriter w(code);
        for (size_t j = 0; j < d_; ++j) w.write(quantize(j, x[j]), bits_);
    }

    void decode_one(const std::uint8_t* code, float* x) const override {
        BitReader r(code);
        for (size_t j = 0; j < d_; ++j) x[j] = reproduction_value(j, static_cast<std::uint32_t>(r.read(bits_)));
    }

    void write(ByteWriter& w) const override {
        w.section("SQNT", [&](ByteWriter& s) {
            s.put<std::uint64_t>(d_);
            s.put<std::uint32_t>(bits_);
            s.put<std::uint8_t>(is_trained_ ? 1 : 0);
            s.put_vector(vmin_);
            s.put_vector(vdiff_);
        });
    }

    static std::unique_ptr<ScalarCodec> read_body(ByteReader& r) {
        auto d = r.get<std::uint64_t>();
        auto bits = r.get<std::uint32_t>();
        bool trained = r.get<std::uint8_t>() != 0;
        auto vmin = r.get_vector<float>();
        auto vdiff = r.get_vector<float>();
        auto c = std::make_unique<ScalarCodec>(d, bits);
        if (trained) {
            if (vmin.size() != d || vdiff.size() != d) throw Error(ErrorKind::Format, "scalar range payload size mismatch");
            c->set_ranges(std::move(vmin), std::move(vdiff));
        }
        return c;
    }

    std::string type_name() const override { return "ScalarCodec"; }

private:
    unsigned bits_;
    std::vector<float> vmin_;
    std::vector<float> vdiff_;
};

} // namespace vx
