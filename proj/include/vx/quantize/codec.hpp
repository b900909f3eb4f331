#pragma once

#include <cstdint>
#include <cstring>
#include <memory>
#include <string>
#include <vector>

#include "vx/core/distance.hpp"
#include "vx/core/error.hpp"
#include "vx/core/metric.hpp"
#include "vx/core/parallel.hpp"
#include "vx/core/serialize.hpp"
#include "vx/core/types.hpp"

namespace vx {

/// Distance between one query and many codes. Instances are per-thread.
class CodeDistance {
public:
    virtual ~CodeDistance() = default;
    virtual void set_query(const float* q) = 0;
    virtual float operator()(const std::uint8_t* code) = 0;
};

/// Trained vector encoder/decoder producing fixed-size byte codes.
class Codec {
public:
    explicit Codec(size_t d) : d_(d) { detail::require_arg(d >= 1, "codec dimension must be >= 1"); }
    virtual ~Codec() = default;

    size_t d() const { return d_; }
    virtual size_t code_size() const = 0;
    bool is_trained() const { return is_trained_; }

    virtual void train(const VectorSet& x) = 0;

    /// Single-vector primitives, no argument checks. `code` is zeroed by the caller.
    virtual void encode_one(const float* x, std::uint8_t* code) const = 0;
    virtual void decode_one(const std::uint8_t* code, float* x) const = 0;

    std::vector<std::uint8_t> compute_codes(const VectorSet& x) const {
        check_ready(x.d);
        const size_t cs = code_size();
        std::vector<std::uint8_t> codes(x.n * cs, 0);
        parallel_for(x.n, [&](size_t i) { encode_one(x.ptr(i), codes.data() + i * cs); });
        return codes;
    }

    VectorSet decode(std::span<const std::uint8_t> codes) const {
        detail::require(is_trained_, ErrorKind::NotTrained, "codec is not trained");
        const size_t cs = code_size();
        detail::require_arg(cs == 0 ? codes.empty() : codes.size() % cs == 0,
                            "code buffer length must be a multiple of code_size");
        size_t n = cs ? codes.size() / cs : 0;
        VectorSet out(n, d_);
        parallel_for(n, [&](size_t i) { decode_one(codes.data() + i * cs, out.ptr(i)); });
        return out;
    }

    /// Distance computer for `metric`. The default decodes each code and
    /// evaluates the metric exactly; codecs with lookup tables override it.
    virtual std::unique_ptr<CodeDistance> distance_computer(Metric metric) const;

    virtual void write(ByteWriter& w) const = 0;
    virtual std::string type_name() const = 0;

protected:
    void check_ready(size_t d) const {
        detail::require(is_trained_, ErrorKind::NotTrained, type_name() + " is not trained");
        detail::require_dim(d, d_, type_name().c_str());
    }

    size_t d_;
    bool is_trained_ = false;
};

namespace detail {

class DecodingDistance : public CodeDistance {
public:
    DecodingDistance(const Codec& codec, Metric metric)
        : codec_(codec), metric_(metric), q_(codec.d()), buf_(codec.d()) {}

    void set_query(const float* q) override { std::copy(q, q + q_.size(), q_.begin()); }

    float operator()(const std::uint8_t* code) override {
        codec_.decode_one(code, buf_.data());
        return distance_unchecked(q_.data(), buf_.data(), q_.size(), metric_);
    }

private:
    const Codec& codec_;
    Metric metric_;
    std::vector<float> q_;
    std::vector<float> buf_;
};

} // namespace detail

inline std::unique_ptr<CodeDistance> Codec::distance_computer(Metric metric) const {
    return std::make_unique<detail::DecodingDistance>(*this, metric);
}

/// Stores vectors verbatim as 4*d bytes; the encoding of IVF-Flat.
class RawCodec : public Codec {
public:
    explicit RawCodec(size_t d) : Codec(d) { is_trained_ = true; }

    size_t code_size() const override { return d_ * sizeof(float); }
    void train(const VectorSet&) override {}
    void encode_one(const float* x, std::uint8_t* code) const override {
        std::memcpy(code, x, code_size());
    }
    void decode_one(const std::uint8_t* code, float* x) const override {
        std::memcpy(x, code, code_size());
    }

    std::unique_ptr<CodeDistance> distance_computer(Metric metric) const override;

    void write(ByteWriter& w) const override {
        w.section("RAWC", [&](ByteWriter& s) { s.put<std::uint64_t>(d_); });
    }
    std::string type_name() const override { return "RawCodec"; }
};

namespace detail {

class RawDistance : public CodeDistance {
public:
    RawDistance(size_t d, Metric metric) : metric_(metric), q_(d), buf_(d) {}
    void set_query(const float* q) override { std::copy(q, q + q_.size(), q_.begin()); }
    float operator()(const std::uint8_t* code) override {
        // Codes inside list buffers carry no alignment guarantee.
        std::memcpy(buf_.data(), code, buf_.size() * sizeof(float));
        return distance_unchecked(q_.data(), buf_.data(), q_.size(), metric_);
    }

private:
    Metric metric_;
    std::vector<float> q_;
    std::vector<float> buf_;
};

} // namespace detail

inline std::unique_ptr<CodeDistance> RawCodec::distance_computer(Metric metric) const {
    return std::make_unique<detail::RawDistance>(d_, metric);
}

/// Mean over x of the squared reconstruction error.
inline double codec_mse(const Codec& codec, const VectorSet& x) {
    detail::require_arg(x.n >= 1, "codec_mse needs at least one vector");
    auto codes = codec.compute_codes(x);
    VectorSet rec = codec.decode(codes);
    std::vector<double> err(x.n);
    parallel_for(x.n, [&](size_t i) {
        double s = 0.0;
        for (size_t j = 0; j < x.d; ++j) {
            double t = static_cast<double>(x.ptr(i)[j]) - rec.ptr(i)[j];
            s += t * t;
        }
        err[i] = s;
    });
    double total = 0.0;
    for (double e : err) total += e;
    return total / static_cast<double>(x.n);
}

} // namespace vx
