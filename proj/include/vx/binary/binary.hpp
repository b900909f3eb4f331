#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <limits>
#include <memory>
#include <span>
#include <vector>

#include "vx/core/error.hpp"
#include "vx/core/parallel.hpp"
#include "vx/core/serialize.hpp"
#include "vx/core/topk.hpp"
#include "vx/core/types.hpp"

namespace vx {

/// n binary vectors of d bits, packed 8 per byte with component i in bit
/// (i % 8) of byte i / 8.
struct BinaryVectorSet {
    size_t n = 0;
    size_t d = 0;
    std::vector<std::uint8_t> data;

    BinaryVectorSet() = default;
    BinaryVectorSet(size_t n_, size_t d_) : n(n_), d(d_) {
        detail::require_arg(d_ >= 8 && d_ % 8 == 0, "binary dimension must be a positive multiple of 8");
        data.assign(n_ * d_ / 8, 0);
    }
    BinaryVectorSet(size_t n_, size_t d_, std::vector<std::uint8_t> bytes) : BinaryVectorSet(n_, d_) {
        detail::require_arg(bytes.size() == n_ * d_ / 8, "binary data length must equal n*d/8");
        data = std::move(bytes);
    }

    size_t code_size() const { return d / 8; }
    const std::uint8_t* ptr(size_t i) const { return data.data() + i * code_size(); }
    std::uint8_t* ptr(size_t i) { return data.data() + i * code_size(); }
    std::span<const std::uint8_t> row(size_t i) const { return {ptr(i), code_size()}; }

    bool bit(size_t i, size_t j) const { return (ptr(i)[j / 8] >> (j % 8)) & 1u; }

    friend bool operator==(const BinaryVectorSet&, const BinaryVectorSet&) = default;
};

inline int hamming_unchecked(const std::uint8_t* a, const std::uint8_t* b, size_t bytes) {
    int dist = 0;
    size_t i = 0;
    for (; i + 8 <= bytes; i += 8) {
        std::uint64_t x, y;
        std::memcpy(&x, a + i, 8);
        std::memcpy(&y, b + i, 8);
        dist += std::popcount(x ^ y);
    }
    for (; i < bytes; ++i) dist += std::popcount(static_cast<unsigned>(a[i] ^ b[i]));
    return dist;
}

inline int hamming(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
    detail::require(a.size() == b.size(), ErrorKind::DimensionMismatch, "hamming: code lengths differ");
    return hamming_unchecked(a.data(), b.data(), a.size());
}

/// Bit j of vector i is 1 iff x[i][j] > thresholds[j]; thresholds default to
/// zero.
inline BinaryVectorSet binarize(const VectorSet& x, std::span<const float> thresholds = {}) {
    detail::require_arg(x.d % 8 == 0, "binarize requires d to be a multiple of 8 (got " + std::to_string(x.d) + ")");
    detail::require_arg(thresholds.empty() || thresholds.size() == x.d, "binarize: one threshold per dimension");
    BinaryVectorSet out(x.n, x.d);
    parallel_for(x.n, [&](size_t i) {
        const float* v = x.ptr(i);
        std::uint8_t* code = out.ptr(i);
        for (size_t j = 0; j < x.d; ++j) {
            float t = thresholds.empty() ? 0.0f : thresholds[j];
            if (v[j] > t) code[j / 8] |= static_cast<std::uint8_t>(1u << (j % 8));
        }
    });
    return out;
}

/// Per-dimension medians (the lower median for even n).
inline std::vector<float> train_median_thresholds(const VectorSet& x) {
    detail::require_arg(x.n >= 1, "median thresholds need at least one vector");
    std::vector<float> t(x.d);
    parallel_for(x.d, [&](size_t j) {
        std::vector<float> col(x.n);
        for (size_t i = 0; i < x.n; ++i) col[i] = x.ptr(i)[j];
        auto mid = col.begin() + (x.n - 1) / 2;
        std::nth_element(col.begin(), mid, col.end());
        t[j] = *mid;
    });
    return t;
}

/// Exact Hamming k-NN; ties broken by ascending id. Distances are reported
/// as floats holding exact integers.
class BinaryFlatIndex {
public:
    explicit BinaryFlatIndex(size_t d) : codes_(0, d) {}

    size_t d() const { return codes_.d; }
    size_t ntotal() const { return codes_.n; }
    const BinaryVectorSet& codes() const { return codes_; }

    void add(const BinaryVectorSet& x) {
        detail::require_dim(x.d, codes_.d, "binary add");
        codes_.data.insert(codes_.data.end(), x.data.begin(), x.data.end());
        codes_.n += x.n;
    }

    SearchResult search(const BinaryVectorSet& q, size_t k) const {
        detail::require_dim(q.d, codes_.d, "binary search");
        detail::require_arg(k >= 1, "search requires k >= 1");
        const float pad = std::numeric_limits<float>::infinity();
        SearchResult out(q.n, k, pad);
        const size_t cs = codes_.code_size();
        parallel_for(q.n, [&](size_t qi) {
            TopKHeap heap(k, false);
            for (size_t i = 0; i < codes_.n; ++i) {
                heap.push(static_cast<float>(hamming_unchecked(q.ptr(qi), codes_.ptr(i), cs)), static_cast<idx_t>(i));
            }
            heap.write_sorted(out.ids_of(qi), out.distances_of(qi), pad);
        });
        return out;
    }

    void reset() {
        codes_.data.clear();
        codes_.n = 0;
    }

    void write(ByteWriter& w) const {
        w.section("BFLT", [&](ByteWriter& s) {
            s.put<std::uint64_t>(codes_.d);
            s.put<std::uint64_t>(codes_.n);
            s.put_vector(codes_.data);
        });
    }

    static BinaryFlatIndex read(ByteReader& outer) {
        ByteReader r = outer.section("BFLT");
        auto d = r.get<std::uint64_t>();
        auto n = r.get<std::uint64_t>();
        if (d == 0 || d % 8) throw Error(ErrorKind::Format, "bad binary dimension");
        auto bytes = r.get_vector<std::uint8_t>();
        if (bytes.size() != n * d / 8) throw Error(ErrorKind::Format, "binary payload size mismatch");
        BinaryFlatIndex idx(d);
        idx.codes_ = BinaryVectorSet(n, d, std::move(bytes));
        return idx;
    }

private:
    BinaryVectorSet codes_;
};

} // namespace vx
