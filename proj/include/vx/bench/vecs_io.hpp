#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "vx/core/error.hpp"
#include "vx/core/types.hpp"
#include "vx/factory/index_io.hpp"

namespace vx {

/// Row-major int32 matrix, the payload of .ivecs files.
struct IdMatrix {
    size_t n = 0;
    size_t d = 0;
    std::vector<std::int32_t> data;

    const std::int32_t* ptr(size_t i) const { return data.data() + i * d; }
    friend bool operator==(const IdMatrix&, const IdMatrix&) = default;
};

enum class VecsKind { Fvecs, Bvecs, Ivecs };

namespace detail {

/// Records are [int32 d][d elements of elem_size bytes], little-endian.
template <class Elem, class Store>
void parse_vecs(const std::vector<std::uint8_t>& bytes, size_t& n, size_t& d, Store& out) {
    size_t pos = 0, rec = 0;
    n = 0;
    d = 0;
    while (pos < bytes.size()) {
        if (bytes.size() - pos < 4) throw Error(ErrorKind::Format, "truncated header in record " + std::to_string(rec));
        std::int32_t dim;
        std::memcpy(&dim, bytes.data() + pos, 4);
        pos += 4;
        if (dim <= 0) throw Error(ErrorKind::Format, "non-positive dimension in record " + std::to_string(rec));
        if (rec == 0) d = static_cast<size_t>(dim);
        else if (static_cast<size_t>(dim) != d) {
            throw Error(ErrorKind::Format, "record " + std::to_string(rec) + " has dimension " + std::to_string(dim) +
                                               ", expected " + std::to_string(d));
        }
        size_t len = d * sizeof(Elem);
        if (bytes.size() - pos < len) throw Error(ErrorKind::Format, "truncated payload in record " + std::to_string(rec));
        for (size_t j = 0; j < d; ++j) {
            Elem e;
            std::memcpy(&e, bytes.data() + pos + j * sizeof(Elem), sizeof(Elem));
            out.push_back(e);
        }
        pos += len;
        ++rec;
    }
    n = rec;
}

template <class Elem, class Get>
std::vector<std::uint8_t> format_vecs(size_t n, size_t d, Get get) {
    std::vector<std::uint8_t> bytes;
    bytes.reserve(n * (4 + d * sizeof(Elem)));
    auto dim = static_cast<std::int32_t>(d);
    for (size_t i = 0; i < n; ++i) {
        const auto* h = reinterpret_cast<const std::uint8_t*>(&dim);
        bytes.insert(bytes.end(), h, h + 4);
        for (size_t j = 0; j < d; ++j) {
            Elem e = get(i, j);
            const auto* p = reinterpret_cast<const std::uint8_t*>(&e);
            bytes.insert(bytes.end(), p, p + sizeof(Elem));
        }
    }
    return bytes;
}

} // namespace detail

inline VectorSet decode_fvecs(const std::vector<std::uint8_t>& bytes) {
    std::vector<float> data;
    size_t n, d;
    detail::parse_vecs<float>(bytes, n, d, data);
    if (n == 0) return {};
    return VectorSet(n, d, std::move(data));
}

/// bvecs components are widened to float.
inline VectorSet decode_bvecs(const std::vector<std::uint8_t>& bytes) {
    std::vector<std::uint8_t> raw;
    size_t n, d;
    detail::parse_vecs<std::uint8_t>(bytes, n, d, raw);
    if (n == 0) return {};
    return VectorSet(n, d, std::vector<float>(raw.begin(), raw.end()));
}

inline IdMatrix decode_ivecs(const std::vector<std::uint8_t>& bytes) {
    IdMatrix m;
    detail::parse_vecs<std::int32_t>(bytes, m.n, m.d, m.data);
    return m;
}

inline std::vector<std::uint8_t> encode_fvecs(const VectorSet& x) {
    return detail::format_vecs<float>(x.n, x.d, [&](size_t i, size_t j) { return x.ptr(i)[j]; });
}

/// Every component must be an integer in [0, 255].
inline std::vector<std::uint8_t> encode_bvecs(const VectorSet& x) {
    for (float v : x.data) {
        detail::require_arg(v >= 0.0f && v <= 255.0f && std::floor(v) == v, "bvecs components must be integers in [0, 255]");
    }
    return detail::format_vecs<std::uint8_t>(x.n, x.d, [&](size_t i, size_t j) {
        return static_cast<std::uint8_t>(x.ptr(i)[j]);
    });
}

inline std::vector<std::uint8_t> encode_ivecs(const IdMatrix& m) {
    return detail::format_vecs<std::int32_t>(m.n, m.d, [&](size_t i, size_t j) { return m.ptr(i)[j]; });
}

inline VectorSet load_fvecs(const std::string& path) { return decode_fvecs(load_bytes(path)); }
inline VectorSet load_bvecs(const std::string& path) { return decode_bvecs(load_bytes(path)); }
inline IdMatrix load_ivecs(const std::string& path) { return decode_ivecs(load_bytes(path)); }
inline void save_fvecs(const std::string& path, const VectorSet& x) { save_bytes(path, encode_fvecs(x)); }
inline void save_bvecs(const std::string& path, const VectorSet& x) { save_bytes(path, encode_bvecs(x)); }
inline void save_ivecs(const std::string& path, const IdMatrix& m) { save_bytes(path, encode_ivecs(m)); }

/// Loads by file extension (.fvecs, .bvecs).
inline VectorSet load_vectors(const std::string& path) {
    auto ends = [&](const char* ext) {
        std::string e(ext);
        return path.size() >= e.size() && path.compare(path.size() - e.size(), e.size(), e) == 0;
    };
    if (ends(".fvecs")) return load_fvecs(path);
    if (ends(".bvecs")) return load_bvecs(path);
    throw Error(ErrorKind::InvalidArgument, "unknown vector file extension: " + path);
}

inline IdMatrix ids_to_matrix(const SearchResult& r) {
    IdMatrix m{r.nq, r.k, {}};
    m.data.reserve(r.ids.size());
    for (idx_t id : r.ids) m.data.push_back(static_cast<std::int32_t>(id));
    return m;
}

/// Ground-truth matrices carry no distances; those are left at zero.
inline SearchResult matrix_to_ids(const IdMatrix& m) {
    SearchResult r(m.n, m.d, 0.0f);
    for (size_t i = 0; i < m.data.size(); ++i) r.ids[i] = m.data[i];
    return r;
}

} // namespace vx
