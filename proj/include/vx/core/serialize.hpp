#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "vx/core/error.hpp"

namespace vx {

static_assert(std::endian::native == std::endian::little,
              "the index file format is written with little-endian host assumptions");

/// Append-only little-endian byte sink.
class ByteWriter {
public:
    template <class T>
        requires std::is_arithmetic_v<T>
    void put(T v) {
        const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
        bytes_.insert(bytes_.end(), p, p + sizeof(T));
    }

    void put_bytes(const void* data, size_t n) {
        const auto* p = static_cast<const std::uint8_t*>(data);
        bytes_.insert(bytes_.end(), p, p + n);
    }

    void put_tag(std::string_view tag) {
        detail::require_arg(tag.size() == 4, "section tags are four characters");
        put_bytes(tag.data(), 4);
    }

    template <class T>
        requires std::is_arithmetic_v<T>
    void put_vector(const std::vector<T>& v) {
        put<std::uint64_t>(v.size());
        if (!v.empty()) put_bytes(v.data(), v.size() * sizeof(T));
    }

    void put_string(std::string_view s) {
        put<std::uint64_t>(s.size());
        put_bytes(s.data(), s.size());
    }

    /// Writes `tag`, a u64 length placeholder, then whatever `body` emits,
    /// and back-patches the length.
    template <class F>
    void section(std::string_view tag, F&& body) {
        put_tag(tag);
        size_t len_pos = bytes_.size();
        put<std::uint64_t>(0);
        size_t start = bytes_.size();
        body(*this);
        std::uint64_t len = bytes_.size() - start;
        std::memcpy(bytes_.data() + len_pos, &len, sizeof(len));
    }

    const std::vector<std::uint8_t>& bytes() const { return bytes_; }
    std::vector<std::uint8_t> take() { return std::move(bytes_); }

private:
    std::vector<std::uint8_t> bytes_;
};

/// Bounds-checked reader over a byte buffer; every overrun is a Format error.
class ByteReader {
public:
    ByteReader(const std::uint8_t* data, size_t size) : data_(data), size_(size) {}
    explicit ByteReader(const std::vector<std::uint8_t>& v) : ByteReader(v.data(), v.size()) {}

    size_t remaining() const { return size_ - pos_; }
    size_t position() const { return pos_; }

    template <class T>
        requires std::is_arithmetic_v<T>
    T get() {
        need(sizeof(T));
        T v;
        std::memcpy(&v, data_ + pos_, sizeof(T));
        pos_ += sizeof(T);
        return v;
    }

    void get_bytes(void* out, size_t n) {
        need(n);
        std::memcpy(out, data_ + pos_, n);
        pos_ += n;
    }

    std::string get_tag() {
        std::string t(4, '\0');
        get_bytes(t.data(), 4);
        return t;
    }

    void expect_tag(std::string_view tag) {
        std::string t = get_tag();
        if (t != tag) {
            throw Error(ErrorKind::Format,
                        "expected section '" + std::string(tag) + "', found '" + t + "'");
        }
    }

    template <class T>
        requires std::is_arithmetic_v<T>
    std::vector<T> get_vector() {
        auto n = get<std::uint64_t>();
        if (n > remaining() / sizeof(T)) throw Error(ErrorKind::Format, "truncated stream");
        std::vector<T> v(n);
        if (n) get_bytes(v.data(), n * sizeof(T));
        return v;
    }

    std::string get_string() {
        auto n = get<std::uint64_t>();
        need(n);
        std::string s(reinterpret_cast<const char*>(data_ + pos_), n);
        pos_ += n;
        return s;
    }

    /// Reads a `tag` section header and returns a reader bounded to its body.
    ByteReader section(std::string_view tag) {
        expect_tag(tag);
        auto len = get<std::uint64_t>();
        need(len);
        ByteReader sub(data_ + pos_, len);
        pos_ += len;
        return sub;
    }

    /// Reads any section header, returning its tag and body.
    std::pair<std::string, ByteReader> any_section() {
        std::string tag = get_tag();
        auto len = get<std::uint64_t>();
        need(len);
        ByteReader sub(data_ + pos_, len);
        pos_ += len;
        return {tag, sub};
    }

private:
    void need(size_t n) const {
        if (n > size_ - pos_) throw Error(ErrorKind::Format, "truncated stream");
    }

    const std::uint8_t* data_;
    size_t size_;
    size_t pos_ = 0;
};

} // namespace vx
