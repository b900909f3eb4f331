#pragma once

#include <cstring>
#include <fstream>
#include <iterator>
#include <memory>
#include <string>
#include <vector>

#include "vx/binary/binary.hpp"
#include "vx/core/refine.hpp"
#include "vx/flat/flat_index.hpp"
#include "vx/graph/hnsw.hpp"
#include "vx/ivf/ivf_index.hpp"
#include "vx/quantize/codec_index.hpp"
#include "vx/transform/pretransform_index.hpp"

namespace vx {

inline constexpr char kIndexMagic[8] = {'V', 'X', 'I', 'D', 'X', '0', '0', '1'};
inline constexpr std::uint32_t kIndexFormatVersion = 1;

namespace detail {

inline void write_header(ByteWriter& w) {
    w.put_bytes(kIndexMagic, sizeof(kIndexMagic));
    w.put<std::uint32_t>(kIndexFormatVersion);
}

inline void read_header(ByteReader& r) {
    if (r.remaining() < sizeof(kIndexMagic)) throw Error(ErrorKind::Format, "bad magic: stream too short");
    char magic[8];
    r.get_bytes(magic, sizeof(magic));
    if (std::memcmp(magic, kIndexMagic, sizeof(magic)) != 0) throw Error(ErrorKind::Format, "bad magic");
    auto version = r.get<std::uint32_t>();
    if (version != kIndexFormatVersion) {
        throw Error(ErrorKind::Format, "unsupported format version " + std::to_string(version));
    }
}

} // namespace detail

/// Reads one index section, dispatching on its tag.
inline std::unique_ptr<Index> read_index_section(ByteReader& r) {
    auto [tag, body] = r.any_section();
    std::unique_ptr<Index> idx;
    SectionReader child = [](ByteReader& rr) { return read_index_section(rr); };
    if (tag == "FLAT") idx = FlatIndex::read_body(body);
    else if (tag == "CODX") idx = CodecFlatIndex::read_body(body);
    else if (tag == "HNSW") idx = HnswIndex::read_body(body);
    else if (tag == "IVFX") idx = IvfIndex::read_body(body, child);
    else if (tag == "PRET") idx = PreTransformIndex::read_body(body, child);
    else if (tag == "RFNE") idx = RefineIndex::read_body(body, child);
    else throw Error(ErrorKind::Format, "unknown index section '" + tag + "'");
    if (body.remaining() != 0) throw Error(ErrorKind::Format, "trailing bytes in section '" + tag + "'");
    return idx;
}

inline std::vector<std::uint8_t> write_index(const Index& index) {
    ByteWriter w;
    detail::write_header(w);
    index.write(w);
    return w.take();
}

inline std::unique_ptr<Index> read_index(const std::vector<std::uint8_t>& bytes) {
    ByteReader r(bytes);
    detail::read_header(r);
    auto idx = read_index_section(r);
    if (r.remaining() != 0) throw Error(ErrorKind::Format, "trailing bytes after index");
    return idx;
}

inline std::vector<std::uint8_t> write_binary_index(const BinaryFlatIndex& index) {
    ByteWriter w;
    detail::write_header(w);
    index.write(w);
    return w.take();
}

inline BinaryFlatIndex read_binary_index(const std::vector<std::uint8_t>& bytes) {
    ByteReader r(bytes);
    detail::read_header(r);
    auto idx = BinaryFlatIndex::read(r);
    if (r.remaining() != 0) throw Error(ErrorKind::Format, "trailing bytes after index");
    return idx;
}

inline void save_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorKind::Io, "cannot open '" + path + "' for writing");
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw Error(ErrorKind::Io, "write to '" + path + "' failed");
}

inline std::vector<std::uint8_t> load_bytes(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorKind::Io, "cannot open '" + path + "'");
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

inline void write_index_file(const Index& index, const std::string& path) { save_bytes(path, write_index(index)); }
inline std::unique_ptr<Index> read_index_file(const std::string& path) { return read_index(load_bytes(path)); }

} // namespace vx
