#pragma once

#include <cstdint>
#include <cstring>
#include <memory>
#include <vector>

#include "vx/core/error.hpp"
#include "vx/core/serialize.hpp"
#include "vx/core/types.hpp"

namespace vx {

/// Read-only window onto one inverted list. `keepalive` pins whatever
/// buffer the storage materialized for it.
struct ListView {
    size_t size = 0;
    const idx_t* ids = nullptr;
    const std::uint8_t* codes = nullptr;
    std::shared_ptr<const void> keepalive;
};

/// Storage of nlist (id, code) lists. External stores implement this
/// interface to back an IVF index.
class InvertedLists {
public:
    InvertedLists(size_t nlist, size_t code_size) : nlist_(nlist), code_size_(code_size) {}
    virtual ~InvertedLists() = default;

    size_t nlist() const { return nlist_; }
    size_t code_size() const { return code_size_; }

    virtual size_t list_size(size_t list) const = 0;
    virtual ListView read_list(size_t list) const = 0;

    /// Appends one entry and returns its offset in the list.
    virtual size_t append(size_t list, idx_t id, const std::uint8_t* code) = 0;

    /// Removes the entry at `offset` by moving the last entry into its slot.
    /// Returns the id that now occupies `offset`, or kInvalidId when the
    /// removed entry was last.
    virtual idx_t remove_at(size_t list, size_t offset) = 0;

    virtual void clear() = 0;

    /// Bytes occupied by one list when loaded.
    size_t list_bytes(size_t list) const { return list_size(list) * (code_size_ + sizeof(idx_t)); }

    size_t total_size() const {
        size_t s = 0;
        for (size_t l = 0; l < nlist_; ++l) s += list_size(l);
        return s;
    }

    std::vector<size_t> sizes() const {
        std::vector<size_t> s(nlist_);
        for (size_t l = 0; l < nlist_; ++l) s[l] = list_size(l);
        return s;
    }

    /// Forward cursor over one list, fetching ids and codes.
    class Iterator {
    public:
        explicit Iterator(ListView view) : view_(std::move(view)) {}
        bool valid() const { return pos_ < view_.size; }
        void next() { ++pos_; }
        idx_t id() const { return view_.ids[pos_]; }
        const std::uint8_t* code(size_t code_size) const { return view_.codes + pos_ * code_size; }

    private:
        ListView view_;
        size_t pos_ = 0;
    };

    Iterator iterate(size_t list) const { return Iterator(read_list(list)); }

protected:
    void check_list(size_t list) const {
        detail::require_arg(list < nlist_, "inverted list " + std::to_string(list) + " out of range");
    }

    size_t nlist_;
    size_t code_size_;
};

/// In-memory lists with contiguous per-list id and code arrays.
class ArrayInvertedLists : public InvertedLists {
public:
    ArrayInvertedLists(size_t nlist, size_t code_size)
        : InvertedLists(nlist, code_size), ids_(nlist), codes_(nlist) {}

    size_t list_size(size_t list) const override { return ids_[list].size(); }

    ListView read_list(size_t list) const override {
        check_list(list);
        return {ids_[list].size(), ids_[list].data(), codes_[list].data(), nullptr};
    }

    size_t append(size_t list, idx_t id, const std::uint8_t* code) override {
        check_list(list);
        ids_[list].push_back(id);
        codes_[list].insert(codes_[list].end(), code, code + code_size_);
        return ids_[list].size() - 1;
    }

    idx_t remove_at(size_t list, size_t offset) override {
        check_list(list);
        auto& ids = ids_[list];
        auto& codes = codes_[list];
        detail::require_arg(offset < ids.size(), "list offset out of range");
        size_t last = ids.size() - 1;
        idx_t moved = kInvalidId;
        if (offset != last) {
            ids[offset] = ids[last];
            std::memcpy(codes.data() + offset * code_size_, codes.data() + last * code_size_, code_size_);
            moved = ids[offset];
        }
        ids.pop_back();
        codes.resize(last * code_size_);
        return moved;
    }

    void clear() override {
        for (auto& l : ids_) l.clear();
        for (auto& c : codes_) c.clear();
    }

    void write(ByteWriter& w) const {
        w.section("ILST", [&](ByteWriter& s) {
            s.put<std::uint64_t>(nlist_);
            s.put<std::uint64_t>(code_size_);
            for (size_t l = 0; l < nlist_; ++l) {
                s.put_vector(ids_[l]);
                s.put_vector(codes_[l]);
            }
        });
    }

    static std::unique_ptr<ArrayInvertedLists> read(ByteReader& outer) {
        ByteReader r = outer.section("ILST");
        auto nlist = r.get<std::uint64_t>();
        auto cs = r.get<std::uint64_t>();
        if (nlist > r.remaining()) throw Error(ErrorKind::Format, "bad inverted list count");
        auto lists = std::make_unique<ArrayInvertedLists>(nlist, cs);
        for (size_t l = 0; l < nlist; ++l) {
            lists->ids_[l] = r.get_vector<idx_t>();
            lists->codes_[l] = r.get_vector<std::uint8_t>();
            if (lists->codes_[l].size() != lists->ids_[l].size() * cs) {
                throw Error(ErrorKind::Format, "inverted list code length mismatch");
            }
        }
        return lists;
    }

private:
    std::vector<std::vector<idx_t>> ids_;
    std::vector<std::vector<std::uint8_t>> codes_;
};

} // namespace vx
