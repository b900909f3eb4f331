#pragma once

#include <algorithm>
#include <functional>
#include <span>
#include <vector>

#include "vx/core/error.hpp"
#include "vx/core/selector.hpp"

namespace vx {

/// Ids in [lo, hi).
class IdSelectorRange : public IdSelector {
public:
    IdSelectorRange(idx_t lo, idx_t hi) : lo_(lo), hi_(hi) {}
    bool is_member(idx_t id) const override { return id >= lo_ && id < hi_; }

private:
    idx_t lo_, hi_;
};

/// Explicit id set, kept sorted for binary search.
class IdSelectorSet : public IdSelector {
public:
    explicit IdSelectorSet(std::span<const idx_t> ids) : ids_(ids.begin(), ids.end()) {
        std::sort(ids_.begin(), ids_.end());
        ids_.erase(std::unique(ids_.begin(), ids_.end()), ids_.end());
    }
    bool is_member(idx_t id) const override { return std::binary_search(ids_.begin(), ids_.end(), id); }
    size_t size() const { return ids_.size(); }

private:
    std::vector<idx_t> ids_;
};

/// Bit i of the bitmap (LSB-first within each byte) selects id i; ids past
/// the end are rejected.
class IdSelectorBitmap : public IdSelector {
public:
    explicit IdSelectorBitmap(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {}
    bool is_member(idx_t id) const override {
        if (id < 0 || static_cast<size_t>(id) >= bits_.size() * 8) return false;
        return (bits_[static_cast<size_t>(id) >> 3] >> (id & 7)) & 1u;
    }

private:
    std::vector<std::uint8_t> bits_;
};

/// User predicate; must be pure and thread-safe.
class IdSelectorCallback : public IdSelector {
public:
    explicit IdSelectorCallback(std::function<bool(idx_t)> fn) : fn_(std::move(fn)) {
        detail::require_arg(static_cast<bool>(fn_), "selector callback is empty");
    }
    bool is_member(idx_t id) const override { return fn_(id); }

private:
    std::function<bool(idx_t)> fn_;
};

} // namespace vx
