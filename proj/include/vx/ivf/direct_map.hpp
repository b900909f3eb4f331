#pragma once

#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "vx/core/error.hpp"
#include "vx/core/types.hpp"

namespace vx {

/// Maps user ids to (list, offset) slots of an inverted file.
class DirectMap {
public:
    enum class Mode : std::uint8_t { None = 0, Array = 1, Hashtable = 2 };

    struct Slot {
        std::uint32_t list;
        std::uint32_t offset;
        friend bool operator==(const Slot&, const Slot&) = default;
    };

    DirectMap() = default;
    explicit DirectMap(Mode mode) : mode_(mode) {}

    Mode mode() const { return mode_; }
    bool enabled() const { return mode_ != Mode::None; }
    size_t size() const { return live_; }

    /// Array mode indexes slots by id and so requires ids below 2^32; the
    /// hashtable mode accepts any id.
    void add(idx_t id, size_t list, size_t offset) {
        if (!enabled()) return;
        Slot s{static_cast<std::uint32_t>(list), static_cast<std::uint32_t>(offset)};
        if (mode_ == Mode::Array) {
            detail::require_arg(id < (idx_t{1} << 32), "array direct map requires ids < 2^32");
            auto i = static_cast<size_t>(id);
            if (i >= array_.size()) array_.resize(i + 1, kEmpty);
            detail::require_arg(array_[i] == kEmpty, "duplicate id " + std::to_string(id));
            array_[i] = s;
        } else {
            detail::require_arg(table_.emplace(id, s).second, "duplicate id " + std::to_string(id));
        }
        ++live_;
    }

    bool contains(idx_t id) const { return lookup(id).has_value(); }

    std::optional<Slot> lookup(idx_t id) const {
        if (mode_ == Mode::Array) {
            if (id < 0 || static_cast<size_t>(id) >= array_.size() || array_[id] == kEmpty) return std::nullopt;
            return array_[id];
        }
        if (mode_ == Mode::Hashtable) {
            auto it = table_.find(id);
            if (it == table_.end()) return std::nullopt;
            return it->second;
        }
        return std::nullopt;
    }

    void erase(idx_t id) {
        if (mode_ == Mode::Array) {
            if (id >= 0 && static_cast<size_t>(id) < array_.size() && !(array_[id] == kEmpty)) {
                array_[id] = kEmpty;
                --live_;
            }
        } else if (mode_ == Mode::Hashtable) {
            live_ -= table_.erase(id);
        }
    }

    /// Points an already-mapped id at a new slot (after swap-with-last).
    void move(idx_t id, size_t list, size_t offset) {
        Slot s{static_cast<std::uint32_t>(list), static_cast<std::uint32_t>(offset)};
        if (mode_ == Mode::Array) array_.at(id) = s;
        else if (mode_ == Mode::Hashtable) table_.at(id) = s;
    }

    void clear() {
        array_.clear();
        table_.clear();
        live_ = 0;
    }

private:
    static constexpr Slot kEmpty{0xffffffffu, 0xffffffffu};

    Mode mode_ = Mode::None;
    std::vector<Slot> array_;
    std::unordered_map<idx_t, Slot> table_;
    size_t live_ = 0;
};

} // namespace vx
