#pragma once

#include "vx/core/types.hpp"

namespace vx {

/// Search-time predicate over ids. Must stay pure for the duration of a
/// search call; implementations may be called concurrently.
class IdSelector {
public:
    virtual ~IdSelector() = default;
    virtual bool is_member(idx_t id) const = 0;
};

} // namespace vx
