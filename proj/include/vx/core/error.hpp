#pragma once

#include <stdexcept>
#include <string>

namespace vx {

enum class ErrorKind {
    InvalidArgument,
    DimensionMismatch,
    NotTrained,
    Unsupported,
    NotFound,
    Format,
    Io,
};

inline const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidArgument: return "invalid argument";
        case ErrorKind::DimensionMismatch: return "dimension mismatch";
        case ErrorKind::NotTrained: return "not trained";
        case ErrorKind::Unsupported: return "unsupported";
        case ErrorKind::NotFound: return "not found";
        case ErrorKind::Format: return "format error";
        case ErrorKind::Io: return "i/o error";
    }
    return "error";
}

/// Exception type thrown by every vx component.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

namespace detail {

inline void require(bool cond, ErrorKind kind, const std::string& msg) {
    if (!cond) throw Error(kind, msg);
}

inline void require_arg(bool cond, const std::string& msg) {
    require(cond, ErrorKind::InvalidArgument, msg);
}

inline void require_dim(size_t got, size_t expected, const char* what) {
    if (got != expected) {
        throw Error(ErrorKind::DimensionMismatch,
                    std::string(what) + ": expected d=" + std::to_string(expected) +
                        ", got d=" + std::to_string(got));
    }
}

} // namespace detail
} // namespace vx
