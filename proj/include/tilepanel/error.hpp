#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tilepanel {

/// Raised when caller-supplied data violates an operation's preconditions
/// (degenerate images, malformed bundles, mismatched variants, ...).
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class ParseErrc {
    io,
    bad_magic,
    version_mismatch,
    bad_header,
    truncated,
    trailing_data,
    non_finite,
};

constexpr std::string_view to_string(ParseErrc code) noexcept {
    switch (code) {
    case ParseErrc::io: return "io";
    case ParseErrc::bad_magic: return "bad magic";
    case ParseErrc::version_mismatch: return "version mismatch";
    case ParseErrc::bad_header: return "bad header";
    case ParseErrc::truncated: return "truncated payload";
    case ParseErrc::trailing_data: return "trailing data";
    case ParseErrc::non_finite: return "non-finite score";
    }
    return "unknown";
}

/// Failure while decoding an on-disk artifact. `code()` distinguishes the cause.
class ParseError : public std::runtime_error {
public:
    ParseError(ParseErrc code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ParseErrc code() const noexcept { return code_; }

private:
    ParseErrc code_;
};

} // namespace tilepanel
