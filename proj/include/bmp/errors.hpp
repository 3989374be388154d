#pragma once

#include <stdexcept>
#include <string>

namespace bmp {

/// Error kinds surfaced to callers and, through the CLI, as machine-readable
/// records {kind, message}. Kinds are stable strings, not an enum, so new
/// failure modes do not break downstream parsers.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& message)
        : std::runtime_error(message), kind_(std::move(kind)) {}

    [[nodiscard]] const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

[[noreturn]] inline void fail(const std::string& kind, const std::string& message) {
    throw Error(kind, message);
}

namespace errkind {
inline constexpr const char* kIo = "io";
inline constexpr const char* kParse = "parse";
inline constexpr const char* kInvariant = "invariant";
inline constexpr const char* kCapExceeded = "cap_exceeded";
inline constexpr const char* kReducible = "reducible";
inline constexpr const char* kNonSimpleLeading = "non_simple_leading";
inline constexpr const char* kNotInResolventSet = "not_in_resolvent_set";
inline constexpr const char* kNotSupercritical = "not_supercritical";
inline constexpr const char* kGridTooCoarse = "grid_too_coarse";
inline constexpr const char* kOverflow = "overflow";
inline constexpr const char* kPopulationOverflow = "population_overflow";
inline constexpr const char* kNonpositiveMoment = "nonpositive_moment";
inline constexpr const char* kUsage = "usage";
}  // namespace errkind

}  // namespace bmp
