#pragma once

#include <stdexcept>
#include <string>

namespace hydro {

/// Domain failure carrying a stable, machine-readable reason code
/// (e.g. CONFLICT, UNKNOWN_LOCATION, BAD_RANGE, STORAGE_IO).
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

}  // namespace hydro
