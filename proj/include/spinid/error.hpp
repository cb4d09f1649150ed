#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace spinid {

// Runtime error carrying a stable machine-readable kind ("not_infecting",
// "zero_pivot", ...) next to the human-readable message. The CLI maps kinds
// to exit codes and emits them in the error JSON on stderr.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(what), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

}  // namespace spinid
