#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace phaselab {

/// Bad parameters or malformed input data.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A bounded procedure ran out of budget. The attempt count is a valid
/// measurement in its own right (e.g. for rare-instance frequencies).
class ExhaustionError : public std::runtime_error {
public:
    ExhaustionError(const std::string& what, std::uint64_t attempts)
        : std::runtime_error(what), attempts_(attempts) {}

    std::uint64_t attempts() const noexcept { return attempts_; }

private:
    std::uint64_t attempts_;
};

class IoError : public std::runtime_error {
public:
    IoError(const std::string& what, std::string path)
        : std::runtime_error(what + ": " + path), path_(std::move(path)) {}

    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

} // namespace phaselab
