#pragma once

#include <stdexcept>
#include <string>

namespace loadcast {

// Error taxonomy used across the library. The CLI maps kinds to exit codes
// (config -> 2, data/input -> 3, anything else -> 4).
enum class errc {
    config,
    invalid_input,
    data,
    unsupported_input,
    size_cap,
    training,
    io,
};

class Error : public std::runtime_error {
public:
    Error(errc kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    errc kind() const noexcept { return kind_; }

private:
    errc kind_;
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& what) : Error(errc::config, what) {}
};
struct InvalidInputError : Error {
    explicit InvalidInputError(const std::string& what) : Error(errc::invalid_input, what) {}
};
struct DataError : Error {
    explicit DataError(const std::string& what) : Error(errc::data, what) {}
};
// Raised by classification predictors on sketches outside the trained head
// support (the "NA" behaviour on extraneous instance sizes).
struct UnsupportedInputError : Error {
    explicit UnsupportedInputError(const std::string& what) : Error(errc::unsupported_input, what) {}
};
struct SizeCapError : Error {
    explicit SizeCapError(const std::string& what) : Error(errc::size_cap, what) {}
};
struct TrainingError : Error {
    explicit TrainingError(const std::string& what) : Error(errc::training, what) {}
};
struct IoError : Error {
    explicit IoError(const std::string& what) : Error(errc::io, what) {}
};

}  // namespace loadcast
