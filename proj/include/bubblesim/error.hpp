#pragma once

#include <stdexcept>
#include <string>

namespace bubblesim {

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Invalid model or CLI configuration. The message names the offending field path.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(what) {}
};

// No clearing price exists for the given active set.
class ClearingError : public Error {
public:
    explicit ClearingError(const std::string& what) : Error(what) {}
};

// A statistic was requested on data that cannot support it.
class StatsError : public Error {
public:
    explicit StatsError(const std::string& what) : Error(what) {}
};

// Malformed external input (price files, config documents).
class InputError : public Error {
public:
    explicit InputError(const std::string& what) : Error(what) {}
};

} // namespace bubblesim
