#pragma once

#include <stdexcept>
#include <string>

namespace rwdre {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid user input. `path` names the offending field, e.g. "environment.rates.c0".
class ConfigError : public Error {
public:
    ConfigError(std::string path, const std::string& what)
        : Error(path.empty() ? what : path + ": " + what), path_(std::move(path)) {}
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

// A walk or scan needed data outside the simulated window. Replicas that raise
// this are excluded from estimates and counted.
class WindowOverrun : public Error {
public:
    using Error::Error;
};

// An arrow event found no uniform mark left in its site's mark list.
class MarkUnderflow : public Error {
public:
    using Error::Error;
};

// A coupling produced a negative transition rate.
class CouplingError : public Error {
public:
    using Error::Error;
};

// A pathwise order that must hold by construction was broken. Always a bug.
class OrderViolation : public Error {
public:
    using Error::Error;
};

}  // namespace rwdre
