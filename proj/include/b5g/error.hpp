#pragma once

#include <stdexcept>
#include <string>

namespace b5g {

// Error kinds surfaced by the library. All derive from std::runtime_error or
// std::invalid_argument so callers can catch broadly.

class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class UnsupportedModel : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InfeasibleAssignment : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class Infeasible : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InternalError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

inline void require(bool cond, const std::string& what) {
    if (!cond) throw InvalidArgument(what);
}

} // namespace b5g
