#pragma once

#include <stdexcept>
#include <string>

namespace mshift {

// Input data that fails structural checks (bad ids, negative demand, ...).
class InvalidInstanceError : public std::runtime_error {
public:
    explicit InvalidInstanceError(const std::string& what) : std::runtime_error(what) {}
};

// No feasible assignment exists (or none was found where exhaustive search is used).
class InfeasibleError : public std::runtime_error {
public:
    explicit InfeasibleError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed external file (JSON instance, location pool, line config).
class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace mshift
