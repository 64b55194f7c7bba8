#ifndef CPTCLONE_ERRORS_HPP
#define CPTCLONE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace cptclone {

// Base of everything thrown by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Bad configuration or violated precondition; maps to CLI exit code 2.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(what) {}
};

// Numeric guard tripped at run time; maps to CLI exit code 3.
class NumericGuard : public Error {
public:
    explicit NumericGuard(const std::string& what) : Error(what) {}
};

class DegenerateSteadyState : public NumericGuard {
public:
    explicit DegenerateSteadyState(const std::string& what) : NumericGuard(what) {}
};

class ZeroProbe : public ConfigError {
public:
    explicit ZeroProbe(const std::string& what) : ConfigError(what) {}
};

class BadAnchor : public ConfigError {
public:
    explicit BadAnchor(const std::string& what) : ConfigError(what) {}
};

class GridMismatch : public ConfigError {
public:
    explicit GridMismatch(const std::string& what) : ConfigError(what) {}
};

class TooFine : public ConfigError {
public:
    explicit TooFine(const std::string& what) : ConfigError(what) {}
};

class ZeroVariance : public NumericGuard {
public:
    explicit ZeroVariance(const std::string& what) : NumericGuard(what) {}
};

class NoFringes : public NumericGuard {
public:
    explicit NoFringes(const std::string& what) : NumericGuard(what) {}
};

class NoEdge : public NumericGuard {
public:
    explicit NoEdge(const std::string& what) : NumericGuard(what) {}
};

class ZeroInput : public NumericGuard {
public:
    explicit ZeroInput(const std::string& what) : NumericGuard(what) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(what) {}
};

} // namespace cptclone

#endif
