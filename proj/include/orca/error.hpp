#ifndef ORCA_ERROR_HPP
#define ORCA_ERROR_HPP

#include <stdexcept>
#include <string>

namespace orca {

// Base class for all orca errors. Subclasses map onto the failure
// categories surfaced by the public contracts; what() always carries a
// human-readable message naming the offending operation and values.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Tensor extents do not conform (names the primitive and axes).
class ShapeError : public Error {
public:
    explicit ShapeError(const std::string& msg) : Error("shape error: " + msg) {}
};

// An operation's precondition was violated (non-scalar loss, empty soft
// prompt, invalid patch geometry, ...).
class ContractError : public Error {
public:
    explicit ContractError(const std::string& msg) : Error("contract error: " + msg) {}
};

// A coordinate fell outside the configured region or grid.
class RegionError : public Error {
public:
    explicit RegionError(const std::string& msg) : Error("region error: " + msg) {}
};

// A text input did not match the documented schema.
class SchemaError : public Error {
public:
    explicit SchemaError(const std::string& msg) : Error("schema error: " + msg) {}
};

// Timestamps out of order.
class OrderingError : public Error {
public:
    explicit OrderingError(const std::string& msg) : Error("ordering error: " + msg) {}
};

// A binary file failed validation against its declared header or the
// active configuration.
class FormatError : public Error {
public:
    explicit FormatError(const std::string& msg) : Error("format error: " + msg) {}
};

// More items requested than the container can hold (buoys vs. cells,
// tokens vs. max_tokens).
class CapacityError : public Error {
public:
    explicit CapacityError(const std::string& msg) : Error("capacity error: " + msg) {}
};

// A numeric quantity became non-finite outside training.
class NumericError : public Error {
public:
    explicit NumericError(const std::string& msg) : Error("numeric error: " + msg) {}
};

// Training produced a non-finite loss.
class DivergenceError : public Error {
public:
    explicit DivergenceError(const std::string& msg) : Error("divergence error: " + msg) {}
};

// Two datasets that must share a lattice do not.
class AlignmentError : public Error {
public:
    explicit AlignmentError(const std::string& msg) : Error("alignment error: " + msg) {}
};

// Run configuration is unusable (missing file, bad key, inconsistent
// switches).
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error("configuration error: " + msg) {}
};

// I/O failure (unwritable path, short read).
class IoError : public Error {
public:
    explicit IoError(const std::string& msg) : Error("i/o error: " + msg) {}
};

} // namespace orca

#endif
