#ifndef RISKROUTE_ERRORS_HPP
#define RISKROUTE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace riskroute {

// Malformed graph, path, or flow (bad ids, disconnected terminals, ...).
class StructuralError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Raised by enumerate_paths when the simple-path count exceeds the cap.
class PathCapExceeded : public StructuralError {
public:
    using StructuralError::StructuralError;
};

// A numeric parameter outside its admissible range.
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Instance / oracle / report text that does not parse.
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace riskroute

#endif
