#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace subsql {

// Error taxonomy. The CLI maps these onto process exit codes:
// bad arguments/configuration -> 2, numerical failures -> 3, I/O -> 4.
class error : public std::runtime_error {
public:
    explicit error(const std::string& what) : std::runtime_error(what) {}
};

// An operation received a value outside its precondition.
class arg_error : public error {
public:
    using error::error;
};

// A stack fails a structural precondition (layer count, ordering).
class stack_error : public arg_error {
public:
    using arg_error::arg_error;
};

// A configuration document or option set was rejected.
class config_error : public error {
public:
    using error::error;
};

// A numerical routine failed (eigensolver breakdown, non-finite objective).
class numeric_error : public error {
public:
    using error::error;
};

// An objective returned a non-finite value; carries the offending point.
class eval_error : public numeric_error {
public:
    eval_error(const std::string& what, std::vector<double> at)
        : numeric_error(what), point(std::move(at)) {}
    std::vector<double> point;
};

// File system or stream failure.
class io_error : public error {
public:
    using error::error;
};

} // namespace subsql
