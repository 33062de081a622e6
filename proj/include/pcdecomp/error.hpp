#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pcdecomp {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Precondition violations on caller-supplied arguments.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& source, std::size_t line, const std::string& what)
        : Error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

// Raised when no admissible KZFT window isolates a frequency from its neighbours.
class UnseparableError : public Error {
public:
    UnseparableError(double first, double second, const std::string& what)
        : Error(what), first_(first), second_(second) {}

    double first() const noexcept { return first_; }
    double second() const noexcept { return second_; }

private:
    double first_;
    double second_;
};

} // namespace pcdecomp
