#pragma once

#include <stdexcept>
#include <string>

namespace mseq {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidParameter : public Error {
public:
    using Error::Error;
};

class InvalidInput : public Error {
public:
    using Error::Error;
};

/// An index function or spectrum could not be evaluated at some index.
class DomainError : public Error {
public:
    DomainError(std::size_t index, const std::string& what)
        : Error("index " + std::to_string(index) + ": " + what), index_(index) {}

    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

class OutOfRange : public Error {
public:
    using Error::Error;
};

class DegenerateOperator : public Error {
public:
    using Error::Error;
};

/// The finite model is too small: the optimal level hit N-1.
class ResolutionError : public Error {
public:
    using Error::Error;
};

class FitError : public Error {
public:
    using Error::Error;
};

class ClassificationError : public Error {
public:
    using Error::Error;
};

} // namespace mseq
