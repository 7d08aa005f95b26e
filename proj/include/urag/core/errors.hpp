#pragma once

#include <stdexcept>
#include <string>

namespace urag {

// Base of everything thrown by the harness.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Bad value passed by the caller (out-of-range fraction, empty vector, ...).
class ArgumentError : public Error {
public:
    using Error::Error;
};

// Data violates a declared invariant (duplicate ids, answer index out of range).
class IntegrityError : public Error {
public:
    using Error::Error;
};

// Malformed input file; message names the offending line.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

// Failure talking to or interpreting a model backend.
class ProviderError : public Error {
public:
    ProviderError(const std::string& what, int status = 0, bool retryable = false)
        : Error(what), status_(status), retryable_(retryable) {}
    int status() const { return status_; }
    bool retryable() const { return retryable_; }

private:
    int status_;
    bool retryable_;
};

// Backend cannot satisfy a required capability (e.g. token logprobs).
class CapabilityError : public Error {
public:
    using Error::Error;
};

class StrategyError : public Error {
public:
    using Error::Error;
};

class ProtocolError : public Error {
public:
    using Error::Error;
};

// Distractor pipeline failure; carries the raw completion that refused to parse.
class ForgeError : public Error {
public:
    ForgeError(const std::string& what, std::string raw_text)
        : Error(what), raw_text_(std::move(raw_text)) {}
    const std::string& raw_text() const { return raw_text_; }

private:
    std::string raw_text_;
};

class ReportError : public Error {
public:
    using Error::Error;
};

// Invalid configuration; names the offending field path.
class UsageError : public Error {
public:
    UsageError(const std::string& field, const std::string& what)
        : Error("usage error: " + field + ": " + what), field_(field) {}
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

}  // namespace urag

// The error vocabulary is project-wide; alias it into the core namespace so
// submodules can refer to it the same way they refer to core types.
namespace urag::core {
using urag::ArgumentError;
using urag::CapabilityError;
using urag::Error;
using urag::ForgeError;
using urag::IntegrityError;
using urag::ParseError;
using urag::ProtocolError;
using urag::ProviderError;
using urag::ReportError;
using urag::StrategyError;
using urag::UsageError;
}  // namespace urag::core
