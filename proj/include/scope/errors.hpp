#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace scope {

/// Root of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad configuration, missing inputs or violated preconditions.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Malformed record or model completion that violates its grammar.
class ParseError : public Error {
public:
    explicit ParseError(const std::string& what, std::size_t line = 0)
        : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// A record parsed fine but breaks a domain invariant.
class ValidationError : public Error {
public:
    ValidationError(std::string invariant, std::string subject)
        : Error(invariant + " (" + subject + ")"),
          invariant_(std::move(invariant)),
          subject_(std::move(subject)) {}

    const std::string& invariant() const noexcept { return invariant_; }
    const std::string& subject() const noexcept { return subject_; }

private:
    std::string invariant_;
    std::string subject_;
};

class GatewayError : public Error {
public:
    using Error::Error;
};

/// Transient transport failure (timeouts, 5xx, 429). Retried by the gateway.
class TransportError : public GatewayError {
public:
    using GatewayError::GatewayError;
};

class TransportExhausted : public GatewayError {
public:
    using GatewayError::GatewayError;
};

/// The provider answered but refused the request. Never retried.
class ProviderRejected : public GatewayError {
public:
    using GatewayError::GatewayError;
};

class MockMiss : public GatewayError {
public:
    MockMiss(const std::string& fingerprint)
        : GatewayError("no scripted completion for " + fingerprint), fingerprint_(fingerprint) {}

    const std::string& fingerprint() const noexcept { return fingerprint_; }

private:
    std::string fingerprint_;
};

}  // namespace scope
