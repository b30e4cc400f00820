#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tsgen {

// Exit codes reported by the CLI. Library errors carry the mapping so the
// tool layer stays a thin switch.
inline constexpr int kExitValidation = 2;
inline constexpr int kExitBackend = 3;
inline constexpr int kExitBudget = 4;

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
    virtual int exit_code() const { return 1; }
};

// Bad input: malformed files, invariant violations, incompatible indices.
class ValidationError : public Error {
public:
    using Error::Error;
    int exit_code() const override { return kExitValidation; }
};

// Malformed UTF-8 input; reports the byte offset of the first bad sequence.
class Utf8Error : public ValidationError {
public:
    Utf8Error(const std::string& msg, std::size_t byte_offset);
    std::size_t byte_offset() const { return byte_offset_; }

private:
    std::size_t byte_offset_;
};

// Remote embedder or LLM backend failure: transport, auth, unusable output.
class BackendError : public Error {
public:
    using Error::Error;
    int exit_code() const override { return kExitBackend; }
};

// Backend output that could not be parsed into a scenario.
class OutputParseError : public BackendError {
public:
    OutputParseError(const std::string& msg, std::string raw_output);
    const std::string& raw_output() const { return raw_output_; }

private:
    std::string raw_output_;
};

// Token budget unmeetable even after dropping all context and requirements.
class BudgetError : public Error {
public:
    BudgetError(const std::string& msg, std::size_t minimal_achievable);
    int exit_code() const override { return kExitBudget; }
    std::size_t minimal_achievable() const { return minimal_achievable_; }

private:
    std::size_t minimal_achievable_;
};

}  // namespace tsgen
