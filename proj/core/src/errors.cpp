#include "tsgen/errors.hpp"

namespace tsgen {

Utf8Error::Utf8Error(const std::string& msg, std::size_t byte_offset)
    : ValidationError(msg + " (byte offset " + std::to_string(byte_offset) + ")"),
      byte_offset_(byte_offset) {}

OutputParseError::OutputParseError(const std::string& msg, std::string raw_output)
    : BackendError(msg), raw_output_(std::move(raw_output)) {}

BudgetError::BudgetError(const std::string& msg, std::size_t minimal_achievable)
    : Error(msg), minimal_achievable_(minimal_achievable) {}

}  // namespace tsgen
