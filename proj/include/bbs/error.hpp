#pragma once

#include <stdexcept>
#include <string>

namespace bbs {

/// Failure categories. The numeric values double as CLI exit codes.
enum class ErrorKind : int {
    schema = 2,     ///< malformed input or parameter out of range
    domain = 3,     ///< input outside the admissible domain of an operation
    internal = 4,   ///< an invariant that should be impossible to break was broken
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string code, const std::string& what)
        : std::runtime_error(what), kind_(kind), code_(std::move(code)) {}

    ErrorKind kind() const noexcept { return kind_; }
    const std::string& code() const noexcept { return code_; }

private:
    ErrorKind kind_;
    std::string code_;
};

inline Error schema_error(const std::string& what) { return {ErrorKind::schema, "SchemaViolation", what}; }
inline Error domain_error(std::string code, const std::string& what) { return {ErrorKind::domain, std::move(code), what}; }
inline Error internal_error(const std::string& what) { return {ErrorKind::internal, "InternalInvariant", what}; }

} // namespace bbs
