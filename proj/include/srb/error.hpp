#pragma once

#include <stdexcept>
#include <string>

namespace srb {

enum class ErrorKind {
    argument,        // bad input shape, duplicate points, wrong lengths
    division_by_zero,
    field_mismatch,  // operands from different fields
    decode_failure,  // no codeword within the error budget
    integrity,       // recovered data violates structural invariants
    underflow,       // shard too small to serve a bootstrap
    format,          // malformed serialized state or config
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what)
        , kind_(kind)
    {
    }

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

} // namespace srb
