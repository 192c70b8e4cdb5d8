#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace tnt {

/// A caller broke a documented precondition (bad argument, size mismatch, ...).
class ContractViolation : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// The network itself is inconsistent (rank chain mismatch, rank-deficient pivots).
class StructuralError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Shapes cannot be broadcast together.
class BroadcastError : public ContractViolation {
public:
    using ContractViolation::ContractViolation;
};

/// Index outside the valid range of a mode.
class IndexError : public ContractViolation {
public:
    using ContractViolation::ContractViolation;
};

/// Fancy (list) indices interleaved with basic indices.
class UnsupportedIndexing : public ContractViolation {
public:
    using ContractViolation::ContractViolation;
};

/// A size guard (memory budget, oracle limits) was exceeded.
class GuardError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// One Kronecker factor of a rank-1 operator is singular.
class SingularFactorError : public std::runtime_error {
public:
    SingularFactorError(std::size_t factor, const std::string& what)
        : std::runtime_error(what), factor_(factor) {}
    std::size_t factor() const noexcept { return factor_; }

private:
    std::size_t factor_;
};

/// A black-box evaluation failed or produced a non-finite value.
class EvaluationError : public std::runtime_error {
public:
    EvaluationError(std::vector<std::int64_t> index, const std::string& what)
        : std::runtime_error(what), index_(std::move(index)) {}
    const std::vector<std::int64_t>& index() const noexcept { return index_; }

private:
    std::vector<std::int64_t> index_;
};

// Container format errors.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class BadMagicError : public FormatError {
public:
    using FormatError::FormatError;
};

class ChecksumError : public FormatError {
public:
    using FormatError::FormatError;
};

class SizeMismatchError : public FormatError {
public:
    using FormatError::FormatError;
};

}  // namespace tnt
