#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace mrb {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class LengthMismatch : public Error {
public:
    using Error::Error;
};

class IndexOutOfRange : public Error {
public:
    using Error::Error;
};

/// Modulation indices outside the feasible region of the duration algebra.
class InvalidIndices : public Error {
public:
    using Error::Error;
};

/// A bridge-state pair that cannot arise from the stated md2 sign.
class InconsistentState : public Error {
public:
    using Error::Error;
};

class InconsistentTopology : public Error {
public:
    using Error::Error;
};

class NonPositiveDifferentialInductance : public Error {
public:
    using Error::Error;
};

class DegenerateDenominator : public Error {
public:
    using Error::Error;
};

class DemandExceedsCapability : public Error {
public:
    using Error::Error;
};

class TripLimitExceeded : public Error {
public:
    using Error::Error;
};

class NonFiniteState : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    using Error::Error;
};

/// Carries every violated invariant, each with a field path.
class ValidationError : public Error {
public:
    explicit ValidationError(std::vector<std::string> violations)
        : Error(join(violations)), violations_(std::move(violations)) {}

    [[nodiscard]] const std::vector<std::string>& violations() const { return violations_; }

private:
    static std::string join(const std::vector<std::string>& v) {
        std::string out = "configuration invalid:";
        for (const auto& s : v) {
            out += "\n  - " + s;
        }
        return out;
    }

    std::vector<std::string> violations_;
};

} // namespace mrb
