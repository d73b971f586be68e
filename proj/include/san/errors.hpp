#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace san {

/// Root of every error the library throws.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class NonConvergence : public Error {
public:
    using Error::Error;
};

class NotStochastic : public Error {
public:
    using Error::Error;
};

class NonUniqueStationary : public Error {
public:
    using Error::Error;
};

class InvalidRange : public Error {
public:
    using Error::Error;
};

class TruncationError : public Error {
public:
    using Error::Error;
};

/// Closed-form optimum is undefined because its bracketed base is not positive.
class NegativeBase : public Error {
public:
    using Error::Error;
};

/// The feasible charging-power interval [1, min(caps)] is empty.
class EmptyFeasible : public Error {
public:
    using Error::Error;
};

/// Carries one message per violated invariant.
class ValidationError : public Error {
public:
    explicit ValidationError(std::vector<std::string> problems)
        : Error(join(problems)), problems_(std::move(problems)) {}

    const std::vector<std::string>& problems() const noexcept { return problems_; }

private:
    static std::string join(const std::vector<std::string>& items)
    {
        std::string out;
        for (const auto& s : items) {
            if (!out.empty())
                out += "; ";
            out += s;
        }
        return out;
    }

    std::vector<std::string> problems_;
};

} // namespace san
