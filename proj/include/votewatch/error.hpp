#pragma once

#include <stdexcept>
#include <string>

namespace votewatch {

// Bad arguments or malformed data. The CLI maps this to exit status 2.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Arguments are individually valid but the requested quantity does not exist
// (infeasible (p0, p') pair for a case, limit undefined, ...). Exit status 3.
class InfeasibleError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

namespace detail {

inline void require(bool ok, const std::string& what) {
    if (!ok) throw InputError(what);
}

inline bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }
inline bool is_open_probability(double p) { return p > 0.0 && p < 1.0; }

} // namespace detail
} // namespace votewatch
