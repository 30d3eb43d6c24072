#pragma once

// Cost functions: densities h on [0, 1] for the fraction pi of voters an
// intervention reaches. Steeper densities make large interventions costlier.
//
// Given the observed post-intervention share p', the cost function yields an
// estimate of the pre-intervention share
//
//   phi(p') = p' / H(1 - p') * integral_0^{1-p'} h(pi) / (1 - pi) dpi,
//
// i.e. E[p' / (1 - pi)] with pi ~ h truncated to the range where the
// recovered p0 = p' / (1 - pi) stays a probability.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <sstream>
#include <string>
#include <string_view>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "error.hpp"

namespace votewatch {

enum class CostFamily { TruncatedExponential, Beta };

class CostFunction {
public:
    CostFunction(CostFamily family, double parameter) : family_(family), parameter_(parameter) {
        detail::require(parameter > 0.0 && std::isfinite(parameter), "cost function parameter must be positive");
        if (family_ == CostFamily::TruncatedExponential) norm_ = -std::expm1(-parameter_);
    }

    static CostFunction truncated_exponential(double rate) { return {CostFamily::TruncatedExponential, rate}; }
    // Beta(1, b).
    static CostFunction beta(double b) { return {CostFamily::Beta, b}; }

    // "texp:30" or "beta:30".
    static CostFunction parse(std::string_view spec) {
        const auto colon = spec.find(':');
        detail::require(colon != std::string_view::npos, "cost function must look like family:parameter");
        const auto family = spec.substr(0, colon);
        const auto value = spec.substr(colon + 1);
        double parameter = 0.0;
        const auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), parameter);
        detail::require(ec == std::errc() && end == value.data() + value.size() && !value.empty(),
                        "cannot parse cost function parameter in '" + std::string(spec) + "'");
        if (family == "texp" || family == "exp") return truncated_exponential(parameter);
        if (family == "beta") return beta(parameter);
        throw InputError("unknown cost family '" + std::string(family) + "' (expected texp or beta)");
    }

    CostFamily family() const { return family_; }
    double parameter() const { return parameter_; }

    std::string to_string() const {
        std::ostringstream os;
        os << (family_ == CostFamily::TruncatedExponential ? "texp:" : "beta:") << parameter_;
        return os.str();
    }

    double pdf(double x) const {
        if (!(x >= 0.0 && x <= 1.0)) return 0.0;
        if (family_ == CostFamily::TruncatedExponential) return parameter_ * std::exp(-parameter_ * x) / norm_;
        if (x == 1.0) return parameter_ == 1.0 ? 1.0 : (parameter_ > 1.0 ? 0.0 : HUGE_VAL);
        return parameter_ * std::pow(1.0 - x, parameter_ - 1.0);
    }

    double cdf(double x) const {
        if (x <= 0.0) return 0.0;
        if (x >= 1.0) return 1.0;
        if (family_ == CostFamily::TruncatedExponential) return -std::expm1(-parameter_ * x) / norm_;
        return -std::expm1(parameter_ * std::log1p(-x));
    }

    // Inverse cdf, for drawing pi from h.
    double quantile(double u) const {
        detail::require(detail::is_probability(u), "quantile level must lie in [0, 1]");
        if (family_ == CostFamily::TruncatedExponential) return std::min(1.0, -std::log1p(-u * norm_) / parameter_);
        return -std::expm1(std::log1p(-u) / parameter_);
    }

    friend bool operator==(const CostFunction&, const CostFunction&) = default;

private:
    CostFamily family_;
    double parameter_;
    double norm_ = 1.0;
};

namespace detail {

// Adaptive Gauss-Kronrod on [a, b]; the integrands used here are smooth.
// Boost's error estimate is very pessimistic on short intervals (1e-8 where
// the actual error is 1e-17), so only finiteness is checked here; accuracy
// is covered by the Riemann-sum oracle tests.
inline double integrate(const std::function<double(double)>& f, double a, double b) {
    if (b <= a) return 0.0;
    const double value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 15, 1e-13);
    if (!std::isfinite(value)) throw InfeasibleError("cost integral is not finite");
    return value;
}

} // namespace detail

inline double phi(const CostFunction& c, double p_prime) {
    detail::require(detail::is_open_probability(p_prime), "phi needs p' in (0, 1)");
    const double upper = 1.0 - p_prime;
    const double mass = c.cdf(upper);
    if (!(mass > 0.0)) throw InfeasibleError("cost function puts no mass on [0, 1 - p']");
    const double integral = detail::integrate([&](double t) { return c.pdf(t) / (1.0 - t); }, 0.0, upper);
    return p_prime * integral / mass;
}

// Central difference of phi; the step shrinks near the boundary of (0, 1).
inline double phi_prime(const CostFunction& c, double p_prime) {
    detail::require(detail::is_open_probability(p_prime), "phi' needs p' in (0, 1)");
    const double step = std::max(1e-6, 1e-4 * p_prime * (1.0 - p_prime));
    detail::require(p_prime - step > 0.0 && p_prime + step < 1.0, "p' too close to the boundary for phi'");
    return (phi(c, p_prime + step) - phi(c, p_prime - step)) / (2.0 * step);
}

// integral_0^{1-p'} (pi0 - pi) / (1 - pi) h(pi) dpi. Zero exactly when the
// cost function's implied estimate phi(p') equals p' / (1 - pi0).
inline double cost_residual(const CostFunction& c, double pi0, double p_prime) {
    detail::require(pi0 >= 0.0 && pi0 < 1.0 && p_prime >= 0.0 && p_prime < 1.0, "pi0 and p' must lie in [0, 1)");
    return detail::integrate([&](double t) { return (pi0 - t) / (1.0 - t) * c.pdf(t); }, 0.0, 1.0 - p_prime);
}

// The p' in (0, p0) with phi(p') = p0: the post-intervention share for which
// the cost function's estimate recovers p0 exactly. phi(p') > p' and phi is
// increasing, so bisection on (0, p0) converges.
inline double phi_inverse(const CostFunction& c, double p0) {
    detail::require(detail::is_open_probability(p0), "p0 must lie in (0, 1)");
    double lo = 1e-12, hi = p0;
    for (int i = 0; i < 60 && hi - lo > 1e-15; ++i) {
        const double mid = 0.5 * (lo + hi);
        (phi(c, mid) < p0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

// The pi0 in [0, 1 - p'] that zeroes the residual. The residual increases in
// pi0, is <= 0 at pi0 = 0 and >= 0 at pi0 = 1 - p'.
inline double cost_residual_root(const CostFunction& c, double p_prime) {
    detail::require(detail::is_open_probability(p_prime), "p' must lie in (0, 1)");
    double lo = 0.0, hi = 1.0 - p_prime;
    for (int i = 0; i < 60 && hi - lo > 1e-15; ++i) {
        const double mid = 0.5 * (lo + hi);
        (cost_residual(c, mid, p_prime) < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace votewatch
