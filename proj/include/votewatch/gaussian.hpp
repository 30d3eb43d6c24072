#pragma once

// Majority-change probability under the CLT approximation.
//
// With Y_i = (X_i, X_i') the pre/post-intervention opinions of voter i
// (coded +-1), the mean vote margins (Ybar_1, Ybar_2) are approximately
// N2(mu, Sigma / n), and the majority is unchanged iff both margins share a
// sign. same_sign_prob() evaluates that probability with a deterministic
// bivariate-normal orthant quadrature.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include <boost/math/distributions/normal.hpp>

#include "error.hpp"
#include "rng.hpp"
#include "voter_core.hpp"

namespace votewatch {

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

// Upper-a quantile z_a of the standard normal: P(Z > z_a) = a.
inline double normal_upper_quantile(double a) {
    detail::require(detail::is_open_probability(a), "normal quantile level must lie in (0, 1)");
    return boost::math::quantile(boost::math::complement(boost::math::normal_distribution<double>(), a));
}

using Vec2 = std::array<double, 2>;
using Mat2 = std::array<Vec2, 2>;

class GaussianPair {
public:
    GaussianPair(Vec2 mu, Mat2 sigma, std::int64_t n) : mu_(mu), sigma_(sigma), n_(n) {
        detail::require(n >= 1, "Gaussian pair scale n must be positive");
        detail::require(sigma[0][0] >= 0.0 && sigma[1][1] >= 0.0, "covariance diagonal must be nonnegative");
        detail::require(sigma[0][1] == sigma[1][0], "covariance must be symmetric");
        const double s = std::sqrt(sigma[0][0] * sigma[1][1]);
        if (s > 0.0) {
            const double r = sigma[0][1] / s;
            detail::require(std::abs(r) <= 1.0 + 1e-9, "covariance implies |correlation| > 1");
            rho_ = std::clamp(r, -1.0, 1.0);
        }
    }

    const Vec2& mu() const { return mu_; }
    const Mat2& sigma() const { return sigma_; }
    std::int64_t n() const { return n_; }
    // Clamped to [-1, 1]; zero when either marginal is degenerate.
    double rho() const { return rho_; }
    // Standard deviation of component i of N2(mu, sigma / n).
    double sd(int i) const { return std::sqrt(sigma_[i][i] / static_cast<double>(n_)); }

private:
    Vec2 mu_;
    Mat2 sigma_;
    std::int64_t n_;
    double rho_ = 0.0;
};

// Mean and covariance of (X_i, X_i') for the two flipping cases.
inline GaussianPair moments(double p0, double p_prime, InterventionCase c, std::int64_t n = 1) {
    detail::require(detail::is_open_probability(p0) && detail::is_open_probability(p_prime),
                    "p0 and p' must lie in (0, 1)");
    double cross = 0.0;
    switch (c) {
    case InterventionCase::FlipsFirst:
        if (p_prime > p0) throw InfeasibleError("flips-first intervention needs p' <= p0");
        cross = 4.0 * p_prime * (1.0 - p0);
        break;
    case InterventionCase::FlipsSecond:
        if (p_prime < p0) throw InfeasibleError("flips-second intervention needs p' >= p0");
        cross = 4.0 * p0 * (1.0 - p_prime);
        break;
    case InterventionCase::NoFlip:
        throw InputError("moments are defined only for flipping interventions");
    }
    const Vec2 mu{2.0 * p0 - 1.0, 2.0 * p_prime - 1.0};
    const Mat2 sigma{Vec2{4.0 * p0 * (1.0 - p0), cross}, Vec2{cross, 4.0 * p_prime * (1.0 - p_prime)}};
    return GaussianPair(mu, sigma, n);
}

namespace detail {

// 20-point Gauss-Legendre abscissae/weights on [-1, 1], positive half.
inline constexpr std::array<double, 10> gl20_x{
    0.9931285991850949, 0.9639719272779138, 0.9122344282513259, 0.8391169718222188, 0.7463319064601508,
    0.6360536807265150, 0.5108670019508271, 0.3737060887154196, 0.2277858511416451, 0.07652652113349733};
inline constexpr std::array<double, 10> gl20_w{
    0.01761400713915212, 0.04060142980038694, 0.06267204833410906, 0.08327674157670475, 0.1019301198172404,
    0.1181945319615184, 0.1316886384491766, 0.1420961093183821, 0.1491729864726037, 0.1527533871307259};

} // namespace detail

// P(X > h, Y > k) for a standard bivariate normal with correlation r.
// Drezner-Wesolowsky single-integral reduction as refined by Genz (2004),
// always using the 20-point rule; accurate to ~1e-15.
inline double bvn_upper(double h, double k, double r) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    if (std::isinf(h) && h > 0) return 0.0;
    if (std::isinf(k) && k > 0) return 0.0;
    if (std::isinf(h)) return std::isinf(k) ? 1.0 : normal_cdf(-k);
    if (std::isinf(k)) return normal_cdf(-h);
    if (r == 0.0) return normal_cdf(-h) * normal_cdf(-k);

    double hk = h * k;
    double bvn = 0.0;
    if (std::abs(r) < 0.925) {
        const double hs = (h * h + k * k) / 2.0;
        const double asr = std::asin(r) / 2.0;
        for (std::size_t i = 0; i < detail::gl20_x.size(); ++i) {
            for (double sgn : {-1.0, 1.0}) {
                const double sn = std::sin(asr * (1.0 + sgn * detail::gl20_x[i]));
                bvn += detail::gl20_w[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
            }
        }
        bvn = bvn * asr / two_pi + normal_cdf(-h) * normal_cdf(-k);
    } else {
        if (r < 0.0) {
            k = -k;
            hk = -hk;
        }
        if (std::abs(r) < 1.0) {
            const double as = 1.0 - r * r;
            double a = std::sqrt(as);
            const double bs = (h - k) * (h - k);
            const double c = (4.0 - hk) / 8.0;
            const double d = (12.0 - hk) / 80.0;
            double asr = -(bs / as + hk) / 2.0;
            if (asr > -100.0) bvn = a * std::exp(asr) * (1.0 - c * (bs - as) * (1.0 - d * bs) / 3.0 + c * d * as * as);
            if (hk > -100.0) {
                const double b = std::sqrt(bs);
                const double sp = std::sqrt(two_pi) * normal_cdf(-b / a);
                bvn -= std::exp(-hk / 2.0) * sp * b * (1.0 - c * bs * (1.0 - d * bs) / 3.0);
            }
            a /= 2.0;
            double sum = 0.0;
            for (std::size_t i = 0; i < detail::gl20_x.size(); ++i) {
                for (double sgn : {-1.0, 1.0}) {
                    const double xs = std::pow(a * (1.0 + sgn * detail::gl20_x[i]), 2);
                    asr = -(bs / xs + hk) / 2.0;
                    if (asr <= -100.0) continue;
                    const double sp = 1.0 + c * xs * (1.0 + 5.0 * d * xs);
                    const double rs = std::sqrt(1.0 - xs);
                    const double ep = std::exp(-(hk / 2.0) * xs / ((1.0 + rs) * (1.0 + rs))) / rs;
                    sum += detail::gl20_w[i] * std::exp(asr) * (sp - ep);
                }
            }
            bvn = (a * sum - bvn) / two_pi;
        }
        if (r > 0.0) {
            bvn += normal_cdf(-std::max(h, k));
        } else if (h >= k) {
            bvn = -bvn;
        } else {
            const double span = h < 0.0 ? normal_cdf(k) - normal_cdf(h) : normal_cdf(-h) - normal_cdf(-k);
            bvn = span - bvn;
        }
    }
    return std::clamp(bvn, 0.0, 1.0);
}

// P(Z1, Z2 share a sign) for (Z1, Z2) ~ N2(mu, sigma / n). A component that is
// exactly zero has no sign, so it never agrees.
inline double same_sign_prob(const GaussianPair& g) {
    const double s1 = g.sd(0), s2 = g.sd(1);
    const double m1 = g.mu()[0], m2 = g.mu()[1];

    // Point-mass marginals.
    auto sign_prob = [](double m, double s, bool positive) {
        if (s == 0.0) return positive ? (m > 0.0 ? 1.0 : 0.0) : (m < 0.0 ? 1.0 : 0.0);
        return positive ? normal_cdf(m / s) : normal_cdf(-m / s);
    };
    if (s1 == 0.0) return m1 > 0.0 ? sign_prob(m2, s2, true) : (m1 < 0.0 ? sign_prob(m2, s2, false) : 0.0);
    if (s2 == 0.0) return m2 > 0.0 ? sign_prob(m1, s1, true) : (m2 < 0.0 ? sign_prob(m1, s1, false) : 0.0);

    const double a = m1 / s1, b = m2 / s2;
    const double r = g.rho();
    // Near |rho| = 1 the support collapses onto a line: Z = mu + s U (rho = 1)
    // or Z2 = m2 - s2 U (rho = -1).
    if (r > 1.0 - 1e-9) return normal_cdf(std::min(a, b)) + normal_cdf(-std::max(a, b));
    if (r < -1.0 + 1e-9) return std::abs(normal_cdf(b) - normal_cdf(-a));

    return std::clamp(bvn_upper(-a, -b, r) + bvn_upper(a, b, r), 0.0, 1.0);
}

struct MonteCarloEstimate {
    double estimate;
    double std_error;
};

// Sampling oracle for same_sign_prob().
inline MonteCarloEstimate mc_same_sign_oracle(const GaussianPair& g, std::int64_t reps, std::uint64_t seed) {
    detail::require(reps >= 1000, "Monte Carlo oracle needs at least 1000 replications");
    const double s1 = g.sd(0), s2 = g.sd(1), r = g.rho();
    const double l21 = r * s2;
    const double l22 = s2 * std::sqrt(std::max(0.0, 1.0 - r * r));
    auto eng = make_engine(seed);
    std::normal_distribution<double> z;
    std::int64_t hits = 0;
    for (std::int64_t i = 0; i < reps; ++i) {
        const double u = z(eng), v = z(eng);
        const double z1 = g.mu()[0] + s1 * u;
        const double z2 = g.mu()[1] + l21 * u + l22 * v;
        hits += (z1 > 0.0 && z2 > 0.0) || (z1 < 0.0 && z2 < 0.0);
    }
    const double f = static_cast<double>(hits) / static_cast<double>(reps);
    return {f, std::sqrt(f * (1.0 - f) / static_cast<double>(reps))};
}

// Large-n limit of the same-sign probability: 1 when the pre- and
// post-intervention majorities agree, 0 otherwise.
inline int asymptotic_sign_class(double p0, double p_prime) {
    detail::require(detail::is_open_probability(p0) && detail::is_open_probability(p_prime),
                    "p0 and p' must lie in (0, 1)");
    if (p0 == 0.5 || p_prime == 0.5) throw InfeasibleError("limit undefined when p0 or p' equals 0.5");
    return (2.0 * p0 - 1.0) * (2.0 * p_prime - 1.0) > 0.0 ? 1 : 0;
}

} // namespace votewatch
