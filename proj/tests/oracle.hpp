#pragma once

// Reference computations used only by the tests. Nothing here calls into the
// library or Boost: the t distribution comes from a continued-fraction
// incomplete beta, posterior masses from Simpson quadrature, and every
// inverse from plain bisection.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

namespace oracle {

struct Summary {
    double mean;
    double sd;
    int n;
    double se() const { return sd / std::sqrt(static_cast<double>(n)); }
};

// Regularized incomplete beta I_x(a, b), modified Lentz.
inline double beta_cf(double x, double a, double b) {
    const double tiny = 1e-300;
    double c = 1.0;
    double d = 1.0 - (a + b) * x / (a + 1.0);
    if (std::abs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m < 10000; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((a + m2 - 1.0) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (a + b + m) * x / ((a + m2) * (a + m2 + 1.0));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-15) break;
    }
    return h;
}

inline double inc_beta(double x, double a, double b) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double lbt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
                       b * std::log1p(-x);
    const double bt = std::exp(lbt);
    if (x < (a + 1.0) / (a + b + 2.0)) return bt * beta_cf(x, a, b) / a;
    return 1.0 - bt * beta_cf(1.0 - x, b, a) / b;
}

inline double t_cdf(double t, double nu) {
    const double x = nu / (nu + t * t);
    const double tail = 0.5 * inc_beta(x, nu / 2.0, 0.5);
    return t >= 0.0 ? 1.0 - tail : tail;
}

inline double t_pdf(double t, double nu) {
    const double lc = std::lgamma((nu + 1.0) / 2.0) - std::lgamma(nu / 2.0) - 0.5 * std::log(nu * M_PI);
    return std::exp(lc - (nu + 1.0) / 2.0 * std::log1p(t * t / nu));
}

template <typename F>
double bisect(F f, double lo, double hi, double target, int iterations = 200) {
    // f increasing
    for (int i = 0; i < iterations; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (f(mid) < target) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

inline double t_quantile(double p, double nu) {
    return bisect([nu](double t) { return t_cdf(t, nu); }, -1e4, 1e4, p);
}

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

inline double normal_quantile(double p) {
    return bisect(normal_cdf, -40.0, 40.0, p);
}

// Composite Simpson on [a, b] with an even number of intervals.
inline double simpson(const std::function<double(double)>& f, double a, double b, int intervals) {
    if (intervals % 2) ++intervals;
    const double h = (b - a) / intervals;
    double s = f(a) + f(b);
    for (int i = 1; i < intervals; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

// Textbook Welch test, two-tailed.
inline double welch_df(const Summary& x, const Summary& y) {
    const double vx = x.sd * x.sd / x.n;
    const double vy = y.sd * y.sd / y.n;
    return (vx + vy) * (vx + vy) / (vx * vx / (x.n - 1) + vy * vy / (y.n - 1));
}

inline double welch_p(const Summary& x, const Summary& y) {
    const double se = std::sqrt(x.sd * x.sd / x.n + y.sd * y.sd / y.n);
    const double t = (y.mean - x.mean) / se;
    return 2.0 * t_cdf(-std::abs(t), welch_df(x, y));
}

// Two one-sided Welch tests against [lower, upper].
inline double tost_p(const Summary& x, const Summary& y, double lower, double upper) {
    const double se = std::sqrt(x.sd * x.sd / x.n + y.sd * y.sd / y.n);
    const double df = welch_df(x, y);
    const double d = y.mean - x.mean;
    const double p_lower = 1.0 - t_cdf((d - lower) / se, df);  // H0: mu <= lower
    const double p_upper = t_cdf((d - upper) / se, df);        // H0: mu >= upper
    return std::max(p_lower, p_upper);
}

// Posterior of one mean: mean + se * T(n - 1).
inline double posterior_cdf(const Summary& s, double v) {
    return t_cdf((v - s.mean) / s.se(), s.n - 1.0);
}

// Integrate g over the posterior of x's mean (substitution in the standard t).
inline double expect_over_x(const Summary& x, const std::function<double(double)>& g,
                            int intervals = 8000) {
    const double nu = x.n - 1.0;
    const double half = nu < 8 ? 400.0 : 60.0;
    return simpson([&](double s) { return t_pdf(s, nu) * g(x.mean + x.se() * s); }, -half, half,
                   intervals);
}

// P(mu_y - mu_x <= d).
inline double difference_cdf(const Summary& x, const Summary& y, double d) {
    return expect_over_x(x, [&](double u) { return posterior_cdf(y, u + d); });
}

// P(|mu_y - mu_x| <= c).
inline double difference_mass(const Summary& x, const Summary& y, double c) {
    return expect_over_x(x, [&](double u) { return posterior_cdf(y, u + c) - posterior_cdf(y, u - c); });
}

// P(|mu_y - mu_x| <= c |mu_x|), for a control posterior well away from zero.
inline double relative_mass(const Summary& x, const Summary& y, double c) {
    return expect_over_x(x, [&](double u) {
        const double a = u * (1.0 - c);
        const double b = u * (1.0 + c);
        return posterior_cdf(y, std::max(a, b)) - posterior_cdf(y, std::min(a, b));
    });
}

inline double delta_m(const Summary& x, const Summary& y, double alpha) {
    const double hi = std::abs(y.mean - x.mean) + 200.0 * (x.se() + y.se());
    return bisect([&](double c) { return difference_mass(x, y, c); }, 0.0, hi, 1.0 - alpha, 80);
}

inline double r_delta_m(const Summary& x, const Summary& y, double alpha) {
    return bisect([&](double c) { return relative_mass(x, y, c); }, 0.0, 10.0, 1.0 - alpha, 80);
}

// Smallest c (to bisection precision) with #(-c < d <= c) >= (1 - alpha) K on
// the ECDF, solved directly rather than through sorting.
inline double ecdf_bound(std::span<const double> draws, double alpha) {
    const double k = static_cast<double>(draws.size());
    auto share = [&](double c) {
        std::size_t inside = 0;
        for (double d : draws) inside += (d > -c && d <= c) ? 1 : 0;
        return static_cast<double>(inside) / k;
    };
    double hi = 0.0;
    for (double d : draws) hi = std::max(hi, std::abs(d));
    hi = hi * 1.000001 + 1e-300;
    double lo = 0.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (share(mid) >= 1.0 - alpha - 1e-12) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return hi;
}

// Exact binomial upper tail P(X >= k), X ~ Bin(n, 1/2), in log space.
inline double binomial_upper_half(int k, int n) {
    double total = 0.0;
    for (int i = k; i <= n; ++i) {
        total += std::exp(std::lgamma(n + 1.0) - std::lgamma(i + 1.0) - std::lgamma(n - i + 1.0) -
                          n * std::log(2.0));
    }
    return total;
}

// E[T] for a noncentral t with noncentrality delta and nu df.
inline double noncentral_t_mean(double delta, double nu) {
    return delta * std::sqrt(nu / 2.0) * std::exp(std::lgamma((nu - 1.0) / 2.0) - std::lgamma(nu / 2.0));
}

inline double mean(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

}  // namespace oracle
