#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

namespace nrpp {

enum class QuadratureScheme { simpson, midpoint };

struct QuadratureRule {
    int panels{4096};
    QuadratureScheme scheme{QuadratureScheme::simpson};

    /// Throws a configuration error unless panels >= 16 and even.
    void validate() const;
};

namespace detail {

/// Splits [lo, hi] at the breakpoints lying strictly inside it.
[[nodiscard]] std::vector<double> piece_edges(double lo, double hi, std::span<const double> breakpoints);

/// Panels for a piece of length `len` out of `total`, at least `minimum`,
/// rounded up to a multiple of `multiple`.
[[nodiscard]] inline int piece_panels(int panels, double len, double total, int minimum, int multiple) {
    const double share = total > 0.0 ? static_cast<double>(panels) * len / total : 0.0;
    int m = static_cast<int>(std::ceil(share - 1e-9));
    m = std::max(m, minimum);
    if (m % multiple != 0) {
        m += multiple - m % multiple;
    }
    return m;
}

/// Offset used to evaluate one-sided limits at a piece edge lying on a breakpoint.
[[nodiscard]] inline double edge_offset(double x) noexcept { return 1e-10 * std::max(1.0, std::abs(x)); }

[[nodiscard]] inline bool on_breakpoint(double x, std::span<const double> breakpoints) noexcept {
    return std::any_of(breakpoints.begin(), breakpoints.end(),
                       [x](double b) { return std::abs(b - x) <= 1e-12 * std::max(1.0, std::abs(x)); });
}

/// Composite Simpson; `fa` and `fb` are the endpoint values.
template <class F>
double simpson(F&& f, double a, double b, int m, double fa, double fb) {
    const double h = (b - a) / m;
    double odd = 0.0;
    double even = 0.0;
    for (int i = 1; i < m; ++i) {
        const double x = a + h * i;
        if (i % 2 == 1) {
            odd += f(x);
        } else {
            even += f(x);
        }
    }
    return h / 3.0 * (fa + fb + 4.0 * odd + 2.0 * even);
}

template <class F>
double simpson(F&& f, double a, double b, int m) {
    return simpson(f, a, b, m, f(a), f(b));
}

template <class F>
double midpoint(F&& f, double a, double b, int m) {
    const double h = (b - a) / m;
    double sum = 0.0;
    for (int i = 0; i < m; ++i) {
        sum += f(a + h * (i + 0.5));
    }
    return h * sum;
}

} // namespace detail

/// Composite quadrature of f over [lo, hi], never straddling a breakpoint.
/// Panels are shared between pieces in proportion to their length. Edges on a
/// breakpoint are evaluated just inside their piece, so a jump contributes its
/// one-sided limits.
template <class F>
double integrate(F&& f, double lo, double hi, std::span<const double> breakpoints = {},
                 const QuadratureRule& rule = {}) {
    if (!(hi > lo)) {
        return 0.0;
    }
    const std::vector<double> edges = detail::piece_edges(lo, hi, breakpoints);
    const double total = hi - lo;
    double sum = 0.0;
    for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
        const double a = edges[k];
        const double b = edges[k + 1];
        if (rule.scheme == QuadratureScheme::simpson) {
            const double fa = f(detail::on_breakpoint(a, breakpoints) ? a + detail::edge_offset(a) : a);
            const double fb = f(detail::on_breakpoint(b, breakpoints) ? b - detail::edge_offset(b) : b);
            sum += detail::simpson(f, a, b, detail::piece_panels(rule.panels, b - a, total, 2, 2), fa, fb);
        } else {
            sum += detail::midpoint(f, a, b, detail::piece_panels(rule.panels, b - a, total, 1, 1));
        }
    }
    return sum;
}

} // namespace nrpp
