#pragma once

#include <cmath>
#include <limits>

namespace nsinfo {

// Extended real: a double restricted to {finite, +inf, -inf}.
// Entropies and leakages live here; log(0) is exactly -inf.
struct ExtReal {
    double v = 0.0;

    ExtReal() = default;
    explicit constexpr ExtReal(double x) : v(x) {}

    static constexpr ExtReal pos_inf() { return ExtReal(std::numeric_limits<double>::infinity()); }
    static constexpr ExtReal neg_inf() { return ExtReal(-std::numeric_limits<double>::infinity()); }

    static ExtReal log_measure(double m) {
        return m > 0.0 ? ExtReal(std::log(m)) : neg_inf();
    }

    bool finite() const { return std::isfinite(v); }
    bool is_pos_inf() const { return std::isinf(v) && v > 0; }
    bool is_neg_inf() const { return std::isinf(v) && v < 0; }

    friend bool operator==(ExtReal a, ExtReal b) { return a.v == b.v; }
    friend bool operator<(ExtReal a, ExtReal b) { return a.v < b.v; }
    friend bool operator<=(ExtReal a, ExtReal b) { return a.v <= b.v; }
    friend bool operator>(ExtReal a, ExtReal b) { return a.v > b.v; }
    friend bool operator>=(ExtReal a, ExtReal b) { return a.v >= b.v; }
};

// a - b with the convention that two infinities of the same sign cancel to 0.
// That case only arises for degenerate (measure-zero) domains, where the
// difference of two identical -inf entropies is taken to carry no information.
inline ExtReal ext_sub(ExtReal a, ExtReal b) {
    if (!a.finite() && !b.finite() && a.v == b.v) return ExtReal(0.0);
    return ExtReal(a.v - b.v);
}

inline ExtReal ext_min(ExtReal a, ExtReal b) { return a.v <= b.v ? a : b; }
inline ExtReal ext_max(ExtReal a, ExtReal b) { return a.v >= b.v ? a : b; }

// Certified enclosure of an extended-real quantity: lo from the inner
// approximation, hi from the outer one.
struct ExtInterval {
    ExtReal lo, hi;

    ExtInterval() = default;
    ExtInterval(ExtReal l, ExtReal h) : lo(l), hi(h) {}
    static ExtInterval exact(ExtReal x) { return {x, x}; }

    bool is_exact() const { return lo.v == hi.v; }
    double width() const { return hi.v - lo.v; }

    // Best single representative: the midpoint when both ends are finite,
    // otherwise the finite end (an unresolved infinity stays an enclosure
    // bound, not the estimate).
    ExtReal nominal() const {
        if (lo.v == hi.v) return lo;
        if (lo.finite() && hi.finite()) return ExtReal(0.5 * (lo.v + hi.v));
        if (hi.finite()) return hi;
        if (lo.finite()) return lo;
        return lo; // -inf..+inf: fully unresolved
    }
};

// Certified enclosure of a nonnegative real (distances, measures, quality).
struct CertInterval {
    double lo = 0.0, hi = 0.0;

    CertInterval() = default;
    CertInterval(double l, double h) : lo(l), hi(h) {}
    static CertInterval exact(double x) { return {x, x}; }

    double mid() const {
        if (lo == hi) return lo;
        if (std::isinf(hi)) return lo;
        return 0.5 * (lo + hi);
    }
    double width() const { return hi - lo; }
    bool contains(double x) const { return lo <= x && x <= hi; }
};

} // namespace nsinfo
