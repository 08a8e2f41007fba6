#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace circlab {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ResolutionError : Error {
    using Error::Error;
};

struct PrecisionContext {
    int mantissa_bits = 53;
    double min_resolvable_length = 1e3 * std::ldexp(1.0, -53);

    static PrecisionContext for_bits(int bits)
    {
        if (bits < 53)
            throw Error("precision: mantissa_bits must be >= 53, got " + std::to_string(bits));
        // only IEEE double is backed by the arithmetic in this library
        if (bits != std::numeric_limits<double>::digits)
            throw Error("precision: " + std::to_string(bits) + " bits not supported (double only)");
        PrecisionContext p;
        p.mantissa_bits = bits;
        p.min_resolvable_length = 1e3 * unit_roundoff(bits);
        return p;
    }

    static double unit_roundoff(int bits) { return std::ldexp(1.0, -bits); }
    double unit_roundoff() const { return unit_roundoff(mantissa_bits); }
    double ulp() const { return std::ldexp(1.0, 1 - mantissa_bits); }
};

inline double frac(double x)
{
    if (!std::isfinite(x))
        throw Error("frac: non-finite input");
    double r = x - std::floor(x);
    // x slightly negative can round up to exactly 1
    return r >= 1.0 ? 0.0 : r;
}

/// Length of the positively oriented arc from a to b.
inline double ccw_distance(double a, double b)
{
    return frac(b - a);
}

/// Shorter of the two arcs between a and b.
inline double circle_distance(double a, double b)
{
    double d = ccw_distance(a, b);
    return std::min(d, 1.0 - d);
}

struct Arc {
    double start = 0.0;
    double length = 0.0;

    double end() const { return frac(start + length); }
    bool contains(double x) const { return ccw_distance(start, x) <= length; }
    bool contains_half_open(double x) const { return ccw_distance(start, x) < length; }
};

inline Arc make_arc(double from, double to, const PrecisionContext& prec)
{
    Arc a{frac(from), ccw_distance(from, to)};
    if (a.length < prec.min_resolvable_length)
        throw ResolutionError("arc shorter than min_resolvable_length at " + std::to_string(a.start));
    return a;
}

/// Permutation ordering points by ccw distance from base.
inline std::vector<std::size_t> sort_ccw(const std::vector<double>& points, double base,
                                         const PrecisionContext& prec = {})
{
    std::vector<std::size_t> perm(points.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<double> key(points.size());
    for (std::size_t i = 0; i < points.size(); ++i)
        key[i] = ccw_distance(base, points[i]);
    std::stable_sort(perm.begin(), perm.end(), [&](std::size_t i, std::size_t j) {
        if (key[i] != key[j])
            return key[i] < key[j];
        return points[i] < points[j];
    });
    for (std::size_t k = 0; k + 1 < perm.size(); ++k) {
        if (key[perm[k + 1]] - key[perm[k]] < prec.min_resolvable_length)
            throw ResolutionError("sort_ccw: points " + std::to_string(perm[k]) + " and " +
                                  std::to_string(perm[k + 1]) + " are not resolvable");
    }
    if (perm.size() > 1 && 1.0 - key[perm.back()] + key[perm.front()] < prec.min_resolvable_length)
        throw ResolutionError("sort_ccw: first and last points are not resolvable");
    return perm;
}

} // namespace circlab
