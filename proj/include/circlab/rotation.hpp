#pragma once

#include "cf.hpp"
#include "pmap.hpp"

#include <array>
#include <functional>
#include <numeric>

namespace circlab {

struct PeriodicOrbitError : Error {
    std::int64_t time;
    PeriodicOrbitError(std::int64_t t, const std::string& msg) : Error(msg), time(t) {}
};
struct InconsistencyError : Error {
    using Error::Error;
};
struct DepthUnachievable : Error {
    int max_depth;
    DepthUnachievable(int d, const std::string& msg) : Error(msg), max_depth(d) {}
};
struct CombinatoricsError : Error {
    using Error::Error;
};

enum class RotationMethod { lift_average, return_times };

struct RotationEstimate {
    double estimate = 0.0;
    double error_bound = 0.0;
    bool rational = false;
    std::int64_t p = 0, q = 0;
};

namespace detail {

/// Dynamical convergents of the orbit of xi0, read off combinatorially.
/// One-sided records (new nearest point to xi0 from the cw or ccw side) come in runs
/// q_{n-1} + s q_n, s = 1..k_{n+1}; the last time of each run is q_{n+1}.
/// Stops after n_max confirmed times or max_iter iterations; lift[i] = F^i(xi0) - xi0.
inline std::vector<std::int64_t> convergent_times(const PiecewiseHomeo& f, double xi0, int n_max, std::int64_t max_iter,
                                                  std::vector<double>* lift = nullptr)
{
    const double tol = f.prec.min_resolvable_length;
    xi0 = frac(xi0);
    double x = xi0, cw_best = 2.0, ccw_best = 2.0, acc = 0.0;
    if (lift)
        lift->assign(1, 0.0);
    std::vector<std::int64_t> q;
    int run_side = 0;         // -1 cw, +1 ccw, 0 none yet
    std::int64_t run_end = 1; // last record time of the current run
    std::int64_t step = 0;    // expected spacing inside the current run
    for (std::int64_t i = 1; i <= max_iter; ++i) {
        double d = 0.0;
        x = f.step(x, d);
        acc += d;
        if (lift)
            lift->push_back(acc);
        double ccw = ccw_distance(xi0, x), cw = ccw_distance(x, xi0);
        if (std::min(ccw, cw) < tol)
            throw PeriodicOrbitError(i, "periodic orbit at time " + std::to_string(i));
        if (i == 1) {
            ccw_best = ccw;
            cw_best = cw;
            continue;
        }
        int side = 0;
        if (ccw < ccw_best) {
            ccw_best = ccw;
            side = 1;
        } else if (cw < cw_best) {
            cw_best = cw;
            side = -1;
        }
        if (side == 0)
            continue;
        if (run_side == 0) {
            // time 1 closes the cw run when the first new record is ccw
            if (side == 1)
                q.push_back(1);
            run_side = side;
            run_end = i;
            step = 1;
            if (i != 2)
                throw InconsistencyError("closest returns: first record after time 1 at " + std::to_string(i));
        } else if (side == run_side) {
            if (i - run_end != step)
                throw InconsistencyError("closest returns: record spacing violates the recurrence at time " +
                                         std::to_string(i));
            run_end = i;
        } else {
            q.push_back(run_end);
            std::int64_t prev = q.size() >= 2 ? q[q.size() - 2] : 1;
            if (i != run_end + prev && !(q.size() == 1 && i == run_end + 1))
                throw InconsistencyError("closest returns: run boundary violates the recurrence at time " +
                                         std::to_string(i));
            step = run_end;
            run_side = side;
            run_end = i;
        }
        if (static_cast<int>(q.size()) >= n_max)
            break;
    }
    return q;
}

} // namespace detail

/// Dynamical convergents q_0, ..., q_{n_max-1} of the orbit of xi0.
inline std::vector<std::int64_t> closest_return_times(const PiecewiseHomeo& f, double xi0, int n_max,
                                                      std::int64_t max_iter = 50'000'000)
{
    auto q = detail::convergent_times(f, xi0, n_max, max_iter);
    if (static_cast<int>(q.size()) < n_max)
        throw InconsistencyError("closest_return_times: iteration budget exhausted");
    q.resize(static_cast<std::size_t>(n_max));
    return q;
}

inline RotationEstimate rotation_number(const PiecewiseHomeo& f, std::int64_t iterations, RotationMethod method,
                                        double x0 = 0.0)
{
    if (iterations < 1)
        throw Error("rotation_number: iterations must be >= 1");
    const double tol = f.prec.min_resolvable_length;
    RotationEstimate r;
    std::vector<double> lift; // lift[i] = F^i(x0) - x0
    lift.reserve(static_cast<std::size_t>(iterations) + 1);
    lift.push_back(0.0);
    double x = frac(x0);
    for (std::int64_t i = 1; i <= iterations; ++i) {
        double d = 0.0;
        x = f.step(x, d);
        lift.push_back(lift.back() + d);
        if (circle_distance(x, x0) < tol) {
            r.rational = true;
            r.q = i;
            r.p = std::llround(lift.back());
            std::int64_t g = std::gcd(r.p, r.q);
            r.p /= g;
            r.q /= g;
            double v = static_cast<double>(r.p) / static_cast<double>(r.q);
            r.estimate = v - std::floor(v);
            r.error_bound = 0.0;
            return r;
        }
    }
    if (method == RotationMethod::lift_average) {
        double v = lift.back() / static_cast<double>(iterations);
        r.estimate = v - std::floor(v);
        r.error_bound = 1.0 / static_cast<double>(iterations);
        return r;
    }
    auto rec = detail::convergent_times(f, x0, std::numeric_limits<int>::max(), iterations);
    if (rec.empty())
        rec.push_back(1);
    std::int64_t qn = rec.back();
    std::int64_t qn1 = rec.size() >= 2 ? rec[rec.size() - 2] : 1;
    std::int64_t pn = std::llround(lift[static_cast<std::size_t>(qn)]);
    double v = static_cast<double>(pn) / static_cast<double>(qn);
    r.estimate = v - std::floor(v);
    r.p = pn;
    r.q = qn;
    // q_{n+1} >= q_n + q_{n-1}
    r.error_bound = 1.0 / (static_cast<double>(qn) * static_cast<double>(qn + qn1));
    return r;
}

/// Same cyclic order, read ccw from each sequence's first point.
inline bool same_circular_order(const std::vector<double>& orb, const std::vector<double>& rot)
{
    const std::size_t n = orb.size();
    std::vector<std::size_t> a(n), b(n);
    std::iota(a.begin(), a.end(), 0);
    std::iota(b.begin(), b.end(), 0);
    std::vector<double> ka(n), kb(n);
    for (std::size_t i = 0; i < n; ++i) {
        ka[i] = ccw_distance(orb[0], orb[i]);
        kb[i] = ccw_distance(rot[0], rot[i]);
    }
    std::sort(a.begin(), a.end(), [&](auto i, auto j) { return ka[i] < ka[j]; });
    std::sort(b.begin(), b.end(), [&](auto i, auto j) { return kb[i] < kb[j]; });
    return a == b;
}

/// Rotation-order positions frac(i p/q) computed exactly in integers, valid for times below q.
inline std::vector<double> rotation_orbit(std::int64_t p, std::int64_t q, std::int64_t len)
{
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(len));
    for (std::int64_t i = 0; i < len; ++i) {
        __int128 num = static_cast<__int128>(i) * p % q;
        out.push_back(static_cast<double>(num) / static_cast<double>(q));
    }
    return out;
}

struct TuneResult {
    double t = 0.0;
    int depth_reached = 0;
    double bracket_width = 1.0;
};

/// t with f_t = f + t having the orbit combinatorics of the target to `depth`
/// (orbit of the first break, times up to q_depth + q_{depth-1}).
inline TuneResult tune_to_rotation(const std::function<PiecewiseHomeo(double)>& family, const ContinuedFraction& target,
                                   int depth, std::int64_t max_orbit = 100'000)
{
    if (depth < 1 || depth >= target.depth())
        throw Error("tune_to_rotation: need 1 <= depth < target depth");
    const ConvergentTable tab = convergents(target);
    // orbit roundoff grows like q u while the parameter window shrinks like 1/q^2
    const double u = family(0.0).prec.unit_roundoff();
    for (int d = 1; d <= depth; ++d) {
        double q = static_cast<double>(tab.q(d));
        if (q * q * q * u >= 1.0)
            throw DepthUnachievable(d - 1, "tune_to_rotation: depth " + std::to_string(depth) +
                                               " exceeds what the working precision resolves (max " +
                                               std::to_string(d - 1) + ")");
    }
    auto marked = [](const PiecewiseHomeo& f) { return f.breaks().empty() ? 0.0 : f.breaks()[0]; };

    // lift of F_t^q(xi) - xi - p
    auto excess = [&](const PiecewiseHomeo& f, std::int64_t p, std::int64_t q) {
        double x = marked(f), s = 0.0;
        for (std::int64_t i = 0; i < q; ++i) {
            double d = 0.0;
            x = f.step(x, d);
            s += d;
        }
        return s - static_cast<double>(p);
    };
    // Farey neighbours of the target at order q_d + q_{d-1}: p_d/q_d and the mediant
    auto window = [&](int d) {
        std::int64_t p1 = tab.p(d), q1 = tab.q(d);
        std::int64_t p2 = tab.p(d) + tab.p(d - 1), q2 = tab.q(d) + tab.q(d - 1);
        // lower fraction first
        if (static_cast<__int128>(p1) * q2 > static_cast<__int128>(p2) * q1) {
            std::swap(p1, p2);
            std::swap(q1, q2);
        }
        return std::array<std::int64_t, 4>{p1, q1, p2, q2};
    };
    auto order_ok = [&](const PiecewiseHomeo& f, int d) {
        std::int64_t len = tab.q(d) + tab.q(d - 1);
        std::vector<double> orb;
        try {
            orb = orbit(f, marked(f), 0, len - 1);
        } catch (const ResolutionError&) {
            return false;
        }
        // the mediant has denominator len, so no collisions among the first len points
        return same_circular_order(orb, rotation_orbit(tab.p(d) + tab.p(d - 1), len, len));
    };

    double lo = 0.0, hi = 1.0;
    TuneResult res;
    int d_max = target.depth() - 1;
    for (int d = 1; d <= d_max; ++d) {
        if (tab.q(d) + tab.q(d - 1) > max_orbit && d > depth)
            break;
        auto w = window(d);
        bool found = false;
        while (true) {
            double t = 0.5 * (lo + hi);
            if (!(hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t)))) {
                if (d <= depth)
                    throw DepthUnachievable(d - 1, "tune_to_rotation: bracket collapsed, max depth " +
                                                       std::to_string(d - 1));
                break;
            }
            PiecewiseHomeo f = family(t);
            if (excess(f, w[0], w[1]) <= 0.0) {
                lo = t;
                continue;
            }
            if (excess(f, w[2], w[3]) >= 0.0) {
                hi = t;
                continue;
            }
            found = true;
            res.t = t;
            break;
        }
        if (!found)
            break;
        // windows nest, so lo and hi stay valid brackets for the next depth
        res.depth_reached = d;
    }
    if (res.depth_reached < depth)
        throw DepthUnachievable(res.depth_reached, "tune_to_rotation: reached depth " +
                                                       std::to_string(res.depth_reached));
    res.bracket_width = hi - lo;
    PiecewiseHomeo f = family(res.t);
    if (!order_ok(f, depth)) {
        int best = 0;
        for (int d = 1; d <= depth && order_ok(f, d); ++d)
            best = d;
        throw DepthUnachievable(best, "tune_to_rotation: combinatorics hold only to depth " + std::to_string(best));
    }
    return res;
}

} // namespace circlab
