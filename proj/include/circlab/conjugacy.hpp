#pragma once

#include "partitions.hpp"

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

namespace circlab {

struct AmbiguousEvaluation : Error {
    using Error::Error;
};
struct NotAJumpError : Error {
    using Error::Error;
};

/// Monotone degree-one circle map given by matched knots, linear in ccw coordinates between them.
class ConjugacyMap {
  public:
    ConjugacyMap() = default;

    /// xs[0] -> ys[0] is the pinned pair. Throws CombinatoricsError when the two sequences are not in the same
    /// circular order.
    ConjugacyMap(const std::vector<double>& xs, const std::vector<double>& ys, const PrecisionContext& prec = {})
    {
        if (xs.size() != ys.size() || xs.empty())
            throw Error("ConjugacyMap: knot sequences differ in length or are empty");
        auto px = sort_ccw(xs, xs[0], prec);
        auto py = sort_ccw(ys, ys[0], prec);
        if (px != py)
            throw CombinatoricsError("ConjugacyMap: knot sequences are not in the same circular order");
        for (auto k : px) {
            x_.push_back(frac(xs[k]));
            y_.push_back(frac(ys[k]));
        }
        for (double x : x_)
            kx_.push_back(ccw_distance(x_[0], x));
        for (std::size_t k = 0; k < x_.size(); ++k) {
            std::size_t j = (k + 1) % x_.size();
            double gx = x_.size() == 1 ? 1.0 : ccw_distance(x_[k], x_[j]);
            double gy = x_.size() == 1 ? 1.0 : ccw_distance(y_[k], y_[j]);
            mesh_ = std::max({mesh_, gx, gy});
        }
    }

    std::size_t size() const { return x_.size(); }
    double mesh() const { return mesh_; }
    double pin_x() const { return x_[0]; }
    double pin_y() const { return y_[0]; }
    const std::vector<double>& xs() const { return x_; }
    const std::vector<double>& ys() const { return y_; }

    struct Bracket {
        std::size_t k;      // knot at or below x
        bool exact;         // x is knot k
        double y_lo, y_gap; // image arc [y_lo, y_lo + y_gap]
        double t;           // position of x inside the knot gap
    };

    Bracket bracket(double x) const
    {
        double key = ccw_distance(x_[0], x);
        std::size_t k = static_cast<std::size_t>(std::upper_bound(kx_.begin(), kx_.end(), key) - kx_.begin()) - 1;
        std::size_t j = (k + 1) % x_.size();
        Bracket b{k, key == kx_[k], y_[k], 0.0, 0.0};
        if (b.exact)
            return b;
        double kj = j == 0 ? 1.0 : kx_[j];
        b.y_gap = x_.size() == 1 ? 1.0 : ccw_distance(y_[k], y_[j]);
        b.t = (key - kx_[k]) / (kj - kx_[k]);
        return b;
    }

    double operator()(double x) const
    {
        Bracket b = bracket(x);
        return b.exact ? b.y_lo : frac(b.y_lo + b.t * b.y_gap);
    }

    double inverse(double y) const
    {
        // swap roles of the two coordinates
        double key = ccw_distance(y_[0], y);
        std::size_t lo = 0, hi = y_.size();
        while (hi - lo > 1) {
            std::size_t mid = (lo + hi) / 2;
            if (ccw_distance(y_[0], y_[mid]) <= key)
                lo = mid;
            else
                hi = mid;
        }
        std::size_t j = (lo + 1) % y_.size();
        double ky = ccw_distance(y_[0], y_[lo]);
        if (ky == key)
            return x_[lo];
        double kj = j == 0 ? 1.0 : ccw_distance(y_[0], y_[j]);
        double gx = y_.size() == 1 ? 1.0 : ccw_distance(x_[lo], x_[j]);
        return frac(x_[lo] + (key - ky) / (kj - ky) * gx);
    }

  private:
    std::vector<double> x_, y_, kx_;
    double mesh_ = 0.0;
};

/// Knots f^i(xi0) -> {i p/q}, 0 <= i < q_n + q_{n-1}, with p/q the deepest convergent of the table.
inline ConjugacyMap phi_to_rotation(const PiecewiseHomeo& f, const ConvergentTable& tab, int n, double xi0)
{
    if (n < 1 || n >= tab.size())
        throw Error("phi_to_rotation: level out of range");
    const std::int64_t len = tab.q(n) + tab.q(n - 1);
    const int N = tab.size() - 1;
    auto xs = orbit(f, xi0, 0, len - 1);
    std::vector<double> ys = rotation_orbit(tab.p(N), tab.q(N), len);
    return ConjugacyMap(xs, ys, f.prec);
}

/// Knots f1^i(a1) -> f2^i(a2), -q_M <= i <= q_M + q_{M-1}, with a_k the first break (0 for rotations).
inline ConjugacyMap build_h(const PiecewiseHomeo& f1, const PiecewiseHomeo& f2, const ConvergentTable& tab, int M)
{
    if (M < 1 || M >= tab.size())
        throw Error("build_h: depth out of range");
    auto pin = [](const PiecewiseHomeo& f) { return f.breaks().empty() ? 0.0 : f.breaks()[0]; };
    const std::int64_t lo = -tab.q(M), hi = tab.q(M) + tab.q(M - 1);
    auto o1 = orbit(f1, pin(f1), lo, hi);
    auto o2 = orbit(f2, pin(f2), lo, hi);
    // pinned pair first
    std::rotate(o1.begin(), o1.begin() + static_cast<std::ptrdiff_t>(-lo), o1.end());
    std::rotate(o2.begin(), o2.begin() + static_cast<std::ptrdiff_t>(-lo), o2.end());
    return ConjugacyMap(o1, o2, f1.prec);
}

/// Max circle distance between h(f1(x)) and f2(h(x)) over a uniform grid and the knots.
inline double conjugacy_residual(const ConjugacyMap& h, const PiecewiseHomeo& f1, const PiecewiseHomeo& f2,
                                 int grid_size)
{
    double r = 0.0;
    auto at = [&](double x) { r = std::max(r, circle_distance(h(f1.eval(x)), f2.eval(h(x)))); };
    for (int i = 0; i < grid_size; ++i)
        at(static_cast<double>(i) / grid_size);
    for (double x : h.xs())
        at(x);
    return r;
}

// ---------------------------------------------------------------- F_n

/// log F_n(x) = log Df2^{q_n}(h(x)) - log Df1^{q_n}(x), aware of the discontinuities of Df2^{q_n}
/// that the knot interpolation cannot place.
class FnEvaluator {
  public:
    FnEvaluator(const PiecewiseHomeo& f1, const PiecewiseHomeo& f2, const ConjugacyMap& h, std::int64_t qn)
        : f1_(f1), f2_(f2), h_(h), qn_(qn)
    {
        for (auto& [y, j] : detail::break_preimages(f2, qn))
            disc2_.push_back(ccw_distance(h.pin_y(), y));
        std::sort(disc2_.begin(), disc2_.end());
    }

    std::int64_t qn() const { return qn_; }

    double at_xy(double x, double y, Side side) const
    {
        return log_cocycle(f2_, qn_, y, side) - log_cocycle(f1_, qn_, x, side);
    }

    /// Discontinuities of Df2^{q_n} strictly inside the image bracket of x.
    std::vector<double> hidden_breaks(const ConjugacyMap::Bracket& b) const
    {
        std::vector<double> out;
        if (b.exact)
            return out;
        double k0 = ccw_distance(h_.pin_y(), b.y_lo);
        auto it = std::upper_bound(disc2_.begin(), disc2_.end(), k0);
        for (; it != disc2_.end() && *it < k0 + b.y_gap; ++it)
            out.push_back(frac(h_.pin_y() + *it));
        if (k0 + b.y_gap > 1.0) // bracket wraps past the pin
            for (auto jt = disc2_.begin(); jt != disc2_.end() && *jt < k0 + b.y_gap - 1.0; ++jt)
                out.push_back(frac(h_.pin_y() + *jt));
        return out;
    }

    /// Every value log F_n(x) can take given the knot bracket of h(x).
    std::vector<double> candidates(double x, Side side) const
    {
        auto b = h_.bracket(x);
        auto hidden = hidden_breaks(b);
        if (hidden.empty()) {
            double y = b.exact ? b.y_lo : frac(b.y_lo + b.t * b.y_gap);
            return {at_xy(x, y, side)};
        }
        std::vector<double> out;
        for (double d : hidden) {
            out.push_back(at_xy(x, d, Side::left));
            out.push_back(at_xy(x, d, Side::right));
        }
        return out;
    }

    double value(double x, Side side) const
    {
        auto c = candidates(x, side);
        auto [lo, hi] = std::minmax_element(c.begin(), c.end());
        if (*hi - *lo > 1e-12)
            throw AmbiguousEvaluation("log F_n: h(x) cannot be placed relative to a break of the second map");
        return c.front();
    }

    /// F_n(c-0)/F_n(c+0) with h(c) given exactly.
    double jump_xy(double x, double y) const
    {
        double L = at_xy(x, y, Side::left), R = at_xy(x, y, Side::right);
        if (std::abs(L - R) < 1e-12)
            throw NotAJumpError("fn_jump: F_n is continuous at the given point");
        return std::exp(L - R);
    }

    /// As jump_xy, with h(x) snapped to the single hidden break of its bracket if there is one.
    double jump(double x) const
    {
        auto b = h_.bracket(x);
        auto hidden = hidden_breaks(b);
        if (hidden.size() > 1)
            throw AmbiguousEvaluation("fn_jump: several breaks of the second map inside one knot bracket");
        double y = hidden.empty() ? (b.exact ? b.y_lo : frac(b.y_lo + b.t * b.y_gap)) : hidden.front();
        return jump_xy(x, y);
    }

  private:
    const PiecewiseHomeo& f1_;
    const PiecewiseHomeo& f2_;
    const ConjugacyMap& h_;
    std::int64_t qn_;
    std::vector<double> disc2_;
};

inline double compute_Fn(const PiecewiseHomeo& f1, const PiecewiseHomeo& f2, const ConjugacyMap& h,
                         const ConvergentTable& tab, int n, double x, Side side = Side::right)
{
    return FnEvaluator(f1, f2, h, tab.q(n)).value(x, side);
}

inline double fn_jump(const PiecewiseHomeo& f1, const PiecewiseHomeo& f2, const ConjugacyMap& h,
                      const ConvergentTable& tab, int n, double c)
{
    return FnEvaluator(f1, f2, h, tab.q(n)).jump(c);
}

// ---------------------------------------------------------------- break matching

enum class MuCase { matched, unmatched, undetermined };

inline const char* mu_case_name(MuCase c)
{
    switch (c) {
    case MuCase::matched: return "matched";
    case MuCase::unmatched: return "unmatched";
    case MuCase::undetermined: return "undetermined";
    }
    return "?";
}

struct MuCaseReport {
    MuCase result = MuCase::undetermined;
    double phi1_b = 0.0, phi2_b = 0.0; // invariant measure of [a_i, b_i]
    double tolerance = 0.0;
};

/// Compares mu1[a1, b1] with mu2[a2, b2] through the conjugacies to the rotation at level n.
/// Bit-equal values are matched, values further apart than the two meshes are unmatched, anything else undetermined.
inline MuCaseReport detect_mu_case(const PiecewiseHomeo& f1, const PiecewiseHomeo& f2, const ConvergentTable& tab,
                                   int n, double a1, double b1, double a2, double b2)
{
    auto p1 = phi_to_rotation(f1, tab, n, a1);
    auto p2 = phi_to_rotation(f2, tab, n, a2);
    MuCaseReport r;
    r.phi1_b = p1(b1);
    r.phi2_b = p2(b2);
    r.tolerance = p1.mesh() + p2.mesh();
    double d = circle_distance(r.phi1_b, r.phi2_b);
    if (d == 0.0)
        r.result = MuCase::matched;
    else if (d > r.tolerance)
        r.result = MuCase::unmatched;
    return r;
}

struct JumpAlgebra {
    MuCase mu_case = MuCase::undetermined;
    double jump_a = 1.0; // at a1
    double jump_b = 1.0; // at b1
    double jump_c = 1.0; // at h^{-1}(b2); folded into jump_b when matched
    double product = 1.0;
};

/// Jumps of F_n at the break orbit points with k = 0.
inline JumpAlgebra jump_algebra(const PiecewiseHomeo& f1, const PiecewiseHomeo& f2, const ConjugacyMap& h,
                                const ConvergentTable& tab, int n, double a1, double b1, double b2, MuCase mu)
{
    FnEvaluator ev(f1, f2, h, tab.q(n));
    JumpAlgebra r;
    r.mu_case = mu;
    r.jump_a = ev.jump(a1);
    if (mu == MuCase::matched) {
        r.jump_b = ev.jump_xy(b1, b2);
        r.jump_c = 1.0;
    } else {
        r.jump_b = ev.jump_xy(b1, h(b1));
        r.jump_c = ev.jump_xy(h.inverse(b2), b2);
    }
    r.product = r.jump_a * r.jump_b * r.jump_c;
    return r;
}

struct DeltaDefaults {
    double delta0 = 0.0;
    double delta1 = 0.0;
};

inline DeltaDefaults default_deltas(double sigma1_a, double sigma2_a, double sigma2_b)
{
    double da = std::log(sigma2_a) - std::log(sigma1_a);
    return {std::abs(da) / 3.0, std::min(std::abs(da + std::log(sigma2_b)), std::abs(da)) / 3.0};
}

// ---------------------------------------------------------------- deviation sets

struct DeviationInterval {
    Arc arc;
    double log_fn_min, log_fn_max;
};

struct DeviationReport {
    int n = 0;
    double delta = 0.0;
    double measure = 0.0;
    double ambiguous = 0.0; // mass of atoms whose classification depends on an unplaceable break
    double resolution = 0.0;
    int refine_levels = 0;
    std::vector<DeviationInterval> intervals;
};

/// l(S_delta^n) on atoms of P_{n+r}(a1) of the first map, r the smallest with atoms no longer than `resolution`.
inline DeviationReport deviation_measure(const PiecewiseHomeo& f1, const PiecewiseHomeo& f2, const ConjugacyMap& h,
                                         const ConvergentTable& tab, int n, double delta, double resolution)
{
    if (h.mesh() > resolution / 10.0)
        throw Error("deviation_measure: conjugacy mesh " + std::to_string(h.mesh()) + " too coarse for resolution " +
                    std::to_string(resolution));
    DeviationReport rep;
    rep.n = n;
    rep.delta = delta;
    rep.resolution = resolution;
    DynamicalPartition P;
    for (int r = 0;; ++r) {
        if (n + r >= tab.size())
            throw Error("deviation_measure: resolution unachievable within the convergent table");
        P = build_P(f1, tab, h.pin_x(), n + r);
        double mx = 0.0;
        for (const Atom& a : P.atoms)
            mx = std::max(mx, a.arc.length);
        if (mx <= resolution) {
            rep.refine_levels = r;
            break;
        }
    }
    FnEvaluator ev(f1, f2, h, tab.q(n));
    bool open = false;
    for (const Atom& a : P.atoms) {
        double mid = frac(a.arc.start + 0.5 * a.arc.length);
        auto c = ev.candidates(mid, Side::right);
        bool all_in = true, all_out = true;
        for (double v : c) {
            bool in = std::abs(v) >= delta;
            all_in = all_in && in;
            all_out = all_out && !in;
        }
        if (!all_in && !all_out) {
            rep.ambiguous += a.arc.length;
            open = false;
            continue;
        }
        if (!all_in) {
            open = false;
            continue;
        }
        rep.measure += a.arc.length;
        auto [lo, hi] = std::minmax_element(c.begin(), c.end());
        if (open) {
            auto& iv = rep.intervals.back();
            iv.arc.length += a.arc.length;
            iv.log_fn_min = std::min(iv.log_fn_min, *lo);
            iv.log_fn_max = std::max(iv.log_fn_max, *hi);
        } else {
            rep.intervals.push_back({a.arc, *lo, *hi});
            open = true;
        }
    }
    return rep;
}

// ---------------------------------------------------------------- singularity profile

struct SingularityProfile {
    int n = 0;
    std::vector<double> eps_grid;
    std::vector<double> bucket_mass; // mass with slope in [eps_grid[k-1], eps_grid[k]), last bucket open above
    std::vector<double> m_of_eps;    // mass with slope < eps_grid[k]
    double total_mass = 0.0;
    double image_mass = 0.0;

    double m_at(double eps) const
    {
        for (std::size_t k = 0; k < eps_grid.size(); ++k)
            if (eps_grid[k] == eps)
                return m_of_eps[k];
        throw Error("SingularityProfile: eps not on the grid");
    }
};

/// Slopes |h(A)|/|A| over the atoms A of P_n(a1) of the first map; atom endpoints are knots of h.
inline SingularityProfile singularity_profile(const ConjugacyMap& h, const PiecewiseHomeo& f1,
                                              const ConvergentTable& tab, int n, std::vector<double> eps_grid)
{
    std::sort(eps_grid.begin(), eps_grid.end());
    DynamicalPartition P = build_P(f1, tab, h.pin_x(), n);
    SingularityProfile s;
    s.n = n;
    s.eps_grid = eps_grid;
    s.bucket_mass.assign(eps_grid.size() + 1, 0.0);
    s.m_of_eps.assign(eps_grid.size(), 0.0);
    for (const Atom& a : P.atoms) {
        double img = ccw_distance(h(a.arc.start), h(a.stop));
        if (P.atoms.size() == 1)
            img = 1.0;
        double slope = img / a.arc.length;
        s.total_mass += a.arc.length;
        s.image_mass += img;
        std::size_t k = static_cast<std::size_t>(std::upper_bound(eps_grid.begin(), eps_grid.end(), slope) -
                                                 eps_grid.begin());
        s.bucket_mass[k] += a.arc.length;
        for (std::size_t e = 0; e < eps_grid.size(); ++e)
            if (slope < eps_grid[e])
                s.m_of_eps[e] += a.arc.length;
    }
    return s;
}

} // namespace circlab
