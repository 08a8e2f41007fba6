#pragma once

#include "circle.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace circlab {

struct InfeasibleError : Error {
    using Error::Error;
};
struct NotABreakError : Error {
    using Error::Error;
};
struct QuadratureError : Error {
    double achieved;
    QuadratureError(double a, const std::string& msg) : Error(msg), achieved(a) {}
};

enum class Side { left, right };

/// One branch in local coordinates: u in [0, len] maps to w = c u / (1 + e u) in [0, img].
/// e == 0 is the linear case.
struct Branch {
    double x0 = 0.0, len = 1.0;
    double y0 = 0.0, img = 1.0;
    double c = 1.0, e = 0.0;

    double w(double u) const { return e == 0.0 ? c * u : c * u / (1.0 + e * u); }
    double dw(double u) const
    {
        double s = 1.0 + e * u;
        return c / (s * s);
    }
    double w_inv(double w) const { return e == 0.0 ? w / c : w / (c - e * w); }
    double dlogdf(double u) const { return -2.0 * e / (1.0 + e * u); }

    Branch inverted() const
    {
        Branch b;
        b.x0 = y0;
        b.len = img;
        b.y0 = x0;
        b.img = len;
        b.c = 1.0 / c;
        b.e = -e / c;
        return b;
    }
};

/// Fractional-linear branch on [0, len] -> [0, img] with prescribed end derivatives.
/// A Moebius map of an interval forces d_start * d_end = (img/len)^2.
inline Branch moebius_branch(double len, double img, double d_start, double d_end)
{
    if (!(len > 0.0 && img > 0.0 && d_start > 0.0 && d_end > 0.0) || !std::isfinite(d_start) ||
        !std::isfinite(d_end))
        throw InfeasibleError("moebius branch: lengths and derivatives must be positive");
    double r2 = (img / len) * (img / len);
    if (std::abs(d_start * d_end / r2 - 1.0) > 1e-12)
        throw InfeasibleError("moebius branch: endpoint derivative product must equal (img/len)^2");
    Branch b;
    b.len = len;
    b.img = img;
    b.c = d_start;
    double ratio = std::sqrt(d_start / d_end);
    b.e = ratio == 1.0 ? 0.0 : (ratio - 1.0) / len;
    if (b.e == 0.0)
        b.c = img / len;
    return b;
}

struct RegularityReport {
    double c1 = 1.0, c2 = 1.0;
    double v = 0.0;
    double v_jumps = 0.0;
    double ko_norm_p = 0.0;
    double p = 2.0;
};

class PiecewiseHomeo {
  public:
    std::string family = "rotation";
    std::map<std::string, double> parameters;
    double offset = 0.0;
    PrecisionContext prec;

    PiecewiseHomeo() { branches_.push_back(Branch{}); }

    /// Branches must be listed ccw starting at the smallest x0, images consecutive.
    /// lift_y0 is a real lift of f(branches[0].x0).
    PiecewiseHomeo(std::vector<Branch> branches, double lift_y0, PrecisionContext p = {})
        : prec(p), branches_(std::move(branches)), lift_y0_(lift_y0)
    {
        if (branches_.empty())
            throw Error("PiecewiseHomeo: no branches");
        merge_smooth_joints();
        finalize();
    }

    const std::vector<Branch>& branches() const { return branches_; }
    const std::vector<double>& breaks() const { return breaks_; }
    double lift_y0() const { return lift_y0_; }
    bool is_rotation() const { return breaks_.empty() && branches_.size() == 1 && branches_[0].e == 0.0; }

    double eval(double x, Side side = Side::right) const
    {
        auto [j, u] = locate(x, side);
        const Branch& b = branches_[j];
        return frac(b.y0 + b.w(u));
    }

    /// f(x) together with the lift displacement F(x) - x.
    double step(double x, double& disp, Side side = Side::right) const
    {
        auto [j, u] = locate(x, side);
        const Branch& b = branches_[j];
        double w = b.w(u);
        disp = disp_base_ + cum_gap_[j] + (w - u);
        return frac(b.y0 + w);
    }

    double deriv_one_sided(double x, Side side) const
    {
        auto [j, u] = locate(x, side);
        return branches_[j].dw(u);
    }

    double log_deriv(double x, Side side) const
    {
        auto [j, u] = locate(x, side);
        const Branch& b = branches_[j];
        if (b.e == 0.0)
            return log_c_[j];
        return log_c_[j] - 2.0 * std::log1p(b.e * u);
    }

    double inverse(double y, Side side = Side::right) const
    {
        auto [j, w] = locate_image(y, side);
        const Branch& b = branches_[j];
        return frac(b.x0 + b.w_inv(w));
    }

    double jump_ratio(double b) const
    {
        for (double x : breaks_) {
            if (circle_distance(x, b) < prec.min_resolvable_length)
                return deriv_one_sided(x, Side::left) / deriv_one_sided(x, Side::right);
        }
        throw NotABreakError("jump_ratio: " + std::to_string(b) + " is not a break point");
    }

    bool is_break(double x) const
    {
        for (double b : breaks_)
            if (circle_distance(x, b) < prec.min_resolvable_length)
                return true;
        return false;
    }

    PiecewiseHomeo inverse_map() const
    {
        std::vector<Branch> inv;
        for (const Branch& b : branches_)
            inv.push_back(b.inverted());
        std::size_t first = 0;
        for (std::size_t j = 1; j < inv.size(); ++j)
            if (inv[j].x0 < inv[first].x0)
                first = j;
        std::rotate(inv.begin(), inv.begin() + static_cast<std::ptrdiff_t>(first), inv.end());
        // F(x~_j) = Y~_j  =>  F^{-1}(frac(Y~_j)) = x~_j - floor(Y~_j)
        double Yj = lift_y0_;
        for (std::size_t j = 0; j < first; ++j)
            Yj += branches_[j].img;
        double xj = branches_[first].x0;
        if (first > 0 && xj < branches_[0].x0)
            xj += 1.0;
        PiecewiseHomeo g(std::move(inv), xj - std::floor(Yj), prec);
        g.family = family + "^-1";
        g.parameters = parameters;
        g.offset = offset;
        return g;
    }

    RegularityReport regularity(double p = 2.0) const;

  private:
    std::vector<Branch> branches_;
    std::vector<double> anchors_;
    std::vector<double> breaks_;
    std::vector<double> log_c_;
    std::vector<double> cum_gap_;
    double lift_y0_ = 0.0;
    double disp_base_ = 0.0;

    void merge_smooth_joints()
    {
        if (branches_.size() < 2)
            return;
        std::vector<Branch> out;
        for (const Branch& b : branches_) {
            if (!out.empty() && out.back().e == 0.0 && b.e == 0.0 && out.back().c == b.c) {
                out.back().len += b.len;
                out.back().img += b.img;
            } else {
                out.push_back(b);
            }
        }
        if (out.size() > 1 && out.front().e == 0.0 && out.back().e == 0.0 && out.front().c == out.back().c) {
            // the wrapping branch absorbs the first one and keeps the largest anchor
            lift_y0_ += out.front().img;
            out.back().len += out.front().len;
            out.back().img += out.front().img;
            out.erase(out.begin());
        }
        branches_ = std::move(out);
    }

    void finalize()
    {
        anchors_.clear();
        log_c_.clear();
        cum_gap_.clear();
        breaks_.clear();
        double cum_len = 0.0, cum_img = 0.0;
        for (auto& b : branches_) {
            anchors_.push_back(b.x0);
            log_c_.push_back(std::log(b.c));
            cum_gap_.push_back(cum_img - cum_len);
            cum_len += b.len;
            cum_img += b.img;
        }
        disp_base_ = lift_y0_ - anchors_[0];
        if (branches_.size() > 1) {
            for (std::size_t j = 0; j < branches_.size(); ++j) {
                const Branch& prev = branches_[(j + branches_.size() - 1) % branches_.size()];
                double sigma = prev.dw(prev.len) / branches_[j].dw(0.0);
                if (std::abs(sigma - 1.0) > 1e-14)
                    breaks_.push_back(branches_[j].x0);
            }
        }
    }

    std::size_t branch_index(double x) const
    {
        auto it = std::upper_bound(anchors_.begin(), anchors_.end(), x);
        if (it == anchors_.begin())
            return anchors_.size() - 1;
        return static_cast<std::size_t>(it - anchors_.begin()) - 1;
    }

    std::pair<std::size_t, double> locate(double x, Side side) const
    {
        const std::size_t m = branches_.size();
        std::size_t j = branch_index(x);
        double u = ccw_distance(branches_[j].x0, x);
        const double tol = prec.min_resolvable_length;
        if (side == Side::left && u <= tol) {
            j = (j + m - 1) % m;
            return {j, branches_[j].len};
        }
        if (side == Side::right && branches_[j].len - u <= tol)
            return {(j + 1) % m, 0.0};
        return {j, std::clamp(u, 0.0, branches_[j].len)};
    }

    std::pair<std::size_t, double> locate_image(double y, Side side) const
    {
        const std::size_t m = branches_.size();
        std::size_t j = 0;
        double w = ccw_distance(branches_[0].y0, y);
        for (std::size_t k = 1; k < m; ++k) {
            double d = ccw_distance(branches_[k].y0, y);
            if (d < w) {
                w = d;
                j = k;
            }
        }
        const double tol = prec.min_resolvable_length;
        if (side == Side::left && w <= tol) {
            j = (j + m - 1) % m;
            return {j, branches_[j].img};
        }
        if (side == Side::right && branches_[j].img - w <= tol)
            return {(j + 1) % m, 0.0};
        return {j, std::clamp(w, 0.0, branches_[j].img)};
    }
};

inline PiecewiseHomeo build_rotation(double alpha, const PrecisionContext& prec = {})
{
    Branch b;
    b.x0 = 0.0;
    b.y0 = frac(alpha);
    PiecewiseHomeo f({b}, alpha, prec);
    f.family = "rotation";
    f.offset = alpha;
    return f;
}

namespace detail {

/// Two branches on [a,b] and [b,a] with the base map fixing a, then rotated by offset.
inline PiecewiseHomeo two_branch(double a, double b, Branch b1, Branch b2, double offset,
                                 const PrecisionContext& prec)
{
    b1.x0 = a;
    b2.x0 = b;
    b1.y0 = frac(a + offset);
    b2.y0 = frac(a + offset + b1.img);
    double lift = a + offset;
    std::vector<Branch> br{b1, b2};
    if (b < a) {
        std::swap(br[0], br[1]);
        lift = a + offset + b1.img - 1.0;
    }
    return PiecewiseHomeo(std::move(br), lift, prec);
}

} // namespace detail

inline PiecewiseHomeo build_pl2(double a, double b, double s1, double offset,
                                const PrecisionContext& prec = {})
{
    a = frac(a);
    b = frac(b);
    double L1 = ccw_distance(a, b);
    if (L1 < prec.min_resolvable_length)
        throw InfeasibleError("build_pl2: a and b coincide");
    if (!(s1 > 0.0))
        throw InfeasibleError("build_pl2: s1 must be positive");
    double M1 = s1 * L1;
    double s2 = (1.0 - M1) / (1.0 - L1);
    if (!(s2 > 0.0))
        throw InfeasibleError("build_pl2: infeasible slopes, s2 = " + std::to_string(s2));
    Branch b1, b2;
    b1.len = L1;
    b1.img = M1;
    b1.c = s1;
    b2.len = 1.0 - L1;
    b2.img = 1.0 - M1;
    b2.c = s2;
    PiecewiseHomeo f = detail::two_branch(a, b, b1, b2, offset, prec);
    f.family = "pl2";
    f.parameters = {{"a", a}, {"b", b}, {"s1", s1}};
    f.offset = offset;
    return f;
}

/// Two fractional-linear branches with sigma(a) = sigma_a and sigma(b) = 1/sigma_a.
/// skew scales the start derivative of the [a,b] branch; skew = 1 splits the jump evenly.
inline PiecewiseHomeo build_moebius2(double a, double b, double sigma_a, double offset,
                                     const PrecisionContext& prec = {}, double skew = 1.0)
{
    a = frac(a);
    b = frac(b);
    double L1 = ccw_distance(a, b);
    if (L1 < prec.min_resolvable_length)
        throw InfeasibleError("build_moebius2: a and b coincide");
    if (!(sigma_a > 0.0) || !(skew > 0.0))
        throw InfeasibleError("build_moebius2: sigma_a and skew must be positive");
    double L2 = 1.0 - L1;
    double M1 = L1 / (sigma_a * L2 + L1);
    double M2 = 1.0 - M1;
    double r1 = M1 / L1, r2 = M2 / L2;
    double rs = std::sqrt(sigma_a);
    double d1s = r1 * rs * skew;
    double d1e = r1 * r1 / d1s;
    double d2s = r1 * r2 / d1s;
    double d2e = r2 * r2 / d2s;
    Branch b1 = moebius_branch(L1, M1, d1s, d1e);
    Branch b2 = moebius_branch(L2, M2, d2s, d2e);
    PiecewiseHomeo f = detail::two_branch(a, b, b1, b2, offset, prec);
    f.family = "moebius2";
    f.parameters = {{"a", a}, {"b", b}, {"sigma_a", sigma_a}, {"skew", skew}};
    f.offset = offset;
    return f;
}

/// f + t mod 1 for the same family.
inline PiecewiseHomeo with_offset(const PiecewiseHomeo& f, double t)
{
    if (f.family == "rotation")
        return build_rotation(t, f.prec);
    if (f.family == "pl2")
        return build_pl2(f.parameters.at("a"), f.parameters.at("b"), f.parameters.at("s1"), t, f.prec);
    if (f.family == "moebius2")
        return build_moebius2(f.parameters.at("a"), f.parameters.at("b"), f.parameters.at("sigma_a"), t,
                              f.prec, f.parameters.at("skew"));
    throw Error("with_offset: unknown family " + f.family);
}

inline std::vector<double> orbit(const PiecewiseHomeo& f, double xi0, std::int64_t i_from, std::int64_t i_to,
                                 Side side = Side::right)
{
    if (i_from > i_to)
        throw Error("orbit: i_from > i_to");
    std::vector<double> back, fwd;
    double x = frac(xi0);
    const double tol = f.prec.min_resolvable_length;
    if (i_to >= 0) {
        fwd.push_back(x);
        for (std::int64_t i = 1; i <= i_to; ++i) {
            double y = f.eval(fwd.back(), side);
            if (circle_distance(y, fwd.back()) < tol)
                throw ResolutionError("orbit: consecutive points collide at i = " + std::to_string(i));
            fwd.push_back(y);
        }
    }
    if (i_from < 0) {
        double y = x;
        for (std::int64_t i = -1; i >= i_from; --i) {
            double z = f.inverse(y, side);
            if (circle_distance(z, y) < tol)
                throw ResolutionError("orbit: consecutive points collide at i = " + std::to_string(i));
            back.push_back(z);
            y = z;
        }
    }
    std::vector<double> out;
    for (std::int64_t i = i_from; i <= i_to; ++i) {
        if (i < 0)
            out.push_back(back[static_cast<std::size_t>(-i - 1)]);
        else
            out.push_back(fwd[static_cast<std::size_t>(i)]);
    }
    return out;
}

/// sum_{j<k} log Df(f^j x), one-sided at break hits; the side carries along the orbit.
inline double log_cocycle(const PiecewiseHomeo& f, std::int64_t k, double x, Side side = Side::right)
{
    double s = 0.0;
    for (std::int64_t j = 0; j < k; ++j) {
        s += f.log_deriv(x, side);
        x = f.eval(x, side);
    }
    return s;
}

namespace detail {

/// Backward orbits f^{-j}(c), 0 <= j < k, of every break c, tagged with j.
inline std::vector<std::pair<double, std::int64_t>> break_preimages(const PiecewiseHomeo& f, std::int64_t k)
{
    std::vector<std::pair<double, std::int64_t>> out;
    if (k < 1)
        return out;
    for (double c : f.breaks()) {
        auto o = orbit(f, c, -(k - 1), 0);
        for (std::int64_t j = 0; j < k; ++j)
            out.push_back({o[static_cast<std::size_t>(k - 1 - j)], j});
    }
    return out;
}

} // namespace detail

inline RegularityReport PiecewiseHomeo::regularity(double p) const
{
    if (!(p > 1.0))
        throw Error("regularity: p must exceed 1");
    using boost::math::quadrature::gauss_kronrod;
    RegularityReport r;
    r.p = p;
    r.c1 = std::numeric_limits<double>::infinity();
    r.c2 = 0.0;
    for (const Branch& b : branches_) {
        double d0 = b.dw(0.0), d1 = b.dw(b.len);
        r.c1 = std::min({r.c1, d0, d1});
        r.c2 = std::max({r.c2, d0, d1});
    }
    for (double x : breaks_)
        r.v_jumps += std::abs(std::log(jump_ratio(x)));
    double smooth = 0.0, lp = 0.0;
    const double tol = 1e-12;
    for (const Branch& b : branches_) {
        if (b.e == 0.0)
            continue;
        double err1 = 0.0, err2 = 0.0;
        auto g1 = [&](double u) { return std::abs(b.dlogdf(u)); };
        auto g2 = [&](double u) { return std::pow(std::abs(b.dlogdf(u)), p); };
        double i1 = gauss_kronrod<double, 31>::integrate(g1, 0.0, b.len, 15, tol, &err1);
        double i2 = gauss_kronrod<double, 31>::integrate(g2, 0.0, b.len, 15, tol, &err2);
        if (err1 > 1e-9 * std::max(1.0, i1) || err2 > 1e-9 * std::max(1.0, i2))
            throw QuadratureError(std::max(err1, err2), "regularity: quadrature did not converge");
        smooth += i1;
        lp += i2;
    }
    r.v = r.v_jumps + smooth;
    r.ko_norm_p = std::pow(lp, 1.0 / p);
    return r;
}

} // namespace circlab
