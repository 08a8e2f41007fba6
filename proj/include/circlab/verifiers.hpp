#pragma once

#include "constants.hpp"
#include "partitions.hpp"
#include "rng.hpp"

#include <algorithm>
#include <string>
#include <vector>

namespace circlab {

struct PreconditionError : Error {
    using Error::Error;
};
struct OutOfArcError : Error {
    using Error::Error;
};

struct Report {
    std::string check;
    int level = 0;
    double bound = 0.0;
    double observed_min = 0.0;
    double observed_max = 0.0;
    bool pass = false;
    std::string detail;
};

// ---------------------------------------------------------------- comparability

inline Report comparability_report(const DynamicalPartition& part, const Constants& c)
{
    Report r;
    r.check = part.flavor == Flavor::P ? "comparability_P" : "comparability_D";
    r.level = part.level;
    r.bound = part.flavor == Flavor::P ? c.C2 : c.C2 * c.C6 * c.C6;
    r.observed_min = std::numeric_limits<double>::infinity();
    r.observed_max = 0.0;
    r.pass = true;
    const std::size_t m = part.atoms.size();
    for (std::size_t k = 0; k < m; ++k) {
        const Atom& a = part.atoms[k];
        const Atom& b = part.atoms[(k + 1) % m];
        double ratio = b.arc.length / a.arc.length;
        r.observed_min = std::min(r.observed_min, ratio);
        r.observed_max = std::max(r.observed_max, ratio);
        if (r.pass && (ratio < r.bound || ratio > 1.0 / r.bound)) {
            r.pass = false;
            r.detail = std::string(kind_name(a.kind)) + "_" + std::to_string(a.index) + " / " + kind_name(b.kind) +
                       "_" + std::to_string(b.index);
        }
    }
    return r;
}

// ---------------------------------------------------------------- decay

struct DecayReport {
    std::vector<int> levels;
    std::vector<double> max_atom; // max P_n atom length per level
    double fitted_rate = 0.0;     // geometric rate of max_atom
    std::size_t pairs = 0;
    double lower_slack = 0.0; // min |D^{s+m}| / (e^{-3v} kappa^m |D^s|), should be >= 1
    double upper_slack = 0.0; // max |D^{s+m}| / ((1+e^v) e^{3v} lambda^m |D^s|), should be <= 1
    double gen_lower_slack = 0.0;
    double gen_upper_slack = 0.0;
    bool pass = false;
};

/// Nested pairs are compared by generation: atoms Delta_i^s (i < q_{s+1}) against Delta_j^{s+m} inside them.
inline DecayReport decay_report(const PiecewiseHomeo& f, const ConvergentTable& tab, double xi0, int n_from, int n_to,
                                const Constants& c)
{
    if (n_from < 1 || n_to < n_from || n_to + 1 >= tab.size())
        throw Error("decay_report: level range out of table");
    MarkedOrbit orb(f, xi0, 0, tab.q(n_to + 1) + tab.q(n_to) - 1);
    DecayReport r;
    std::vector<std::vector<const Atom*>> gen;
    std::vector<DynamicalPartition> parts;
    for (int n = n_from; n <= n_to + 1; ++n)
        parts.push_back(build_P(orb, tab, n, f.prec));
    for (std::size_t k = 0; k + 1 < parts.size(); ++k) {
        const auto& P = parts[k];
        double mx = 0.0;
        for (const Atom& a : P.atoms)
            mx = std::max(mx, a.arc.length);
        r.levels.push_back(P.level);
        r.max_atom.push_back(mx);
    }
    // generation s = n_from + k lives in parts[k+1] as the Dnm1 atoms
    for (std::size_t k = 1; k < parts.size(); ++k) {
        std::vector<const Atom*> g;
        for (const Atom& a : parts[k].atoms)
            if (a.kind == AtomKind::Dnm1)
                g.push_back(&a);
        gen.push_back(std::move(g));
    }
    const double base = frac(xi0);
    auto key0 = [&](double x) { return ccw_distance(base, x); };
    auto key1 = [&](double x) {
        double k = ccw_distance(base, x);
        return k == 0.0 ? 1.0 : k;
    };
    r.lower_slack = std::numeric_limits<double>::infinity();
    r.gen_lower_slack = std::numeric_limits<double>::infinity();
    const double e3v = std::exp(3.0 * c.v), ev = std::exp(c.v);
    for (std::size_t s = 0; s < gen.size(); ++s) {
        std::vector<double> starts;
        for (const Atom* a : gen[s])
            starts.push_back(key0(a->arc.start));
        const Atom* g0 = nullptr;
        for (const Atom* a : gen[s])
            if (a->index == 0)
                g0 = a;
        for (std::size_t t = s; t < gen.size(); ++t) {
            const int m = static_cast<int>(t - s);
            const double km = std::pow(c.kappa, m), lm = std::pow(c.lambda, m);
            for (const Atom* a : gen[t]) {
                double k0 = key0(a->arc.start);
                auto it = std::upper_bound(starts.begin(), starts.end(), k0);
                if (it == starts.begin())
                    continue;
                const Atom* A = gen[s][static_cast<std::size_t>(it - starts.begin()) - 1];
                if (key1(a->stop) > key1(A->stop))
                    continue;
                double ratio = a->arc.length / A->arc.length;
                r.lower_slack = std::min(r.lower_slack, ratio / (km / e3v));
                r.upper_slack = std::max(r.upper_slack, ratio / ((1.0 + ev) * e3v * lm));
                ++r.pairs;
            }
            const Atom* h0 = nullptr;
            for (const Atom* a : gen[t])
                if (a->index == 0)
                    h0 = a;
            if (g0 && h0) {
                double ratio = h0->arc.length / g0->arc.length;
                r.gen_lower_slack = std::min(r.gen_lower_slack, ratio / km);
                r.gen_upper_slack = std::max(r.gen_upper_slack, ratio / ((1.0 + ev) * lm));
            }
        }
    }
    if (r.levels.size() >= 2) {
        // least squares slope of log max_atom against n
        double sx = 0, sy = 0, sxx = 0, sxy = 0, N = static_cast<double>(r.levels.size());
        for (std::size_t k = 0; k < r.levels.size(); ++k) {
            double x = r.levels[k], y = std::log(r.max_atom[k]);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        r.fitted_rate = std::exp((N * sxy - sx * sy) / (N * sxx - sx * sx));
    }
    r.pass = r.lower_slack >= 1.0 && r.upper_slack <= 1.0 && r.gen_lower_slack >= 1.0 && r.gen_upper_slack <= 1.0;
    return r;
}

// ---------------------------------------------------------------- barycentric

inline double barycentric(double gamma, const Arc& arc, double tol = 0.0)
{
    double d = ccw_distance(arc.start, gamma);
    if (d > arc.length + tol) {
        // allow gamma at the start approached from below the wrap
        if (1.0 - d <= tol)
            return 0.0;
        throw OutOfArcError("barycentric: point outside arc");
    }
    return std::min(d / arc.length, 1.0);
}

struct ScanResult {
    std::vector<int> levels;
    std::vector<double> coefficient;
    std::vector<int> passing;
    std::vector<std::string> warnings;
};

/// Locates I^n(b) in D_n(a) for each level and tests C7^2 <= B(b; I^n(b)) <= 1 - C7^2.
inline ScanResult scan_barycentric_subsequence(const PiecewiseHomeo& f, const ConvergentTable& tab, double a, double b,
                                               int n_min, int n_max, double C7)
{
    (void)f.jump_ratio(a);
    if (n_min < 1 || n_max >= tab.size())
        throw Error("scan_barycentric_subsequence: level range out of table");
    MarkedOrbit orb(f, a, -tab.q(n_max), tab.q(n_max) + tab.q(n_max - 1) - 1);
    ScanResult r;
    const double tol = f.prec.min_resolvable_length;
    const double lo = C7 * C7, hi = 1.0 - C7 * C7;
    for (int n = n_min; n <= n_max; ++n) {
        DynamicalPartition D = build_D(orb, tab, n, f.prec);
        const Atom& at = D.atoms[D.locate(b)];
        double B = barycentric(b, at.arc);
        r.levels.push_back(n);
        r.coefficient.push_back(B);
        if (B * at.arc.length < tol || (1.0 - B) * at.arc.length < tol) {
            r.warnings.push_back("level " + std::to_string(n) + ": b sits on an orbit point of a (same orbit)");
            continue;
        }
        if (B >= lo && B <= hi)
            r.passing.push_back(n);
    }
    return r;
}

// ---------------------------------------------------------------- sampling helpers

namespace detail {

struct SamplePoint {
    double x;
    Side side;
};

} // namespace detail

// ---------------------------------------------------------------- Denjoy

/// Range of log Df^k over uniform samples plus both one-sided limits at every break of f^k.
inline Report verify_denjoy(const PiecewiseHomeo& f, std::int64_t k, double v, int samples, const CounterRng& rng,
                            double tol, int level = 0)
{
    Report r;
    r.check = "denjoy";
    r.level = level;
    r.bound = v + tol;
    r.observed_min = std::numeric_limits<double>::infinity();
    r.observed_max = -std::numeric_limits<double>::infinity();
    std::vector<detail::SamplePoint> pts;
    for (int s = 0; s < samples; ++s)
        pts.push_back({rng.uniform(static_cast<std::uint64_t>(s)), Side::right});
    for (auto& [x, j] : detail::break_preimages(f, k)) {
        pts.push_back({x, Side::left});
        pts.push_back({x, Side::right});
    }
    for (auto& p : pts) {
        double L = log_cocycle(f, k, p.x, p.side);
        r.observed_min = std::min(r.observed_min, L);
        r.observed_max = std::max(r.observed_max, L);
    }
    r.pass = r.observed_min >= -r.bound && r.observed_max <= r.bound;
    return r;
}

// ---------------------------------------------------------------- Finzi

/// Max over 0 <= k < q_n of the spread of log Df^k across sampled points of Delta_0^{n-1}(xi0).
inline Report verify_finzi(const PiecewiseHomeo& f, const ConvergentTable& tab, double xi0, int n, double v, int samples,
                           const CounterRng& rng, double tol)
{
    if (n < 1 || n >= tab.size())
        throw Error("verify_finzi: level out of range");
    const std::int64_t qn = tab.q(n), qnm1 = tab.q(n - 1);
    auto o = orbit(f, xi0, 0, qnm1);
    Arc arc = generator_arc(o.front(), o.back(), n - 1);
    std::vector<detail::SamplePoint> pts;
    pts.push_back({arc.start, Side::right});
    pts.push_back({arc.end(), Side::left});
    for (int s = 0; s < samples; ++s)
        pts.push_back({frac(arc.start + rng.uniform(static_cast<std::uint64_t>(s)) * arc.length), Side::right});
    for (auto& [x, j] : detail::break_preimages(f, qn)) {
        double d = ccw_distance(arc.start, x);
        if (d > 0.0 && d < arc.length) {
            pts.push_back({x, Side::left});
            pts.push_back({x, Side::right});
        }
    }
    std::vector<double> lo(static_cast<std::size_t>(qn), std::numeric_limits<double>::infinity());
    std::vector<double> hi(static_cast<std::size_t>(qn), -std::numeric_limits<double>::infinity());
    for (auto& p : pts) {
        double x = p.x, s = 0.0;
        for (std::int64_t k = 0; k < qn; ++k) {
            lo[static_cast<std::size_t>(k)] = std::min(lo[static_cast<std::size_t>(k)], s);
            hi[static_cast<std::size_t>(k)] = std::max(hi[static_cast<std::size_t>(k)], s);
            s += f.log_deriv(x, p.side);
            x = f.eval(x, p.side);
        }
    }
    Report r;
    r.check = "finzi";
    r.level = n;
    r.bound = v + tol;
    r.observed_min = 0.0;
    for (std::int64_t k = 0; k < qn; ++k)
        r.observed_max = std::max(r.observed_max, hi[static_cast<std::size_t>(k)] - lo[static_cast<std::size_t>(k)]);
    r.pass = r.observed_max <= r.bound;
    return r;
}

// ---------------------------------------------------------------- universal estimates

/// |log Df^k(xi) - log Df^k(eta)| for eta in Delta_0^{n+l}(xi) on the continuity piece of xi, 0 <= k <= q_n.
inline Report verify_oscillation(const PiecewiseHomeo& f, const ConvergentTable& tab, double xi0, int n, int l,
                                 const Constants& c, int samples, const CounterRng& rng, double tol, int n_base = 16)
{
    if (n < 1 || l < 0 || n + l >= tab.size())
        throw Error("verify_oscillation: level out of range");
    const std::int64_t qn = tab.q(n), qnl = tab.q(n + l);
    const auto cuts = detail::break_preimages(f, qn);
    Report r;
    r.check = "universal_estimates";
    r.level = n;
    r.bound = c.C5 * std::pow(c.lambda, static_cast<double>(l) / c.q_conj) + tol;
    r.observed_min = 0.0;
    auto cocycles = [&](double x, Side side) {
        std::vector<double> out(static_cast<std::size_t>(qn) + 1, 0.0);
        for (std::int64_t k = 0; k < qn; ++k) {
            out[static_cast<std::size_t>(k) + 1] = out[static_cast<std::size_t>(k)] + f.log_deriv(x, side);
            x = f.eval(x, side);
        }
        return out;
    };
    const int per_base = std::max(1, samples / n_base);
    std::uint64_t counter = 0;
    for (int bi = 0; bi < n_base; ++bi) {
        double xi = bi == 0 ? frac(xi0) : rng.uniform(counter++);
        auto o = orbit(f, xi, 0, qnl);
        Arc arc = generator_arc(o.front(), o.back(), n + l);
        const bool xi_at_start = (n + l) % 2 == 1;
        auto inward = [&](double x) { return xi_at_start ? ccw_distance(xi, x) : ccw_distance(x, xi); };
        auto base = cocycles(xi, xi_at_start ? Side::right : Side::left);
        for (int s = 0; s < per_base; ++s) {
            double eta = frac(arc.start + rng.uniform(counter++) * arc.length);
            double de = inward(eta);
            std::int64_t kmax = qn;
            for (auto& [x, j] : cuts) {
                double dx = inward(x);
                if (dx > 0.0 && dx < de)
                    kmax = std::min(kmax, j);
            }
            auto ce = cocycles(eta, Side::right);
            for (std::int64_t k = 0; k <= kmax; ++k)
                r.observed_max = std::max(r.observed_max, std::abs(ce[static_cast<std::size_t>(k)] - base[static_cast<std::size_t>(k)]));
        }
    }
    r.pass = r.observed_max <= r.bound;
    return r;
}

// ---------------------------------------------------------------- break separation

struct SeparationEntry {
    std::int64_t j;
    double point;
    double coefficient;
    int breaks_inside;
};

struct SeparationReport {
    int m = 0, l = 0;
    std::vector<SeparationEntry> entries;
    bool one_break_each = true;
    bool coefficients_bounded = true;
    double min_relative_gap = 0.0;
    bool pass = false;
};

/// Breaks of f^{q_m} are a_j = f^{-j}(a), b_j = f^{-j}(b), j < q_m. Each a_j is located in P_{m+l}(mark).
inline SeparationReport break_separation(const PiecewiseHomeo& f, const ConvergentTable& tab, int m, int l, double a,
                                         double b, double mark, double C6)
{
    SeparationReport r;
    r.m = m;
    r.l = l;
    if (f.breaks().empty())
        return r;
    if (m < 1 || l < 0 || m + l >= tab.size())
        throw Error("break_separation: level out of range");
    const std::int64_t qm = tab.q(m);
    auto ao = orbit(f, a, -(qm - 1), 0);
    auto bo = orbit(f, b, -(qm - 1), 0);
    std::vector<double> all(ao.begin(), ao.end());
    all.insert(all.end(), bo.begin(), bo.end());
    DynamicalPartition P = build_P(f, tab, mark, m + l);
    const double tol = f.prec.min_resolvable_length;
    for (std::int64_t j = 0; j < qm; ++j) {
        double aj = ao[static_cast<std::size_t>(qm - 1 - j)];
        const Atom& at = P.atoms[P.locate(aj)];
        SeparationEntry e{j, aj, barycentric(aj, at.arc), 0};
        for (double x : all) {
            double d = ccw_distance(at.arc.start, x);
            if (d > tol && d < at.arc.length - tol)
                ++e.breaks_inside;
        }
        if (e.breaks_inside != 1)
            r.one_break_each = false;
        if (e.coefficient < C6 || e.coefficient > 1.0 - C6)
            r.coefficients_bounded = false;
        r.entries.push_back(e);
    }
    // consecutive breaks of f^{q_m}, gap relative to the P_m atom holding the left one
    DynamicalPartition Pm = build_P(f, tab, mark, m);
    std::sort(all.begin(), all.end());
    r.min_relative_gap = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < all.size(); ++k) {
        double x = all[k], y = all[(k + 1) % all.size()];
        double gap = ccw_distance(x, y);
        double amb = Pm.atoms[Pm.locate(x)].arc.length;
        r.min_relative_gap = std::min(r.min_relative_gap, gap / amb);
    }
    r.pass = r.one_break_each && r.coefficients_bounded;
    return r;
}

inline SeparationReport break_separation(const PiecewiseHomeo& f, const ConvergentTable& tab, const ScanResult& scan,
                                         int m, int l, double a, double b, double mark, double C6)
{
    if (std::find(scan.passing.begin(), scan.passing.end(), m) == scan.passing.end())
        throw PreconditionError("break_separation: level " + std::to_string(m) + " is not in the barycentric list");
    return break_separation(f, tab, m, l, a, b, mark, C6);
}

/// Smallest l in [1, l_max] for which break_separation passes; the last report otherwise.
inline SeparationReport search_separation(const PiecewiseHomeo& f, const ConvergentTable& tab, const ScanResult& scan,
                                          int m, int l_max, double a, double b, double mark, double C6)
{
    SeparationReport last;
    for (int l = 1; l <= l_max && m + l < tab.size(); ++l) {
        last = break_separation(f, tab, scan, m, l, a, b, mark, C6);
        if (last.pass)
            return last;
    }
    return last;
}

} // namespace circlab
