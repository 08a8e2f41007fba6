#pragma once

#include "cf.hpp"
#include "pmap.hpp"
#include "rotation.hpp"

#include <string>
#include <vector>

namespace circlab {

struct StructuralMismatch : Error {
    std::int64_t i, s;
    StructuralMismatch(std::int64_t i_, std::int64_t s_, const std::string& msg) : Error(msg), i(i_), s(s_) {}
};

/// Points f^i(xi0) for i in [i_min, i_max].
class MarkedOrbit {
  public:
    MarkedOrbit(const PiecewiseHomeo& f, double xi0, std::int64_t i_min, std::int64_t i_max)
        : xi0_(frac(xi0)), i_min_(i_min), pts_(orbit(f, xi0, i_min, i_max))
    {
    }
    double at(std::int64_t i) const
    {
        if (i < i_min_ || i > i_max())
            throw Error("MarkedOrbit: index " + std::to_string(i) + " outside computed range");
        return pts_[static_cast<std::size_t>(i - i_min_)];
    }
    double xi0() const { return xi0_; }
    std::int64_t i_min() const { return i_min_; }
    std::int64_t i_max() const { return i_min_ + static_cast<std::int64_t>(pts_.size()) - 1; }

  private:
    double xi0_;
    std::int64_t i_min_;
    std::vector<double> pts_;
};

enum class AtomKind { Dnm1, Dn, In, Inm1n };
enum class Flavor { P, D };

inline const char* kind_name(AtomKind k)
{
    switch (k) {
    case AtomKind::Dnm1: return "Dnm1";
    case AtomKind::Dn: return "Dn";
    case AtomKind::In: return "In";
    case AtomKind::Inm1n: return "Inm1n";
    }
    return "?";
}

struct Atom {
    Arc arc;
    AtomKind kind;
    std::int64_t index;
    std::int64_t i_start, i_end; // orbit times of the endpoints
    double stop = 0.0;           // exact end point (an orbit point)
};

struct DynamicalPartition {
    int level = 0;
    double marked_point = 0.0;
    Flavor flavor = Flavor::P;
    std::int64_t q_n = 0, q_nm1 = 0;
    std::vector<Atom> atoms; // ccw from the marked point

    /// Atom containing x under the half-open convention [start, end).
    std::size_t locate(double x) const
    {
        double key = ccw_distance(marked_point, x);
        std::size_t lo = 0, hi = atoms.size();
        while (hi - lo > 1) {
            std::size_t mid = (lo + hi) / 2;
            if (ccw_distance(marked_point, atoms[mid].arc.start) <= key)
                lo = mid;
            else
                hi = mid;
        }
        return lo;
    }

    const Atom* find(AtomKind kind, std::int64_t index) const
    {
        for (const Atom& a : atoms)
            if (a.kind == kind && a.index == index)
                return &a;
        return nullptr;
    }
};

namespace detail {

inline DynamicalPartition assemble(const MarkedOrbit& orb, std::int64_t i_lo, std::int64_t i_hi, int n,
                                   std::int64_t qn, std::int64_t qnm1, Flavor flavor, const PrecisionContext& prec)
{
    std::vector<double> pts;
    std::vector<std::int64_t> idx;
    for (std::int64_t i = i_lo; i <= i_hi; ++i) {
        pts.push_back(orb.at(i));
        idx.push_back(i);
    }
    auto perm = sort_ccw(pts, orb.xi0(), prec);
    DynamicalPartition part;
    part.level = n;
    part.marked_point = orb.xi0();
    part.flavor = flavor;
    part.q_n = qn;
    part.q_nm1 = qnm1;
    const std::size_t m = perm.size();
    for (std::size_t k = 0; k < m; ++k) {
        std::size_t u = perm[k], w = perm[(k + 1) % m];
        std::int64_t i = idx[u], j = idx[w];
        Atom at;
        at.arc = Arc{pts[u], m == 1 ? 1.0 : ccw_distance(pts[u], pts[w])};
        at.i_start = i;
        at.i_end = j;
        at.stop = pts[w];
        std::int64_t lo = std::min(i, j), hi = std::max(i, j);
        std::int64_t diff = hi - lo;
        bool ok = false;
        if (flavor == Flavor::P) {
            if (diff == qnm1 && lo >= 0 && lo < qn) {
                at.kind = AtomKind::Dnm1;
                at.index = lo;
                ok = true;
            } else if (diff == qn && lo >= 0 && lo < qnm1) {
                at.kind = AtomKind::Dn;
                at.index = lo;
                ok = true;
            }
        } else {
            if (diff == qn && hi >= 0 && hi < qn + qnm1) {
                at.kind = AtomKind::In;
                at.index = hi;
                ok = true;
            } else if (diff == qn + qnm1 && lo + qn >= 0 && lo + qn < qn) {
                at.kind = AtomKind::Inm1n;
                at.index = lo + qn;
                ok = true;
            }
        }
        if (!ok)
            throw CombinatoricsError("partition level " + std::to_string(n) + ": consecutive orbit points " +
                                     std::to_string(i) + ", " + std::to_string(j) + " do not bound an atom");
        if (at.arc.length < prec.min_resolvable_length)
            throw ResolutionError("partition level " + std::to_string(n) + ": atom below resolvable length");
        part.atoms.push_back(at);
    }
    return part;
}

} // namespace detail

inline DynamicalPartition build_P(const MarkedOrbit& orb, const ConvergentTable& tab, int n,
                                  const PrecisionContext& prec = {})
{
    if (n < 1 || n >= tab.size())
        throw Error("build_P: level out of range");
    std::int64_t qn = tab.q(n), qnm1 = tab.q(n - 1);
    return detail::assemble(orb, 0, qn + qnm1 - 1, n, qn, qnm1, Flavor::P, prec);
}

inline DynamicalPartition build_P(const PiecewiseHomeo& f, const ConvergentTable& tab, double xi0, int n)
{
    MarkedOrbit orb(f, xi0, 0, tab.q(n) + tab.q(n - 1) - 1);
    return build_P(orb, tab, n, f.prec);
}

inline DynamicalPartition build_D(const MarkedOrbit& orb, const ConvergentTable& tab, int n,
                                  const PrecisionContext& prec = {})
{
    if (n < 1 || n >= tab.size())
        throw Error("build_D: level out of range");
    std::int64_t qn = tab.q(n), qnm1 = tab.q(n - 1);
    return detail::assemble(orb, -qn, qn + qnm1 - 1, n, qn, qnm1, Flavor::D, prec);
}

inline DynamicalPartition build_D(const PiecewiseHomeo& f, const ConvergentTable& tab, double xi0, int n)
{
    MarkedOrbit orb(f, xi0, -tab.q(n), tab.q(n) + tab.q(n - 1) - 1);
    return build_D(orb, tab, n, f.prec);
}

struct CoverageReport {
    double sum = 0.0;
    double deviation = 0.0;
    double bound = 0.0;
    bool contiguous = true;
    bool pass = false;
};

inline CoverageReport coverage(const DynamicalPartition& part, const PrecisionContext& prec = {})
{
    CoverageReport r;
    for (std::size_t k = 0; k < part.atoms.size(); ++k) {
        const Atom& a = part.atoms[k];
        const Atom& b = part.atoms[(k + 1) % part.atoms.size()];
        r.sum += a.arc.length;
        if (a.stop != b.arc.start)
            r.contiguous = false;
    }
    r.deviation = std::abs(r.sum - 1.0);
    r.bound = static_cast<double>(part.atoms.size()) * 10.0 * prec.ulp();
    r.pass = r.contiguous && r.deviation <= r.bound;
    return r;
}

struct RefineReport {
    bool pass = false;
    double max_mismatch = 0.0;
};

/// Each Delta_i^{n-1} of P_n against Delta_i^{n+1} and Delta^n_{i+q_{n-1}+s q_n}, s < k, of P_{n+1}.
inline RefineReport refine_check(const DynamicalPartition& Pn, const DynamicalPartition& Pn1, double tol = 1e-9)
{
    if (Pn.flavor != Flavor::P || Pn1.flavor != Flavor::P || Pn1.level != Pn.level + 1)
        throw Error("refine_check: need P partitions at consecutive levels");
    const std::int64_t qn = Pn.q_n, qnm1 = Pn.q_nm1, qn1 = Pn1.q_n;
    if (Pn1.q_nm1 != qn)
        throw Error("refine_check: levels use different convergents");
    const std::int64_t k = (qn1 - qnm1) / qn;
    RefineReport r;
    std::vector<const Atom*> by_dnm1(static_cast<std::size_t>(qn1), nullptr), by_dn(static_cast<std::size_t>(qn), nullptr);
    for (const Atom& a : Pn1.atoms) {
        if (a.kind == AtomKind::Dnm1)
            by_dnm1[static_cast<std::size_t>(a.index)] = &a;
        else
            by_dn[static_cast<std::size_t>(a.index)] = &a;
    }
    for (const Atom& big : Pn.atoms) {
        if (big.kind == AtomKind::Dn) {
            // Delta_j^n survives unchanged as an atom of P_{n+1}
            const Atom* same = by_dnm1[static_cast<std::size_t>(big.index)];
            if (!same)
                throw StructuralMismatch(big.index, -1, "refine_check: Delta^n atom missing at the next level");
            double gap = std::max(circle_distance(same->arc.start, big.arc.start), circle_distance(same->stop, big.stop));
            r.max_mismatch = std::max(r.max_mismatch, gap);
            if (gap > tol)
                throw StructuralMismatch(big.index, -1, "refine_check: Delta^n atom moved between levels");
            continue;
        }
        const std::int64_t i = big.index;
        std::vector<std::pair<const Atom*, std::int64_t>> pieces;
        pieces.push_back({by_dn[static_cast<std::size_t>(i)], -1});
        for (std::int64_t s = 0; s < k; ++s)
            pieces.push_back({by_dnm1[static_cast<std::size_t>(i + qnm1 + s * qn)], s});
        for (auto& [a, s] : pieces)
            if (!a)
                throw StructuralMismatch(i, s, "refine_check: missing atom for (i, s)");
        std::sort(pieces.begin(), pieces.end(), [&](auto& x, auto& y) {
            return ccw_distance(big.arc.start, x.first->arc.start) < ccw_distance(big.arc.start, y.first->arc.start);
        });
        double cursor = big.arc.start;
        for (auto& [a, s] : pieces) {
            double gap = circle_distance(cursor, a->arc.start);
            r.max_mismatch = std::max(r.max_mismatch, gap);
            if (gap > tol)
                throw StructuralMismatch(i, s, "refine_check: piece (i=" + std::to_string(i) + ", s=" +
                                                   std::to_string(s) + ") does not abut its neighbour");
            cursor = a->arc.end();
        }
        double gap = circle_distance(cursor, big.arc.end());
        r.max_mismatch = std::max(r.max_mismatch, gap);
        if (gap > tol)
            throw StructuralMismatch(i, pieces.back().second, "refine_check: pieces do not reach the atom end");
    }
    r.pass = true;
    return r;
}

struct ContainmentReport {
    bool pass = true;
    std::size_t violations = 0;
};

/// Every atom of `fine` inside exactly one atom of `coarse` (same marked point).
inline ContainmentReport containment(const DynamicalPartition& fine, const DynamicalPartition& coarse)
{
    ContainmentReport r;
    const double base = coarse.marked_point;
    auto key_end = [&](double x) {
        double k = ccw_distance(base, x);
        return k == 0.0 ? 1.0 : k;
    };
    for (const Atom& a : fine.atoms) {
        const Atom& c = coarse.atoms[coarse.locate(a.arc.start)];
        if (ccw_distance(base, a.arc.start) < ccw_distance(base, c.arc.start) || key_end(a.stop) > key_end(c.stop)) {
            ++r.violations;
            r.pass = false;
        }
    }
    return r;
}

/// Generator interval Delta_0^n(xi) between xi and f^{q_n}(xi).
/// For a lift with rotation number in (0,1), f^{q_n}(xi) lies cw of xi for even n and ccw for odd n.
inline Arc generator_arc(double xi, double xi_qn, int n)
{
    if (n % 2 == 0)
        return Arc{frac(xi_qn), ccw_distance(xi_qn, xi)};
    return Arc{frac(xi), ccw_distance(xi, xi_qn)};
}

} // namespace circlab
