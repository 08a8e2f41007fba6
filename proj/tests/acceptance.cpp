// One PASS/FAIL line per acceptance criterion; exit status 0 iff all pass.

#include "fixtures.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>

using namespace circlab;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream note;
    void require(bool ok, const std::string& what)
    {
        if (!ok && pass)
            note << "first failure: " << what << "; ";
        pass = pass && ok;
    }
};

std::vector<std::int64_t> fibonacci(int n)
{
    std::vector<std::int64_t> q{1, 2};
    while (static_cast<int>(q.size()) < n)
        q.push_back(q[q.size() - 1] + q[q.size() - 2]);
    return q;
}

void continued_fractions(Outcome& o)
{
    auto cf = cf_expand(fx::golden, 20);
    o.require(cf.quotients == std::vector<std::int64_t>(20, 1), "golden quotients");
    auto t = convergents(cf);
    auto fib = fibonacci(20);
    for (int n = 0; n < 20; ++n)
        o.require(t.q(n) == fib[static_cast<std::size_t>(n)], "q_" + std::to_string(n));
    double worst = 0.0;
    for (int n = 0; n <= 18; ++n) {
        double err = std::abs(fx::golden - static_cast<double>(t.p(n)) / static_cast<double>(t.q(n)));
        double bound = 1.0 / (static_cast<double>(t.q(n)) * static_cast<double>(t.q(n + 1)));
        o.require(err < bound, "approximation n=" + std::to_string(n));
        worst = std::max(worst, err / bound);
    }
    o.note << "max err/bound " << worst;
}

void identity_controls(Outcome& o)
{
    const auto& t = fx::gtab();
    for (const PiecewiseHomeo* f : {&fx::rotation(), &fx::pl2()}) {
        auto h = build_h(*f, *f, t, 20);
        bool diag = true;
        for (std::size_t k = 0; k < h.size(); ++k)
            diag = diag && h.xs()[k] == h.ys()[k];
        o.require(diag, f->family + " knots off the diagonal");
        double res = conjugacy_residual(h, *f, *f, 10000);
        o.require(res <= 10 * fx::ulp(), f->family + " residual");
        double worst_fn = 0.0, worst_meas = 0.0;
        for (int n = 1; n <= 14; ++n) {
            FnEvaluator ev(*f, *f, h, t.q(n));
            for (double x : h.xs())
                worst_fn = std::max(worst_fn, std::abs(ev.value(x, Side::right)));
            for (double d : {0.01, 0.1, 1.0})
                worst_meas = std::max(worst_meas, deviation_measure(*f, *f, h, t, n, d, 2e-3).measure);
        }
        o.require(worst_fn == 0.0, f->family + " F_n nonzero at a knot");
        o.require(worst_meas == 0.0, f->family + " deviation measure nonzero");
        o.note << f->family << ": residual " << res << ", max|log F_n| " << worst_fn << ", max measure " << worst_meas
               << "; ";
    }
}

void denjoy(Outcome& o)
{
    const auto& t = fx::gtab();
    CounterRng rng{101};
    for (const PiecewiseHomeo* f : {&fx::pl2(), &fx::moebius()}) {
        double v = f->regularity().v;
        auto inv = f->inverse_map();
        double worst = 0.0;
        for (int n = 1; n <= 14; ++n) {
            double tol = 1e-9 * static_cast<double>(t.q(n));
            for (const PiecewiseHomeo* g : std::array<const PiecewiseHomeo*, 2>{f, &inv}) {
                auto r = verify_denjoy(*g, t.q(n), v, 1000, rng.split(static_cast<std::uint64_t>(n)), tol, n);
                o.require(r.pass, f->family + " n=" + std::to_string(n));
                worst = std::max({worst, r.observed_max, -r.observed_min});
            }
        }
        o.note << f->family << ": max|log Df^q_n| " << worst << " vs v " << v << "; ";
    }
}

void finzi(Outcome& o)
{
    const auto& t = fx::gtab();
    CounterRng rng{202};
    for (const PiecewiseHomeo* f : {&fx::pl2(), &fx::moebius()}) {
        double v = f->regularity().v, worst = 0.0;
        for (int n = 1; n <= 14; ++n) {
            auto r = verify_finzi(*f, t, 0.0, n, v, 1000, rng.split(static_cast<std::uint64_t>(n)),
                                  1e-9 * static_cast<double>(t.q(n)));
            o.require(r.pass, f->family + " n=" + std::to_string(n));
            worst = std::max(worst, r.observed_max);
        }
        o.note << f->family << ": max oscillation " << worst << " vs v " << v << "; ";
    }
}

void partition_structure(Outcome& o)
{
    const auto& t = fx::gtab();
    for (const PiecewiseHomeo* f : {&fx::pl2(), &fx::moebius()}) {
        double worst_mismatch = 0.0;
        for (int n = 1; n <= 14; ++n) {
            auto P = build_P(*f, t, 0.0, n);
            auto P1 = build_P(*f, t, 0.0, n + 1);
            auto D = build_D(*f, t, 0.0, n);
            const std::string at = f->family + " n=" + std::to_string(n);
            o.require(coverage(P).pass && coverage(D).pass, at + " coverage");
            auto rc = refine_check(P, P1);
            worst_mismatch = std::max(worst_mismatch, rc.max_mismatch);
            o.require(rc.pass && rc.max_mismatch < 1e-12, at + " refine");
            o.require(static_cast<std::int64_t>(D.atoms.size()) == 2 * t.q(n) + t.q(n - 1), at + " D count");
            o.require(containment(D, P).pass, at + " D inside P");
        }
        o.note << f->family << ": max refine mismatch " << worst_mismatch << "; ";
    }
}

void comparability_decay(Outcome& o)
{
    const auto& t = fx::gtab();
    for (const PiecewiseHomeo* f : {&fx::pl2(), &fx::moebius()}) {
        auto c = constants_for(*f, 1);
        double minP = INFINITY, minD = INFINITY;
        for (int n = 1; n <= 14; ++n) {
            auto rp = comparability_report(build_P(*f, t, 0.0, n), c);
            auto rd = comparability_report(build_D(*f, t, 0.0, n), c);
            o.require(rp.pass && rd.pass, f->family + " comparability n=" + std::to_string(n));
            minP = std::min(minP, rp.observed_min);
            minD = std::min(minD, rd.observed_min);
        }
        auto dr = decay_report(*f, t, 0.0, 1, 14, c);
        o.require(dr.pass, f->family + " decay bounds");
        o.require(dr.pairs >= 1000, f->family + " decay pair count");
        o.note << f->family << ": min ratio P " << minP << " (C2 " << c.C2 << "), D " << minD << ", decay pairs "
               << dr.pairs << "; ";
    }
}

void universal_estimates(Outcome& o)
{
    const auto& t = fx::gtab();
    CounterRng rng{303};
    auto cm = constants_for(fx::moebius(), 1);
    for (int l : {2, 4, 6}) {
        auto r = verify_oscillation(fx::moebius(), t, 0.0, 8, l, cm, 1000, rng.split(static_cast<std::uint64_t>(l)),
                                    1e-9);
        o.require(r.pass, "moebius2 l=" + std::to_string(l));
        o.note << "moebius2 l=" << l << ": " << r.observed_max << " <= " << r.bound << "; ";
    }
    auto cp = constants_for(fx::pl2(), 1);
    for (int l : {2, 4, 6}) {
        auto r = verify_oscillation(fx::pl2(), t, 0.0, 8, l, cp, 1000, rng.split(10 + static_cast<std::uint64_t>(l)),
                                    1e-9);
        o.require(r.observed_max == 0.0, "pl2 oscillation not exactly zero");
    }
    o.note << "pl2: 0";
}

void jump_algebra_check(Outcome& o)
{
    const auto& t = fx::gtab();
    auto f1 = fx::tuned(build_pl2(0.0, 0.5, 1.5, 0.0));
    auto f2 = fx::tuned(build_pl2(0.0, 0.5, 4.0 / 3.0, 0.0));
    auto h = build_h(f1, f2, t, 20);
    const double want = f2.jump_ratio(0.0) / f1.jump_ratio(0.0);
    double worst = 0.0, worst_prod = 0.0;
    for (int n : {8, 10, 12, 14}) {
        FnEvaluator ev(f1, f2, h, t.q(n));
        for (double x : orbit(f1, 0.0, -(t.q(n) - 1), 0))
            worst = std::max(worst, std::abs(ev.jump(x) / want - 1.0));
        auto mu = detect_mu_case(f1, f2, t, 20, 0.0, 0.5, 0.0, 0.5);
        auto ja = jump_algebra(f1, f2, h, t, n, 0.0, 0.5, 0.5, mu.result);
        worst_prod = std::max(worst_prod, std::abs(ja.product - 1.0));
    }
    o.require(worst <= 1e-6, "a-orbit jump");
    o.require(worst_prod <= 1e-6, "jump product");
    o.note << "expected jump " << want << ", max rel err " << worst << ", max |product-1| " << worst_prod;
}

void singularity_signal(Outcome& o)
{
    const auto& t = fx::gtab();
    const auto& f1 = fx::singular1();
    const auto& f2 = fx::singular2();
    o.require(std::abs(f1.jump_ratio(0.0) * f1.jump_ratio(0.25) - 1.0) < 1e-12, "f1 jump product");
    o.require(std::abs(f2.jump_ratio(0.0) * f2.jump_ratio(0.25) - 1.0) < 1e-12, "f2 jump product");
    o.require(std::abs(f1.jump_ratio(0.0) - f2.jump_ratio(0.0)) > 1e-3, "distinct jumps");
    auto h = build_h(f1, f2, t, 20);
    auto d = default_deltas(f1.jump_ratio(0.0), f2.jump_ratio(0.0), f2.jump_ratio(0.25));
    double min_meas = INFINITY;
    for (int n = 8; n <= 14; ++n)
        min_meas = std::min(min_meas, deviation_measure(f1, f2, h, t, n, d.delta0, 2e-3).measure);
    o.require(min_meas >= 0.01, "deviation measure vanishes");
    const std::vector<double> grid{0.1, 0.5, 1.0, 2.0};
    double m8 = singularity_profile(h, f1, t, 8, grid).m_at(0.5);
    double m14 = singularity_profile(h, f1, t, 14, grid).m_at(0.5);
    o.require(m14 > m8, "no mass concentration");
    // contrast: identity pair
    auto hid = build_h(f1, f1, t, 20);
    double id_meas = deviation_measure(f1, f1, hid, t, 14, d.delta0, 2e-3).measure;
    auto id_prof = singularity_profile(hid, f1, t, 14, {0.999999, 1.000001});
    o.require(id_meas == 0.0, "identity measure");
    o.require(id_prof.m_at(0.999999) == 0.0 && std::abs(id_prof.m_at(1.000001) - 1.0) < 1e-12, "identity profile");
    o.note << "delta0 " << d.delta0 << ", min measure n=8..14 " << min_meas << ", m(1/2) " << m8 << " -> " << m14
           << ", identity measure " << id_meas;
}

void barycentric_separation(Outcome& o)
{
    const auto& t = fx::gtab();
    for (const PiecewiseHomeo* f : {&fx::singular1(), &fx::singular2()}) {
        auto c = constants_for(*f, 1);
        auto scan = scan_barycentric_subsequence(*f, t, 0.0, 0.25, 1, 14, c.C7);
        o.require(!scan.passing.empty(), f->family + " empty barycentric list");
        if (scan.passing.empty())
            continue;
        int m = scan.passing.front();
        auto r = search_separation(*f, t, scan, m, 8, 0.0, 0.25, 0.25, c.C6);
        o.require(r.pass && r.l <= 8, "separation not found for m=" + std::to_string(m));
        o.note << "s1=" << f->parameters.at("s1") << ": " << scan.passing.size() << " passing levels, m=" << m
               << ", l=" << r.l << ", min rel gap " << r.min_relative_gap << "; ";
    }
}

} // namespace

int main()
{
    const std::vector<std::pair<const char*, std::function<void(Outcome&)>>> criteria{
        {"1 continued fractions", continued_fractions},
        {"2 identity controls", identity_controls},
        {"3 Denjoy verifier", denjoy},
        {"4 Finzi verifier", finzi},
        {"5 partition structure", partition_structure},
        {"6 comparability and decay", comparability_decay},
        {"7 universal estimates", universal_estimates},
        {"8 F_n jump algebra", jump_algebra_check},
        {"9 singularity signal", singularity_signal},
        {"10 barycentric and separation", barycentric_separation},
    };
    int failed = 0;
    for (auto& [name, run] : criteria) {
        Outcome o;
        auto t0 = std::chrono::steady_clock::now();
        try {
            run(o);
        } catch (const std::exception& e) {
            o.pass = false;
            o.note << "exception: " << e.what();
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("%s criterion %s (%.2fs) %s\n", o.pass ? "PASS" : "FAIL", name, secs, o.note.str().c_str());
        failed += o.pass ? 0 : 1;
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
