// Batch front-end: circlab <verb> --config cfg.json [--out DIR] [--precision BITS] [--levels A..B] [--seed N]

#include "circlab/circlab.hpp"
#include "circlab/io.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace circlab;

namespace {

constexpr const char* kVersion = "0.3.0";

struct Config {
    json raw;
    std::vector<json> map_specs;
    ContinuedFraction target;
    int depth = 16;
    bool tune = true;
    int lvl_lo = 1, lvl_hi = 14;
    std::vector<double> deltas;
    double resolution = 2e-3;
    int h_depth = 20;
    int samples = 1000;
    std::uint64_t seed = 1;
    int precision = 53;
    fs::path out = "out";
};

std::uint64_t fnv1a(const std::string& s)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

ContinuedFraction parse_target(const json& t)
{
    if (t.contains("rho"))
        return cf_expand(t.at("rho").get<double>(), t.value("depth", 40));
    ContinuedFraction cf;
    auto q = t.at("quotients").get<std::vector<std::int64_t>>();
    int repeat = t.value("repeat", 1);
    for (int r = 0; r < repeat; ++r)
        cf.quotients.insert(cf.quotients.end(), q.begin(), q.end());
    return cf;
}

Config load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error("cannot open config " + path);
    Config c;
    c.raw = json::parse(in);
    if (c.raw.value("schema", 0) != 1)
        throw Error("config: unsupported schema version");
    for (auto& m : c.raw.at("maps"))
        c.map_specs.push_back(m);
    c.target = parse_target(c.raw.at("target"));
    c.depth = c.raw.value("depth", c.depth);
    c.tune = c.raw.value("tune", c.tune);
    if (c.raw.contains("levels")) {
        c.lvl_lo = c.raw["levels"][0];
        c.lvl_hi = c.raw["levels"][1];
    }
    c.deltas = c.raw.value("deltas", std::vector<double>{});
    c.resolution = c.raw.value("resolution", c.resolution);
    c.h_depth = c.raw.value("h_depth", c.h_depth);
    c.samples = c.raw.value("samples", c.samples);
    c.seed = c.raw.value("seed", c.seed);
    c.precision = c.raw.value("precision", c.precision);
    c.out = c.raw.value("out", std::string("out"));
    return c;
}

struct Lab {
    Config cfg;
    ConvergentTable tab;
    std::vector<PiecewiseHomeo> maps;
    std::vector<TuneResult> tunes;
    std::vector<std::string> files;
    bool ok = true;

    explicit Lab(Config c) : cfg(std::move(c)), tab(convergents(cfg.target))
    {
        if (cfg.depth < cfg.lvl_hi + 2)
            throw Error("config: depth must be at least the top level + 2");
        auto prec = PrecisionContext::for_bits(cfg.precision);
        for (auto spec : cfg.map_specs) {
            spec["precision"] = cfg.precision;
            PiecewiseHomeo f = map_from_json(spec);
            TuneResult tr;
            if (cfg.tune) {
                tr = tune_to_rotation([&](double t) { return with_offset(f, t); }, cfg.target, cfg.depth);
                f = with_offset(f, tr.t);
            }
            f.prec = prec;
            maps.push_back(f);
            tunes.push_back(tr);
        }
    }

    static double marked(const PiecewiseHomeo& f) { return f.breaks().empty() ? 0.0 : f.breaks()[0]; }

    std::ofstream open(const std::string& name)
    {
        fs::create_directories(cfg.out);
        files.push_back(name);
        std::ofstream os(cfg.out / name);
        if (!os)
            throw Error("cannot write " + (cfg.out / name).string());
        return os;
    }

    void write_json(const std::string& name, const json& j) { open(name) << j.dump(2) << '\n'; }

    void check(const std::string& name, bool pass, const std::string& what = "")
    {
        std::cout << (pass ? "PASS " : "FAIL ") << name << (what.empty() ? "" : " " + what) << '\n';
        ok = ok && pass;
    }

    void manifest(const std::string& verb)
    {
        char hash[17];
        std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(fnv1a(cfg.raw.dump())));
        json m{{"verb", verb},
               {"version", kVersion},
               {"config_hash", hash},
               {"precision_bits", cfg.precision},
               {"seed", cfg.seed},
               {"levels", {cfg.lvl_lo, cfg.lvl_hi}},
               {"files", files}};
        fs::create_directories(cfg.out);
        std::ofstream(cfg.out / "manifest.json") << m.dump(2) << '\n';
    }
};

int cmd_rotation(Lab& lab)
{
    json out = json::array();
    for (std::size_t k = 0; k < lab.maps.size(); ++k) {
        const auto& f = lab.maps[k];
        auto times = closest_return_times(f, Lab::marked(f), std::min(lab.cfg.depth, lab.tab.size()));
        auto est = rotation_number(f, 100000, RotationMethod::lift_average, Lab::marked(f));
        json j{{"map", map_to_json(f)},
               {"t", lab.tunes[k].t},
               {"depth_reached", lab.tunes[k].depth_reached},
               {"bracket_width", lab.tunes[k].bracket_width},
               {"return_times", times},
               {"rho_estimate", est.estimate},
               {"rho_error_bound", est.error_bound}};
        std::cout << "map " << k << " (" << f.family << "): t = " << fmt_real(lab.tunes[k].t)
                  << ", depth reached " << lab.tunes[k].depth_reached << ", return times";
        for (auto q : times)
            std::cout << ' ' << q;
        std::cout << '\n';
        bool match = true;
        for (std::size_t i = 0; i < times.size(); ++i)
            match = match && times[i] == lab.tab.q(static_cast<int>(i));
        lab.check("return_times_map" + std::to_string(k), match);
        out.push_back(j);
    }
    lab.write_json("rotation.json", out);
    return lab.ok ? 0 : 1;
}

int cmd_partition(Lab& lab)
{
    const auto& f = lab.maps.at(0);
    auto os = lab.open("partitions.csv");
    partition_csv_header(os);
    MarkedOrbit orb(f, Lab::marked(f), -lab.tab.q(lab.cfg.lvl_hi),
                    lab.tab.q(lab.cfg.lvl_hi) + lab.tab.q(lab.cfg.lvl_hi - 1) - 1);
    for (int n = lab.cfg.lvl_lo; n <= lab.cfg.lvl_hi; ++n) {
        auto P = build_P(orb, lab.tab, n, f.prec);
        auto D = build_D(orb, lab.tab, n, f.prec);
        partition_csv_rows(os, P);
        partition_csv_rows(os, D);
        lab.check("coverage", coverage(P, f.prec).pass && coverage(D, f.prec).pass, "n=" + std::to_string(n));
    }
    return lab.ok ? 0 : 1;
}

int cmd_verify(Lab& lab)
{
    const auto& f = lab.maps.at(0);
    const double xi0 = Lab::marked(f);
    Constants c = constants_for(f, lab.cfg.target.bound_Q());
    CounterRng rng{lab.cfg.seed};
    json reports = json::array();
    auto add = [&](const Report& r) {
        reports.push_back(report_to_json(r));
        lab.check(r.check, r.pass, "n=" + std::to_string(r.level) + (r.detail.empty() ? "" : " " + r.detail));
    };
    const int lo = lab.cfg.lvl_lo, hi = lab.cfg.lvl_hi;
    const json fixture = lab.cfg.raw.value("fixture", json::object());
    MarkedOrbit orb(f, xi0, -lab.tab.q(hi + 1), lab.tab.q(hi + 1) + lab.tab.q(hi) - 1);
    PiecewiseHomeo finv = f.inverse_map();
    for (int n = lo; n <= hi; ++n) {
        auto P = build_P(orb, lab.tab, n, f.prec);
        auto D = build_D(orb, lab.tab, n, f.prec);
        if (fixture.contains("drop_atom") && n == lo)
            P.atoms.erase(P.atoms.begin() + fixture["drop_atom"].get<std::ptrdiff_t>());
        auto cov = coverage(P, f.prec);
        add({"coverage", n, cov.bound, cov.deviation, cov.deviation, cov.pass, cov.contiguous ? "" : "gap"});
        add(comparability_report(P, c));
        add(comparability_report(D, c));
        auto ct = containment(D, P);
        add({"containment", n, 0.0, 0.0, static_cast<double>(ct.violations), ct.pass, ""});
        auto P1 = build_P(orb, lab.tab, n + 1, f.prec);
        Report rr{"refine", n, 1e-12, 0.0, 0.0, false, ""};
        try {
            auto rc = refine_check(P, P1);
            rr.observed_max = rc.max_mismatch;
            rr.pass = rc.pass && rc.max_mismatch < 1e-12;
        } catch (const StructuralMismatch& e) {
            rr.detail = "(i=" + std::to_string(e.i) + ", s=" + std::to_string(e.s) + ")";
        }
        add(rr);
        const double tol = 1e-9 * static_cast<double>(lab.tab.q(n));
        add(verify_denjoy(f, lab.tab.q(n), c.v, lab.cfg.samples, rng.split(2 * n), tol, n));
        auto di = verify_denjoy(finv, lab.tab.q(n), c.v, lab.cfg.samples, rng.split(2 * n + 1), tol, n);
        di.check = "denjoy_inverse";
        add(di);
        add(verify_finzi(f, lab.tab, xi0, n, c.v, lab.cfg.samples, rng.split(1000 + n), tol));
    }
    auto dr = decay_report(f, lab.tab, xi0, lo, hi, c);
    add({"decay", hi, 1.0, std::min(dr.lower_slack, dr.gen_lower_slack), std::max(dr.upper_slack, dr.gen_upper_slack),
         dr.pass && dr.pairs >= 1000, "pairs=" + std::to_string(dr.pairs)});
    const json osc = lab.cfg.raw.value("oscillation", json{{"n", 8}, {"l", {2, 4, 6}}});
    for (int l : osc["l"].get<std::vector<int>>()) {
        auto r = verify_oscillation(f, lab.tab, xi0, osc["n"].get<int>(), l, c, lab.cfg.samples, rng.split(5000 + l),
                                    1e-9);
        r.detail = "l=" + std::to_string(l);
        add(r);
    }
    lab.write_json("reports.json", reports);
    return lab.ok ? 0 : 1;
}

int cmd_constants(Lab& lab)
{
    json out = json::array();
    for (const auto& f : lab.maps) {
        auto c = constants_for(f, lab.cfg.target.bound_Q());
        auto reg = f.regularity();
        json j = constants_to_json(c);
        j["c1"] = reg.c1;
        j["c2"] = reg.c2;
        j["v_jumps"] = reg.v_jumps;
        out.push_back(j);
        std::cout << f.family << ": v = " << fmt_real(c.v) << ", C2 = " << fmt_real(c.C2) << ", kappa = "
                  << fmt_real(c.kappa) << ", lambda = " << fmt_real(c.lambda) << '\n';
    }
    lab.write_json("constants.json", out);
    return 0;
}

struct Pair {
    const PiecewiseHomeo& f1;
    const PiecewiseHomeo& f2;
    double a1, b1, a2, b2;
    ConjugacyMap h;
    MuCaseReport mu;
};

Pair make_pair(Lab& lab)
{
    if (lab.maps.size() != 2)
        throw Error("conjugacy verbs need exactly two maps");
    const auto& f1 = lab.maps[0];
    const auto& f2 = lab.maps[1];
    auto br = [](const PiecewiseHomeo& f, int k) {
        return f.breaks().size() > static_cast<std::size_t>(k) ? f.breaks()[static_cast<std::size_t>(k)] : 0.0;
    };
    Pair p{f1, f2, br(f1, 0), br(f1, 1), br(f2, 0), br(f2, 1), build_h(f1, f2, lab.tab, lab.cfg.h_depth), {}};
    p.mu = detect_mu_case(f1, f2, lab.tab, lab.cfg.h_depth, p.a1, p.b1, p.a2, p.b2);
    return p;
}

int cmd_conjugacy(Lab& lab)
{
    Pair p = make_pair(lab);
    {
        auto os = lab.open("h_knots.csv");
        os << "x,y\n";
        for (std::size_t k = 0; k < p.h.size(); ++k)
            os << fmt_real(p.h.xs()[k]) << ',' << fmt_real(p.h.ys()[k]) << '\n';
    }
    double res = conjugacy_residual(p.h, p.f1, p.f2, 10000);
    json j{{"knots", p.h.size()}, {"mesh", p.h.mesh()}, {"residual", res}, {"mu_case", mu_case_name(p.mu.result)}};
    lab.check("residual", res <= 2.0 * p.h.mesh() + 10.0 * p.f1.prec.ulp(), fmt_real(res));
    if (!p.f1.breaks().empty() && !p.f2.breaks().empty()) {
        int n = std::min(lab.cfg.lvl_hi, lab.cfg.h_depth - 2);
        try {
            auto ja = jump_algebra(p.f1, p.f2, p.h, lab.tab, n, p.a1, p.b1, p.b2, p.mu.result);
            j["jumps"] = {{"a", ja.jump_a}, {"b", ja.jump_b}, {"c", ja.jump_c}, {"product", ja.product}};
        } catch (const NotAJumpError&) {
            j["jumps"] = "continuous";
        }
    }
    lab.write_json("conjugacy.json", j);
    return lab.ok ? 0 : 1;
}

int cmd_singularity(Lab& lab)
{
    Pair p = make_pair(lab);
    std::vector<double> deltas = lab.cfg.deltas;
    json info{{"mu_case", mu_case_name(p.mu.result)}, {"mesh", p.h.mesh()}};
    if (deltas.empty()) {
        if (p.f1.breaks().empty() || p.f2.breaks().empty()) {
            deltas = {0.01, 0.1, 1.0};
        } else {
            auto dd = default_deltas(p.f1.jump_ratio(p.a1), p.f2.jump_ratio(p.a2), p.f2.jump_ratio(p.b2));
            info["delta0"] = dd.delta0;
            info["delta1"] = dd.delta1;
            if (p.mu.result == MuCase::matched)
                deltas = {dd.delta0};
            else if (p.mu.result == MuCase::unmatched)
                deltas = {dd.delta1};
            else
                deltas = {dd.delta0, dd.delta1};
            if (p.mu.result == MuCase::undetermined)
                std::cout << "note: case detection undetermined, reporting both delta values\n";
        }
    }
    auto ms = lab.open("measures.csv");
    ms << "n,delta,measure,ambiguous\n";
    auto ivs = lab.open("intervals.csv");
    ivs << "n,delta,start,length,log_Fn_min,log_Fn_max\n";
    json devs = json::array(), profiles = json::array();
    for (int n = lab.cfg.lvl_lo; n <= lab.cfg.lvl_hi; ++n) {
        for (double d : deltas) {
            auto r = deviation_measure(p.f1, p.f2, p.h, lab.tab, n, d, lab.cfg.resolution);
            ms << n << ',' << fmt_real(d) << ',' << fmt_real(r.measure) << ',' << fmt_real(r.ambiguous) << '\n';
            intervals_csv(ivs, r, false);
            devs.push_back(deviation_to_json(r));
        }
        profiles.push_back(profile_to_json(singularity_profile(p.h, p.f1, lab.tab, n, {0.01, 0.1, 0.5, 1.0, 2.0, 10.0})));
    }
    info["deviation"] = devs;
    lab.write_json("singularity.json", info);
    lab.write_json("profile.json", profiles);
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"circle map laboratory"};
    app.require_subcommand(1);
    std::string config, out, levels;
    int precision = 0;
    std::uint64_t seed = 0;
    std::string verb;
    const std::pair<const char*, const char*> verbs[] = {
        {"rotation", "tune maps to the target and report rotation numbers and return times"},
        {"partition", "write P_n and D_n atoms for the first map"},
        {"verify", "run the structural and distortion checks on the first map"},
        {"conjugacy", "build h between the two maps and report residual, mu case and jumps"},
        {"singularity", "deviation measures and concentration profiles for the map pair"},
        {"constants", "derived constants for each map"},
    };
    for (auto [v, help] : verbs) {
        auto* sub = app.add_subcommand(v, help);
        sub->add_option("--config", config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out, "output directory");
        sub->add_option("--precision", precision, "mantissa bits");
        sub->add_option("--levels", levels, "level range A..B");
        sub->add_option("--seed", seed, "sampling seed");
        sub->callback([&verb, v] { verb = v; });
    }
    CLI11_PARSE(app, argc, argv);

    try {
        Config cfg = load_config(config);
        if (!out.empty())
            cfg.out = out;
        if (precision)
            cfg.precision = precision;
        if (seed)
            cfg.seed = seed;
        if (!levels.empty()) {
            auto dots = levels.find("..");
            if (dots == std::string::npos)
                throw Error("--levels expects A..B");
            cfg.lvl_lo = std::stoi(levels.substr(0, dots));
            cfg.lvl_hi = std::stoi(levels.substr(dots + 2));
        }
        // overrides feed the hash so the manifest describes what actually ran
        cfg.raw["out"] = cfg.out.string();
        cfg.raw["precision"] = cfg.precision;
        cfg.raw["seed"] = cfg.seed;
        cfg.raw["levels"] = {cfg.lvl_lo, cfg.lvl_hi};
        Lab lab(std::move(cfg));
        int rc = 0;
        if (verb == "rotation")
            rc = cmd_rotation(lab);
        else if (verb == "partition")
            rc = cmd_partition(lab);
        else if (verb == "verify")
            rc = cmd_verify(lab);
        else if (verb == "conjugacy")
            rc = cmd_conjugacy(lab);
        else if (verb == "singularity")
            rc = cmd_singularity(lab);
        else
            rc = cmd_constants(lab);
        lab.manifest(verb);
        return rc;
    } catch (const DepthUnachievable& e) {
        std::cerr << "depth unachievable (max " << e.max_depth << "): " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
