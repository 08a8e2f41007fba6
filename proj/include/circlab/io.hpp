#pragma once

#include "conjugacy.hpp"
#include "verifiers.hpp"

#include <json.hpp>

#include <cstdio>
#include <ostream>
#include <string>

namespace circlab {

using json = nlohmann::json;

inline std::string fmt_real(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

// ---------------------------------------------------------------- maps

inline json map_to_json(const PiecewiseHomeo& f)
{
    json j;
    j["family"] = f.family;
    j["breaks"] = f.breaks();
    j["parameters"] = json::object();
    for (auto& [k, v] : f.parameters)
        j["parameters"][k] = v;
    j["offset"] = f.offset;
    j["precision"] = f.prec.mantissa_bits;
    return j;
}

/// Rebuilds from {family, parameters, offset, precision}; doubles round-trip exactly through the JSON text.
inline PiecewiseHomeo map_from_json(const json& j)
{
    auto prec = PrecisionContext::for_bits(j.value("precision", 53));
    const std::string fam = j.at("family").get<std::string>();
    const double t = j.value("offset", 0.0);
    const json& p = j.contains("parameters") ? j.at("parameters") : json::object();
    if (fam == "rotation")
        return build_rotation(t, prec);
    if (fam == "pl2")
        return build_pl2(p.at("a").get<double>(), p.at("b").get<double>(), p.at("s1").get<double>(), t, prec);
    if (fam == "moebius2")
        return build_moebius2(p.at("a").get<double>(), p.at("b").get<double>(), p.at("sigma_a").get<double>(), t, prec,
                              p.value("skew", 1.0));
    throw Error("map_from_json: unknown family " + fam);
}

// ---------------------------------------------------------------- partitions

inline void partition_csv_header(std::ostream& os) { os << "level,flavor,kind,index,start,length\n"; }

inline void partition_csv_rows(std::ostream& os, const DynamicalPartition& part)
{
    const char* fl = part.flavor == Flavor::P ? "P" : "D";
    for (const Atom& a : part.atoms)
        os << part.level << ',' << fl << ',' << kind_name(a.kind) << ',' << a.index << ',' << fmt_real(a.arc.start)
           << ',' << fmt_real(a.arc.length) << '\n';
}

// ---------------------------------------------------------------- reports

inline json report_to_json(const Report& r)
{
    json j{{"check", r.check},
           {"level", r.level},
           {"bound", r.bound},
           {"observed_min", r.observed_min},
           {"observed_max", r.observed_max},
           {"pass", r.pass}};
    if (!r.detail.empty())
        j["detail"] = r.detail;
    return j;
}

inline json deviation_to_json(const DeviationReport& d)
{
    return {{"n", d.n},
            {"delta", d.delta},
            {"measure", d.measure},
            {"ambiguous", d.ambiguous},
            {"resolution", d.resolution},
            {"refine_levels", d.refine_levels},
            {"intervals", d.intervals.size()}};
}

inline void intervals_csv(std::ostream& os, const DeviationReport& d, bool header = true)
{
    if (header)
        os << "n,delta,start,length,log_Fn_min,log_Fn_max\n";
    for (auto& iv : d.intervals)
        os << d.n << ',' << fmt_real(d.delta) << ',' << fmt_real(iv.arc.start) << ',' << fmt_real(iv.arc.length) << ','
           << fmt_real(iv.log_fn_min) << ',' << fmt_real(iv.log_fn_max) << '\n';
}

inline json profile_to_json(const SingularityProfile& s)
{
    json hist = json::array();
    for (std::size_t k = 0; k < s.bucket_mass.size(); ++k) {
        double lo = k == 0 ? 0.0 : s.eps_grid[k - 1];
        json hi = k < s.eps_grid.size() ? json(s.eps_grid[k]) : json(nullptr);
        hist.push_back({{"slope_min", lo}, {"slope_max", hi}, {"mass", s.bucket_mass[k]}});
    }
    json m = json::array();
    for (std::size_t k = 0; k < s.eps_grid.size(); ++k)
        m.push_back({{"eps", s.eps_grid[k]}, {"mass", s.m_of_eps[k]}});
    return {{"n", s.n}, {"total_mass", s.total_mass}, {"image_mass", s.image_mass}, {"histogram", hist},
            {"m_of_eps", m}};
}

inline json constants_to_json(const Constants& c)
{
    return {{"Q", c.Q},   {"v", c.v},   {"p", c.p},   {"q_conj", c.q_conj}, {"ko_norm", c.ko_norm},
            {"C2", c.C2}, {"C3", c.C3}, {"C4", c.C4}, {"C5", c.C5},         {"C6", c.C6},
            {"C7", c.C7}, {"C8", c.C8}, {"kappa", c.kappa}, {"lambda", c.lambda}};
}

} // namespace circlab
