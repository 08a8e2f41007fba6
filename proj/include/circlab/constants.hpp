#pragma once

#include "pmap.hpp"

#include <cmath>
#include <cstdint>

namespace circlab {

struct Constants {
    double Q = 1, v = 0, p = 2, q_conj = 2;
    double ko_norm = 0;
    double C2 = 0, C3 = 0, C4 = 0, C5 = 0, C6 = 0, C7 = 0, C8 = 0;
    double kappa = 0, lambda = 0;
};

inline Constants constants_from(std::int64_t Q_, double v, double p, double ko_norm)
{
    if (!(p > 1.0))
        throw Error("constants: p must exceed 1");
    Constants c;
    const double Q = static_cast<double>(Q_);
    c.Q = Q;
    c.v = v;
    c.p = p;
    c.q_conj = p / (p - 1.0);
    c.ko_norm = ko_norm;
    c.C2 = 1.0 / ((Q + 1.0) * std::exp((Q + 3.0) * v));
    double t = (Q + 1.0) * std::exp((Q + 1.0) * v);
    c.C3 = 1.0 / (t * t);
    c.C4 = 1.0 / (1.0 + std::exp(-v));
    c.kappa = std::min(std::sqrt(c.C3), c.C2);
    c.lambda = 1.0 / std::sqrt(1.0 + std::exp(-v));
    c.C5 = std::pow((1.0 + std::exp(v)) * std::exp(3.0 * v), 1.0 / c.q_conj) * ko_norm;
    double qe = Q * std::exp(Q * v);
    c.C6 = 1.0 / (1.0 + qe);
    c.C7 = 1.0 / (qe * (1.0 + qe));
    c.C8 = qe / (1.0 + qe);
    return c;
}

inline Constants constants_for(const PiecewiseHomeo& f, std::int64_t Q, double p = 2.0)
{
    RegularityReport r = f.regularity(p);
    return constants_from(Q, r.v, p, r.ko_norm_p);
}

} // namespace circlab
