#pragma once

#include "circlab/circlab.hpp"

#include <cmath>

namespace fx {

using namespace circlab;

inline const double golden = (std::sqrt(5.0) - 1.0) / 2.0;

inline const ContinuedFraction& golden_cf()
{
    static const ContinuedFraction cf = ContinuedFraction::constant(1, 40);
    return cf;
}

inline const ConvergentTable& gtab()
{
    static const ConvergentTable t = convergents(golden_cf());
    return t;
}

inline PiecewiseHomeo tuned(const PiecewiseHomeo& base, int depth = 16)
{
    auto r = tune_to_rotation([&](double t) { return with_offset(base, t); }, golden_cf(), depth);
    return with_offset(base, r.t);
}

// tuned maps are shared across tests; tuning costs a few thousand orbit evaluations
inline const PiecewiseHomeo& pl2()
{
    static const PiecewiseHomeo f = tuned(build_pl2(0.0, 0.5, 1.5, 0.0));
    return f;
}

inline const PiecewiseHomeo& moebius()
{
    static const PiecewiseHomeo f = tuned(build_moebius2(0.0, 0.5, 2.0, 0.0));
    return f;
}

inline const PiecewiseHomeo& rotation()
{
    static const PiecewiseHomeo f = build_rotation(golden);
    return f;
}

// two pl2 maps with breaks 0 and 0.25, distinct jump ratios, both tuned to golden
inline const PiecewiseHomeo& singular1()
{
    static const PiecewiseHomeo f = tuned(build_pl2(0.0, 0.25, 1.5, 0.0));
    return f;
}

inline const PiecewiseHomeo& singular2()
{
    static const PiecewiseHomeo f = tuned(build_pl2(0.0, 0.25, 2.0, 0.0));
    return f;
}

inline double ulp() { return PrecisionContext{}.ulp(); }

} // namespace fx
