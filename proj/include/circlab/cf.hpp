#pragma once

#include "circle.hpp"

#include <cstdint>
#include <numeric>
#include <vector>

namespace circlab {

struct OverflowError : Error {
    int n;
    OverflowError(int n_, const std::string& msg) : Error(msg), n(n_) {}
};

/// rho = 1/(k1 + 1/(k2 + ...)).
struct ContinuedFraction {
    std::vector<std::int64_t> quotients;
    bool terminated = false;

    int depth() const { return static_cast<int>(quotients.size()); }

    double value() const
    {
        double x = 0.0;
        for (auto it = quotients.rbegin(); it != quotients.rend(); ++it)
            x = 1.0 / (static_cast<double>(*it) + x);
        return x;
    }

    std::int64_t bound_Q() const
    {
        std::int64_t q = 1;
        for (auto k : quotients)
            q = std::max(q, k);
        return q;
    }

    static ContinuedFraction constant(std::int64_t k, int depth)
    {
        ContinuedFraction cf;
        cf.quotients.assign(static_cast<std::size_t>(depth), k);
        return cf;
    }
};

struct BoundedTypeWitness {
    std::int64_t Q = 1;
    int depth_checked = 0;
};

inline BoundedTypeWitness bounded_type(const ContinuedFraction& cf)
{
    return {cf.bound_Q(), cf.depth()};
}

inline ContinuedFraction cf_expand(double rho, int depth, const PrecisionContext& prec = {})
{
    if (!(rho > 0.0 && rho < 1.0))
        throw Error("cf_expand: rho must lie in (0,1)");
    if (depth < 1)
        throw Error("cf_expand: depth must be >= 1");
    ContinuedFraction cf;
    const double u = prec.unit_roundoff();
    double x = rho;
    double q_prev = 1.0, q = 0.0; // q_{n-1}, q_{n-2} shifted as we go
    for (int n = 0; n < depth; ++n) {
        double inv = 1.0 / x;
        double k = std::floor(inv);
        double rem = inv - k;
        // 1/x a hair below an integer: the remainder is noise next to 1
        if (1.0 - rem < 10.0 * u * inv) {
            k += 1.0;
            rem = 0.0;
        }
        cf.quotients.push_back(static_cast<std::int64_t>(k));
        double q_next = k * q_prev + q;
        q = q_prev;
        q_prev = q_next;
        const double noise = 10.0 * u * q_prev * q_prev;
        if (rem < noise) {
            // a remainder lost in roundoff means rational only while the noise floor is well below 1
            cf.terminated = noise < 0.5;
            break;
        }
        x = rem;
    }
    if (cf.terminated && cf.quotients.size() > 1 && cf.quotients.back() == 1) {
        cf.quotients.pop_back();
        cf.quotients.back() += 1;
    }
    return cf;
}

struct ConvergentRow {
    int n;
    std::int64_t p, q;
};

/// p_{-1}=0, q_{-1}=1, p_0=1, q_0=k_1; row n uses the (n+1)-th quotient.
struct ConvergentTable {
    std::vector<ConvergentRow> rows;

    std::int64_t q(int n) const
    {
        if (n == -1)
            return 1;
        return rows.at(static_cast<std::size_t>(n)).q;
    }
    std::int64_t p(int n) const
    {
        if (n == -1)
            return 0;
        return rows.at(static_cast<std::size_t>(n)).p;
    }
    int size() const { return static_cast<int>(rows.size()); }
};

inline ConvergentTable convergents(const ContinuedFraction& cf)
{
    if (cf.quotients.empty())
        throw Error("convergents: empty continued fraction");
    ConvergentTable t;
    std::int64_t pm2 = 0, qm2 = 1; // p_{-1}, q_{-1}
    std::int64_t pm1 = 1, qm1 = cf.quotients[0];
    t.rows.push_back({0, pm1, qm1});
    for (std::size_t i = 1; i < cf.quotients.size(); ++i) {
        int n = static_cast<int>(i);
        std::int64_t k = cf.quotients[i];
        std::int64_t p, q;
        if (__builtin_mul_overflow(k, pm1, &p) || __builtin_add_overflow(p, pm2, &p) ||
            __builtin_mul_overflow(k, qm1, &q) || __builtin_add_overflow(q, qm2, &q))
            throw OverflowError(n, "convergents: integer overflow at n = " + std::to_string(n));
        t.rows.push_back({n, p, q});
        pm2 = pm1;
        qm2 = qm1;
        pm1 = p;
        qm1 = q;
    }
    return t;
}

} // namespace circlab
