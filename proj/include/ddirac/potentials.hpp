#ifndef DDIRAC_POTENTIALS_HPP
#define DDIRAC_POTENTIALS_HPP

#include <cmath>
#include <stdexcept>
#include <string>

#include "ddirac/gridfn.hpp"

namespace ddirac {

struct DelayPair {
    double a1;
    double a2;

    DelayPair(double a1_, double a2_) : a1(a1_), a2(a2_) {
        if (!(a1 >= kPi / 3.0 && a1 < kPi) || !(a2 >= kPi / 3.0 && a2 < kPi))
            throw std::domain_error("DelayPair: delays must lie in [pi/3, pi)");
    }
};

enum class Region { R1, R2, S1, S2, OutOfScope };

inline std::string region_name(Region r) {
    switch (r) {
        case Region::R1: return "R1";
        case Region::R2: return "R2";
        case Region::S1: return "S1";
        case Region::S2: return "S2";
        default: return "OutOfScope";
    }
}

// Uniqueness-region classification of the delay pair.  Ties on the
// 2a1 + a2/2 = pi boundary go to R1.
inline Region classify(const DelayPair& d) {
    double a1 = d.a1, a2 = d.a2;
    if (a1 == a2) return Region::OutOfScope;
    if (a1 < a2) {
        if (a1 >= kPi / 3.0 && a1 < 2.0 * kPi / 5.0) {
            if (a2 > 2.0 * kPi / 5.0 && a2 < kPi &&
                2.0 * a1 + a2 / 2.0 >= kPi)
                return Region::R1;
            if (a2 > kPi / 3.0 && a2 < 2.0 * kPi / 3.0 &&
                2.0 * a1 + a2 / 2.0 < kPi)
                return Region::R2;
        }
        return Region::OutOfScope;
    }
    // a2 < a1
    if (a2 >= 2.0 * kPi / 5.0) return Region::S1;
    if (a2 >= kPi / 3.0 && a2 < 2.0 * kPi / 5.0) return Region::S2;
    return Region::OutOfScope;
}

// The four scalar entries of the potential matrices P, Q.  P vanishes on
// (0,a1), Q on (0,a2).
struct PotentialSet {
    DelayPair delays;
    GridFn p1, p2, q1, q2;
    // interior jump points shared by the four functions, beyond their
    // support edges; quadratures split here
    std::vector<double> extra_breakpoints;

    PotentialSet(DelayPair d, GridFn p1_, GridFn p2_, GridFn q1_, GridFn q2_)
        : delays(d),
          p1(std::move(p1_)),
          p2(std::move(p2_)),
          q1(std::move(q1_)),
          q2(std::move(q2_)) {}

    std::size_t n_cells() const { return p1.n_cells(); }
};

inline PotentialSet preset(const std::string& name, const DelayPair& d,
                           std::size_t n_cells) {
    double a1 = d.a1, a2 = d.a2;
    if (name == "zero") {
        GridFn z = GridFn::zero(n_cells);
        return PotentialSet(d, z, z, z, z);
    }
    if (name == "preset-A" || name == "preset-B") {
        double s = (name == "preset-B") ? 0.1 : 1.0;
        auto p1 = GridFn::sample(n_cells, a1, kPi,
                                 [&](double x) { return cplx{s * std::sin(x)}; });
        auto p2 = GridFn::sample(n_cells, a1, kPi,
                                 [&](double x) { return cplx{s * std::cos(x)}; });
        auto q1 = GridFn::sample(n_cells, a2, kPi,
                                 [&](double x) { return cplx{s * x / kPi}; });
        auto q2 = GridFn::sample(n_cells, a2, kPi,
                                 [&](double) { return cplx{s * 0.5}; });
        return PotentialSet(d, p1, p2, q1, q2);
    }
    throw std::invalid_argument("unknown preset: " + name);
}

}  // namespace ddirac

#endif
