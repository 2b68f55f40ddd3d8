#ifndef DDIRAC_KERNELS_HPP
#define DDIRAC_KERNELS_HPP

#include <ostream>

#include "ddirac/gridfn.hpp"
#include "ddirac/potentials.hpp"

namespace ddirac {

// alpha^1_{fg}(x) = \int_{x+a1}^pi f(t) g(t-x) dt.  Empty range -> 0.
inline cplx alpha1(const GridFn& f, const GridFn& g, double x, double a1,
                   const std::vector<double>& bps = {}) {
    double lo = x + a1;
    if (lo >= kPi) return cplx{0.0};
    return shifted_product_integral(f, g, x, lo, kPi, bps, bps);
}

inline cplx alpha2(const GridFn& f, const GridFn& g, double x, double a2,
                   const std::vector<double>& bps = {}) {
    double lo = x + a2;
    if (lo >= kPi) return cplx{0.0};
    return shifted_product_integral(f, g, x, lo, kPi, bps, bps);
}

enum class MixedOrder { pq, qp };

// alpha^{12}_{fg}(x): lower limit x+(a1+a2)/2; the second factor's argument
// is shifted by (a2-a1)/2 (order pq) or -(a2-a1)/2 (order qp) relative to
// the plain convolution shift x.
inline cplx alpha12(const GridFn& f, const GridFn& g, double x,
                    const DelayPair& d, MixedOrder order,
                    const std::vector<double>& bps = {}) {
    double lo = x + 0.5 * (d.a1 + d.a2);
    if (lo >= kPi) return cplx{0.0};
    double shift = (order == MixedOrder::pq) ? x + 0.5 * (d.a1 - d.a2)
                                             : x + 0.5 * (d.a2 - d.a1);
    // g vanishes outside [0,pi]; clamp so its argument stays in range
    double hi = std::min(kPi, kPi + shift);
    if (lo >= hi) return cplx{0.0};
    return shifted_product_integral(f, g, shift, lo, hi, bps, bps);
}

// Interior points where the assembled kernels jump: the switch-on points of
// the q first-order term, the same-delay alpha sums and the mixed-delay
// alpha sums, plus their mirror images.  The support edges a1/2, pi - a1/2
// are handled by the GridFn support itself.
inline std::vector<double> kernel_breakpoints(const DelayPair& d) {
    double lo = 0.5 * d.a1, hi = kPi - 0.5 * d.a1;
    std::vector<double> pts{0.5 * d.a2, 0.5 * (d.a1 + d.a2), d.a1, d.a2};
    std::vector<double> out;
    for (double p : pts)
        for (double x : {p, kPi - p})
            if (x > lo + 1e-12 && x < hi - 1e-12) out.push_back(x);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end(),
                          [](double a, double b) { return std::abs(a - b) < 1e-12; }),
              out.end());
    return out;
}

// The kernels K^m, G^m of the characteristic-function representation,
// supported on (a1/2, pi - a1/2).
struct KernelSet {
    DelayPair delays;
    GridFn K0, K1, G0, G1;
    // jump points of the kernels, used to split integration over them
    std::vector<double> breakpoints;

    const GridFn& K(int m) const { return m == 0 ? K0 : K1; }
    const GridFn& G(int m) const { return m == 0 ? G0 : G1; }

    void write_csv(std::ostream& os) const;
};

struct KernelPointValues {
    cplx K0, K1, G0, G1;
};

// All four kernel values at one point x.  The alpha integrals are shared
// between m = 0 and m = 1.
inline KernelPointValues kernel_values_at(const PotentialSet& pot, double x) {
    const DelayPair& d = pot.delays;
    double a1 = d.a1, a2 = d.a2;
    const std::vector<double>& xb = pot.extra_breakpoints;
    KernelPointValues out{{0, 0}, {0, 0}, {0, 0}, {0, 0}};
    if (!(x > 0.5 * a1 && x < kPi - 0.5 * a1)) return out;

    // m-odd first-order pieces of K1^m, G1^m
    cplx k_odd = eval_bp(pot.p1, x + 0.5 * a1, xb);
    cplx g_odd = eval_bp(pot.p2, x + 0.5 * a1, xb);

    cplx k_even{0.0}, g_even{0.0};
    if (x > a1 && x < kPi - a1) {
        k_even -= alpha1(pot.p1, pot.p2, x, a1, xb) -
                  alpha1(pot.p2, pot.p1, x, a1, xb);
        g_even -= alpha1(pot.p1, pot.p1, x, a1, xb) +
                  alpha1(pot.p2, pot.p2, x, a1, xb);
    }
    if (x > 0.5 * a2 && x < kPi - 0.5 * a2) {
        k_even += eval_bp(pot.q1, x + 0.5 * a2, xb);
        g_even += eval_bp(pot.q2, x + 0.5 * a2, xb);
        if (x > a2 && x < kPi - a2) {
            k_even -= alpha2(pot.q1, pot.q2, x, a2, xb) -
                      alpha2(pot.q2, pot.q1, x, a2, xb);
            g_even -= alpha2(pot.q1, pot.q1, x, a2, xb) +
                      alpha2(pot.q2, pot.q2, x, a2, xb);
        }
    }
    double am = 0.5 * (a1 + a2);
    if (x > am && x < kPi - am) {
        cplx k12 = alpha12(pot.p2, pot.q1, x, d, MixedOrder::pq, xb) -
                   alpha12(pot.p1, pot.q2, x, d, MixedOrder::pq, xb);
        cplx k21 = alpha12(pot.q2, pot.p1, x, d, MixedOrder::qp, xb) -
                   alpha12(pot.q1, pot.p2, x, d, MixedOrder::qp, xb);
        cplx g12 = -alpha12(pot.p1, pot.q1, x, d, MixedOrder::pq, xb) -
                   alpha12(pot.p2, pot.q2, x, d, MixedOrder::pq, xb);
        cplx g21 = -alpha12(pot.q1, pot.p1, x, d, MixedOrder::qp, xb) -
                   alpha12(pot.q2, pot.p2, x, d, MixedOrder::qp, xb);
        k_odd += k12 + k21;
        g_odd += g12 + g21;
    }
    out.K0 = k_odd + k_even;
    out.K1 = -k_odd + k_even;
    out.G0 = g_odd + g_even;
    out.G1 = -g_odd + g_even;
    return out;
}

inline KernelSet assemble_kernels(const PotentialSet& pot) {
    std::size_t n = pot.n_cells();
    double a1 = pot.delays.a1;
    std::vector<cplx> k0(n + 1), k1(n + 1), g0(n + 1), g1(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        double x = kPi * double(i) / double(n);
        KernelPointValues v = kernel_values_at(pot, x);
        k0[i] = v.K0;
        k1[i] = v.K1;
        g0[i] = v.G0;
        g1[i] = v.G1;
    }
    double lo = 0.5 * a1, hi = kPi - 0.5 * a1;
    auto bps = kernel_breakpoints(pot.delays);
    for (double b : pot.extra_breakpoints)
        for (double s : {b - 0.5 * a1, b - 0.5 * pot.delays.a2})
            if (s > lo + 1e-12 && s < hi - 1e-12) bps.push_back(s);
    std::sort(bps.begin(), bps.end());
    return KernelSet{pot.delays, GridFn(std::move(k0), lo, hi),
                     GridFn(std::move(k1), lo, hi), GridFn(std::move(g0), lo, hi),
                     GridFn(std::move(g1), lo, hi), std::move(bps)};
}

inline void KernelSet::write_csv(std::ostream& os) const {
    os << std::setprecision(15);
    std::size_t n = K0.n_cells();
    for (std::size_t i = 0; i <= n; ++i) {
        double x = kPi * double(i) / double(n);
        os << x << ',' << K0.value_at_node(i).real() << ','
           << K0.value_at_node(i).imag() << ',' << K1.value_at_node(i).real()
           << ',' << K1.value_at_node(i).imag() << ','
           << G0.value_at_node(i).real() << ',' << G0.value_at_node(i).imag()
           << ',' << G1.value_at_node(i).real() << ','
           << G1.value_at_node(i).imag() << '\n';
    }
}

}  // namespace ddirac

#endif
