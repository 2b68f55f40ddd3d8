#ifndef DDIRAC_CHARFN_HPP
#define DDIRAC_CHARFN_HPP

#include <array>
#include <map>
#include <ostream>
#include <tuple>
#include <vector>

#include "ddirac/kernels.hpp"

namespace ddirac {

// Characteristic function Delta_j^m(lambda) evaluated through the kernel
// representation: a trigonometric transform of K^m, G^m plus the leading
// sin/-cos term.
struct CharFnEvaluator {
    const KernelSet* kernels;
    int j;  // boundary condition index, 1 or 2
    int m;  // sign index on the P term

    double lo() const { return 0.5 * kernels->delays.a1; }
    double hi() const { return kPi - 0.5 * kernels->delays.a1; }
};

inline cplx eval_delta(const CharFnEvaluator& ev, cplx lambda) {
    const GridFn& K = ev.kernels->K(ev.m);
    const GridFn& G = ev.kernels->G(ev.m);
    double lo = ev.lo(), hi = ev.hi();
    const auto& bps = ev.kernels->breakpoints;
    if (ev.j == 1) {
        cplx ik = integrate_weighted(
            K, lo, hi, [&](double x) { return std::cos(lambda * (kPi - 2 * x)); },
            bps);
        cplx ig = integrate_weighted(
            G, lo, hi, [&](double x) { return std::sin(lambda * (kPi - 2 * x)); },
            bps);
        return std::sin(lambda * kPi) + ik - ig;
    }
    cplx ik = integrate_weighted(
        K, lo, hi, [&](double x) { return std::sin(lambda * (kPi - 2 * x)); },
        bps);
    cplx ig = integrate_weighted(
        G, lo, hi, [&](double x) { return std::cos(lambda * (kPi - 2 * x)); },
        bps);
    return -std::cos(lambda * kPi) + ik + ig;
}

inline cplx eval_delta_deriv(const CharFnEvaluator& ev, cplx lambda) {
    const GridFn& K = ev.kernels->K(ev.m);
    const GridFn& G = ev.kernels->G(ev.m);
    double lo = ev.lo(), hi = ev.hi();
    const auto& bps = ev.kernels->breakpoints;
    if (ev.j == 1) {
        cplx ik = integrate_weighted(K, lo, hi, [&](double x) {
            double u = kPi - 2 * x;
            return -u * std::sin(lambda * u);
        }, bps);
        cplx ig = integrate_weighted(G, lo, hi, [&](double x) {
            double u = kPi - 2 * x;
            return u * std::cos(lambda * u);
        }, bps);
        return kPi * std::cos(lambda * kPi) + ik - ig;
    }
    cplx ik = integrate_weighted(K, lo, hi, [&](double x) {
        double u = kPi - 2 * x;
        return u * std::cos(lambda * u);
    }, bps);
    cplx ig = integrate_weighted(G, lo, hi, [&](double x) {
        double u = kPi - 2 * x;
        return -u * std::sin(lambda * u);
    }, bps);
    return kPi * std::sin(lambda * kPi) + ik + ig;
}

// Method-of-steps RK4 integration of the delay system
//   B Y' + (-1)^m P(x) Y(x-a1) + Q(x) Y(x-a2) = lambda Y,  Y(0) = (0,-1)^T.
// Both delays are >= pi/3 so retarded arguments always point into already
// computed history.  Returns (y1(pi), y2(pi)) = (Delta_1^m, Delta_2^m).
inline std::array<cplx, 2> steps_oracle(const PotentialSet& pot, int m,
                                        cplx lambda,
                                        std::size_t n_steps = 8192) {
    if (pot.delays.a1 < kPi / 3.0 || pot.delays.a2 < kPi / 3.0)
        throw std::domain_error("steps_oracle: delays must be >= pi/3");
    double sgn = (m == 0) ? 1.0 : -1.0;

    // step boundaries: uniform grid plus the delay points themselves, so the
    // right-hand side's jumps at x = a1, a2 never fall inside a step
    std::vector<double> xs;
    xs.reserve(n_steps + 3);
    for (std::size_t k = 0; k <= n_steps; ++k)
        xs.push_back(kPi * double(k) / double(n_steps));
    for (double a : {pot.delays.a1, pot.delays.a2}) xs.push_back(a);
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end(),
                         [](double u, double v) { return v - u < 1e-12; }),
             xs.end());
    std::size_t n_nodes = xs.size();

    std::vector<std::array<cplx, 2>> hist(n_nodes);
    std::vector<std::array<cplx, 2>> deriv(n_nodes, {cplx{0.0}, cplx{0.0}});
    hist[0] = {cplx{0.0}, cplx{-1.0}};

    // cubic Hermite interpolation of the history; linear interpolation here
    // would cap the oracle's global accuracy at O(h^2).  The history jumps
    // at argument 0 (zero extension vs Y(0) = (0,-1)); when a stage lands
    // exactly on the jump the side is chosen by the step's base point so
    // each smooth segment sees its own one-sided limit.
    auto retarded = [&](double x, double last_x,
                        bool from_left) -> std::array<cplx, 2> {
        if (from_left ? (x <= 1e-12) : (x < -1e-12))
            return {cplx{0.0}, cplx{0.0}};
        if (x < 0.0) x = 0.0;
        if (x >= last_x) x = last_x;
        auto it = std::upper_bound(xs.begin(), xs.end(), x);
        std::size_t i = (it == xs.begin()) ? 0 : std::size_t(it - xs.begin()) - 1;
        if (i + 1 >= n_nodes) return hist[n_nodes - 1];
        double w = xs[i + 1] - xs[i];
        double t = (x - xs[i]) / w;
        if (t <= 0.0) return hist[i];
        double h00 = 1.0 + t * t * (2.0 * t - 3.0);
        double h10 = t * (1.0 + t * (t - 2.0));
        double h01 = t * t * (3.0 - 2.0 * t);
        double h11 = t * t * (t - 1.0);
        std::array<cplx, 2> out;
        for (int c = 0; c < 2; ++c)
            out[c] = h00 * hist[i][c] + w * h10 * deriv[i][c] +
                     h01 * hist[i + 1][c] + w * h11 * deriv[i + 1][c];
        return out;
    };

    auto rhs = [&](double x, const std::array<cplx, 2>& y, double last_x,
                   double x_base) -> std::array<cplx, 2> {
        auto yd1 = retarded(x - pot.delays.a1, last_x,
                            x_base < pot.delays.a1 - 1e-12);
        auto yd2 = retarded(x - pot.delays.a2, last_x,
                            x_base < pot.delays.a2 - 1e-12);
        cplx p1 = pot.p1(x), p2 = pot.p2(x);
        cplx q1 = pot.q1(x), q2 = pot.q2(x);
        // v = lambda*Y - (-1)^m P Y(x-a1) - Q Y(x-a2); Y' = B^{-1} v
        cplx v1 = lambda * y[0] - sgn * (p1 * yd1[0] + p2 * yd1[1]) -
                  (q1 * yd2[0] + q2 * yd2[1]);
        cplx v2 = lambda * y[1] - sgn * (p2 * yd1[0] - p1 * yd1[1]) -
                  (q2 * yd2[0] - q1 * yd2[1]);
        return {-v2, v1};
    };

    for (std::size_t k = 0; k + 1 < n_nodes; ++k) {
        double x = xs[k];
        double h = xs[k + 1] - x;
        double last_x = x;  // history valid up to current node
        const auto& y = hist[k];
        auto k1 = rhs(x, y, last_x, x);
        deriv[k] = k1;
        std::array<cplx, 2> y2{y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]};
        auto k2 = rhs(x + 0.5 * h, y2, last_x, x);
        std::array<cplx, 2> y3{y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]};
        auto k3 = rhs(x + 0.5 * h, y3, last_x, x);
        std::array<cplx, 2> y4{y[0] + h * k3[0], y[1] + h * k3[1]};
        auto k4 = rhs(x + h, y4, last_x, x);
        hist[k + 1] = {
            y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])};
    }
    return hist[n_nodes - 1];
}

// Eigenvalue families lambda_{n,j}^m, |n| <= n_max.
struct Spectrum {
    int n_max = 0;
    std::map<std::tuple<int, int, int>, cplx> entries;  // key (m, j, n)
    std::vector<std::tuple<int, int, int>> missing;

    bool has(int m, int j, int n) const {
        return entries.count({m, j, n}) != 0;
    }
    cplx at(int m, int j, int n) const { return entries.at({m, j, n}); }
    void set(int m, int j, int n, cplx v) { entries[{m, j, n}] = v; }

    void write_csv(std::ostream& os) const {
        os << "m,j,n,re,im\n" << std::setprecision(15);
        for (const auto& [key, v] : entries) {
            auto [m, j, n] = key;
            os << m << ',' << j << ',' << n << ',' << v.real() << ','
               << v.imag() << '\n';
        }
    }
};

struct NewtonOptions {
    int max_iter = 50;
    double tol = 1e-10;
    double im_strip = 2.0;
    // Newton from a real seed on a real-valued Delta can never leave the
    // real axis; a nonzero offset lets it reach complex conjugate roots
    double seed_imag = 0.0;
};

// Newton from the asymptotic seed; damped on residual increase.
inline bool newton_root(const CharFnEvaluator& ev, cplx seed, cplx& root,
                        const NewtonOptions& opt = {}) {
    cplx lam = seed;
    cplx f = eval_delta(ev, lam);
    for (int it = 0; it < opt.max_iter; ++it) {
        if (std::abs(f) <= opt.tol) {
            root = lam;
            return std::abs(lam.imag()) <= opt.im_strip;
        }
        cplx df = eval_delta_deriv(ev, lam);
        if (std::abs(df) < 1e-300) return false;
        cplx step = f / df;
        cplx cand = lam - step;
        cplx fc = eval_delta(ev, cand);
        int halvings = 0;
        while (std::abs(fc) > std::abs(f) && halvings < 30) {
            step *= 0.5;
            cand = lam - step;
            fc = eval_delta(ev, cand);
            ++halvings;
        }
        lam = cand;
        f = fc;
    }
    if (std::abs(f) <= opt.tol) {
        root = lam;
        return std::abs(lam.imag()) <= opt.im_strip;
    }
    return false;
}

// Roots of Delta_j^m near the asymptotic seeds n + (1-j)/2, |n| <= n_max,
// merged into spec under key (m, j, n).
inline void find_eigenvalues(const CharFnEvaluator& ev, int n_max,
                             Spectrum& spec, const NewtonOptions& opt = {}) {
    spec.n_max = std::max(spec.n_max, n_max);
    for (int n = -n_max; n <= n_max; ++n) {
        cplx seed{double(n) + 0.5 * (1 - ev.j), opt.seed_imag};
        cplx root;
        if (newton_root(ev, seed, root, opt))
            spec.set(ev.m, ev.j, n, root);
        else
            spec.missing.push_back({ev.m, ev.j, n});
    }
}

inline Spectrum find_all_eigenvalues(const KernelSet& ks, int n_max,
                                     const NewtonOptions& opt = {}) {
    Spectrum spec;
    for (int m : {0, 1})
        for (int j : {1, 2}) {
            CharFnEvaluator ev{&ks, j, m};
            find_eigenvalues(ev, n_max, spec, opt);
        }
    return spec;
}

// Leading-order eigenvalue shift from the kernel Fourier integrals.
// Linearizing Delta_j^m around the seed n + (1-j)/2 gives
//   kappa = -(1/pi) [ \int K^m cos(freq x) + \int G^m sin(freq x) ],
// freq = 2n (j=1) or 2n-1 (j=2); the parity factors from the leading
// trigonometric term cancel against those of the transform.
inline cplx kappa_asymptotic(const KernelSet& ks, int j, int m, int n) {
    double lo = 0.5 * ks.delays.a1, hi = kPi - lo;
    double freq = (j == 1) ? 2.0 * n : 2.0 * n - 1.0;
    const auto& bps = ks.breakpoints;
    cplx ik = integrate_weighted(ks.K(m), lo, hi,
                                 [&](double x) { return std::cos(freq * x); },
                                 bps);
    cplx ig = integrate_weighted(ks.G(m), lo, hi,
                                 [&](double x) { return std::sin(freq * x); },
                                 bps);
    return -(ik + ig) / kPi;
}

}  // namespace ddirac

#endif
