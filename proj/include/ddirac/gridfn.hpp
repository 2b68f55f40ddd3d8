#ifndef DDIRAC_GRIDFN_HPP
#define DDIRAC_GRIDFN_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace ddirac {

using cplx = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;

// Complex function sampled at x_i = i*pi/n_cells, i = 0..n_cells, zero
// outside its declared support interval [lo, hi].  Evaluation between nodes
// is linear; at the support edges the nearest interior nodes are
// extrapolated, so a function that jumps on at its support edge is
// represented sharply instead of being smeared over one cell.
class GridFn {
public:
    GridFn() : n_cells_(1), values_(2, cplx{0.0}), lo_(0.0), hi_(0.0) {}

    GridFn(std::vector<cplx> values, double lo, double hi)
        : values_(std::move(values)), lo_(lo), hi_(hi) {
        if (values_.size() < 2)
            throw std::invalid_argument("GridFn: need at least 2 samples");
        if (!(0.0 <= lo_ && lo_ <= hi_ && hi_ <= kPi))
            throw std::invalid_argument("GridFn: support outside [0,pi]");
        n_cells_ = values_.size() - 1;
        mask();
    }

    static GridFn zero(std::size_t n_cells) {
        return GridFn(std::vector<cplx>(n_cells + 1, cplx{0.0}), 0.0, kPi);
    }

    template <class F>
    static GridFn sample(std::size_t n_cells, double lo, double hi, F&& f) {
        std::vector<cplx> v(n_cells + 1);
        for (std::size_t i = 0; i <= n_cells; ++i)
            v[i] = f(kPi * double(i) / double(n_cells));
        return GridFn(std::move(v), lo, hi);
    }

    std::size_t n_cells() const { return n_cells_; }
    double dx() const { return kPi / double(n_cells_); }
    double lo() const { return lo_; }
    double hi() const { return hi_; }
    const std::vector<cplx>& values() const { return values_; }
    cplx value_at_node(std::size_t i) const { return values_[i]; }

    bool in_support(double x) const { return x >= lo_ && x <= hi_; }

    bool node_in_support(std::size_t i) const {
        double x = kPi * double(i) / double(n_cells_);
        return x >= lo_ && x <= hi_;
    }

    cplx operator()(double x) const {
        if (x < lo_ || x > hi_ || x < 0.0 || x > kPi) return cplx{0.0};
        double h = dx();
        double u = x / h;
        auto i = static_cast<std::size_t>(std::floor(u));
        if (i >= n_cells_) return values_.back();
        double t = u - double(i);
        bool a = node_in_support(i), b = node_in_support(i + 1);
        if (a && b) return (1.0 - t) * values_[i] + t * values_[i + 1];
        if (!a && b) {
            // left node masked by the support edge: extrapolate inward
            if (i + 2 <= n_cells_ && node_in_support(i + 2))
                return values_[i + 1] +
                       (values_[i + 1] - values_[i + 2]) * (1.0 - t);
            return values_[i + 1];
        }
        if (a && !b) {
            if (i >= 1 && node_in_support(i - 1))
                return values_[i] + (values_[i] - values_[i - 1]) * t;
            return values_[i];
        }
        return cplx{0.0};
    }

    GridFn remasked(double lo, double hi) const {
        return GridFn(values_, lo, hi);
    }

    GridFn scaled(cplx c) const {
        std::vector<cplx> v(values_);
        for (auto& z : v) z *= c;
        return GridFn(std::move(v), lo_, hi_);
    }

    GridFn plus(const GridFn& other) const {
        if (other.n_cells_ != n_cells_)
            throw std::invalid_argument("GridFn::plus: grid mismatch");
        std::vector<cplx> v(values_);
        for (std::size_t i = 0; i < v.size(); ++i) v[i] += other.values_[i];
        return GridFn(std::move(v), std::min(lo_, other.lo_),
                      std::max(hi_, other.hi_));
    }

    double max_abs() const {
        double m = 0.0;
        for (auto& z : values_) m = std::max(m, std::abs(z));
        return m;
    }

    void write_csv(std::ostream& os) const {
        os << std::setprecision(15);
        for (std::size_t i = 0; i <= n_cells_; ++i) {
            double x = kPi * double(i) / double(n_cells_);
            os << x << ',' << values_[i].real() << ',' << values_[i].imag()
               << '\n';
        }
    }

private:
    void mask() {
        for (std::size_t i = 0; i <= n_cells_; ++i) {
            double x = kPi * double(i) / double(n_cells_);
            if (!(x >= lo_ && x <= hi_)) values_[i] = cplx{0.0};
        }
    }

    std::size_t n_cells_;
    std::vector<cplx> values_;
    double lo_, hi_;
};

// Evaluation aware of declared interior discontinuity points: if the cell
// containing x holds a breakpoint, reconstruct one-sidedly from the two
// nearest nodes on x's side of it.
inline cplx eval_bp(const GridFn& f, double x,
                    const std::vector<double>& bps) {
    if (x < f.lo() || x > f.hi() || x < 0.0 || x > kPi) return cplx{0.0};
    double h = f.dx();
    auto i = static_cast<std::size_t>(std::floor(x / h));
    if (i >= f.n_cells()) return f(x);
    double xa = double(i) * h, xb = double(i + 1) * h;
    for (double bp : bps) {
        // a jump exactly on a node leaves that node's sampled value
        // one-sided; reconstruct from the two next nodes away from it
        if (std::abs(bp - xa) < 1e-9 && x > xa) {
            if (i + 2 <= f.n_cells() && f.node_in_support(i + 1) &&
                f.node_in_support(i + 2))
                return f.value_at_node(i + 1) +
                       (f.value_at_node(i + 1) - f.value_at_node(i + 2)) *
                           ((xb - x) / h);
        }
        if (std::abs(bp - xb) < 1e-9 && x < xb) {
            if (i >= 1 && f.node_in_support(i - 1) && f.node_in_support(i))
                return f.value_at_node(i) +
                       (f.value_at_node(i) - f.value_at_node(i - 1)) *
                           ((x - xa) / h);
        }
        if (bp > xa + 1e-9 && bp < xb - 1e-9) {
            if (x < bp) {
                if (i >= 1 && f.node_in_support(i - 1) && f.node_in_support(i))
                    return f.value_at_node(i) +
                           (f.value_at_node(i) - f.value_at_node(i - 1)) *
                               ((x - xa) / h);
                return f.node_in_support(i) ? f.value_at_node(i) : cplx{0.0};
            }
            if (i + 2 <= f.n_cells() && f.node_in_support(i + 1) &&
                f.node_in_support(i + 2))
                return f.value_at_node(i + 1) +
                       (f.value_at_node(i + 1) - f.value_at_node(i + 2)) *
                           ((xb - x) / h);
            return (i + 1 <= f.n_cells() && f.node_in_support(i + 1))
                       ? f.value_at_node(i + 1)
                       : cplx{0.0};
        }
    }
    return f(x);
}

namespace detail {

inline constexpr double kSideNudge = 1e-9;

// Composite trapezoid over [lo, hi] split at the given sorted-or-not
// breakpoints.  eval_node(i) supplies values on grid nodes interior to a
// smooth piece; eval_pt(x) is used at piece endpoints, nudged off the
// breakpoint so one-sided limits are taken.
template <class EvalNode, class EvalPt>
cplx trapezoid_pieces(double lo, double hi, double h, std::size_t n_cells,
                      std::vector<double> cuts, EvalNode&& eval_node,
                      EvalPt&& eval_pt) {
    if (hi - lo <= 0.0) return cplx{0.0};
    cuts.erase(std::remove_if(cuts.begin(), cuts.end(),
                              [&](double c) {
                                  return !(c > lo + 1e-12 && c < hi - 1e-12);
                              }),
               cuts.end());
    cuts.push_back(lo);
    cuts.push_back(hi);
    std::sort(cuts.begin(), cuts.end());
    cplx total{0.0};
    for (std::size_t p = 0; p + 1 < cuts.size(); ++p) {
        double a = cuts[p], b = cuts[p + 1];
        if (b - a <= 1e-12) continue;
        // nodes strictly inside the piece; a node lying exactly on a cut may
        // carry the other side's one-sided value, so it is never used
        auto i0 = static_cast<std::size_t>(std::ceil((a + 1e-9) / h));
        auto i1s = static_cast<long long>(std::floor((b - 1e-9) / h));
        if (i1s > static_cast<long long>(n_cells))
            i1s = static_cast<long long>(n_cells);
        if (i1s < static_cast<long long>(i0)) {
            total += 0.5 * (b - a) *
                     (eval_pt(a + kSideNudge) + eval_pt(b - kSideNudge));
            continue;
        }
        auto i1 = static_cast<std::size_t>(i1s);
        double x0 = double(i0) * h, x1 = double(i1) * h;
        cplx f_first = eval_node(i0), f_last = eval_node(i1);
        cplx fa = (i1 > i0)
                      ? f_first + (f_first - eval_node(i0 + 1)) * ((x0 - a) / h)
                      : eval_pt(a + kSideNudge);
        cplx fb = (i1 > i0)
                      ? f_last + (f_last - eval_node(i1 - 1)) * ((b - x1) / h)
                      : eval_pt(b - kSideNudge);
        // interior: composite Simpson over cell pairs; a single leftover
        // cell is closed with a quadratic through three nodes
        cplx s{0.0};
        std::size_t i = i0;
        while (i + 2 <= i1) {
            s += h / 3.0 *
                 (eval_node(i) + 4.0 * eval_node(i + 1) + eval_node(i + 2));
            i += 2;
        }
        if (i + 1 == i1) {
            cplx f0 = eval_node(i), f1 = eval_node(i + 1);
            if (i > i0)
                s += h / 12.0 * (-eval_node(i - 1) + 8.0 * f0 + 5.0 * f1);
            else
                s += 0.5 * h * (f0 + f1);
        }
        if (x0 > a + 1e-12) s += 0.5 * (x0 - a) * (fa + f_first);
        if (b > x1 + 1e-12) s += 0.5 * (b - x1) * (f_last + fb);
        total += s;
    }
    return total;
}

}  // namespace detail

// Composite trapezoid of f over [lo,hi], split at f's support edges and at
// any declared breakpoints.
inline cplx integrate(const GridFn& f, double lo, double hi,
                      const std::vector<double>& bps = {}) {
    if (lo > hi) throw std::domain_error("integrate: lo > hi");
    if (lo < 0.0 || hi > kPi)
        throw std::domain_error("integrate: bounds outside [0,pi]");
    std::vector<double> cuts{f.lo(), f.hi()};
    cuts.insert(cuts.end(), bps.begin(), bps.end());
    return detail::trapezoid_pieces(
        lo, hi, f.dx(), f.n_cells(), std::move(cuts),
        [&](std::size_t i) { return f.value_at_node(i); },
        [&](double x) { return eval_bp(f, x, bps); });
}

// \int_lo^hi f(t) w(t) dt with an analytic weight.
template <class W>
cplx integrate_weighted(const GridFn& f, double lo, double hi, W&& w,
                        const std::vector<double>& bps = {}) {
    if (lo > hi) throw std::domain_error("integrate_weighted: lo > hi");
    std::vector<double> cuts{f.lo(), f.hi()};
    cuts.insert(cuts.end(), bps.begin(), bps.end());
    double h = f.dx();
    return detail::trapezoid_pieces(
        lo, hi, h, f.n_cells(), std::move(cuts),
        [&](std::size_t i) { return f.value_at_node(i) * w(double(i) * h); },
        [&](double x) { return eval_bp(f, x, bps) * w(x); });
}

// \int_lo^hi f(t) g(t - shift) dt, split at both factors' support edges.
inline cplx shifted_product_integral(const GridFn& f, const GridFn& g,
                                     double shift, double lo, double hi,
                                     const std::vector<double>& bps_f = {},
                                     const std::vector<double>& bps_g = {}) {
    if (lo > hi) return cplx{0.0};
    if (lo - shift < -1e-9 || hi - shift > kPi + 1e-9)
        throw std::domain_error(
            "shifted_product_integral: shifted argument leaves [0,pi]");
    if (lo < -1e-12 || hi > kPi + 1e-12)
        throw std::domain_error(
            "shifted_product_integral: bounds outside [0,pi]");
    std::vector<double> cuts{f.lo(), f.hi(), g.lo() + shift, g.hi() + shift};
    for (double b : bps_f) cuts.push_back(b);
    for (double b : bps_g) cuts.push_back(b + shift);
    double h = f.dx();
    return detail::trapezoid_pieces(
        lo, hi, h, f.n_cells(), std::move(cuts),
        [&](std::size_t i) {
            double x = double(i) * h;
            return f.value_at_node(i) * eval_bp(g, x - shift, bps_g);
        },
        [&](double x) {
            return eval_bp(f, x, bps_f) * eval_bp(g, x - shift, bps_g);
        });
}

}  // namespace ddirac

#endif
