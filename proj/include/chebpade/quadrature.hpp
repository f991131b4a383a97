#pragma once

#include <algorithm>
#include <array>
#include <map>
#include <utility>
#include <vector>

#include "chebpade/complex.hpp"
#include "chebpade/errors.hpp"

namespace chebpade {

// Gauss-Legendre rule mapped to [0, 1]; the weights sum to 1.
struct GaussRule {
    std::vector<Real> x, w;
};

// Nodes by Newton iteration on the Legendre recurrence, cached per point
// count and working precision.  The returned reference stays valid for the
// lifetime of the thread.
inline const GaussRule& gauss_legendre(int n) {
    if (n < 2) fail_domain("gauss_legendre: need at least two nodes");
    thread_local std::map<std::pair<int, unsigned>, GaussRule> cache;
    auto key = std::make_pair(n, Real::default_precision());
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;

    GaussRule r;
    r.x.resize(static_cast<size_t>(n));
    r.w.resize(static_cast<size_t>(n));
    const Real pi = real_pi();
    const Real tol = pow(Real(10), -static_cast<int>(Real::default_precision()) + 2);
    for (int k = 0; k < (n + 1) / 2; ++k) {
        // root of P_n on (-1, 1), seeded by the Chebyshev approximation
        Real t = cos(pi * (Real(k) + Real(3) / 4) / (Real(n) + Real(1) / 2));
        Real dp(0);
        for (int pass = 0; pass < 200; ++pass) {
            Real p0(1), p1 = t;
            for (int j = 2; j <= n; ++j) {
                Real p2 = ((2 * j - 1) * t * p1 - (j - 1) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (t * p1 - p0) / (t * t - 1);
            Real dt = p1 / dp;
            t -= dt;
            if (abs(dt) < tol) break;
        }
        Real w2 = 2 / ((1 - t * t) * dp * dp);
        size_t a = static_cast<size_t>(k), b = static_cast<size_t>(n - 1 - k);
        r.x[a] = (1 - t) / 2;  // t decreasing in k: keep x increasing from the left
        r.x[b] = (1 + t) / 2;
        r.w[a] = w2 / 2;
        r.w[b] = w2 / 2;
    }
    return cache.emplace(key, std::move(r)).first->second;
}

// Double-exponential (tanh-sinh) quadrature of f over (0,1).  Converges
// geometrically for integrands analytic on the open interval and tolerates
// integrable endpoint singularities; f is never evaluated at exactly 0 or 1.
// f receives (x, 1-x) with both arguments computed free of cancellation, so
// integrands singular at either endpoint keep full relative accuracy.
// scale0 is a magnitude floor for the relative convergence test; pass an
// a-priori size when the value may be near zero.
template <class F>
Cplx tanh_sinh01(F&& f, const Real& tol, const Real& scale0 = Real(0), int max_level = 14) {
    const Real pi_half = real_pi() / 2;
    Real h(1);
    Cplx I(0);

    // One term w(t)*f(x(t)); x = 1/(1+e^{-2u}) and 1-x = e^{-2u}/(1+e^{-2u})
    // so the side approaching saturation is held as its own small quantity.
    auto term = [&](const Real& t) -> Cplx {
        Real u = pi_half * sinh(t);
        Real q = exp(-2 * abs(u));
        Real small = q / (1 + q), big = 1 / (1 + q);
        Real x = u >= 0 ? big : small;
        Real xc = u >= 0 ? small : big;
        if (x == 0 || xc == 0) return Cplx(0);
        Real ch = cosh(u);
        Real w = pi_half * cosh(t) / (2 * ch * ch);
        return f(x, xc) * w;
    };

    for (int level = 0; level <= max_level; ++level) {
        if (level > 0) h /= 2;
        Real cut = tol * (abs(I) + scale0) / 64;
        Cplx row(0);
        const long jmax = static_cast<long>(64 / static_cast<double>(h)) + 1;
        for (int dir = 0; dir < 2; ++dir) {
            int quiet = 0;
            long j = level == 0 ? (dir == 0 ? 0 : 1) : 1;
            long step = level == 0 ? 1 : 2;
            for (; j <= jmax; j += step) {
                Real t = Real(j) * h;
                Cplx v = term(dir == 0 ? t : -t);
                row += v;
                quiet = abs(v) < cut ? quiet + 1 : 0;
                if (quiet >= 3) break;
            }
        }
        Cplx I_new = level == 0 ? row * h : I / Real(2) + row * h;
        Real floor_ = abs(I_new);
        if (scale0 > floor_) floor_ = scale0;
        if (level >= 2 && abs(I_new - I) <= tol * floor_) return I_new;
        I = I_new;
    }
    fail_precision("tanh-sinh quadrature did not converge at the working precision");
}

// Branch-continuous w(t) = sqrt(prod_j (t - b_j)) restricted to the segment
// t = A + (B-A)x, x in [0,1].  Each linear factor traces a straight line, so
// it crosses the negative real axis at most once; the continuous branch is
// the product of principal roots times a sign flip past each crossing.
// Evaluation is order-independent, so scattered-node quadrature is safe.
struct SegmentRoot {
    Cplx A, d;
    std::vector<Cplx> b;
    std::vector<Real> cross;

    SegmentRoot(const Cplx& A_, const Cplx& B_, std::vector<Cplx> pts)
        : A(A_), d(B_ - A_), b(std::move(pts)) {
        for (const Cplx& p : b) {
            Cplx c0 = A - p;
            if (d.im == 0) continue;  // factor parallel to the real axis: no sign jump
            Real xs = -c0.im / d.im;
            if (xs > 0 && xs < 1 && c0.re + d.re * xs < 0) cross.push_back(xs);
        }
        std::sort(cross.begin(), cross.end());
    }

    // xc = 1-x held separately: a factor that vanishes at an endpoint is
    // formed as d*x or -d*xc directly, so its relative accuracy does not
    // collapse as the node approaches that endpoint.
    Cplx operator()(const Real& x, const Real& xc) const {
        Cplx w(1);
        for (const Cplx& p : b) {
            Cplx c0 = A - p;
            Cplx fac;
            if (c0 == Cplx(0))
                fac = d * x;
            else if (c0 + d == Cplx(0))
                fac = -d * xc;
            else
                fac = c0 + d * x;
            w *= sqrt(fac);
        }
        size_t flips = 0;
        while (flips < cross.size() && cross[flips] <= x) ++flips;
        return (flips & 1) ? -w : w;
    }

    Cplx operator()(const Real& x) const { return (*this)(x, 1 - x); }
};

// G(B) = int_{a0..B} (t - a0)/w(t) dt along the straight segment, with
// w(t) = sqrt((t-a0) prod_k (t-a_k)) branch-continued from the principal
// product determination.  The real part is path-independent (all periods of
// the Green differential are imaginary), up to the overall sign the caller
// fixes.  B may be one of the branch points: the endpoint singularity is
// integrable and the nodes never land on it.  w_end receives w at B.
inline Cplx green_chord(const Cplx& a0, const std::array<Cplx, 3>& anch, const Cplx& B,
                        const Real& tol, Cplx* w_end = nullptr) {
    SegmentRoot W(a0, B, {a0, anch[0], anch[1], anch[2]});
    Cplx d = B - a0;
    auto f = [&](const Real& x, const Real& xc) -> Cplx {
        if (x == 0) return Cplx(0);
        return (d * x) / W(x, xc);
    };
    Cplx I = tanh_sinh01(f, tol) * d;
    if (w_end) *w_end = W(Real(1));
    return I;
}

} // namespace chebpade
