#include "chebpade/chebotarev.hpp"

#include <optional>

#include "chebpade/elliptic.hpp"
#include "chebpade/errors.hpp"
#include "chebpade/quadrature.hpp"

namespace chebpade {

namespace {

// Chord integral int_{a0}^{a_k} sqrt((t-a0)/prod_j(t-a_j)) dt.  The overall
// branch sign is immaterial to the callers (they use Re = 0 and |.|), and
// deformation of the true arc to the chord only shifts the value by periods,
// which are purely imaginary, so Re is path-independent.
Cplx junction_integral(const std::array<Cplx, 3>& a, int k, const Cplx& a0,
                       const Real& qtol) {
    return green_chord(a0, a, a[k], qtol);
}

struct JunctionEval {
    std::array<Cplx, 3> I;
    Real sup_re() const {
        Real m = abs(I[0].re);
        for (int k = 1; k < 3; ++k) {
            Real v = abs(I[k].re);
            if (v > m) m = v;
        }
        return m;
    }
};

std::optional<JunctionEval> eval_junction(const std::array<Cplx, 3>& a, const Cplx& a0,
                                          const Real& qtol) {
    try {
        JunctionEval ev;
        for (int k = 0; k < 3; ++k) ev.I[k] = junction_integral(a, k, a0, qtol);
        return ev;
    } catch (const Error&) {
        return std::nullopt;
    }
}

// Damped Gauss-Newton on the two real coordinates of a0 for the three
// conditions Re I_k = 0.  Returns the final evaluation on success.
std::optional<JunctionEval> newton_center(const std::array<Cplx, 3>& a, Cplx& a0,
                                          const Real& tol, const Real& qtol,
                                          const Real& hstep) {
    auto ev = eval_junction(a, a0, qtol);
    if (!ev) return std::nullopt;
    Real rn = ev->sup_re();

    for (int it = 0; it < 200; ++it) {
        if (rn < tol) return ev;

        Real J[3][2];
        for (int c = 0; c < 2; ++c) {
            Cplx dir = (c == 0) ? Cplx(hstep) : Cplx(Real(0), hstep);
            auto ep = eval_junction(a, a0 + dir, qtol);
            auto em = eval_junction(a, a0 - dir, qtol);
            if (!ep || !em) return std::nullopt;
            for (int r = 0; r < 3; ++r)
                J[r][c] = (ep->I[r].re - em->I[r].re) / (2 * hstep);
        }

        Real A11(0), A12(0), A22(0), b1(0), b2(0);
        for (int r = 0; r < 3; ++r) {
            A11 += J[r][0] * J[r][0];
            A12 += J[r][0] * J[r][1];
            A22 += J[r][1] * J[r][1];
            b1 -= J[r][0] * ev->I[r].re;
            b2 -= J[r][1] * ev->I[r].re;
        }
        Real det = A11 * A22 - A12 * A12;
        if (det == 0) return std::nullopt;
        Real dx = (b1 * A22 - b2 * A12) / det;
        Real dy = (A11 * b2 - A12 * b1) / det;

        Real lam(1);
        bool accepted = false;
        while (lam >= Real(1) / 65536) {
            Cplx trial = a0 + Cplx(lam * dx, lam * dy);
            auto et = eval_junction(a, trial, qtol);
            if (et) {
                Real rt = et->sup_re();
                if (rt < tol || rt < rn * (1 - lam / 4)) {
                    a0 = trial;
                    ev = et;
                    rn = rt;
                    accepted = true;
                    break;
                }
            }
            lam /= 2;
        }
        if (!accepted) return std::nullopt;
    }
    return std::nullopt;
}

// Fermat point by Weiszfeld iteration; if the minimizer sits at a vertex
// (obtuse triangles), back off toward the centroid so the seed stays
// interior.
Cplx fermat_seed(const std::array<Cplx, 3>& a) {
    Cplx centroid = (a[0] + a[1] + a[2]) / Real(3);
    Real diam = abs(a[1] - a[0]);
    {
        Real d2 = abs(a[2] - a[0]), d3 = abs(a[2] - a[1]);
        if (d2 > diam) diam = d2;
        if (d3 > diam) diam = d3;
    }
    Cplx f = centroid;
    for (int it = 0; it < 60; ++it) {
        Cplx num(0);
        Real den(0);
        bool near_vertex = false;
        for (int k = 0; k < 3; ++k) {
            Real dk = abs(f - a[k]);
            if (dk < diam / 20) {
                f = Real("0.8") * a[k] + Real("0.2") * centroid;
                near_vertex = true;
                break;
            }
            num += a[k] / dk;
            den += 1 / dk;
        }
        if (near_vertex) break;
        f = num / den;
    }
    return f;
}

std::array<Cplx, 3> normalized_family(const Real& alpha, const Real& rho) {
    Cplx e = polar(Real(1), alpha);
    return {Cplx(0), e, Cplx(rho * rho) * conj(e)};
}

} // namespace

ChebotarevData solve_center(const Triple& T, const PrecisionCtx& ctx) {
    PrecisionScope scope(ctx);
    if (!(T.alpha > 0) || !(T.rho > 0) || !(T.rho <= 1))
        fail_domain("solve_center: triple was not produced by normalize_triple");
    const std::array<Cplx, 3> an = T.normalized();

    const Real tol = pow(Real(10), -static_cast<long>(ctx.digits + ctx.guard / 2));
    const Real qtol = pow(Real(10), -static_cast<long>(ctx.digits + ctx.guard));
    const Real hstep = pow(Real(10), -static_cast<long>(ctx.digits / 3 + 2));

    Cplx a0n = fermat_seed(an);
    auto ev = newton_center(an, a0n, tol, qtol, hstep);

    if (!ev) {
        // Continuation in (alpha, rho) from a near-equilateral shape down to
        // the target, reusing each rung's center as the next seed.
        const Real pi = real_pi();
        Real al0 = pi / 6, rh0 = Real("0.95");
        Real s(0), step = Real(1) / 8;
        std::array<Cplx, 3> fam = normalized_family(al0, rh0);
        Cplx c = fermat_seed(fam);
        auto evr = newton_center(fam, c, tol, qtol, hstep);
        if (!evr) fail_solver("center solve: continuation base case failed");
        while (s < 1) {
            Real snext = s + step;
            if (snext > 1) snext = 1;
            Real al = al0 + (T.alpha - al0) * snext;
            Real rh = rh0 + (T.rho - rh0) * snext;
            fam = normalized_family(al, rh);
            Cplx ctrial = c;
            auto evt = newton_center(fam, ctrial, tol, qtol, hstep);
            if (evt) {
                s = snext;
                c = ctrial;
                evr = evt;
                step *= Real(3) / 2;
            } else {
                step /= 2;
                if (step < Real(1) / 100000)
                    fail_solver("center solve: continuation stalled");
            }
        }
        a0n = c;
        ev = evr;
    }

    // Interior check: positive orientation-consistent barycentric signs.
    {
        auto cross = [](const Cplx& u, const Cplx& v) { return u.re * v.im - u.im * v.re; };
        Real s1 = cross(an[1] - an[0], a0n - an[0]);
        Real s2 = cross(an[2] - an[1], a0n - an[1]);
        Real s3 = cross(an[0] - an[2], a0n - an[2]);
        bool pos = s1 > 0 && s2 > 0 && s3 > 0;
        bool neg = s1 < 0 && s2 < 0 && s3 < 0;
        if (!pos && !neg)
            fail_solver("center solve: converged point is not interior to the anchors");
    }

    ChebotarevData data;
    data.residual = ev->sup_re();
    data.a0 = T.from_normalized(a0n);

    const Real pi = real_pi();
    std::array<Real, 3> wn; // weights in normalized-slot order
    Real total(0);
    for (int k = 0; k < 3; ++k) {
        wn[k] = abs(ev->I[k]) / pi;
        total += wn[k];
    }
    if (abs(total - 1) > pow(Real(10), -static_cast<long>(ctx.digits / 2)))
        fail_solver("center solve: equilibrium weights do not sum to one");
    for (int j = 0; j < 3; ++j) data.weights[static_cast<size_t>(T.perm[static_cast<size_t>(j)])] = wn[static_cast<size_t>(j)];
    data.lambda1 = wn[1] + wn[2];
    data.lambda2 = wn[1] - wn[2];

    // Elliptic dictionary in the normalized frame.
    Cplx rot = polar(T.rho, -T.alpha);
    Cplx Z = rot + Cplx(1) / rot;
    Cplx A0 = a0n / T.rho;
    data.p = sqrt(Cplx(1) + Z * A0 + A0 * A0);
    data.k = sqrt((data.p + Cplx(1) - Z * A0 / Real(2)) / (Real(2) * data.p));
    EllipticModuli m = elliptic_K(data.k, ctx);
    data.mu = Cplx(data.lambda1) * m.K + Cplx(Real(0), data.lambda2) * m.Kprime;
    return data;
}

} // namespace chebpade
