#include "chebpade/elliptic.hpp"

#include <cmath>

namespace chebpade {

Cplx agm(Cplx a, Cplx b, const PrecisionCtx& ctx) {
    PrecisionScope scope(ctx);
    const Real tol = ctx.series_tol();
    const unsigned max_iter =
        static_cast<unsigned>(8.0 * std::log2(static_cast<double>(ctx.digits))) + 1;

    for (unsigned it = 0; it < max_iter; ++it) {
        Real sep = abs(a - b);
        Real scale = abs(a) + abs(b);
        if (sep <= tol * scale || scale == 0) return (a + b) / Real(2);
        Cplx am = (a + b) / Real(2);
        // Principal sqrt already lands in Re >= 0 with Im >= 0 on the cut.
        Cplx gm = sqrt(a * b);
        a = am;
        b = gm;
    }
    fail_solver("agm: iteration failed to contract");
}

EllipticModuli elliptic_K(const Cplx& k, const PrecisionCtx& ctx) {
    PrecisionScope scope(ctx);
    Cplx one_minus_k2 = Cplx(1) - k * k;
    if (abs(one_minus_k2) <= ctx.eps())
        fail_domain("elliptic_K: modulus at a pole of K (k = +-1)");
    if (abs(k) <= ctx.eps())
        fail_domain("elliptic_K: degenerate modulus k = 0");

    EllipticModuli m;
    m.k = k;
    m.kprime = sqrt(one_minus_k2);
    const Real half_pi = real_pi() / 2;
    m.K = Cplx(half_pi) / agm(Cplx(1), m.kprime, ctx);
    m.Kprime = Cplx(half_pi) / agm(Cplx(1), k, ctx);
    m.tau = Cplx(Real(0), Real(1)) * m.Kprime / m.K;
    if (m.tau.im <= ctx.series_tol())
        fail_domain("elliptic_K: degenerate modulus, Im(tau) not positive");
    m.nome = exp(Cplx(Real(0), real_pi()) * m.tau);
    return m;
}

namespace {

// Largest of |e^{2 pi i z}| and its reciprocal; controls how fast the
// theta terms can grow before the q^(n^2) factor wins.
Real exp_growth(const Cplx& z) {
    Real g = exp(-2 * real_pi() * z.im);
    Real ginv = 1 / g;
    return g > ginv ? g : ginv;
}

} // namespace

ThetaValue theta4(const Cplx& z, const Cplx& tau, const PrecisionCtx& ctx) {
    PrecisionScope scope(ctx);
    if (tau.im <= 0) fail_domain("theta4: Im(tau) must be positive");
    const Cplx q = exp(Cplx(Real(0), real_pi()) * tau);
    const Real qa = abs(q);
    if (qa >= 1) fail_domain("theta4: nome not inside the unit disc");

    const Real tol = ctx.series_tol();
    const Real growth = 1 + exp_growth(z);
    const Cplx E = exp(Cplx(Real(0), 2 * real_pi()) * z);
    const Cplx Einv = Cplx(1) / E;

    Cplx value(1), dvalue(0);
    Cplx qp(1);        // q^(n^2)
    Cplx qstep = q;    // q^(2n-1)
    const Cplx q2 = q * q;
    Cplx Ep(1), Em(1); // E^n, E^-n
    Real bound = 1;    // |q|^(n^2) (1 + growth)^n upper bound, incremental
    Real bstep = qa;

    int sign = 1;
    const Cplx two_pi_i(Real(0), 2 * real_pi());
    for (unsigned n = 1;; ++n) {
        qp *= qstep;
        qstep *= q2;
        Ep *= E;
        Em *= Einv;
        sign = -sign;
        Cplx base = qp * Real(sign);
        value += base * (Ep + Em);
        dvalue += two_pi_i * Real(static_cast<long>(n)) * base * (Ep - Em);

        bound *= bstep * growth;
        bstep *= qa * qa;
        if (Real(static_cast<long>(n + 1)) * bound * bstep * growth < tol) break;
        if (n > 1000000) fail_precision("theta4: series failed to reach tolerance");
    }
    return {value, dvalue};
}

Cplx theta2_value(const Cplx& z, const Cplx& tau, const PrecisionCtx& ctx) {
    PrecisionScope scope(ctx);
    if (tau.im <= 0) fail_domain("theta2: Im(tau) must be positive");
    const Cplx q = exp(Cplx(Real(0), real_pi()) * tau);
    const Real qa = abs(q);
    if (qa >= 1) fail_domain("theta2: nome not inside the unit disc");

    const Real tol = ctx.series_tol();
    const Cplx F = exp(Cplx(Real(0), real_pi()) * z);
    const Cplx Finv = Cplx(1) / F;
    const Real growth = 1 + (abs(F) > abs(Finv) ? abs(F) : abs(Finv));

    // q^((n+1/2)^2) built from q^(1/4) by multiplying q^(2n) each step.
    Cplx qp = exp(Cplx(Real(0), real_pi()) * tau / Real(4));
    Cplx qstep(1);
    const Cplx q2 = q * q;
    Cplx Fp = F, Fm = Finv;

    Cplx value(0);
    Real bound = pow(qa, Real(1) / 4);
    Real bstep = 1;
    for (unsigned n = 0;; ++n) {
        value += qp * (Fp + Fm);
        qstep *= q2;
        qp *= qstep;       // advances by q^(2(n+1))
        Fp *= F * F;
        Fm *= Finv * Finv;
        bstep *= qa * qa;
        bound *= bstep * growth * growth;
        if (bound * growth < tol) break;
        if (n > 1000000) fail_precision("theta2: series failed to reach tolerance");
    }
    return value;
}

Cplx jacobi_cn(const Cplx& u, const Cplx& k, const PrecisionCtx& ctx) {
    return jacobi_cn(u, elliptic_K(k, ctx), ctx);
}

Cplx jacobi_cn(const Cplx& u, const EllipticModuli& m, const PrecisionCtx& ctx) {
    PrecisionScope scope(ctx);
    if (abs(m.nome) >= Real("0.9"))
        fail_domain("jacobi_cn: nome too large for the theta series");

    const Cplx v = u / (Real(2) * m.K);
    Cplx t4_0 = theta4(Cplx(0), m.tau, ctx).value;
    Cplx t2_0 = theta2_value(Cplx(0), m.tau, ctx);
    Cplx t4_v = theta4(v, m.tau, ctx).value;
    Cplx t2_v = theta2_value(v, m.tau, ctx);

    Real scale = abs(t4_0) + abs(t2_v);
    if (abs(t4_v) <= ctx.series_tol() * scale)
        fail_domain("jacobi_cn: argument at a pole of cn");
    return (t4_0 * t2_v) / (t2_0 * t4_v);
}

} // namespace chebpade
