#pragma once

#include "chebpade/complex.hpp"

namespace chebpade {

// Complete elliptic integral data for a modulus k.  tau is normalized so
// the nome q = exp(i*pi*tau) satisfies |q| < 1.
struct EllipticModuli {
    Cplx k;       // modulus
    Cplx kprime;  // complementary modulus, k^2 + kprime^2 = 1
    Cplx K;       // complete integral of the first kind at k
    Cplx Kprime;  // same at kprime
    Cplx tau;     // i*Kprime/K, Im(tau) > 0
    Cplx nome;    // exp(i*pi*tau)
};

// Arithmetic-geometric mean with the square root branch Re >= 0
// (Im >= 0 on the imaginary axis).  Throws a solver error if the pair
// fails to contract within 8*log2(digits) iterations.
Cplx agm(Cplx a, Cplx b, const PrecisionCtx& ctx);

// K(k) = pi / (2 agm(1, k')).  Throws for k = +-1 and for degenerate
// moduli where Im(tau) ends up below the series tolerance.
EllipticModuli elliptic_K(const Cplx& k, const PrecisionCtx& ctx);

struct ThetaValue {
    Cplx value;   // theta4(z | tau)
    Cplx dvalue;  // d/dz theta4(z | tau)
};

// theta4(z | tau) = 1 + 2 sum_{n>=1} (-1)^n q^(n^2) cos(2 pi n z) and its
// z-derivative, truncated once the rigorous geometric tail bound drops
// below the series tolerance.
ThetaValue theta4(const Cplx& z, const Cplx& tau, const PrecisionCtx& ctx);

// theta2(z | tau) = 2 sum_{n>=0} q^((n+1/2)^2) cos((2n+1) pi z).
// Needed only as the quotient partner of theta4 inside jacobi_cn.
Cplx theta2_value(const Cplx& z, const Cplx& tau, const PrecisionCtx& ctx);

// cn(u, k) through theta quotients at v = u/(2K).  Requires |q| < 0.9;
// throws a domain error otherwise and at the poles of cn.
Cplx jacobi_cn(const Cplx& u, const Cplx& k, const PrecisionCtx& ctx);

// Same with the moduli already computed, so callers evaluating cn many
// times for one k pay for elliptic_K once.
Cplx jacobi_cn(const Cplx& u, const EllipticModuli& m, const PrecisionCtx& ctx);

} // namespace chebpade
