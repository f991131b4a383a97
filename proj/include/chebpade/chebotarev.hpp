#pragma once

#include <array>
#include <utility>
#include <vector>

#include "chebpade/triple.hpp"

namespace chebpade {

// One branch of the minimal continuum: an analytic arc joining the center
// to anchor a_index, sampled along the trajectory.
struct Arc {
    int index = 0;                   // 1, 2, or 3: which anchor the arc ends at
    std::vector<Cplx> samples;       // ordered from the center to the anchor
    std::vector<Real> chord_param;   // monotone in [0,1], same length as samples
    std::pair<Cplx, Cplx> endpoint_tangents; // unit tangents at the center / at the anchor
};

// Center, equilibrium weights, and the elliptic-dictionary values for one
// triple.  weights[i] is the mass carried by the arc ending at anchor i of
// the ORIGINAL input ordering; lambda1/lambda2 are the weight coordinates
// in the normalized frame (lambda1 = w2n + w3n, lambda2 = w2n - w3n where
// w2n/w3n attach to the anchors mapped to e^{i alpha} and rho^2 e^{-i alpha}).
struct ChebotarevData {
    Cplx a0;                        // center, input frame
    std::array<Real, 3> weights;    // by input anchor index, sum 1
    Real lambda1, lambda2;
    Cplx p, k, mu;                  // auxiliary elliptic values, normalized frame
    Real capacity = Real(0);        // filled by capacity()
    std::array<Arc, 3> arcs;        // filled by trace_arcs()
    Real residual = Real(0);        // sup-norm of the junction conditions at a0
};

// Solves for the center: the unique interior point a0 such that
// Re \int_{a0}^{a_k} sqrt((t - a0)/prod_j (t - a_j)) dt = 0 for all k.
// These are the conditions that the critical trajectories emanating from
// a0 terminate at the anchors; the same integrals' imaginary parts give
// pi times the equilibrium weights.  Damped Gauss-Newton from the Fermat
// point, with a geometric continuation fallback.
ChebotarevData solve_center(const Triple& T, const PrecisionCtx& ctx);

// Traces the three trajectory arcs from each anchor back to the center by
// unit-speed integration of z' = +-i sqrt(prod (z-a_k)/(z-a0)), storing
// samples ordered center -> anchor.
std::array<Arc, 3> trace_arcs(const Triple& T, const Cplx& center, const PrecisionCtx& ctx);

// Logarithmic capacity via lim (log|z| - Re G(z)) with
// G(z) = int_{a0}^{z} (t - a0) dt / w(t) integrated along a ray that
// avoids the arcs, plus the analytic tail beyond the ray's endpoint.
// Requires traced arcs (the anchors are read off the arc endpoints).
Real capacity(const ChebotarevData& data, const PrecisionCtx& ctx);

} // namespace chebpade
