#pragma once

#include <array>
#include <iosfwd>
#include <string>

#include "chebpade/chebotarev.hpp"
#include "chebpade/precision.hpp"

namespace chebpade {

// The curve w^2 = (z - a0)(z - a1)(z - a2)(z - a3) built over a traced
// continuum is a genus-one two-sheeted cover of the plane.  Sheet 1 carries
// the branch of w that behaves like z^2 at infinity; sheet 2 carries -w.
// All path-dependent quantities below are evaluated along canonical paths
// that stay inside the cut-open surface (they never cross the cycle over
// arc 2 or arc 3), so equal inputs always give equal outputs.

struct SheetPoint {
    Cplx z;
    int sheet = 1;          // 1 or 2
    bool infinite = false;  // the point above z = infinity; z is ignored
    bool nudged = false;    // set by jacobi_invert when the solution fell on
                            // the cut and was displaced off it

    static SheetPoint finite(const Cplx& z_, int sheet_ = 1) {
        SheetPoint p;
        p.z = z_;
        p.sheet = sheet_;
        return p;
    }
    static SheetPoint infinity(int sheet_) {
        SheetPoint p;
        p.sheet = sheet_;
        p.infinite = true;
        return p;
    }
    // The anti-holomorphic involution: same projection, other sheet.
    SheetPoint conjugated() const {
        SheetPoint p = *this;
        p.sheet = 3 - p.sheet;
        return p;
    }
};

// Cycle labels: the cycle over the arc toward input anchor 1 is label 1;
// labels 2 and 3 continue clockwise around the junction (decreasing
// departure angle).  Label 2 is the lattice a-cycle, label 3 the b-cycle.
// The arrays below are indexed by label - 1.  clockwise_arc_order maps a
// label to the input arc index used by trace_eval and the solved weights.
struct Periods {
    std::array<Cplx, 3> beta;   // (2 pi i)^-1 times the loop integrals of dz/w
    std::array<Cplx, 3> beta1;  // same for z dz/w; the three sum to -1
    Cplx tau_ratio;             // beta[2] / beta[1], upper half plane
    std::array<Cplx, 3> omega;  // 2 pi i times the harmonic measure of each arc
    Cplx xi_a1;                 // unimodular limit of z / phi(z) over capacity
    Real capacity;              // transfinite diameter of the continuum
};

// Square root on the requested sheet.  Exactly zero at the four branch
// points; fails on the cut interior, where only one-sided traces exist.
Cplx w_eval(const SheetPoint& pt, const ChebotarevData& data, const PrecisionCtx& ctx);

// One-sided boundary value of sheet-1 w on arc `arc_index` (the input index
// stored in Arc::index) at interior parameter t in (0, 1).  side +1 is the
// left bank when walking from the junction to the anchor, side -1 the right;
// the two traces are opposite.
Cplx trace_eval(int arc_index, const Real& t, int side, const ChebotarevData& data,
                const PrecisionCtx& ctx);

// Point on an arc and the t-derivative of that chart.
Cplx arc_point(int arc_index, const Real& t, const ChebotarevData& data, const PrecisionCtx& ctx);
Cplx arc_velocity(int arc_index, const Real& t, const ChebotarevData& data,
                  const PrecisionCtx& ctx);

// Input arc index of each cycle label (entry 0 is always 1).
std::array<int, 3> clockwise_arc_order(const ChebotarevData& data, const PrecisionCtx& ctx);

// All periods of the curve by endpoint-adapted quadrature along the arcs,
// with the far-field normalization constants of the conformal map.
Periods compute_periods(const ChebotarevData& data, const PrecisionCtx& ctx);

// exp of the complexified Green potential with pole at infinity, normalized
// to 1 at anchor 1.  Modulus > 1 away from the continuum on sheet 1, < 1 on
// sheet 2; tends to 1 at the cut.
Cplx green_map(const SheetPoint& pt, const ChebotarevData& data, const PrecisionCtx& ctx);

// The normalized first-kind integral from anchor 1: a representative value
// whose class modulo Z + tau Z is the Abel image.
Cplx abel_map(const SheetPoint& pt, const ChebotarevData& data, const Periods& periods,
              const PrecisionCtx& ctx);

// Third-kind integral from anchor 1 of the differential with residue +1 at
// `a`, residue -1 at infinity on sheet 1, and vanishing a-cycle period.
// Well defined modulo 2 pi i; the imaginary part is reduced to (-pi, pi].
Cplx third_kind_integral(const SheetPoint& a, const SheetPoint& pt, const ChebotarevData& data,
                         const Periods& periods, const PrecisionCtx& ctx);

// Same differential integrated from `from` to `to` along a canonical path.
Cplx third_kind_between(const SheetPoint& a, const SheetPoint& from, const SheetPoint& to,
                        const ChebotarevData& data, const Periods& periods,
                        const PrecisionCtx& ctx);

// The unique surface point whose Abel image matches `target` modulo the
// lattice.  Targets on the cut image are displaced off it and flagged.
SheetPoint jacobi_invert(const Cplx& target, const Periods& periods, const ChebotarevData& data,
                         const PrecisionCtx& ctx);

// Representative of v modulo Z + tau Z with coordinates in [0, 1), and the
// distance from v to the nearest lattice point.
Cplx lattice_reduce(const Cplx& v, const Periods& periods);
Real lattice_distance(const Cplx& v, const Periods& periods);

// Independent verification routes: the same periods by direct continuation
// around hugging loops (first_kind_loop over arc `arc_index` gives 1 on the
// a-cycle and tau on the b-cycle; green_loop gives -2 pi i times the arc's
// harmonic measure), the third-kind b-cycle period, and the residue of the
// third-kind differential at infinity on sheet 1 by a large clockwise
// circle (-2 pi i).
Cplx first_kind_loop(int arc_index, const ChebotarevData& data, const Periods& periods,
                     const PrecisionCtx& ctx);
Cplx green_loop(int arc_index, const ChebotarevData& data, const PrecisionCtx& ctx);
Cplx third_kind_loop(int arc_index, const SheetPoint& a, const ChebotarevData& data,
                     const Periods& periods, const PrecisionCtx& ctx);
Cplx residue_loop(const SheetPoint& a, const ChebotarevData& data, const Periods& periods,
                  const PrecisionCtx& ctx);

// Flat JSON object with the period data at the given significant digits.
std::string periods_to_json(const Periods& periods, unsigned sig_digits = 24);

// CSV grid of Abel images over a box around the continuum, both sheets:
// re_z,im_z,sheet,re_omega1,im_omega1.  Nodes too close to the cut are
// skipped.
void write_abel_grid_csv(std::ostream& os, const ChebotarevData& data, const Periods& periods,
                         int nx, int ny, const PrecisionCtx& ctx);

}  // namespace chebpade
