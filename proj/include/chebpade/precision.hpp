#pragma once

#include <boost/math/constants/constants.hpp>
#include <boost/multiprecision/mpfr.hpp>

#include "chebpade/errors.hpp"

namespace chebpade {

// Arbitrary precision real scalar.  Expression templates are disabled so
// that Real behaves like a plain value type inside our complex layer.
using Real = boost::multiprecision::number<
    boost::multiprecision::mpfr_float_backend<0,
        boost::multiprecision::allocate_dynamic>,
    boost::multiprecision::et_off>;

// All numeric routines take an explicit PrecisionCtx; none consult global
// state for tolerances.  MPFR still needs a default precision for fresh
// temporaries, which PrecisionScope pins for the duration of a call.
struct PrecisionCtx {
    unsigned digits;  // target decimal accuracy of results
    unsigned guard;   // tolerance slack, tolerances are 10^(guard-digits)

    explicit PrecisionCtx(unsigned digits_ = 30, unsigned guard_ = 5)
        : digits(digits_), guard(guard_) {
        if (digits < 30) fail_domain("PrecisionCtx: digits must be at least 30");
        if (guard < 5) fail_domain("PrecisionCtx: guard must be at least 5");
        if (guard >= digits) fail_domain("PrecisionCtx: guard must be smaller than digits");
    }

    // Internal arithmetic runs with a little headroom over the target.
    unsigned work_digits() const { return digits + guard + 10; }

    Real series_tol() const {  // 10^(guard-digits)
        return pow(Real(10), static_cast<int>(guard) - static_cast<int>(digits));
    }
    Real eps() const {  // 10^(-digits)
        return pow(Real(10), -static_cast<int>(digits));
    }
};

// RAII guard that sets the MPFR default precision while a library call is
// on the stack and restores the caller's value afterwards.
class PrecisionScope {
public:
    explicit PrecisionScope(const PrecisionCtx& ctx)
        : saved_(Real::default_precision()) {
        Real::default_precision(ctx.work_digits());
    }
    explicit PrecisionScope(unsigned digits10)
        : saved_(Real::default_precision()) {
        Real::default_precision(digits10);
    }
    ~PrecisionScope() { Real::default_precision(saved_); }

    PrecisionScope(const PrecisionScope&) = delete;
    PrecisionScope& operator=(const PrecisionScope&) = delete;

private:
    unsigned saved_;
};

inline Real real_pi() { return boost::math::constants::pi<Real>(); }

// Decimal rendering with a fixed significant digit count; used by the
// serializers so that equal inputs produce byte identical output.
inline std::string to_decimal(const Real& x, unsigned sig_digits) {
    return x.str(sig_digits, std::ios_base::scientific);
}

} // namespace chebpade
