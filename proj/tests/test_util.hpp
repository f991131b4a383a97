#pragma once

#include <string>
#include <utility>

#include "doctest.h"

#include "chebpade/complex.hpp"
#include "chebpade/errors.hpp"

namespace testutil {

using chebpade::Cplx;
using chebpade::Real;

inline Real R(const char* s) { return Real(s); }
inline Cplx C(const char* re, const char* im = "0") { return Cplx(Real(re), Real(im)); }

// Runs f, which is expected to throw, and reports the error category.
template <class F>
chebpade::ErrorKind kind_of(F&& f) {
    try {
        std::forward<F>(f)();
    } catch (const chebpade::Error& e) {
        return e.kind();
    }
    FAIL("expected the call to fail");
    return chebpade::ErrorKind::internal;
}

// doctest-friendly closeness check with a readable failure message.
inline void check_close(const Cplx& got, const Cplx& want, const Real& tol,
                        const char* what = "") {
    Real err = abs(got - want);
    INFO(what, " got=", chebpade::to_string(got, 30),
         " want=", chebpade::to_string(want, 30), " err=", err.str(5));
    CHECK(err <= tol);
}

inline void check_close(const Real& got, const Real& want, const Real& tol,
                        const char* what = "") {
    Real err = abs(got - want);
    INFO(what, " got=", got.str(30), " want=", want.str(30), " err=", err.str(5));
    CHECK(err <= tol);
}

} // namespace testutil
