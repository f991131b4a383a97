#include "doctest.h"

#include "chebpade/elliptic.hpp"
#include "test_util.hpp"

using namespace chebpade;
using testutil::C;
using testutil::R;
using testutil::check_close;

namespace {
const PrecisionCtx ctx60(60, 5);

// Reference values computed by the independent quadrature and product
// oracles in tests/oracles (see tools notes); accurate well past 1e-50.
const char* kK_half_sqrt2 = "1.85407467730137191843385034719526004621759882352176690558593";
const char* kK_08         = "1.99530277766472938768621133937243734938196807236890322153363";
const char* kK_c_re       = "1.60276584545470514340982102524773429809602569099043886955032";
const char* kK_c_im       = "0.0258322822713612170510555931746042341211311238853595990358458";
const char* kTheta4_at_i  = "0.913579138156116821407242593401222089701963916393469033419696531265908";
const char* kTheta4_z0_re = "0.894468426389911569416192800657849745615652280693950774812435976791141";
const char* kTheta4_z0_im = "-0.0934093008180729410206480155235704353116809167281240840362124401511940";
const char* kUstar        = "1.50028643588828504702682067564367197643574808166489510186628";
} // namespace

TEST_SUITE_BEGIN("elliptic");

TEST_CASE("complex scalar layer basics") {
    PrecisionScope scope(ctx60);
    Real tol = ctx60.eps() * 100;

    check_close(sqrt(Cplx(-1)), C("0", "1"), tol, "sqrt(-1)");
    check_close(sqrt(C("0", "2")), C("1", "1"), tol, "sqrt(2i)");
    Cplx z = C("-0.7", "1.9");
    check_close(sqrt(z) * sqrt(z), z, tol, "sqrt squares back");
    check_close(exp(log(z)), z, tol, "exp(log(z))");
    check_close(log(exp(C("0.3", "1.2"))), C("0.3", "1.2"), tol, "log(exp(z))");
    check_close(z / C("2.5", "-0.3") * C("2.5", "-0.3"), z, tol, "division roundtrip");
    check_close(pow_int(z, 7), z * z * z * z * z * z * z, tol * 100, "pow_int");
    check_close(pow_int(z, -2) * (z * z), Cplx(1), tol, "negative power");
}

TEST_CASE("agm fixed points and symmetry") {
    PrecisionScope scope(ctx60);
    Real tol = ctx60.series_tol();

    Cplx a = C("1.3", "0.4");
    check_close(agm(a, a, ctx60), a, tol, "agm(a,a)=a");
    check_close(agm(Cplx(1), Cplx(1), ctx60), Cplx(1), tol, "agm(1,1)=1");
    check_close(agm(a, C("0.2", "-0.1"), ctx60), agm(C("0.2", "-0.1"), a, ctx60),
                tol, "agm symmetric");
}

TEST_CASE("complete elliptic integral against quadrature reference") {
    PrecisionScope scope(ctx60);
    Real tol = R("1e-48");

    auto m1 = elliptic_K(Cplx(1) / sqrt(Cplx(2)), ctx60);
    check_close(m1.K, C(kK_half_sqrt2), tol, "K(1/sqrt2)");
    check_close(m1.Kprime, C(kK_half_sqrt2), tol, "self-complementary point");

    auto m2 = elliptic_K(C("0.8"), ctx60);
    check_close(m2.K, C(kK_08), tol, "K(0.8)");

    auto m3 = elliptic_K(C("0.3", "0.1"), ctx60);
    check_close(m3.K, C(kK_c_re, kK_c_im), tol, "K(0.3+0.1i)");
}

TEST_CASE("elliptic moduli invariants") {
    PrecisionScope scope(ctx60);
    Real tol = ctx60.series_tol();

    for (Cplx k : {C("0.8"), C("0.3", "0.1"), C("0.95", "-0.2"), C("0.05", "0.4")}) {
        auto m = elliptic_K(k, ctx60);
        check_close(m.k * m.k + m.kprime * m.kprime, Cplx(1), tol, "k^2+k'^2=1");
        CHECK(m.tau.im > 0);
        CHECK(abs(m.nome) < 1);
        check_close(m.nome, exp(C("0", "3.14159265358979323846264338327950288419716939937510582097494459230782")
                                * m.tau), tol * 10, "nome matches tau");
    }
}

TEST_CASE("elliptic_K domain errors") {
    CHECK_THROWS_AS((void)elliptic_K(Cplx(1), ctx60), Error);
    CHECK_THROWS_AS((void)elliptic_K(Cplx(-1), ctx60), Error);
    CHECK_THROWS_AS((void)elliptic_K(Cplx(0), ctx60), Error);
    try {
        (void)elliptic_K(Cplx(1), ctx60);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::domain);
    }
}

TEST_CASE("theta4 against product-formula reference") {
    PrecisionScope scope(ctx60);
    Real tol = R("1e-55");

    auto t1 = theta4(Cplx(0), C("0", "1"), ctx60);
    check_close(t1.value, C(kTheta4_at_i), tol, "theta4(0|i)");

    auto t2 = theta4(C("0.1", "0.05"), C("0.3", "0.8"), ctx60);
    check_close(t2.value, C(kTheta4_z0_re, kTheta4_z0_im), tol, "theta4(z0|tau0)");
}

TEST_CASE("theta4 symmetry, periodicity, quasi-periodicity") {
    PrecisionScope scope(ctx60);
    Real tol = R("1e-52");
    Cplx z = C("0.17", "0.30");
    Cplx tau = C("0.25", "0.60");
    Real pi = real_pi();

    auto tz = theta4(z, tau, ctx60);
    check_close(theta4(-z, tau, ctx60).value, tz.value, tol, "even in z");
    check_close(theta4(z + Cplx(1), tau, ctx60).value, tz.value, tol, "period 1");

    // theta4(z+tau) = -exp(-i pi (tau + 2z)) theta4(z), and the z-derivative
    // of that identity ties dvalue to value non-circularly.
    Cplx mult = -exp(Cplx(Real(0), -pi) * (tau + Real(2) * z));
    auto tshift = theta4(z + tau, tau, ctx60);
    check_close(tshift.value, mult * tz.value, tol, "quasi-periodicity");
    Cplx want_d = mult * (tz.dvalue - Cplx(Real(0), 2 * pi) * tz.value);
    check_close(tshift.dvalue, want_d, tol * 100, "quasi-periodicity derivative");
}

TEST_CASE("jacobi cn basics") {
    PrecisionScope scope(ctx60);
    Real tol = R("1e-48");

    check_close(jacobi_cn(Cplx(0), C("0.8"), ctx60), Cplx(1), tol, "cn(0)=1");
    check_close(jacobi_cn(C("0.45", "0.2"), C("0.6", "0.1"), ctx60),
                jacobi_cn(-C("0.45", "0.2"), C("0.6", "0.1"), ctx60), tol, "cn even");

    // independent inversion oracle: u* = int_{0.3}^{1} dt/sqrt((1-t^2)(k'^2+k^2 t^2))
    check_close(jacobi_cn(C(kUstar), C("0.8"), ctx60), C("0.3"), tol, "cn(u*)=0.3");

    auto m = elliptic_K(C("0.8"), ctx60);
    Cplx u = C("0.37", "0.11");
    Cplx two_k = Real(2) * m.K;
    check_close(jacobi_cn(u + two_k, C("0.8"), ctx60),
                -jacobi_cn(u, C("0.8"), ctx60), tol, "cn(u+2K)=-cn(u)");
    check_close(jacobi_cn(u + two_k + two_k, C("0.8"), ctx60),
                jacobi_cn(u, C("0.8"), ctx60), tol, "cn(u+4K)=cn(u)");
}

TEST_CASE("jacobi cn domain errors") {
    // pole of cn at u = i K'
    auto m = elliptic_K(C("0.8"), ctx60);
    CHECK_THROWS_AS((void)jacobi_cn(Cplx(Real(0), m.Kprime.re), C("0.8"), ctx60), Error);
    // modulus whose nome exceeds the series cutoff
    CHECK_THROWS_AS((void)jacobi_cn(C("0.5"), C("0.99999999999999999999999999999999999999999999"), ctx60), Error);
}

TEST_CASE("precision doubling agreement") {
    PrecisionCtx lo(40, 5), hi(80, 5);
    PrecisionScope scope(hi);
    auto klo = elliptic_K(C("0.8"), lo);
    auto khi = elliptic_K(C("0.8"), hi);
    check_close(klo.K, khi.K, R("1e-33"), "K stable under doubling");

    auto tlo = theta4(C("0.1", "0.05"), C("0.3", "0.8"), lo);
    auto thi = theta4(C("0.1", "0.05"), C("0.3", "0.8"), hi);
    check_close(tlo.value, thi.value, R("1e-33"), "theta4 stable under doubling");
}

TEST_SUITE_END();
