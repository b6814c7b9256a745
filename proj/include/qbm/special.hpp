#pragma once

#include <complex>

namespace qbm {

using cplx = std::complex<double>;

inline constexpr double euler_gamma = 0.57721566490153286061;
inline constexpr double pi = 3.14159265358979323846;

// psi(z); throws PoleArgument at non-positive integers.
cplx digamma(cplx z);
double digamma(double x);

// psi'(x) for real x > 0.
double trigamma(double x);

// H(z) = gamma_E + psi(z + 1).
cplx harmonic_number(cplx z);
double harmonic_number(double x);

// E1(z) = int_z^inf e^-t/t dt, principal branch with the cut on the negative real axis.
cplx exp_integral_e1(cplx z);

// e^z E1(z), finite where E1 itself would overflow or underflow.
cplx exp_integral_e1_scaled(cplx z);

// Like exp_integral_e1_scaled but on the negative real axis returns the real
// principal value -e^z Ei(-z) instead of throwing.
cplx exp_integral_e1_scaled_pv(cplx z);

// Ei(x) for x > 0 (Cauchy principal value).
double exp_integral_ei(double x);

// delta(x) = int_x^inf [coth(pi u)/u - psi'(1 + u)] du, x > 0.
// Finite-cutoff remainder of the static frequency integral FI_3 at argument Lambda/(2 pi T).
double cutoff_remainder(double x);

namespace detail {
// Large-|z| asymptotic series of psi(z) without recurrence shifting.
cplx digamma_asymptotic(cplx z);
}  // namespace detail

}  // namespace qbm
