#pragma once

#include <string>
#include <vector>

#include "qbm/special.hpp"

namespace qbm {

// System oscillator. Natural units hbar = k_B = 1.
class OscillatorSpec {
public:
    OscillatorSpec(double mass, double omega_r, double gamma0);

    double mass() const { return mass_; }
    double omega_r() const { return omega_r_; }
    double gamma0() const { return gamma0_; }
    bool underdamped() const { return underdamped_; }
    // Omega~ = sqrt(Omega_r^2 - gamma0^2); only meaningful when underdamped.
    double omega_tilde() const { return omega_tilde_; }
    // gamma~ = sqrt(gamma0^2 - Omega_r^2); only meaningful when overdamped.
    double gamma_tilde() const { return gamma_tilde_; }
    // Signed Omega~^2: positive underdamped, -gamma~^2 overdamped.
    double omega_tilde_sq() const { return omega_r_ * omega_r_ - gamma0_ * gamma0_; }

    // Roots a1, a2 of a^2 - 2 gamma0 a + Omega_r^2 = 0: gamma0 -/+ i Omega~
    // underdamped, gamma0 +/- gamma~ overdamped.
    cplx root1() const;
    cplx root2() const;

    // cos(Omega~ t) or cosh(gamma~ t).
    double cos_t(double t) const;
    // sin(Omega~ t)/Omega~ or sinh(gamma~ t)/gamma~.
    double sinc_t(double t) const;

private:
    double mass_, omega_r_, gamma0_;
    bool underdamped_;
    double omega_tilde_ = 0.0, gamma_tilde_ = 0.0;
};

struct BathSpec {
    double temperature = 0.0;
    double cutoff_uv = 1000.0;
    double cutoff_ir = 0.0;
    // gamma_n for n = 1, 2, ...: supraohmic rates, spectrum term gamma_n (omega/Lambda)^n.
    std::vector<double> supraohmic;
    // phi_n for n = 0, 1, ...: subohmic rates, spectrum term -phi_n (lambda/omega)^(n+1).
    std::vector<double> subohmic;

    bool pure_ohmic() const;
};

struct SpectrumShifts {
    double ell = 0.0;
    double phi = 0.0;
    double freq_renorm_sum = 0.0;
};

// Checks the bath against the oscillator; returns human-readable warnings and
// throws InvalidSpec on hard violations.
std::vector<std::string> validate(const BathSpec& bath, const OscillatorSpec& osc);

double spectral_density(const BathSpec& bath, const OscillatorSpec& osc, double omega);

cplx laplace_dissipation(const BathSpec& bath, const OscillatorSpec& osc, cplx zeta);

SpectrumShifts compute_shifts(const BathSpec& bath);

// Bare frequency squared Omega_r^2 + (4/pi) Lambda sum_n gamma_n/(n+1), for reporting only.
double bare_frequency_sq(const BathSpec& bath, const OscillatorSpec& osc);

}  // namespace qbm
