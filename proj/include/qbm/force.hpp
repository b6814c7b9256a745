#pragma once

// External classical force F(t) entering as dp/dt = ... + F(t). Only the
// first cumulant responds.

#include <string>
#include <vector>

#include "qbm/wigner.hpp"

namespace qbm {

enum class ForceKind { Constant, Sinusoidal, Tabulated };

struct ForceProfile {
    ForceKind kind = ForceKind::Constant;
    double amplitude = 0.0;
    double frequency = 0.0;
    double phase = 0.0;
    // Tabulated samples, strictly increasing in time; linear in between.
    std::vector<double> times;
    std::vector<double> values;

    static ForceProfile constant(double f0);
    // F0 sin(omega_d t + phase).
    static ForceProfile sinusoidal(double f0, double omega_d, double phase = 0.0);
    static ForceProfile tabulated(std::vector<double> times, std::vector<double> values);
    // Two-column CSV (t, F); a non-numeric first line is taken as a header.
    static ForceProfile from_csv(const std::string& path);

    double operator()(double t) const;
    void validate() const;
};

// int_0^t F(s) e^{-(t-s)H} (0, 1)^T ds, added to the evolved mean.
Vec2 forced_mean_shift(const ForceProfile& force, double t, const OscillatorSpec& osc, double rel_tol = 1e-12);

FourierWignerState evolve_forced(const FourierWignerState& state0, double t, const ForceProfile& force,
                                 const OscillatorSpec& osc, const ThermalCovariance& sigma);

}  // namespace qbm
