#pragma once

// Time-dependent drift: transition matrix of the characteristic curves and the
// corresponding Fourier-domain solution.
//
// With H(t) = [[0, -1/M], [M Omega^2(t), 2 Gamma(t)]] the wave vector obeys
// dk/dt = H(t)^T k, and Phi(t) collects the solutions for k(0) = e_x, e_p as
// columns. For constant drift Phi(t) = e^{tH^T}, so Phi(t)^{-T} is the column
// propagator e^{-tH} of wigner.hpp; in general Phi(t)^{-T} maps the mean.

#include <functional>
#include <vector>

#include "qbm/wigner.hpp"

namespace qbm {

struct TimeDependentDrift {
    double mass = 1.0;
    std::function<double(double)> gamma;
    std::function<double(double)> gamma_dot;
    std::function<double(double)> omega2;
    // Only needed by the k_x-first reduction.
    std::function<double(double)> omega2_dot;

    Mat2 matrix(double t) const;

    static TimeDependentDrift constant(double mass, double omega_r, double gamma0);
    // Gamma = gamma0 (1 + a_gamma sin(nu t)), Omega^2 = omega_r^2 (1 + a_omega sin(nu t)).
    static TimeDependentDrift sinusoidal(double mass, double omega_r, double gamma0, double a_gamma, double nu,
                                         double a_omega = 0.0);
    // Gamma moves from gamma_start to gamma_end as a tanh step centred at t_step.
    static TimeDependentDrift smoothed_step(double mass, double omega_r, double gamma_start, double gamma_end,
                                            double t_step, double width);
};

struct OdeTolerance {
    double rel = 1e-10;
    double abs = 1e-12;
    // Steps below this (relative to 1 + |t|) are treated as stiffness.
    double min_step = 1e-12;
};

class TransitionMatrix {
public:
    TransitionMatrix(TimeDependentDrift drift, double t_max, OdeTolerance tol);

    Mat2 at(double t) const;
    // Phi(t)^{-T}, the propagator of the mean.
    Mat2 mean_map(double t) const;
    double t_max() const { return t_max_; }
    const std::vector<double>& nodes() const { return nodes_; }

private:
    TimeDependentDrift drift_;
    double t_max_;
    OdeTolerance tol_;
    std::vector<double> nodes_;
    std::vector<Mat2> values_;
};

TransitionMatrix solve_transition(const TimeDependentDrift& drift, double t_max, const OdeTolerance& tol = {});

// The same Phi(t) through the scalar reductions: the undamped oscillator for
// j_p = e^{-int Gamma} k_p, and the reverse chain starting from k_x.
Mat2 transition_kp_first(const TimeDependentDrift& drift, double t, const OdeTolerance& tol = {});
Mat2 transition_kx_first(const TimeDependentDrift& drift, double t, const OdeTolerance& tol = {});

using DiffusionFunction = std::function<Mat2(double)>;

// Mean Phi^{-T} m0, covariance Phi^{-T} (sigma0 + 2 int Phi^T D Phi ds) Phi^{-1},
// higher cumulants mapped by Phi^{-T}. D is integrated from s_start.
FourierWignerState solve_general(const FourierWignerState& state0, double t, const TimeDependentDrift& drift,
                                 const DiffusionFunction& diffusion, const OdeTolerance& tol = {},
                                 double s_start = 0.0);

}  // namespace qbm
