#pragma once

#include <array>
#include <string>
#include <vector>

#include "qbm/spectrum.hpp"

namespace qbm {

enum class Method { Oracle, LowT, HighT, HighTIntegral, GeneralApprox, LateTime, ExtremeT, CCR };

const char* to_string(Method m);
Method method_from_string(const std::string& name);

struct ExpansionControl {
    int k_max = 200;
    double rel_tol = 1e-8;
    double abs_tol = 1e-12;
};

struct DiffusionPair {
    double d_xp = 0.0;
    double d_pp = 0.0;
    double t = 0.0;
    Method method = Method::LateTime;
    std::vector<std::string> warnings;
};

enum class Kernel { Cos, Sin };

// int_0^Lambda omega^N {cos,sin}(omega t) coth(omega/2T) / [(omega^2 - Omega_r^2)^2 + 4 gamma0^2 omega^2].
// Ohmic band integrand only.
double fc_n_oracle(int n, double t, const OscillatorSpec& osc, const BathSpec& bath,
                   const ExpansionControl& ctrl = {}, Kernel kernel = Kernel::Cos);

// Building blocks of the late-time closed forms.
struct LateTimeTerms {
    // (1/Omega~) Im H((gamma0 + i Omega~)/2 pi T), continued to the overdamped branch.
    double s = 0.0;
    // Re[H(Lambda/2 pi T) - H((gamma0 + i Omega~)/2 pi T)] - delta(Lambda/2 pi T).
    double re_bracket = 0.0;
};

LateTimeTerms late_time_terms(const OscillatorSpec& osc, const BathSpec& bath);

double fi1_closed(const OscillatorSpec& osc, const BathSpec& bath);
double fi3_closed(const OscillatorSpec& osc, const BathSpec& bath);

// A function of t and its first three t-derivatives.
using Jet = std::array<double, 4>;

// Time-dependent parts of FC_1 that survive the D(t) assembly, with derivatives.
Jet delta_fc1_low_t_jet(double t, const OscillatorSpec& osc, const BathSpec& bath, const ExpansionControl& ctrl = {});
Jet delta_fc1_high_t_jet(double t, const OscillatorSpec& osc, const BathSpec& bath, const ExpansionControl& ctrl = {});
Jet delta_fc1_high_t_integral_jet(double t, const OscillatorSpec& osc, const BathSpec& bath);
Jet delta_fc1_general_jet(double t, const OscillatorSpec& osc, const BathSpec& bath);

double delta_fc1_low_t(double t, const OscillatorSpec& osc, const BathSpec& bath, const ExpansionControl& ctrl = {});
double delta_fc1_high_t(double t, const OscillatorSpec& osc, const BathSpec& bath, const ExpansionControl& ctrl = {});
double delta_fc1_high_t_integral(double t, const OscillatorSpec& osc, const BathSpec& bath);
double delta_fc1_general(double t, const OscillatorSpec& osc, const BathSpec& bath);

// Zero-temperature E1 bracket shared by the low-T and general forms.
double low_t_bracket(double t, const OscillatorSpec& osc);

// Damped-oscillation terms e^{-gamma0 t}(A cos + B sin) of FC_1 that cancel in the assembly.
double fc1_homogeneous_low_t(double t, const OscillatorSpec& osc);
double fc1_homogeneous(double t, const OscillatorSpec& osc, const BathSpec& bath);

// Full FC_1(t) as represented by one method (homogeneous part plus Delta FC_1).
double fc1_by_method(double t, const OscillatorSpec& osc, const BathSpec& bath, Method method,
                     const ExpansionControl& ctrl = {});

DiffusionPair diffusion_at(double t, const OscillatorSpec& osc, const BathSpec& bath, Method method,
                           const ExpansionControl& ctrl = {});
DiffusionPair diffusion_late(const OscillatorSpec& osc, const BathSpec& bath);
// Late-time coefficients with the Re[H(Lambda/2 pi T) - H(...)] cutoff terms removed.
DiffusionPair diffusion_late_subtracted(const OscillatorSpec& osc, const BathSpec& bath);
DiffusionPair diffusion_extreme_t(const OscillatorSpec& osc, const BathSpec& bath);
DiffusionPair diffusion_ccr(const OscillatorSpec& osc, const BathSpec& bath);

}  // namespace qbm
