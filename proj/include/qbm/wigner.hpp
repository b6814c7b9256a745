#pragma once

// Exact Fourier-domain solution for constant drift.
//
// Transpose convention (the only place it is fixed): phase-space vectors are
// columns q = (x, p). The drift matrix is H = [[0, -1/M], [M Omega_r^2, 2 gamma0]]
// and the equations of motion read dq/dt = -H q, so
//     mean(t) = e^{-tH} mean0,   cov(t) = e^{-tH} cov0 e^{-tH}^T + sigma_T(t).
// In k-space the same map acts through the transpose,
//     W(t, k) = W0(e^{-tH^T} k) exp(-k^T sigma_T(t) k / 2),
// which is the form with e^{-tH^T} that appears in index notation.

#include <Eigen/Dense>

#include <complex>
#include <memory>
#include <vector>

#include "qbm/coefficients.hpp"

namespace qbm {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

inline constexpr int max_cumulant_order = 4;

// Fully symmetric rank-n tensor over (x, p), stored densely with 2^n entries;
// entry index bit j (from the most significant) is the j-th tensor index.
struct CumulantTensor {
    int order = 3;
    std::vector<double> data;

    static CumulantTensor zero(int order);
    double& at(std::initializer_list<int> idx);
    double at(std::initializer_list<int> idx) const;
    // kappa[k, ..., k].
    double contract(const Vec2& k) const;
    // Applies a linear map A on every index.
    CumulantTensor transformed(const Mat2& a) const;
    double norm() const;
};

struct FourierWignerState {
    Vec2 mean = Vec2::Zero();
    Mat2 covariance = Mat2::Identity() * 0.5;
    // Cumulants of order 3..max_cumulant_order, in increasing order.
    std::vector<CumulantTensor> higher;

    bool gaussian() const;
    void validate() const;
};

Mat2 drift_matrix(const OscillatorSpec& osc);
Mat2 diffusion_matrix(const DiffusionPair& d);

// e^{-tH}.
Mat2 propagator(double t, const OscillatorSpec& osc);

// Solves H S + S H^T = 2 D for the stationary covariance.
Mat2 stationary_covariance(const OscillatorSpec& osc, const Mat2& diffusion);

// sigma_T(t) = 2 int_0^t e^{-(t-s)H} D(s) e^{-(t-s)H}^T ds for a diffusion route.
class ThermalCovariance {
public:
    // Time-dependent D(s) from diffusion_at with the given method. Expensive methods
    // (oracle, low_t) are tabulated once on [s0, t_max] by piecewise Chebyshev interpolation.
    ThermalCovariance(const OscillatorSpec& osc, const BathSpec& bath, Method method, ExpansionControl ctrl = {},
                      double t_max = 0.0);

    // Constant diffusion (closed form sigma_inf - e^{-tH} sigma_inf e^{-tH}^T).
    static ThermalCovariance constant(const OscillatorSpec& osc, const DiffusionPair& d);

    Mat2 at(double t) const;
    // t -> infinity limit.
    Mat2 late() const { return sigma_inf_; }
    // Lower limit of the s-integral for time-dependent routes.
    double start() const { return s0_; }
    bool time_dependent() const { return static_cast<bool>(source_); }

private:
    struct Source;
    ThermalCovariance(const OscillatorSpec& osc, const Mat2& d_late);

    OscillatorSpec osc_;
    Mat2 d_late_;
    Mat2 sigma_inf_;
    double s0_ = 0.0;
    std::shared_ptr<const Source> source_;
};

inline ThermalCovariance thermal_covariance(const OscillatorSpec& osc, const BathSpec& bath, Method method,
                                            const ExpansionControl& ctrl = {}, double t_max = 0.0) {
    return ThermalCovariance(osc, bath, method, ctrl, t_max);
}

// Diagonal late-time covariance from the FI route: (2/pi)(gamma0/M) FI_1 and (2/pi) gamma0 M FI_3.
Mat2 equilibrium_covariance(const OscillatorSpec& osc, const BathSpec& bath);
// Same quantity from the stationary Lyapunov equation with diffusion_late.
Mat2 late_covariance(const OscillatorSpec& osc, const DiffusionPair& late);

FourierWignerState evolve_cumulants(const FourierWignerState& state0, double t, const OscillatorSpec& osc,
                                    const ThermalCovariance& sigma);

std::complex<double> characteristic_function(const FourierWignerState& state0, double t, const Vec2& k,
                                             const OscillatorSpec& osc, const ThermalCovariance& sigma);
// Characteristic function of a state at its own time.
std::complex<double> characteristic_function(const FourierWignerState& state, const Vec2& k);

// Gaussian closed form 1 - det(cov)^{-1/2}/2.
double linear_entropy(const FourierWignerState& state0, double t, const OscillatorSpec& osc,
                      const ThermalCovariance& sigma);
double linear_entropy(const FourierWignerState& state);
// 1 - (1/2 pi) int |W(t, k)|^2 d^2k by adaptive 2D quadrature; valid for non-Gaussian cumulant states.
double linear_entropy_quadrature(const FourierWignerState& state, double rel_tol = 1e-10);

struct KickTransform {
    double shear = 0.0;
};

// Momentum shear p -> p + shear * x, unit determinant.
FourierWignerState apply_kick(const FourierWignerState& state0, const KickTransform& kick);

}  // namespace qbm
