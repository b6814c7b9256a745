#include "qbm/spectrum.hpp"

#include <cmath>
#include <sstream>

#include "qbm/errors.hpp"

namespace qbm {

OscillatorSpec::OscillatorSpec(double mass, double omega_r, double gamma0)
    : mass_(mass), omega_r_(omega_r), gamma0_(gamma0) {
    if (!(mass > 0.0) || !std::isfinite(mass)) throw Error(ErrorKind::InvalidSpec, "mass must be positive");
    if (!(omega_r > 0.0) || !std::isfinite(omega_r))
        throw Error(ErrorKind::InvalidSpec, "omega_r must be positive");
    if (!(gamma0 >= 0.0) || !std::isfinite(gamma0))
        throw Error(ErrorKind::InvalidSpec, "gamma0 must be non-negative");
    if (std::abs(gamma0 - omega_r) <= 1e-12 * omega_r)
        throw Error(ErrorKind::InvalidSpec, "critical damping gamma0 = omega_r is not supported");
    underdamped_ = gamma0 < omega_r;
    if (underdamped_)
        omega_tilde_ = std::sqrt((omega_r - gamma0) * (omega_r + gamma0));
    else
        gamma_tilde_ = std::sqrt((gamma0 - omega_r) * (gamma0 + omega_r));
}

cplx OscillatorSpec::root1() const {
    return underdamped_ ? cplx(gamma0_, -omega_tilde_) : cplx(gamma0_ + gamma_tilde_, 0.0);
}

cplx OscillatorSpec::root2() const {
    return underdamped_ ? cplx(gamma0_, omega_tilde_) : cplx(gamma0_ - gamma_tilde_, 0.0);
}

double OscillatorSpec::cos_t(double t) const {
    return underdamped_ ? std::cos(omega_tilde_ * t) : std::cosh(gamma_tilde_ * t);
}

double OscillatorSpec::sinc_t(double t) const {
    return underdamped_ ? std::sin(omega_tilde_ * t) / omega_tilde_ : std::sinh(gamma_tilde_ * t) / gamma_tilde_;
}

bool BathSpec::pure_ohmic() const {
    for (double g : supraohmic)
        if (g != 0.0) return false;
    for (double p : subohmic)
        if (p != 0.0) return false;
    return true;
}

std::vector<std::string> validate(const BathSpec& bath, const OscillatorSpec& osc) {
    std::vector<std::string> warnings;
    const double w = osc.omega_r();
    if (!(bath.temperature >= 0.0) || !std::isfinite(bath.temperature))
        throw Error(ErrorKind::InvalidSpec, "temperature must be finite and non-negative");
    if (!(bath.cutoff_uv >= 10.0 * w) || !std::isfinite(bath.cutoff_uv))
        throw Error(ErrorKind::InvalidSpec, "cutoff_uv must be at least 10 omega_r");
    if (!(bath.cutoff_ir >= 0.0) || bath.cutoff_ir > 0.1 * w)
        throw Error(ErrorKind::InvalidSpec, "cutoff_ir must lie in [0, omega_r/10]");
    for (double g : bath.supraohmic)
        if (!std::isfinite(g)) throw Error(ErrorKind::InvalidSpec, "non-finite supraohmic coefficient");
    for (double p : bath.subohmic)
        if (!std::isfinite(p)) throw Error(ErrorKind::InvalidSpec, "non-finite subohmic coefficient");

    if (bath.cutoff_uv < 100.0 * w) {
        std::ostringstream os;
        os << "cutoff_uv = " << bath.cutoff_uv << " is below 100 omega_r; cutoff-dependent residuals may matter";
        warnings.push_back(os.str());
    }
    if (!bath.subohmic.empty() && bath.cutoff_ir == 0.0)
        warnings.push_back("subohmic coefficients given with cutoff_ir = 0 vanish from the spectrum");

    if (!bath.pure_ohmic()) {
        const double lo = std::max(bath.cutoff_ir, 1e-6 * w);
        const double hi = bath.cutoff_uv;
        const int n = 10000;
        for (int i = 0; i < n; ++i) {
            const double omega = lo * std::pow(hi / lo, (i + 0.5) / n);
            if (spectral_density(bath, osc, omega) < 0.0) {
                std::ostringstream os;
                os << "spectral density is negative at omega = " << omega;
                warnings.push_back(os.str());
                break;
            }
        }
    }
    return warnings;
}

double spectral_density(const BathSpec& bath, const OscillatorSpec& osc, double omega) {
    if (!(omega > bath.cutoff_ir) || !(omega < bath.cutoff_uv)) return 0.0;
    const double m = osc.mass();
    double rate = osc.gamma0();
    double p = 1.0;
    for (double g : bath.supraohmic) {
        p *= omega / bath.cutoff_uv;
        rate += g * p;
    }
    double sub = 0.0;
    p = 1.0;
    for (double phi : bath.subohmic) {
        p *= bath.cutoff_ir / omega;
        sub += phi * p;
    }
    return (2.0 / pi) * m * (omega * rate - sub);
}

cplx laplace_dissipation(const BathSpec& bath, const OscillatorSpec& osc, cplx zeta) {
    if (!(zeta.real() > 0.0)) throw Error(ErrorKind::DomainError, "laplace_dissipation requires Re(zeta) > 0");
    const double m = osc.mass();
    const double lambda = bath.cutoff_uv;
    cplx value = m * osc.gamma0() * (zeta - (2.0 / pi) * lambda);
    for (std::size_t i = 0; i < bath.supraohmic.size(); ++i) {
        const double n = static_cast<double>(i + 1);
        value -= (2.0 / pi) * m * bath.supraohmic[i] * lambda / (n + 1.0);
    }
    // Subohmic terms vanish in the lambda -> 0 limit.
    return value;
}

SpectrumShifts compute_shifts(const BathSpec& bath) {
    SpectrumShifts s;
    for (std::size_t i = 0; i < bath.supraohmic.size(); ++i) {
        const double n = static_cast<double>(i + 1);
        s.ell += bath.supraohmic[i] / n;
        s.freq_renorm_sum += bath.supraohmic[i] / (n + 1.0);
    }
    for (std::size_t i = 0; i < bath.subohmic.size(); ++i)
        s.phi += bath.subohmic[i] / static_cast<double>(i + 1);
    return s;
}

double bare_frequency_sq(const BathSpec& bath, const OscillatorSpec& osc) {
    const double sum = osc.gamma0() + compute_shifts(bath).freq_renorm_sum;
    return osc.omega_r() * osc.omega_r() + (4.0 / pi) * bath.cutoff_uv * sum;
}

}  // namespace qbm
