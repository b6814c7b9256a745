#include "qbm/special.hpp"

#include <cmath>
#include <limits>

#include "qbm/errors.hpp"
#include "qbm/quadrature.hpp"

namespace qbm {

namespace detail {

// Asymptotic series of psi(z) valid for large |z|, |arg z| < pi.
cplx digamma_asymptotic(cplx z) {
    static constexpr double coeff[] = {1.0 / 12.0,   -1.0 / 120.0,        1.0 / 252.0, -1.0 / 240.0,
                                       1.0 / 132.0,  -691.0 / 32760.0,    1.0 / 12.0,  -3617.0 / 8160.0};
    const cplx w = 1.0 / (z * z);
    cplx sum = 0.0;
    cplx p = w;
    for (double c : coeff) {
        sum += c * p;
        p *= w;
    }
    return std::log(z) - 0.5 / z - sum;
}

}  // namespace detail

namespace {

constexpr double shift_threshold = 10.0;

bool is_nonpositive_integer(cplx z) {
    if (std::abs(z.imag()) > 1e-14 * std::max(1.0, std::abs(z.real()))) return false;
    if (z.real() > 0.5) return false;
    const double r = std::round(z.real());
    return std::abs(z.real() - r) <= 1e-14 * std::max(1.0, std::abs(r));
}

bool on_negative_axis(cplx z) { return z.imag() == 0.0 && z.real() < 0.0; }

cplx e1_series(cplx z) {
    cplx sum = 0.0;
    cplx term = 1.0;
    for (int k = 1; k < 400; ++k) {
        term *= -z / static_cast<double>(k);
        const cplx add = term / static_cast<double>(k);
        sum += add;
        if (std::abs(add) <= 1e-17 * std::abs(sum)) break;
    }
    return -euler_gamma - std::log(z) - sum;
}

// e^z E1(z) by the modified Lentz evaluation of the even continued fraction.
cplx e1_scaled_cf(cplx z) {
    constexpr double tiny = 1e-300;
    cplx b = z + 1.0;
    cplx c = 1.0 / tiny;
    cplx d = 1.0 / b;
    cplx h = d;
    for (int i = 1; i < 20000; ++i) {
        const double a = -static_cast<double>(i) * static_cast<double>(i);
        b += 2.0;
        d = 1.0 / (a * d + b);
        c = b + a / c;
        const cplx del = c * d;
        h *= del;
        if (std::abs(del - 1.0) < 1e-16) return h;
    }
    throw ToleranceError("E1 continued fraction did not converge", std::abs(h), 0.0,
                         ErrorKind::SeriesNotConverged);
}

bool use_series(cplx z) {
    const double r = std::abs(z);
    return r <= 4.0 || (r <= 50.0 && r + z.real() <= 5.0);
}

// e^{-x} Ei(x), x > 0.
double ei_scaled(double x) {
    if (x <= 40.0) {
        double sum = 0.0;
        double term = 1.0;
        for (int k = 1; k < 500; ++k) {
            term *= x / static_cast<double>(k);
            const double add = term / static_cast<double>(k);
            sum += add;
            if (add <= 1e-17 * sum) break;
        }
        return std::exp(-x) * (euler_gamma + std::log(x) + sum);
    }
    double sum = 1.0;
    double term = 1.0;
    for (int k = 1; k < 100; ++k) {
        const double next = term * static_cast<double>(k) / x;
        if (next > term) break;
        term = next;
        sum += term;
        if (term < 1e-17 * sum) break;
    }
    return sum / x;
}

double trigamma_asymptotic(double x) {
    static constexpr double coeff[] = {1.0 / 6.0,  -1.0 / 30.0,      1.0 / 42.0, -1.0 / 30.0,
                                       5.0 / 66.0, -691.0 / 2730.0, 7.0 / 6.0};
    const double w = 1.0 / (x * x);
    double sum = 0.0;
    double p = 1.0 / (x * x * x);
    for (double c : coeff) {
        sum += c * p;
        p *= w;
    }
    return 1.0 / x + 0.5 * w + sum;
}

}  // namespace

cplx digamma(cplx z) {
    if (is_nonpositive_integer(z))
        throw Error(ErrorKind::PoleArgument, "digamma pole at non-positive integer");
    if (z.real() < 0.0) {
        // Reflection: psi(z) = psi(1 - z) - pi cot(pi z).
        return digamma(1.0 - z) - pi / std::tan(pi * z);
    }
    cplx acc = 0.0;
    while (z.real() < shift_threshold) {
        acc -= 1.0 / z;
        z += 1.0;
    }
    return acc + detail::digamma_asymptotic(z);
}

double digamma(double x) { return digamma(cplx(x, 0.0)).real(); }

double trigamma(double x) {
    if (!(x > 0.0)) throw Error(ErrorKind::DomainError, "trigamma requires x > 0");
    double acc = 0.0;
    while (x < shift_threshold) {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    return acc + trigamma_asymptotic(x);
}

cplx harmonic_number(cplx z) {
    if (is_nonpositive_integer(z + 1.0))
        throw Error(ErrorKind::PoleArgument, "harmonic number pole at negative integer");
    if (z == cplx(0.0, 0.0)) return 0.0;
    return euler_gamma + digamma(z + 1.0);
}

double harmonic_number(double x) { return harmonic_number(cplx(x, 0.0)).real(); }

cplx exp_integral_e1(cplx z) {
    if (z == cplx(0.0, 0.0)) throw Error(ErrorKind::ZeroArgument, "E1(0) diverges");
    if (on_negative_axis(z)) throw Error(ErrorKind::BranchCut, "E1 argument on the negative real axis");
    if (use_series(z)) return e1_series(z);
    return std::exp(-z) * e1_scaled_cf(z);
}

cplx exp_integral_e1_scaled(cplx z) {
    if (z == cplx(0.0, 0.0)) throw Error(ErrorKind::ZeroArgument, "E1(0) diverges");
    if (on_negative_axis(z)) throw Error(ErrorKind::BranchCut, "E1 argument on the negative real axis");
    if (use_series(z)) return std::exp(z) * e1_series(z);
    return e1_scaled_cf(z);
}

cplx exp_integral_e1_scaled_pv(cplx z) {
    if (on_negative_axis(z)) return -ei_scaled(-z.real());
    return exp_integral_e1_scaled(z);
}

double exp_integral_ei(double x) {
    if (!(x > 0.0)) throw Error(ErrorKind::DomainError, "Ei(x) requires x > 0");
    if (x > 700.0) throw Error(ErrorKind::DomainError, "Ei(x) overflows for x > 700");
    return std::exp(x) * ei_scaled(x);
}

double cutoff_remainder(double x) {
    if (!(x > 0.0)) throw Error(ErrorKind::DomainError, "cutoff remainder requires x > 0");
    auto asymptotic = [](double u) {
        const double w = 1.0 / (u * u);
        return 0.5 / u - w / 12.0 + w * w / 120.0 - w * w * w / 252.0 + w * w * w * w / 240.0;
    };
    constexpr double split = 20.0;
    if (x >= split) return asymptotic(x);
    // coth(pi u)/u - 1/(pi u^2) - psi'(1+u): bounded at u -> 0.
    auto h = [](double u) {
        double lead;
        if (u < 0.05) {
            const double y2 = pi * pi * u * u;
            lead = pi * (1.0 / 3.0 + y2 * (-1.0 / 45.0 + y2 * (2.0 / 945.0 + y2 * (-1.0 / 4725.0 + y2 * 2.0 / 93555.0))));
        } else {
            lead = 1.0 / (std::tanh(pi * u) * u) - 1.0 / (pi * u * u);
        }
        return lead - trigamma(1.0 + u);
    };
    QuadOptions opt;
    opt.rel_tol = 1e-12;
    opt.abs_tol = 1e-14;
    std::vector<double> pts{x, split};
    if (x < 0.05) pts.push_back(0.05);
    if (x < 1.0) pts.push_back(1.0);
    const double integral = integrate(h, pts, opt).value;
    return 1.0 / (pi * x) - 1.0 / (pi * split) + integral + asymptotic(split);
}

}  // namespace qbm
