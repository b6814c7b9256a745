#include "qbm/coefficients.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <sstream>

#include "qbm/errors.hpp"
#include "qbm/quadrature.hpp"

namespace qbm {

const char* to_string(Method m) {
    switch (m) {
        case Method::Oracle: return "oracle";
        case Method::LowT: return "low_t";
        case Method::HighT: return "high_t";
        case Method::HighTIntegral: return "high_t_integral";
        case Method::GeneralApprox: return "general";
        case Method::LateTime: return "late";
        case Method::ExtremeT: return "extreme_t";
        case Method::CCR: return "ccr";
    }
    return "unknown";
}

Method method_from_string(const std::string& name) {
    for (Method m : {Method::Oracle, Method::LowT, Method::HighT, Method::HighTIntegral, Method::GeneralApprox,
                     Method::LateTime, Method::ExtremeT, Method::CCR})
        if (name == to_string(m)) return m;
    throw Error(ErrorKind::ConfigError, "unknown method '" + name + "'");
}

namespace {

using Vec4 = Eigen::Matrix<double, 4, 1>;

void require_damping(const OscillatorSpec& osc) {
    if (!(osc.gamma0() > 0.0)) throw Error(ErrorKind::DomainError, "coefficients require gamma0 > 0");
}

// omega coth(omega/2T), with the removable omega -> 0 limit 2T.
double omega_coth(double w, double temp, double floor) {
    if (temp == 0.0) return w;
    if (w < floor) return 2.0 * temp;
    return w / std::tanh(w / (2.0 * temp));
}

double resonance_den(double w, const OscillatorSpec& osc) {
    const double w2 = w * w;
    const double o2 = osc.omega_r() * osc.omega_r();
    const double g = osc.gamma0();
    return (w2 - o2) * (w2 - o2) + 4.0 * g * g * w2;
}

std::vector<double> oracle_breakpoints(const OscillatorSpec& osc, const BathSpec& bath) {
    const double lam = bath.cutoff_uv;
    std::vector<double> pts{0.0, lam};
    const double w = osc.omega_r();
    const double g = osc.gamma0();
    for (double p : {w, w - 2.0 * g, w + 2.0 * g, 2.0 * pi * bath.temperature})
        if (p > 0.0 && p < lam) pts.push_back(p);
    return pts;
}

QuadOptions oracle_options(double t, const ExpansionControl& ctrl) {
    QuadOptions opt;
    opt.rel_tol = ctrl.rel_tol;
    opt.abs_tol = ctrl.abs_tol;
    if (t > 0.0) opt.max_width = pi / (4.0 * t);
    return opt;
}

// Regularization scale for the FC_3/FS_4 oracle integrands.
double regular_scale(const OscillatorSpec& osc) { return 1.0 / osc.omega_r(); }

// Oracle {FC_1, FS_2, FC_3, FS_4}(t) with the large-omega 1/omega and 1 tails of the
// FC_3 and FS_4 integrands subtracted and re-added as their Lambda -> infinity integrals.
Vec4 oracle_fc_set(double t, const OscillatorSpec& osc, const BathSpec& bath, const ExpansionControl& ctrl) {
    const double temp = bath.temperature;
    const double floor = 1e-8 * std::max(temp, osc.omega_r());
    const double b = regular_scale(osc);
    auto f = [&](double w) {
        const double q = omega_coth(w, temp, floor) / resonance_den(w, osc);
        const double c = std::cos(w * t), s = std::sin(w * t);
        const double tail = -std::expm1(-b * w);
        const double tail3 = w > 0.0 ? tail / w : b;
        Vec4 v;
        v << q * c, w * q * s, (w * w * q - tail3) * c, (w * w * w * q - tail) * s;
        return v;
    };
    Vec4 v = integrate(f, oracle_breakpoints(osc, bath), oracle_options(t, ctrl)).value;
    v[2] += 0.5 * std::log1p(b * b / (t * t));
    v[3] += 1.0 / t - t / (b * b + t * t);
    return v;
}

// F(t) = E1(z t) e^{w t} and its first three derivatives.
std::array<cplx, 4> e1_piece(cplx z, cplx w, double t) {
    const cplx u = w - z;
    const cplx e = std::exp(u * t);
    const cplx f0 = e * exp_integral_e1_scaled_pv(z * t);
    const cplx g0 = e / t;
    const cplx g1 = e * (u / t - 1.0 / (t * t));
    const cplx g2 = e * (u * u / t - 2.0 * u / (t * t) + 2.0 / (t * t * t));
    const cplx f1 = w * f0 - g0;
    const cplx f2 = w * f1 - g1;
    const cplx f3 = w * f2 - g2;
    return {f0, f1, f2, f3};
}

// Re{[F(a1) - F(a2)] / (2 (a2^2 - a1^2))} with
// F(a) = E1((2 pi T - a) t) e^{-a t} + E1((2 pi T + a) t) e^{a t}.
Jet e1_bracket_jet(double t, double temp, const OscillatorSpec& osc) {
    if (!(t > 0.0)) throw Error(ErrorKind::DomainError, "E1 bracket requires t > 0");
    const double nu = 2.0 * pi * temp;
    const cplx a1 = osc.root1(), a2 = osc.root2();
    auto bracket = [&](cplx a) {
        const auto p = e1_piece(nu - a, -a, t);
        const auto q = e1_piece(nu + a, a, t);
        return std::array<cplx, 4>{p[0] + q[0], p[1] + q[1], p[2] + q[2], p[3] + q[3]};
    };
    const auto f1 = bracket(a1);
    const auto f2 = bracket(a2);
    const cplx scale = 1.0 / (2.0 * (a2 * a2 - a1 * a1));
    Jet out;
    for (int i = 0; i < 4; ++i) out[i] = ((f1[i] - f2[i]) * scale).real();
    return out;
}

Jet to_jet(const Vec4& v) { return {v[0], v[1], v[2], v[3]}; }

// 2 sum_k int_0^inf omega cos(omega t) e^{-k omega/T}/den, the finite-temperature part of the
// low-T expansion, with derivatives.
Jet low_t_sum_jet(double t, const OscillatorSpec& osc, const BathSpec& bath, const ExpansionControl& ctrl) {
    const double temp = bath.temperature;
    if (temp == 0.0) return {0.0, 0.0, 0.0, 0.0};
    QuadOptions opt;
    opt.rel_tol = std::min(ctrl.rel_tol, 1e-9);
    opt.abs_tol = ctrl.abs_tol * 1e-2;
    if (t > 0.0) opt.max_width = pi / (4.0 * t);

    auto kernel = [&](double w, double weight) {
        const double r = weight / resonance_den(w, osc);
        const double c = std::cos(w * t), s = std::sin(w * t);
        const double w2 = w * w;
        Vec4 v;
        v << w * c * r, -w2 * s * r, -w2 * w * c * r, w2 * w2 * s * r;
        return v;
    };
    auto breakpoints = [&](double hi) {
        std::vector<double> pts{0.0, hi};
        const double w = osc.omega_r();
        if (w < hi) pts.push_back(w);
        return pts;
    };

    Vec4 acc = Vec4::Zero();
    int k = 1;
    for (; k <= ctrl.k_max; ++k) {
        const double kk = static_cast<double>(k);
        const double hi = 50.0 * temp / kk;
        auto f = [&](double w) { return kernel(w, 2.0 * std::exp(-kk * w / temp)); };
        const Vec4 term = integrate(f, breakpoints(hi), opt).value;
        acc += term;
        if (term.cwiseAbs().maxCoeff() < ctrl.rel_tol * acc.cwiseAbs().maxCoeff()) {
            ++k;
            break;
        }
    }
    // Exact geometric remainder sum_{j >= k} e^{-j omega/T} under one integral.
    const double kr = static_cast<double>(k);
    auto rest = [&](double w) {
        const double weight = 2.0 * std::exp(-kr * w / temp) / (-std::expm1(-w / temp));
        return kernel(w, weight);
    };
    acc += integrate(rest, breakpoints(50.0 * temp / kr), opt).value;
    return to_jet(acc);
}

double fc1_shift(double t, const BathSpec& bath, const OscillatorSpec& osc, double phi) {
    const double o4 = std::pow(osc.omega_r(), 4);
    return 2.0 * bath.temperature / o4 * std::cos(bath.cutoff_ir * t) * phi;
}

// Assembles D(t) from gamma0 times the frequency integrals.
DiffusionPair assemble(double t, const OscillatorSpec& osc, double g_fi1, double g_fi3, double g_fc1, double g_fs2,
                       double g_fc3, double g_fs4) {
    const double g = osc.gamma0();
    const double m = osc.mass();
    const double o2 = osc.omega_r() * osc.omega_r();
    const double ot2 = osc.omega_tilde_sq();
    const double e = std::exp(-g * t);
    const double c = osc.cos_t(t) * e;
    const double s = osc.sinc_t(t) * e;
    DiffusionPair d;
    d.t = t;
    d.d_xp = (g_fi3 - o2 * g_fi1) / pi - c * (g_fc3 - o2 * g_fc1 + 2.0 * g * g_fs2) / pi +
             s * (g * (g_fc3 + o2 * g_fc1) + (ot2 - g * g) * g_fs2 - g_fs4) / pi;
    d.d_pp = 4.0 * m * g * g_fi3 / pi - 2.0 * m * g * c * (2.0 * g * g_fc3 + o2 * g_fs2 - g_fs4) / pi -
             2.0 * m * g * s * (-o2 * o2 * g_fc1 + (ot2 - g * g) * g_fc3 + g * (o2 * g_fs2 + g_fs4)) / pi;
    return d;
}

}  // namespace

double fc_n_oracle(int n, double t, const OscillatorSpec& osc, const BathSpec& bath, const ExpansionControl& ctrl,
                   Kernel kernel) {
    if (n < 1 || n > 4) throw Error(ErrorKind::DomainError, "fc_n_oracle supports N in 1..4");
    if (!(t >= 0.0) || !std::isfinite(t)) throw Error(ErrorKind::DomainError, "fc_n_oracle requires finite t >= 0");
    const double temp = bath.temperature;
    const double floor = 1e-8 * std::max(temp, osc.omega_r());
    auto f = [&](double w) {
        const double base = std::pow(w, n - 1) * omega_coth(w, temp, floor) / resonance_den(w, osc);
        return base * (kernel == Kernel::Cos ? std::cos(w * t) : std::sin(w * t));
    };
    return integrate(f, oracle_breakpoints(osc, bath), oracle_options(t, ctrl)).value;
}

LateTimeTerms late_time_terms(const OscillatorSpec& osc, const BathSpec& bath) {
    require_damping(osc);
    const double g = osc.gamma0();
    const double temp = bath.temperature;
    const double lam = bath.cutoff_uv;
    LateTimeTerms out;
    if (temp == 0.0) {
        if (osc.underdamped()) {
            out.s = std::atan2(osc.omega_tilde(), g) / osc.omega_tilde();
        } else {
            const double gt = osc.gamma_tilde();
            out.s = std::log((g + gt) / (g - gt)) / (2.0 * gt);
        }
        out.re_bracket = std::log(lam / osc.omega_r());
        return out;
    }
    const double nu = 2.0 * pi * temp;
    double re_h;
    if (osc.underdamped()) {
        const cplx h = harmonic_number(cplx(g, osc.omega_tilde()) / nu);
        out.s = h.imag() / osc.omega_tilde();
        re_h = h.real();
    } else {
        const double gt = osc.gamma_tilde();
        const double hp = harmonic_number((g + gt) / nu);
        const double hm = harmonic_number((g - gt) / nu);
        out.s = (hp - hm) / (2.0 * gt);
        re_h = 0.5 * (hp + hm);
    }
    const double x = lam / nu;
    out.re_bracket = harmonic_number(x) - re_h - cutoff_remainder(x);
    return out;
}

double fi1_closed(const OscillatorSpec& osc, const BathSpec& bath) {
    const auto lt = late_time_terms(osc, bath);
    const double g = osc.gamma0();
    const double o2 = osc.omega_r() * osc.omega_r();
    return pi * bath.temperature / (2.0 * g * o2) + lt.s / (2.0 * g);
}

double fi3_closed(const OscillatorSpec& osc, const BathSpec& bath) {
    const auto lt = late_time_terms(osc, bath);
    const double g = osc.gamma0();
    return pi * bath.temperature / (2.0 * g) + (osc.omega_tilde_sq() - g * g) / (2.0 * g) * lt.s + lt.re_bracket;
}

double low_t_bracket(double t, const OscillatorSpec& osc) {
    require_damping(osc);
    return e1_bracket_jet(t, 0.0, osc)[0];
}

Jet delta_fc1_low_t_jet(double t, const OscillatorSpec& osc, const BathSpec& bath, const ExpansionControl& ctrl) {
    require_damping(osc);
    Jet j = e1_bracket_jet(t, 0.0, osc);
    const Jet s = low_t_sum_jet(t, osc, bath, ctrl);
    for (int i = 0; i < 4; ++i) j[i] += s[i];
    return j;
}

Jet delta_fc1_high_t_jet(double t, const OscillatorSpec& osc, const BathSpec& bath, const ExpansionControl& ctrl) {
    require_damping(osc);
    const double temp = bath.temperature;
    if (!(t > 0.0) || !(temp > 0.0))
        throw ToleranceError("high-T series requires t > 0 and T > 0", 0.0, std::numeric_limits<double>::infinity(),
                             ErrorKind::SeriesNotConverged);
    const double nu1 = 2.0 * pi * temp;
    const double o2 = osc.omega_r() * osc.omega_r();
    const double g2 = osc.gamma0() * osc.gamma0();
    const double ratio = std::exp(-nu1 * t);
    Jet acc{0.0, 0.0, 0.0, 0.0};
    for (int k = 1; k <= ctrl.k_max; ++k) {
        const double nu = nu1 * static_cast<double>(k);
        const double q = (nu * nu + o2) * (nu * nu + o2) - 4.0 * g2 * nu * nu;
        const double base = -nu1 * nu * std::exp(-nu * t) / q;
        const Jet term{base, -nu * base, nu * nu * base, -nu * nu * nu * base};
        double worst = 0.0, scale = 0.0;
        for (int i = 0; i < 4; ++i) {
            acc[i] += term[i];
            worst = std::max(worst, std::abs(term[i]));
            scale = std::max(scale, std::abs(acc[i]));
        }
        const double tail = ratio < 1.0 ? worst * ratio / (1.0 - ratio) : std::numeric_limits<double>::infinity();
        if (tail <= ctrl.rel_tol * scale + ctrl.abs_tol) return acc;
    }
    throw ToleranceError("high-T series did not converge within k_max terms", acc[0], std::abs(acc[0]),
                         ErrorKind::SeriesNotConverged);
}

Jet delta_fc1_high_t_integral_jet(double t, const OscillatorSpec& osc, const BathSpec& bath) {
    require_damping(osc);
    const double temp = bath.temperature;
    if (!(t > 0.0) || !(temp > 0.0)) throw Error(ErrorKind::DomainError, "high-T integral form requires t, T > 0");
    // -(1/nu1^2) int_1^inf k e^{-nu1 t k} / ((k^2 - r1^2)(k^2 - r2^2)) dk by partial fractions,
    // r_j = a_j/nu1, using int_1^inf k e^{-x k}/(k^2 - r^2) dk = [e^{-x r} E1(x(1-r)) + e^{x r} E1(x(1+r))]/2.
    const double nu1 = 2.0 * pi * temp;
    const cplx r1 = osc.root1() / nu1, r2 = osc.root2() / nu1;
    auto half_sum = [&](cplx r) {
        const auto p = e1_piece(nu1 * (1.0 - r), -nu1 * r, t);
        const auto q = e1_piece(nu1 * (1.0 + r), nu1 * r, t);
        return std::array<cplx, 4>{p[0] + q[0], p[1] + q[1], p[2] + q[2], p[3] + q[3]};
    };
    const auto s1 = half_sum(r1);
    const auto s2 = half_sum(r2);
    const cplx pref = -0.5 / (nu1 * nu1 * (r1 * r1 - r2 * r2));
    Jet out;
    for (int i = 0; i < 4; ++i) out[i] = (pref * (s1[i] - s2[i])).real();
    return out;
}

Jet delta_fc1_general_jet(double t, const OscillatorSpec& osc, const BathSpec& bath) {
    require_damping(osc);
    return e1_bracket_jet(t, bath.temperature, osc);
}

double delta_fc1_low_t(double t, const OscillatorSpec& osc, const BathSpec& bath, const ExpansionControl& ctrl) {
    return delta_fc1_low_t_jet(t, osc, bath, ctrl)[0];
}
double delta_fc1_high_t(double t, const OscillatorSpec& osc, const BathSpec& bath, const ExpansionControl& ctrl) {
    return delta_fc1_high_t_jet(t, osc, bath, ctrl)[0];
}
double delta_fc1_high_t_integral(double t, const OscillatorSpec& osc, const BathSpec& bath) {
    return delta_fc1_high_t_integral_jet(t, osc, bath)[0];
}
double delta_fc1_general(double t, const OscillatorSpec& osc, const BathSpec& bath) {
    return delta_fc1_general_jet(t, osc, bath)[0];
}

double fc1_homogeneous_low_t(double t, const OscillatorSpec& osc) {
    require_damping(osc);
    if (!osc.underdamped()) return 0.0;
    const double g = osc.gamma0();
    const double ot = osc.omega_tilde();
    return pi / (4.0 * g * ot) * std::cos(ot * t) * std::exp(-g * t);
}

double fc1_homogeneous(double t, const OscillatorSpec& osc, const BathSpec& bath) {
    require_damping(osc);
    const double temp = bath.temperature;
    if (temp == 0.0) return fc1_homogeneous_low_t(t, osc);
    const double g = osc.gamma0();
    if (osc.underdamped()) {
        const double ot = osc.omega_tilde();
        const double y = ot / temp;
        const double th = std::tanh(y);
        const double se = 1.0 / std::cosh(y);
        const double num = th * std::cos(ot * t) + std::sin(g / temp) * se * std::sin(ot * t);
        const double den = 1.0 - std::cos(g / temp) * se;
        return pi / (4.0 * g * ot) * num / den * std::exp(-g * t);
    }
    const double gt = osc.gamma_tilde();
    const double ch = 0.5 * (std::exp((gt - g) * t) + std::exp(-(gt + g) * t));
    const double sh = 0.5 * (std::exp((gt - g) * t) - std::exp(-(gt + g) * t));
    const double num = std::sin(gt / temp) * ch + std::sin(g / temp) * sh;
    const double den = std::cos(gt / temp) - std::cos(g / temp);
    return pi / (4.0 * g * gt) * num / den;
}

double fc1_by_method(double t, const OscillatorSpec& osc, const BathSpec& bath, Method method,
                     const ExpansionControl& ctrl) {
    switch (method) {
        case Method::Oracle: return fc_n_oracle(1, t, osc, bath, ctrl);
        case Method::LowT: return fc1_homogeneous_low_t(t, osc) + delta_fc1_low_t(t, osc, bath, ctrl);
        case Method::HighT: return fc1_homogeneous(t, osc, bath) + delta_fc1_high_t(t, osc, bath, ctrl);
        case Method::HighTIntegral: return fc1_homogeneous(t, osc, bath) + delta_fc1_high_t_integral(t, osc, bath);
        case Method::GeneralApprox: return fc1_homogeneous(t, osc, bath) + delta_fc1_general(t, osc, bath);
        default: break;
    }
    throw Error(ErrorKind::DomainError, std::string("no FC_1 representation for method ") + to_string(method));
}

DiffusionPair diffusion_late(const OscillatorSpec& osc, const BathSpec& bath) {
    const auto lt = late_time_terms(osc, bath);
    const auto sh = compute_shifts(bath);
    const double g = osc.gamma0();
    const double m = osc.mass();
    const double o2 = osc.omega_r() * osc.omega_r();
    const double temp = bath.temperature;
    DiffusionPair d;
    d.t = std::numeric_limits<double>::infinity();
    d.method = Method::LateTime;
    d.d_xp = -(g * g / pi) * lt.s + (g / pi) * lt.re_bracket + sh.ell / pi + 2.0 * temp * sh.phi / (pi * o2);
    d.d_pp = 2.0 * m * g * temp + (2.0 * m * g / pi) * (osc.omega_tilde_sq() - g * g) * lt.s +
             (4.0 * m * g * g / pi) * lt.re_bracket + 4.0 * m * g * sh.ell / pi;
    return d;
}

DiffusionPair diffusion_late_subtracted(const OscillatorSpec& osc, const BathSpec& bath) {
    const auto lt = late_time_terms(osc, bath);
    DiffusionPair d = diffusion_late(osc, bath);
    const double g = osc.gamma0();
    d.d_xp -= (g / pi) * lt.re_bracket;
    d.d_pp -= (4.0 * osc.mass() * g * g / pi) * lt.re_bracket;
    return d;
}

DiffusionPair diffusion_extreme_t(const OscillatorSpec& osc, const BathSpec& bath) {
    DiffusionPair d;
    d.t = std::numeric_limits<double>::infinity();
    d.method = Method::ExtremeT;
    d.d_xp = 0.0;
    d.d_pp = 2.0 * osc.mass() * osc.gamma0() * bath.temperature;
    if (bath.temperature < 10.0 * bath.cutoff_uv)
        d.warnings.push_back("extreme-temperature limit used with T below 10 Lambda");
    return d;
}

DiffusionPair diffusion_ccr(const OscillatorSpec& osc, const BathSpec& bath) {
    DiffusionPair d;
    d.t = std::numeric_limits<double>::infinity();
    d.method = Method::CCR;
    const double w = osc.omega_r();
    const double temp = bath.temperature;
    const double coth = temp == 0.0 ? 1.0 : 1.0 / std::tanh(w / (2.0 * temp));
    d.d_xp = 0.0;
    d.d_pp = osc.gamma0() * osc.mass() * w * coth;
    return d;
}

DiffusionPair diffusion_at(double t, const OscillatorSpec& osc, const BathSpec& bath, Method method,
                           const ExpansionControl& ctrl) {
    if (!(t > 0.0) || !std::isfinite(t)) throw Error(ErrorKind::DomainError, "diffusion_at requires finite t > 0");
    require_damping(osc);
    switch (method) {
        case Method::LateTime: {
            auto d = diffusion_late(osc, bath);
            d.t = t;
            return d;
        }
        case Method::ExtremeT: {
            auto d = diffusion_extreme_t(osc, bath);
            d.t = t;
            return d;
        }
        case Method::CCR: {
            auto d = diffusion_ccr(osc, bath);
            d.t = t;
            return d;
        }
        default: break;
    }

    const double g = osc.gamma0();
    const double temp = bath.temperature;
    double fi1, fi3;
    Jet j;
    std::vector<std::string> warnings;
    if (method == Method::Oracle) {
        fi1 = fc_n_oracle(1, 0.0, osc, bath, ctrl);
        fi3 = fc_n_oracle(3, 0.0, osc, bath, ctrl);
        const Vec4 v = oracle_fc_set(t, osc, bath, ctrl);
        j = {v[0], -v[1], -v[2], v[3]};
        if (!bath.pure_ohmic())
            warnings.push_back("oracle integrates the ohmic band; Laurent terms enter by substitution only");
    } else {
        fi1 = fi1_closed(osc, bath);
        fi3 = fi3_closed(osc, bath);
        switch (method) {
            case Method::LowT:
                j = delta_fc1_low_t_jet(t, osc, bath, ctrl);
                if (temp > osc.omega_r()) warnings.push_back("low_t method used at T > omega_r");
                break;
            case Method::HighT:
                j = delta_fc1_high_t_jet(t, osc, bath, ctrl);
                if (2.0 * pi * temp * t < 1.0) warnings.push_back("high_t method used with 2 pi T t < 1");
                break;
            case Method::HighTIntegral:
                j = delta_fc1_high_t_integral_jet(t, osc, bath);
                if (2.0 * pi * temp * t < 1.0) warnings.push_back("high_t_integral method used with 2 pi T t < 1");
                break;
            case Method::GeneralApprox: j = delta_fc1_general_jet(t, osc, bath); break;
            default: throw Error(ErrorKind::DomainError, "unsupported method");
        }
    }
    const auto sh = compute_shifts(bath);
    const double o4 = std::pow(osc.omega_r(), 4);
    const double g_fi1 = g * fi1 - 2.0 * temp / o4 * sh.phi;
    const double g_fi3 = g * fi3 + sh.ell;
    const double g_fc1 = g * j[0] - fc1_shift(t, bath, osc, sh.phi);
    DiffusionPair d = assemble(t, osc, g_fi1, g_fi3, g_fc1, -g * j[1], -g * j[2], g * j[3]);
    d.method = method;
    d.warnings = std::move(warnings);
    return d;
}

}  // namespace qbm
