#include "oracles.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace qbm::oracle {

namespace {

constexpr long double kEuler = 0.577215664901532860606512090082402431L;

double integrand(int n, double w, double t, const OscillatorSpec& osc, double temp, bool sine) {
    const double o2 = osc.omega_r() * osc.omega_r();
    const double g = osc.gamma0();
    const double den = (w * w - o2) * (w * w - o2) + 4.0 * g * g * w * w;
    double wcoth;
    if (temp == 0.0) {
        wcoth = w;
    } else {
        const double x = w / (2.0 * temp);
        wcoth = x < 1e-6 ? 2.0 * temp * (1.0 + x * x / 3.0) : w / std::tanh(x);
    }
    return std::pow(w, n - 1) * wcoth * (sine ? std::sin(w * t) : std::cos(w * t)) / den;
}

// Composite midpoint on [a, b] with m panels.
long double midpoint(int n, double a, double b, long m, double t, const OscillatorSpec& osc, double temp, bool sine) {
    const long double h = (static_cast<long double>(b) - a) / m;
    long double s = 0.0L;
    for (long i = 0; i < m; ++i) s += integrand(n, static_cast<double>(a + (i + 0.5L) * h), t, osc, temp, sine);
    return s * h;
}

}  // namespace

OracleReport brute_fc_n(int n, double t, const OscillatorSpec& osc, const BathSpec& bath, int levels, bool sine) {
    if (levels < 3) throw std::invalid_argument("brute_fc_n needs levels >= 3");
    const double w = osc.omega_r();
    const double lam = bath.cutoff_uv;
    // Fixed sub-bands so the resonance is resolved without adaptivity.
    std::vector<double> edges{0.0, 0.5 * w, 2.0 * w, 10.0 * w, 100.0 * w, lam};
    std::vector<double> cut;
    for (double e : edges)
        if (e <= lam && (cut.empty() || e > cut.back())) cut.push_back(e);
    if (cut.back() < lam) cut.push_back(lam);

    OracleReport rep;
    long double total = 0.0L, err = 0.0L;
    for (std::size_t k = 0; k + 1 < cut.size(); ++k) {
        const double a = cut[k], b = cut[k + 1];
        // Panel count scales with the oscillation count across the band.
        long m = 16 + static_cast<long>((b - a) * t / 4.0);
        std::vector<long double> row;
        long double prev = 0.0L, cur = 0.0L;
        for (int lv = 0; lv < levels; ++lv) {
            row.push_back(midpoint(n, a, b, m, t, osc, bath.temperature, sine));
            rep.evaluations += m;
            m *= 2;
        }
        // Richardson table for an h^2, h^4, ... error expansion.
        std::vector<long double> r = row;
        for (int j = 1; j < 4 && j < levels; ++j) {
            const long double f = std::pow(4.0L, j);
            for (std::size_t i = r.size() - 1; i >= static_cast<std::size_t>(j); --i)
                r[i] = (f * r[i] - r[i - 1]) / (f - 1.0L);
        }
        cur = r.back();
        prev = r[r.size() - 2];
        total += cur;
        err += std::fabs(cur - prev);
    }
    rep.value = static_cast<double>(total);
    rep.est_error = static_cast<double>(err);
    return rep;
}

OracleReport brute_special(const std::string& fn_id, std::complex<double> z, long terms) {
    using cl = std::complex<long double>;
    const cl zz(z.real(), z.imag());
    OracleReport rep;
    if (fn_id == "harmonic_int") {
        const long n = std::lround(z.real());
        if (n < 0 || std::abs(z.real() - n) > 0 || z.imag() != 0.0)
            throw std::domain_error("harmonic_int needs a non-negative integer");
        long double s = 0.0L, c = 0.0L;
        for (long k = n; k >= 1; --k) {
            const long double y = 1.0L / k - c;
            const long double tt = s + y;
            c = (tt - s) - y;
            s = tt;
        }
        rep.value = static_cast<double>(s);
        rep.evaluations = n;
        rep.est_error = static_cast<double>(n * 1e-19L);
        return rep;
    }
    if (fn_id == "harmonic") {
        if (z.real() <= -1.0 && std::abs(z.imag()) < 1e-300) throw std::domain_error("harmonic pole region");
        cl s = 0.0L;
        for (long k = terms; k >= 1; --k) s += 1.0L / static_cast<long double>(k) - 1.0L / (static_cast<long double>(k) + zz);
        rep.value = std::complex<double>(static_cast<double>(s.real()), static_cast<double>(s.imag()));
        // Tail ~ z / terms.
        rep.est_error = std::abs(z) / static_cast<double>(terms);
        rep.evaluations = terms;
        return rep;
    }
    if (fn_id == "e1" || fn_id == "ei") {
        if (std::abs(z) == 0.0) throw std::domain_error("series oracle undefined at zero");
        const cl x = fn_id == "e1" ? -zz : zz;
        // sum_{k>=1} x^k / (k k!)
        cl term = 1.0L, sum = 0.0L;
        long k = 1;
        for (; k <= terms; ++k) {
            term *= x / static_cast<long double>(k);
            const cl add = term / static_cast<long double>(k);
            sum += add;
            if (std::abs(add) < 1e-22L * std::abs(sum)) break;
        }
        cl value;
        if (fn_id == "e1") {
            value = -kEuler - std::log(zz) - sum;
        } else {
            value = kEuler + std::log(zz) + sum;
        }
        rep.value = std::complex<double>(static_cast<double>(value.real()), static_cast<double>(value.imag()));
        rep.est_error = static_cast<double>(std::abs(term) * 2.0L);
        rep.evaluations = k;
        return rep;
    }
    throw std::invalid_argument("unknown oracle function " + fn_id);
}

double fc1_zero_t_symbolic(const OscillatorSpec& osc, double cutoff) {
    if (!osc.underdamped()) throw std::domain_error("symbolic oracle covers the underdamped case");
    const long double o2 = static_cast<long double>(osc.omega_r()) * osc.omega_r();
    const long double g = osc.gamma0();
    // u = omega^2: (1/2) int du / ((u - a)^2 + b^2), a = Omega^2 - 2 gamma^2, b = 2 gamma Omega~.
    const long double a = o2 - 2.0L * g * g;
    const long double b = 2.0L * g * std::sqrt(o2 - g * g);
    const long double u = static_cast<long double>(cutoff) * cutoff;
    return static_cast<double>(0.5L / b * (std::atan((u - a) / b) - std::atan(-a / b)));
}

double forced_response_magnitude(double omega_d, const OscillatorSpec& osc) {
    const double o2 = osc.omega_r() * osc.omega_r();
    const double g = osc.gamma0();
    const double d = o2 - omega_d * omega_d;
    return 1.0 / (osc.mass() * std::sqrt(d * d + 4.0 * g * g * omega_d * omega_d));
}

}  // namespace qbm::oracle
