#include "qbm/wigner.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "qbm/errors.hpp"
#include "qbm/quadrature.hpp"

namespace qbm {

// ---------------------------------------------------------------------------
// Cumulant tensors

namespace {

int flat_index(std::initializer_list<int> idx) {
    int flat = 0;
    for (int i : idx) flat = 2 * flat + i;
    return flat;
}

double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

}  // namespace

CumulantTensor CumulantTensor::zero(int order) {
    if (order < 3 || order > max_cumulant_order)
        throw Error(ErrorKind::DomainError, "cumulant order must lie in 3..4");
    return {order, std::vector<double>(std::size_t{1} << order, 0.0)};
}

double& CumulantTensor::at(std::initializer_list<int> idx) { return data.at(flat_index(idx)); }

double CumulantTensor::at(std::initializer_list<int> idx) const { return data.at(flat_index(idx)); }

double CumulantTensor::contract(const Vec2& k) const {
    double sum = 0.0;
    for (std::size_t flat = 0; flat < data.size(); ++flat) {
        double w = data[flat];
        for (int j = 0; j < order; ++j) w *= k[(flat >> j) & 1u];
        sum += w;
    }
    return sum;
}

CumulantTensor CumulantTensor::transformed(const Mat2& a) const {
    // Apply A on one index at a time.
    std::vector<double> cur = data;
    for (int pos = 0; pos < order; ++pos) {
        std::vector<double> next(cur.size(), 0.0);
        const std::size_t bit = std::size_t{1} << pos;
        for (std::size_t flat = 0; flat < cur.size(); ++flat) {
            const int i = (flat & bit) ? 1 : 0;
            const std::size_t base = flat & ~bit;
            next[flat] = a(i, 0) * cur[base] + a(i, 1) * cur[base | bit];
        }
        cur.swap(next);
    }
    return {order, cur};
}

double CumulantTensor::norm() const {
    double s = 0.0;
    for (double v : data) s += v * v;
    return std::sqrt(s);
}

bool FourierWignerState::gaussian() const {
    for (const auto& c : higher)
        for (double v : c.data)
            if (v != 0.0) return false;
    return true;
}

void FourierWignerState::validate() const {
    if (std::abs(covariance(0, 1) - covariance(1, 0)) > 1e-12 * covariance.cwiseAbs().maxCoeff())
        throw Error(ErrorKind::NonPhysicalState, "covariance must be symmetric");
    int expected = 3;
    for (const auto& c : higher) {
        if (c.order != expected || c.data.size() != (std::size_t{1} << c.order))
            throw Error(ErrorKind::DomainError, "higher cumulants must be listed by increasing order from 3");
        ++expected;
    }
    if (expected - 1 > max_cumulant_order) throw Error(ErrorKind::DomainError, "cumulant order above 4 is not stored");
}

// ---------------------------------------------------------------------------
// Drift, diffusion, propagator

Mat2 drift_matrix(const OscillatorSpec& osc) {
    const double m = osc.mass();
    const double w = osc.omega_r();
    Mat2 h;
    h << 0.0, -1.0 / m, m * w * w, 2.0 * osc.gamma0();
    return h;
}

Mat2 diffusion_matrix(const DiffusionPair& d) {
    Mat2 m;
    m << 0.0, -d.d_xp, -d.d_xp, d.d_pp;
    return m;
}

Mat2 propagator(double t, const OscillatorSpec& osc) {
    if (!(t >= 0.0)) throw Error(ErrorKind::DomainError, "propagator requires t >= 0");
    const double g = osc.gamma0();
    const double m = osc.mass();
    const double w2 = osc.omega_r() * osc.omega_r();
    double ec, es;  // e^{-gamma t} cos(Omega~ t), e^{-gamma t} sin(Omega~ t)/Omega~
    if (osc.underdamped()) {
        const double e = std::exp(-g * t);
        const double ot = osc.omega_tilde();
        ec = e * std::cos(ot * t);
        es = e * std::sin(ot * t) / ot;
    } else {
        const double gt = osc.gamma_tilde();
        const double up = std::exp((gt - g) * t);
        const double dn = std::exp(-(gt + g) * t);
        ec = 0.5 * (up + dn);
        es = 0.5 * (up - dn) / gt;
    }
    Mat2 p;
    p << ec + g * es, es / m, -m * w2 * es, ec - g * es;
    return p;
}

Mat2 stationary_covariance(const OscillatorSpec& osc, const Mat2& diffusion) {
    const Mat2 h = drift_matrix(osc);
    Eigen::Matrix4d op = Eigen::Matrix4d::Zero();
    const Mat2 id = Mat2::Identity();
    // Column-major vec: vec(H S) = (I (x) H) vec S, vec(S H^T) = (H (x) I) vec S.
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k)
                for (int l = 0; l < 2; ++l) op(2 * i + k, 2 * j + l) = id(i, j) * h(k, l) + h(i, j) * id(k, l);
    Eigen::Vector4d rhs;
    rhs << 2.0 * diffusion(0, 0), 2.0 * diffusion(1, 0), 2.0 * diffusion(0, 1), 2.0 * diffusion(1, 1);
    const Eigen::Vector4d v = op.fullPivLu().solve(rhs);
    Mat2 s;
    s << v[0], v[2], v[1], v[3];
    return 0.5 * (s + s.transpose());
}

// ---------------------------------------------------------------------------
// Thermal covariance

namespace {

// Piecewise Chebyshev-Lobatto interpolant of a 2-vector function, barycentric evaluation.
class ChebyshevTable {
public:
    template <typename F>
    ChebyshevTable(F&& f, double lo, double hi, double tol, double floor) : floor_(floor) {
        std::vector<double> cuts;
        double a = lo;
        const double geometric_end = std::min(hi, 1.0);
        while (a < geometric_end) {
            cuts.push_back(a);
            a *= 2.0;
        }
        for (; a < hi; a += 1.0) cuts.push_back(a);
        cuts.push_back(hi);
        cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) fit(f, cuts[i], cuts[i + 1], tol, 0);
    }

    Vec2 operator()(double s) const {
        auto it = std::upper_bound(starts_.begin(), starts_.end(), s);
        std::size_t idx = it == starts_.begin() ? 0 : static_cast<std::size_t>(it - starts_.begin()) - 1;
        idx = std::min(idx, panels_.size() - 1);
        return panels_[idx].eval(s);
    }

private:
    static constexpr int n = 24;

    struct Panel {
        double a, b;
        std::array<Vec2, n + 1> values;
        Vec2 eval(double s) const {
            const double x = (2.0 * s - a - b) / (b - a);
            Vec2 num = Vec2::Zero();
            double den = 0.0;
            for (int j = 0; j <= n; ++j) {
                const double node = std::cos(pi * j / n);
                const double diff = x - node;
                if (diff == 0.0) return values[j];
                double w = (j % 2 == 0) ? 1.0 : -1.0;
                if (j == 0 || j == n) w *= 0.5;
                num += (w / diff) * values[j];
                den += w / diff;
            }
            return num / den;
        }
    };

    template <typename F>
    void fit(F& f, double a, double b, double tol, int depth) {
        Panel p{a, b, {}};
        for (int j = 0; j <= n; ++j) p.values[j] = f(0.5 * (a + b) + 0.5 * (b - a) * std::cos(pi * j / n));
        // Trailing Chebyshev coefficients measure the resolution of the panel.
        double scale = 0.0, tail = 0.0;
        for (int k = 0; k <= n; ++k) {
            Vec2 c = Vec2::Zero();
            for (int j = 0; j <= n; ++j) {
                double w = (j == 0 || j == n) ? 0.5 : 1.0;
                c += w * std::cos(pi * k * j / n) * p.values[j];
            }
            c *= ((k == 0 || k == n) ? 1.0 : 2.0) / n;
            const double mag = c.cwiseAbs().maxCoeff();
            scale = std::max(scale, mag);
            if (k >= n - 2) tail = std::max(tail, mag);
        }
        if (tail > tol * std::max(scale, floor_) && depth < 12) {
            const double mid = 0.5 * (a + b);
            fit(f, a, mid, tol, depth + 1);
            fit(f, mid, b, tol, depth + 1);
            return;
        }
        starts_.push_back(a);
        panels_.push_back(p);
    }

    double floor_;
    std::vector<double> starts_;
    std::vector<Panel> panels_;
};

}  // namespace

struct ThermalCovariance::Source {
    OscillatorSpec osc;
    BathSpec bath;
    Method method;
    ExpansionControl ctrl;
    DiffusionPair late;
    std::unique_ptr<ChebyshevTable> table;

    // D(s) - D_late as (d_xp, d_pp).
    Vec2 direct(double s) const {
        const auto d = diffusion_at(s, osc, bath, method, ctrl);
        return Vec2(d.d_xp - late.d_xp, d.d_pp - late.d_pp);
    }
    Vec2 operator()(double s) const { return table ? (*table)(s) : direct(s); }
};

ThermalCovariance::ThermalCovariance(const OscillatorSpec& osc, const Mat2& d_late)
    : osc_(osc), d_late_(d_late), sigma_inf_(stationary_covariance(osc, d_late)) {}

ThermalCovariance::ThermalCovariance(const OscillatorSpec& osc, const BathSpec& bath, Method method,
                                     ExpansionControl ctrl, double t_max)
    : osc_(osc) {
    if (!(osc.gamma0() > 0.0)) throw Error(ErrorKind::DomainError, "thermal covariance requires gamma0 > 0");
    const DiffusionPair late = diffusion_late(osc, bath);
    d_late_ = diffusion_matrix(late);
    sigma_inf_ = stationary_covariance(osc, d_late_);
    if (method == Method::LateTime || method == Method::ExtremeT || method == Method::CCR) {
        const DiffusionPair d = diffusion_at(1.0, osc, bath, method, ctrl);
        d_late_ = diffusion_matrix(d);
        sigma_inf_ = stationary_covariance(osc, d_late_);
        return;
    }
    s0_ = std::exp(-euler_gamma) / bath.cutoff_uv;
    auto src = std::make_shared<Source>(Source{osc, bath, method, ctrl, late, nullptr});
    if (method == Method::Oracle || method == Method::LowT) {
        if (!(t_max > s0_))
            throw Error(ErrorKind::DomainError, "tabulated diffusion routes need t_max above the start time");
        const double floor = std::max(std::abs(late.d_xp), std::abs(late.d_pp));
        src->table =
            std::make_unique<ChebyshevTable>([&](double s) { return src->direct(s); }, s0_, t_max, 1e-8, floor);
    }
    source_ = std::move(src);
}

ThermalCovariance ThermalCovariance::constant(const OscillatorSpec& osc, const DiffusionPair& d) {
    return ThermalCovariance(osc, diffusion_matrix(d));
}

Mat2 ThermalCovariance::at(double t) const {
    if (!(t >= 0.0)) throw Error(ErrorKind::DomainError, "sigma_T requires t >= 0");
    if (t <= s0_) return Mat2::Zero();
    const Mat2 p = propagator(t - s0_, osc_);
    Mat2 sigma = sigma_inf_ - p * sigma_inf_ * p.transpose();
    if (!source_) return sigma;

    const Source& src = *source_;
    auto f = [&](double s) {
        const Vec2 dd = src(s);
        Mat2 d;
        d << 0.0, -dd[0], -dd[0], dd[1];
        const Mat2 q = propagator(t - s, osc_);
        const Mat2 m = 2.0 * q * d * q.transpose();
        return Eigen::Vector3d(m(0, 0), m(0, 1), m(1, 1));
    };
    std::vector<double> pts{s0_, t};
    for (double s = 10.0 * s0_; s < std::min(t, 1.0); s *= 10.0) pts.push_back(s);
    QuadOptions opt;
    opt.rel_tol = 1e-9;
    opt.abs_tol = 1e-13 * std::max(1.0, sigma_inf_.cwiseAbs().maxCoeff());
    opt.max_width = std::max(0.5, 1.0 / osc_.omega_r());
    const Eigen::Vector3d v = integrate(f, pts, opt).value;
    sigma(0, 0) += v[0];
    sigma(0, 1) += v[1];
    sigma(1, 0) += v[1];
    sigma(1, 1) += v[2];
    return sigma;
}

Mat2 equilibrium_covariance(const OscillatorSpec& osc, const BathSpec& bath) {
    const auto sh = compute_shifts(bath);
    const double g = osc.gamma0();
    const double m = osc.mass();
    const double o4 = std::pow(osc.omega_r(), 4);
    const double g_fi1 = g * fi1_closed(osc, bath) - 2.0 * bath.temperature / o4 * sh.phi;
    const double g_fi3 = g * fi3_closed(osc, bath) + sh.ell;
    Mat2 s = Mat2::Zero();
    s(0, 0) = (2.0 / pi) * g_fi1 / m;
    s(1, 1) = (2.0 / pi) * g_fi3 * m;
    return s;
}

Mat2 late_covariance(const OscillatorSpec& osc, const DiffusionPair& late) {
    const double g = osc.gamma0();
    const double m = osc.mass();
    const double w = osc.omega_r();
    Mat2 s = Mat2::Zero();
    s(1, 1) = late.d_pp / (2.0 * g);
    s(0, 0) = (s(1, 1) - 2.0 * m * late.d_xp) / (m * m * w * w);
    return s;
}

// ---------------------------------------------------------------------------
// Evolution

FourierWignerState evolve_cumulants(const FourierWignerState& state0, double t, const OscillatorSpec& osc,
                                    const ThermalCovariance& sigma) {
    state0.validate();
    if (t == 0.0) return state0;
    const Mat2 p = propagator(t, osc);
    FourierWignerState out;
    out.mean = p * state0.mean;
    out.covariance = p * state0.covariance * p.transpose() + sigma.at(t);
    out.covariance = 0.5 * (out.covariance + out.covariance.transpose());
    for (const auto& c : state0.higher) out.higher.push_back(c.transformed(p));
    return out;
}

std::complex<double> characteristic_function(const FourierWignerState& state, const Vec2& k) {
    using namespace std::complex_literals;
    std::complex<double> expo = 1i * k.dot(state.mean) - 0.5 * k.dot(state.covariance * k);
    for (const auto& c : state.higher) {
        const std::complex<double> in = std::pow(1i, c.order);
        expo += in / factorial(c.order) * c.contract(k);
    }
    return std::exp(expo);
}

std::complex<double> characteristic_function(const FourierWignerState& state0, double t, const Vec2& k,
                                             const OscillatorSpec& osc, const ThermalCovariance& sigma) {
    const Mat2 p = propagator(t, osc);
    const Mat2 st = sigma.at(t);
    // Death factor W0(e^{-tH^T} k) times birth factor.
    return characteristic_function(state0, p.transpose() * k) * std::exp(-0.5 * k.dot(st * k));
}

double linear_entropy(const FourierWignerState& state) {
    const double det = state.covariance.determinant();
    if (!(det > 0.0)) throw Error(ErrorKind::NonPhysicalState, "covariance determinant must be positive");
    return 1.0 - 0.5 / std::sqrt(det);
}

double linear_entropy(const FourierWignerState& state0, double t, const OscillatorSpec& osc,
                      const ThermalCovariance& sigma) {
    FourierWignerState g = state0;
    g.higher.clear();
    return linear_entropy(evolve_cumulants(g, t, osc, sigma));
}

double linear_entropy_quadrature(const FourierWignerState& state, double rel_tol) {
    const double det = state.covariance.determinant();
    if (!(det > 0.0)) throw Error(ErrorKind::NonPhysicalState, "covariance determinant must be positive");
    const Eigen::LLT<Mat2> llt(state.covariance);
    const Mat2 l = llt.matrixL();
    const Mat2 map = l.transpose().inverse();  // k = L^{-T} u
    constexpr double span = 9.0;
    QuadOptions opt;
    opt.rel_tol = rel_tol;
    opt.abs_tol = 1e-14;
    auto outer = [&](double u1) {
        auto inner = [&](double u2) { return std::norm(characteristic_function(state, map * Vec2(u1, u2))); };
        return integrate(inner, std::vector<double>{-span, 0.0, span}, opt).value;
    };
    const double integral = integrate(outer, std::vector<double>{-span, 0.0, span}, opt).value;
    const double purity = integral / std::sqrt(det) / (2.0 * pi);
    return 1.0 - purity;
}

FourierWignerState apply_kick(const FourierWignerState& state0, const KickTransform& kick) {
    Mat2 l;
    l << 1.0, 0.0, kick.shear, 1.0;
    FourierWignerState out;
    out.mean = l * state0.mean;
    out.covariance = l * state0.covariance * l.transpose();
    for (const auto& c : state0.higher) out.higher.push_back(c.transformed(l));
    return out;
}

}  // namespace qbm
