#include "qbm/parametric.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include <boost/numeric/odeint.hpp>

#include "qbm/errors.hpp"

namespace qbm {

namespace odeint = boost::numeric::odeint;

namespace {

// Advances x from t0 to t1 with an adaptive Dormand-Prince 5(4) pair, landing
// exactly on t1. The observer sees every accepted step.
template <class State, class System, class Observer>
void advance(System&& sys, State& x, double t0, double t1, const OdeTolerance& tol, Observer&& observe) {
    if (t1 <= t0) return;
    auto stepper = odeint::make_controlled(tol.abs, tol.rel, odeint::runge_kutta_dopri5<State>());
    double t = t0;
    double dt = std::min(0.01, t1 - t0);
    while (t < t1) {
        if (t + dt > t1) dt = t1 - t;
        const double before = dt;
        if (stepper.try_step(sys, x, t, dt) == odeint::success) {
            for (double v : x)
                if (!std::isfinite(v)) throw Error(ErrorKind::StiffnessFailure, "non-finite ODE state");
            observe(t, x);
            if (t1 - t < 1e-15 * (1.0 + std::abs(t1))) t = t1;
        } else if (dt < tol.min_step * (1.0 + std::abs(t)) || dt >= before) {
            std::ostringstream os;
            os << "step size fell to " << dt << " at t = " << t;
            throw Error(ErrorKind::StiffnessFailure, os.str());
        }
    }
}

auto no_observer = [](double, const auto&) {};

Mat2 check_invertible(const Mat2& phi, double t) {
    if (!(std::abs(phi.determinant()) >= 1e-300)) {
        std::ostringstream os;
        os << "transition matrix is singular at t = " << t;
        throw Error(ErrorKind::SingularTransition, os.str());
    }
    return phi;
}

using State4 = std::array<double, 4>;

// Phi stored column-major: (phi_xx, phi_px, phi_xp, phi_pp).
struct PhiSystem {
    const TimeDependentDrift* drift;
    void operator()(const State4& y, State4& dy, double t) const {
        const Mat2 ht = drift->matrix(t).transpose();
        for (int c = 0; c < 2; ++c) {
            const Vec2 k(y[2 * c], y[2 * c + 1]);
            const Vec2 d = ht * k;
            dy[2 * c] = d[0];
            dy[2 * c + 1] = d[1];
        }
    }
};

Mat2 to_mat(const State4& y) {
    Mat2 m;
    m << y[0], y[2], y[1], y[3];
    return m;
}

State4 from_mat(const Mat2& m) { return {m(0, 0), m(1, 0), m(0, 1), m(1, 1)}; }

void require_profile(const TimeDependentDrift& d) {
    if (!d.gamma || !d.gamma_dot || !d.omega2)
        throw Error(ErrorKind::InvalidSpec, "drift profile needs gamma, gamma_dot and omega2");
    if (!(d.mass > 0.0)) throw Error(ErrorKind::InvalidSpec, "mass must be positive");
}

}  // namespace

Mat2 TimeDependentDrift::matrix(double t) const {
    Mat2 h;
    h << 0.0, -1.0 / mass, mass * omega2(t), 2.0 * gamma(t);
    return h;
}

TimeDependentDrift TimeDependentDrift::constant(double mass, double omega_r, double gamma0) {
    const double w2 = omega_r * omega_r;
    return {mass, [gamma0](double) { return gamma0; }, [](double) { return 0.0; }, [w2](double) { return w2; },
            [](double) { return 0.0; }};
}

TimeDependentDrift TimeDependentDrift::sinusoidal(double mass, double omega_r, double gamma0, double a_gamma,
                                                  double nu, double a_omega) {
    const double w2 = omega_r * omega_r;
    return {mass,
            [=](double t) { return gamma0 * (1.0 + a_gamma * std::sin(nu * t)); },
            [=](double t) { return gamma0 * a_gamma * nu * std::cos(nu * t); },
            [=](double t) { return w2 * (1.0 + a_omega * std::sin(nu * t)); },
            [=](double t) { return w2 * a_omega * nu * std::cos(nu * t); }};
}

TimeDependentDrift TimeDependentDrift::smoothed_step(double mass, double omega_r, double gamma_start,
                                                     double gamma_end, double t_step, double width) {
    if (!(width > 0.0)) throw Error(ErrorKind::InvalidSpec, "step width must be positive");
    const double w2 = omega_r * omega_r;
    const double mid = 0.5 * (gamma_start + gamma_end);
    const double half = 0.5 * (gamma_end - gamma_start);
    return {mass,
            [=](double t) { return mid + half * std::tanh((t - t_step) / width); },
            [=](double t) {
                const double c = std::cosh((t - t_step) / width);
                return half / (width * c * c);
            },
            [w2](double) { return w2; },
            [](double) { return 0.0; }};
}

TransitionMatrix::TransitionMatrix(TimeDependentDrift drift, double t_max, OdeTolerance tol)
    : drift_(std::move(drift)), t_max_(t_max), tol_(tol) {
    require_profile(drift_);
    if (!(t_max >= 0.0) || !std::isfinite(t_max)) throw Error(ErrorKind::DomainError, "t_max must be finite and >= 0");
    State4 y = from_mat(Mat2::Identity());
    nodes_.push_back(0.0);
    values_.push_back(Mat2::Identity());
    advance(PhiSystem{&drift_}, y, 0.0, t_max, tol_, [this](double t, const State4& s) {
        nodes_.push_back(t);
        values_.push_back(check_invertible(to_mat(s), t));
    });
}

Mat2 TransitionMatrix::at(double t) const {
    if (!(t >= 0.0) || t > t_max_ * (1.0 + 1e-14))
        throw Error(ErrorKind::DomainError, "time outside the integrated interval");
    const auto it = std::upper_bound(nodes_.begin(), nodes_.end(), t);
    const std::size_t i = static_cast<std::size_t>(it - nodes_.begin()) - 1;
    if (nodes_[i] == t) return values_[i];
    // Dense output: re-integrate from the preceding accepted node.
    State4 y = from_mat(values_[i]);
    advance(PhiSystem{&drift_}, y, nodes_[i], t, tol_, no_observer);
    return check_invertible(to_mat(y), t);
}

Mat2 TransitionMatrix::mean_map(double t) const { return at(t).inverse().transpose(); }

TransitionMatrix solve_transition(const TimeDependentDrift& drift, double t_max, const OdeTolerance& tol) {
    return TransitionMatrix(drift, t_max, tol);
}

Mat2 transition_kp_first(const TimeDependentDrift& drift, double t, const OdeTolerance& tol) {
    require_profile(drift);
    const double m = drift.mass;
    // State (j, j', G, k_x) with k_p = e^G j and G = int Gamma.
    auto sys = [&](const State4& y, State4& dy, double s) {
        const double g = drift.gamma(s);
        const double w2 = drift.omega2(s);
        dy[0] = y[1];
        dy[1] = -(w2 - g * g - drift.gamma_dot(s)) * y[0];
        dy[2] = g;
        dy[3] = m * w2 * std::exp(y[2]) * y[0];
    };
    Mat2 phi;
    for (int c = 0; c < 2; ++c) {
        const double kx0 = c == 0 ? 1.0 : 0.0;
        const double kp0 = c == 0 ? 0.0 : 1.0;
        const double g0 = drift.gamma(0.0);
        const double kp_dot0 = -kx0 / m + 2.0 * g0 * kp0;
        State4 y{kp0, kp_dot0 - g0 * kp0, 0.0, kx0};
        advance(sys, y, 0.0, t, tol, no_observer);
        phi(0, c) = y[3];
        phi(1, c) = std::exp(y[2]) * y[0];
    }
    return check_invertible(phi, t);
}

Mat2 transition_kx_first(const TimeDependentDrift& drift, double t, const OdeTolerance& tol) {
    require_profile(drift);
    if (!drift.omega2_dot) throw Error(ErrorKind::InvalidSpec, "k_x-first route needs omega2_dot");
    const double m = drift.mass;
    // State (k_x, k_x', G, I) with I = int e^{-2G} k_x and
    // k_p = e^{2G} (k_p0 - I/M).
    auto sys = [&](const State4& y, State4& dy, double s) {
        const double w2 = drift.omega2(s);
        if (w2 == 0.0) throw Error(ErrorKind::DomainError, "k_x-first route requires Omega^2(t) != 0");
        const double g = drift.gamma(s);
        dy[0] = y[1];
        dy[1] = (drift.omega2_dot(s) / w2 + 2.0 * g) * y[1] - w2 * y[0];
        dy[2] = g;
        dy[3] = std::exp(-2.0 * y[2]) * y[0];
    };
    Mat2 phi;
    for (int c = 0; c < 2; ++c) {
        const double kx0 = c == 0 ? 1.0 : 0.0;
        const double kp0 = c == 0 ? 0.0 : 1.0;
        State4 y{kx0, m * drift.omega2(0.0) * kp0, 0.0, 0.0};
        advance(sys, y, 0.0, t, tol, no_observer);
        phi(0, c) = y[0];
        phi(1, c) = std::exp(2.0 * y[2]) * (kp0 - y[3] / m);
    }
    return check_invertible(phi, t);
}

FourierWignerState solve_general(const FourierWignerState& state0, double t, const TimeDependentDrift& drift,
                                 const DiffusionFunction& diffusion, const OdeTolerance& tol, double s_start) {
    require_profile(drift);
    state0.validate();
    if (!(t >= 0.0)) throw Error(ErrorKind::DomainError, "solve_general requires t >= 0");
    if (t == 0.0) return state0;

    // Phi (4 entries) and J = 2 int Phi^T D Phi ds (xx, xp, pp).
    using State7 = std::array<double, 7>;
    const PhiSystem phi_sys{&drift};
    auto sys = [&](const State7& y, State7& dy, double s) {
        State4 p{y[0], y[1], y[2], y[3]}, dp;
        phi_sys(p, dp, s);
        std::copy(dp.begin(), dp.end(), dy.begin());
        const Mat2 phi = to_mat(p);
        const Mat2 j = 2.0 * phi.transpose() * diffusion(s) * phi;
        dy[4] = j(0, 0);
        dy[5] = 0.5 * (j(0, 1) + j(1, 0));
        dy[6] = j(1, 1);
    };

    State4 p = from_mat(Mat2::Identity());
    const double s0 = std::clamp(s_start, 0.0, t);
    advance(phi_sys, p, 0.0, s0, tol, no_observer);
    State7 y{p[0], p[1], p[2], p[3], 0.0, 0.0, 0.0};
    advance(sys, y, s0, t, tol, no_observer);

    const Mat2 phi = check_invertible(to_mat(State4{y[0], y[1], y[2], y[3]}), t);
    Mat2 j;
    j << y[4], y[5], y[5], y[6];
    const Mat2 map = phi.inverse().transpose();

    FourierWignerState out;
    out.mean = map * state0.mean;
    out.covariance = map * (state0.covariance + j) * map.transpose();
    out.covariance = 0.5 * (out.covariance + out.covariance.transpose());
    for (const auto& c : state0.higher) out.higher.push_back(c.transformed(map));
    return out;
}

}  // namespace qbm
