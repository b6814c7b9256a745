#pragma once

// Globally adaptive 15-point Gauss-Kronrod quadrature for scalar and small
// vector integrands.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <string>
#include <vector>

#include "qbm/errors.hpp"

namespace qbm {

struct QuadOptions {
    double rel_tol = 1e-10;
    double abs_tol = 1e-14;
    std::size_t max_panels = 400000;
    // Initial panels are no wider than this (oscillatory integrands).
    double max_width = std::numeric_limits<double>::infinity();
    bool throw_on_failure = true;
};

template <typename V>
struct QuadResult {
    V value;
    double error = 0.0;
    long evaluations = 0;
    bool converged = true;
};

namespace detail {

inline constexpr double gk_nodes[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double gk_weights[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double g_weights[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

inline double qnorm(double v) { return std::abs(v); }
template <typename Derived>
double qnorm(const Eigen::MatrixBase<Derived>& v) { return v.cwiseAbs().maxCoeff(); }

inline double qzero(double) { return 0.0; }
template <typename Derived>
typename Derived::PlainObject qzero(const Eigen::MatrixBase<Derived>& v) {
    return Derived::PlainObject::Zero(v.rows(), v.cols());
}

template <typename V>
struct Panel {
    double a, b;
    V value;
    double error;
    bool operator<(const Panel& o) const { return error < o.error; }
};

template <typename V, typename F>
Panel<V> gk15(F& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    V fc = f(c);
    V kron = fc * gk_weights[7];
    V gauss = fc * g_weights[3];
    for (int j = 0; j < 7; ++j) {
        const double dx = h * gk_nodes[j];
        V s = f(c - dx) + f(c + dx);
        kron += s * gk_weights[j];
        if (j % 2 == 1) gauss += s * g_weights[j / 2];
    }
    V value = kron * h;
    V diff = (kron - gauss) * h;
    return {a, b, value, qnorm(diff)};
}

}  // namespace detail

// Integrates f over [points.front(), points.back()], with the interior points
// used as mandatory panel boundaries. Points must be non-decreasing.
template <typename F>
auto integrate(F f, std::vector<double> points, const QuadOptions& opt = {})
    -> QuadResult<std::decay_t<decltype(f(0.0))>> {
    using V = std::decay_t<decltype(f(0.0))>;
    std::sort(points.begin(), points.end());
    points.erase(std::unique(points.begin(), points.end()), points.end());

    std::priority_queue<detail::Panel<V>> queue;
    long evals = 0;
    V total{};
    bool have_total = false;
    double total_err = 0.0;

    auto push = [&](double a, double b) {
        auto p = detail::gk15<V>(f, a, b);
        evals += 15;
        if (!have_total) {
            total = p.value;
            have_total = true;
        } else {
            total += p.value;
        }
        total_err += p.error;
        queue.push(std::move(p));
    };

    for (std::size_t i = 0; i + 1 < points.size(); ++i) {
        const double a = points[i], b = points[i + 1];
        const double width = b - a;
        std::size_t n = 1;
        if (std::isfinite(opt.max_width) && width > opt.max_width)
            n = static_cast<std::size_t>(std::ceil(width / opt.max_width));
        for (std::size_t j = 0; j < n; ++j) {
            const double lo = a + width * static_cast<double>(j) / static_cast<double>(n);
            const double hi = (j + 1 == n) ? b : a + width * static_cast<double>(j + 1) / static_cast<double>(n);
            push(lo, hi);
        }
    }
    if (!have_total) return {V{}, 0.0, 0, true};

    auto target = [&] { return std::max(opt.abs_tol, opt.rel_tol * detail::qnorm(total)); };
    bool converged = true;
    while (total_err > target()) {
        if (queue.size() >= opt.max_panels) {
            converged = false;
            break;
        }
        auto worst = queue.top();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) {
            converged = false;
            break;
        }
        queue.pop();
        total -= worst.value;
        total_err -= worst.error;
        push(worst.a, mid);
        push(mid, worst.b);
    }

    // Re-sum from the panels so the result does not carry incremental drift.
    V sum = detail::qzero(total);
    double err = 0.0;
    std::vector<detail::Panel<V>> panels;
    panels.reserve(queue.size());
    while (!queue.empty()) {
        panels.push_back(queue.top());
        queue.pop();
    }
    std::sort(panels.begin(), panels.end(),
              [](const auto& x, const auto& y) { return x.a < y.a; });
    for (const auto& p : panels) {
        sum += p.value;
        err += p.error;
    }
    if (!converged && opt.throw_on_failure) {
        throw ToleranceError("adaptive quadrature did not reach tolerance",
                             detail::qnorm(sum), err);
    }
    return {sum, err, evals, converged};
}

template <typename F>
auto integrate(F f, double a, double b, const QuadOptions& opt = {}) {
    return integrate(std::move(f), std::vector<double>{a, b}, opt);
}

}  // namespace qbm
