#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "qbm/coefficients.hpp"
#include "qbm/special.hpp"

using namespace qbm;

TEST_CASE("brute-force FC_N agrees with the adaptive oracle at random points") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> g(0.05, 0.9), temp(0.1, 10.0), t(0.0, 6.0);
    std::uniform_int_distribution<int> n(1, 4);
    for (int i = 0; i < 5; ++i) {
        OscillatorSpec osc(1.0, 1.0, g(rng));
        BathSpec b;
        b.temperature = temp(rng);
        b.cutoff_uv = 200.0;
        const int order = n(rng);
        const double tt = t(rng);
        const auto brute = oracle::brute_fc_n(order, tt, osc, b, 13);
        const double v = fc_n_oracle(order, tt, osc, b);
        CHECK(std::abs(brute.value.real() - v) <= brute.est_error + 1e-10 * std::abs(v) + 1e-12);
    }
}

TEST_CASE("symbolic zero-temperature integral") {
    OscillatorSpec osc(1.0, 1.0, 0.3);
    BathSpec b;
    b.temperature = 0.0;
    const auto brute = oracle::brute_fc_n(1, 0.0, osc, b);
    CHECK(std::abs(brute.value.real() - oracle::fc1_zero_t_symbolic(osc, 1000.0)) <= 1e-8);
}

TEST_CASE("doubling the coth constant doubles the zero-temperature integral") {
    // At T = 0 coth = 1; the integral is linear in that constant.
    OscillatorSpec osc(1.0, 1.0, 0.3);
    BathSpec b;
    b.temperature = 0.0;
    const double one = fc_n_oracle(1, 0.5, osc, b);
    const double two = 2.0 * oracle::brute_fc_n(1, 0.5, osc, b).value.real();
    CHECK(two == doctest::Approx(2.0 * one).epsilon(1e-9));
}

TEST_CASE("special-function series oracles") {
    CHECK(std::abs(oracle::brute_special("harmonic_int", 50.0).value.real() - harmonic_number(50.0)) <=
          1e-12 * harmonic_number(50.0));
    const auto e1 = oracle::brute_special("e1", 1.0);
    CHECK(std::abs(e1.value - exp_integral_e1(cplx(1.0, 0.0))) <= 1e-12 * 0.22);
    const auto h = oracle::brute_special("harmonic", cplx(7.3, 0.0), 4000000);
    const auto hm = oracle::brute_special("harmonic", cplx(6.3, 0.0), 4000000);
    CHECK(std::abs(h.value - hm.value - 1.0 / 7.3) <= 1e-6);
    CHECK_THROWS(oracle::brute_special("unknown", 1.0));
}
