#include <doctest.h>

#include <cmath>

#include "qtank/control.hpp"
#include "qtank/plant.hpp"
#include "qtank/sim_engine.hpp"

using namespace qtank;

TEST_CASE("pi_output") {
    // pure proportional at t = 0
    CHECK(control::pi_output({3.0, 30.0}, 1.0, 0.0) == doctest::Approx(3.0));
    // pure integral
    CHECK(control::pi_output({3.0, 30.0}, 0.0, 30.0) == doctest::Approx(3.0));
    // the non-minimum-phase loop-2 gain is negative
    CHECK(control::pi_output({-0.12, 220.0}, 1.0, 0.0) == doctest::Approx(-0.12));
}

TEST_CASE("pi_rhs is the plain error integrator") {
    CHECK(control::pi_rhs(0.0) == 0.0);
    CHECK(control::pi_rhs(-2.5) == -2.5);

    // constant error integrates exactly under RK4
    std::vector<double> s{0.0};
    for (int i = 0; i < 100; ++i) {
        s = sim::rk4_step(s, 0.1 * i, 0.1,
                          [](const std::vector<double>&, double, std::vector<double>& d) {
                              d[0] = control::pi_rhs(1.0);
                          });
    }
    CHECK(s[0] == doctest::Approx(10.0).epsilon(1e-12));
}

TEST_CASE("integral of a sine matches the analytic antiderivative") {
    std::vector<double> s{0.0};
    const double dt = 0.01;
    for (int i = 0; i < 100; ++i) {
        s = sim::rk4_step(s, dt * i, dt,
                          [](const std::vector<double>&, double t, std::vector<double>& d) {
                              d[0] = control::pi_rhs(std::sin(t));
                          });
    }
    CHECK(s[0] == doctest::Approx(1.0 - std::cos(1.0)).epsilon(1e-9));
}

TEST_CASE("schedule lookup is left-closed piecewise constant") {
    control::SetpointSchedule s;
    s.entries = {{0.0, 0.0, 0.0}, {100.0, 1.0, 0.0}};
    CHECK(control::schedule_lookup(s, 99.9)[0] == 0.0);
    CHECK(control::schedule_lookup(s, 100.0)[0] == 1.0);
    CHECK(control::schedule_lookup(s, 500.0)[0] == 1.0);
    CHECK(control::schedule_lookup(s, 500.0)[1] == 0.0);
}

TEST_CASE("empty schedule raises") {
    CHECK_THROWS_AS(control::schedule_lookup(control::SetpointSchedule{}, 0.0),
                    control::EmptySchedule);
}

TEST_CASE("schedule validation") {
    control::SetpointSchedule s;
    s.entries = {{1.0, 0.0, 0.0}};
    CHECK_THROWS_AS(control::validate(s), std::invalid_argument);
    s.entries = {{0.0, 0.0, 0.0}, {5.0, 1.0, 0.0}, {5.0, 2.0, 0.0}};
    CHECK_THROWS_AS(control::validate(s), std::invalid_argument);
    s.entries = {{0.0, 0.0, 0.0}, {5.0, 1.0, 0.0}};
    CHECK_NOTHROW(control::validate(s));
}

TEST_CASE("closed loop with the minimum-phase gains is Hurwitz") {
    // 6x6 matrix: 4 plant states + 2 integrators, assembled from the
    // linearized model and u = K (r - C x) + K Ti^{-1} z, zdot = r - C x
    const auto geom = plant::default_geometry();
    const auto op = plant::operating_point(plant::Phase::Minus);
    const auto model = plant::linearize(geom, op);
    const control::PiGains g1{3.0, 30.0};
    const control::PiGains g2{2.7, 40.0};

    smallmat::Matrix cl(6, 6);
    const smallmat::Matrix k{{g1.K, 0.0}, {0.0, g2.K}};
    const smallmat::Matrix k_over_ti{{g1.K / g1.Ti, 0.0}, {0.0, g2.K / g2.Ti}};
    cl.set_block(0, 0, model.a_mat - model.b_mat * k * model.c_mat);
    cl.set_block(0, 4, model.b_mat * k_over_ti);
    cl.set_block(4, 0, -model.c_mat);

    CHECK(smallmat::is_hurwitz(smallmat::char_poly(cl)));
}

TEST_CASE("zero error history produces zero control deviation") {
    CHECK(control::pi_output({3.0, 30.0}, 0.0, 0.0) == 0.0);
    CHECK(control::pi_output({-0.12, 220.0}, 0.0, 0.0) == 0.0);
}
