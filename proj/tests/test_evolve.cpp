#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "klm/evolve.hpp"
#include "klm/model.hpp"
#include "test_support.hpp"

using namespace klm;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const SpaceLayout kJc{qutrit("scq"), mode("mode", 4)};

SchemeOneParams toy() {
    SchemeOneParams p;
    p.omega_s = 5.0;
    p.omega_c = 4.0;
    p.omega_m = 4.5;
    p.omega_d = 4.5;
    p.Omega = 0.3;
    p.g_s = 0.2;
    p.g_m = 0.05;
    p.N = 16;
    return p;
}

double distance(const StateVector& a, const StateVector& b) { return (a.amplitudes() - b.amplitudes()).norm(); }

} // namespace

TEST_CASE("constant propagation") {
    testing::Gen gen(1);
    const auto psi = gen.state(kJc);
    const DenseOperator h(kJc, gen.hermitian(15), true);

    CHECK(propagate_const(h, 0.0, psi).amplitudes() == psi.amplitudes());
    CHECK_THROWS_AS(propagator_const(h, -1.0), std::invalid_argument);
    CHECK(propagator_const(h, 2.3).is_unitary(1e-12));

    const double w = 1.7, t = 0.9;
    const auto sz = embed(0.5 * w * local::sigma_z(), "scq", kJc, true);
    const auto out = propagate_const(sz, t, StateVector::basis(kJc, {2, 1}));
    CHECK(std::abs(out[kJc.encode({2, 1})] - std::exp(Complex(0.0, -0.5 * w * t))) < 1e-14);
    const auto low = propagate_const(sz, t, StateVector::basis(kJc, {1, 0}));
    CHECK(std::abs(low[kJc.encode({1, 0})] - std::exp(Complex(0.0, 0.5 * w * t))) < 1e-14);

    // the same generator split into two halves
    const auto whole = propagator_const(h, 1.0);
    const auto halves = propagator_const(h, 0.5).then(propagator_const(h, 0.5));
    CHECK(max_abs_diff(whole.matrix(), halves.matrix()) < 1e-12);
    CHECK(halves.duration() == 1.0);
}

TEST_CASE("Hermitian and Pade paths agree") {
    testing::Gen gen(2);
    for (int trial = 0; trial < 10; ++trial) {
        const CMatrix h = gen.hermitian(6);
        const double t = gen.uniform(0.1, 3.0);
        CHECK(testing::max_abs(detail::expm_minus_i(h, true, t) - detail::expm_minus_i(h, false, t)) < 1e-11);
    }
}

TEST_CASE("non-finite generators are reported") {
    CMatrix h = CMatrix::Zero(3, 3);
    h(0, 1) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(detail::expm_minus_i(h, false, 1.0), NumericalError);
}

TEST_CASE("jc_rotation closed form") {
    SECTION("n = 0 quarter period swaps e,0 into g,1") {
        const auto out = jc_rotation(1.0, units::pi / 2.0, kJc).apply(StateVector::basis(kJc, {2, 0}));
        CHECK(std::abs(out[kJc.encode({1, 1})] - Complex(0.0, -1.0)) < 1e-15);
        CHECK_THAT(out.norm(), WithinAbs(1.0, 1e-15));
    }
    SECTION("n = 1 uses the sqrt2-enhanced rate") {
        const auto out = jc_rotation(1.0, units::pi / 2.0, kJc).apply(StateVector::basis(kJc, {2, 1}));
        CHECK_THAT(out[kJc.encode({2, 1})].real(), WithinAbs(-0.605699867078813, 1e-12));
        CHECK_THAT(out[kJc.encode({1, 2})].imag(), WithinAbs(-0.795693201567481, 1e-12));
    }
    SECTION("spectators") {
        const auto u = jc_rotation(0.7, 1.3, kJc);
        for (const auto& d : std::vector<std::vector<std::size_t>>{{0, 0}, {0, 3}, {1, 0}, {2, 4}}) {
            const auto in = StateVector::basis_index(kJc, kJc.encode(std::span<const std::size_t>(d)));
            CHECK(distance(u.apply(in), in) == 0.0);
        }
    }
    SECTION("matches exp(-i H_JC t) on the truncated space") {
        testing::Gen gen(3);
        for (int trial = 0; trial < 20; ++trial) {
            const double g = gen.uniform(0.1, 3.0), t = gen.uniform(0.0, 4.0);
            const auto exact = propagator_const(jc_interaction(g, kJc), t);
            CHECK(max_abs_diff(exact.matrix(), jc_rotation(g, t, kJc).matrix()) < 1e-10);
        }
    }
    SECTION("composition adds times") {
        testing::Gen gen(4);
        for (int trial = 0; trial < 20; ++trial) {
            const double g = gen.uniform(0.1, 3.0), t1 = gen.uniform(0.0, 2.0), t2 = gen.uniform(0.0, 2.0);
            const auto combined = jc_rotation(g, t1, kJc).then(jc_rotation(g, t2, kJc));
            CHECK(max_abs_diff(combined.matrix(), jc_rotation(g, t1 + t2, kJc).matrix()) < 1e-12);
            CHECK(combined.is_unitary());
        }
    }
    SECTION("errors") {
        CHECK_THROWS_AS(jc_rotation(1.0, 1.0, kJc, "mode", "scq"), std::invalid_argument);
        CHECK_THROWS_AS(jc_rotation(1.0, 1.0, kJc, "scq", "res"), std::invalid_argument);
    }
}

TEST_CASE("time-dependent stepping") {
    testing::Gen gen(5);
    const auto psi = gen.state(kJc);
    const DenseOperator h(kJc, gen.hermitian(15), true);
    const double T = 1.3;

    SECTION("a constant generator reproduces the exact propagator") {
        const auto stepped = propagate_timedep([&](double) { return h; }, 0.0, T, T / 1e4, psi);
        CHECK(distance(stepped, propagate_const(h, T, psi)) < 1e-8);
        // a step that does not divide the interval
        const auto ragged = propagate_timedep([&](double) { return h; }, 0.0, T, 0.3, psi);
        CHECK(distance(ragged, propagate_const(h, T, psi)) < 1e-10);
    }

    SECTION("second-order convergence and norm preservation") {
        const DenseOperator v(kJc, gen.hermitian(15), true);
        auto h_t = [&](double t) { return DenseOperator(kJc, h.matrix() + std::cos(3.0 * t) * v.matrix(), true); };
        const double dt = T / 64.0;
        const auto a = propagate_timedep(h_t, 0.0, T, dt, psi);
        const auto b = propagate_timedep(h_t, 0.0, T, dt / 2.0, psi);
        const auto c = propagate_timedep(h_t, 0.0, T, dt / 4.0, psi);
        const double order = std::log2(distance(a, b) / distance(b, c));
        CHECK_THAT(order, WithinAbs(2.0, 0.15));
        CHECK_THAT(c.norm(), WithinAbs(1.0, 1e-12));
    }

    SECTION("argument checks") {
        auto f = [&](double) { return h; };
        CHECK_THROWS_AS(propagate_timedep(f, 0.0, 1.0, 0.0, psi), std::invalid_argument);
        CHECK_THROWS_AS(propagate_timedep(f, 1.0, 1.0, 0.1, psi), std::invalid_argument);
    }

    CHECK(default_time_step(units::two_pi, 1.0) == 1e-3);
    CHECK(default_time_step(units::two_pi * 100.0, 1.0) == 1.0 / 100.0 / 50.0);
    CHECK(default_time_step(0.0, 2.0) == 2e-3);
}

TEST_CASE("lab frame evolution agrees with the drive-rotating frame") {
    const auto layout = scheme_one_full_layout(2, 2);
    const auto p = toy();
    const auto lab = build_h_full_s1(p, layout, Frame::lab);
    const auto rot = build_h_full_s1(p, layout, Frame::drive_rotating);
    const auto r = scheme_one_frame_generator(layout);

    testing::Gen gen(6);
    const auto psi0 = gen.state(layout);
    const double T = 6.0;
    const auto in_rot = propagate_const(rot.static_part, T, psi0);
    // back to the lab frame: psi_lab = exp(-i omega_d T R) psi_rot
    const auto expected = propagate_const(r, p.omega_d * T, in_rot);

    const auto coarse = propagate_timedep([&](double t) { return lab.at(t); }, 0.0, T, T / 4e3, psi0);
    const auto fine = propagate_timedep([&](double t) { return lab.at(t); }, 0.0, T, T / 8e3, psi0);
    const double e_coarse = distance(coarse, expected), e_fine = distance(fine, expected);
    CHECK(e_fine < 1e-4);
    CHECK_THAT(e_coarse / e_fine, WithinAbs(4.0, 0.3));
}

TEST_CASE("interaction-picture propagator") {
    testing::Gen gen(7);
    const DenseOperator h0(kJc, gen.hermitian(15), true);
    CHECK(max_abs_diff(interaction_picture_propagator(h0, h0, 1.7).matrix(), DenseOperator::identity(kJc)) < 1e-12);

    // commuting pieces: only the exchange survives
    const auto free = embed(0.5 * 3.0 * local::sigma_z(), "scq", kJc, true) +
                      3.0 * embed(local::number(5), "mode", kJc, true);
    const auto h = free + jc_interaction(0.4, kJc);
    const auto u = interaction_picture_propagator(h, free, 2.2);
    CHECK(max_abs_diff(u.matrix(), jc_rotation(0.4, 2.2, kJc).matrix()) < 1e-10);
}

TEST_CASE("qutrit pulses") {
    const SpaceLayout one{qutrit("scq")};
    testing::Gen gen(8);

    SECTION("pulses are unitary") {
        for (int trial = 0; trial < 50; ++trial) {
            const Level u = static_cast<Level>(gen.index(3));
            Level v = static_cast<Level>(gen.index(3));
            if (v == u) v = static_cast<Level>((static_cast<std::size_t>(u) + 1) % 3);
            CHECK(is_unitary(pulse_matrix(u, v, gen.uniform(0, 6.28), gen.uniform(0, 6.28)), 1e-13));
        }
        for (const auto& m : {presets::i_to_e(), presets::ge_hadamard(), presets::ig_superpose(), presets::ig_recombine()})
            CHECK(is_unitary(m, 1e-14));
        CHECK_THROWS_AS(pulse_matrix(Level::g, Level::g, 0.1, 0.0), std::invalid_argument);
    }

    SECTION("first pulse of scheme one") {
        const double theta0 = std::acos(1.0 / std::sqrt(3.0));
        const auto out = qutrit_pulse(Level::i, Level::e, theta0, 0.0, one).apply(StateVector::basis(one, {0}));
        CHECK_THAT(out[0].real(), WithinAbs(1.0 / std::sqrt(3.0), 1e-15));
        CHECK_THAT(out[2].imag(), WithinAbs(-std::sqrt(2.0 / 3.0), 1e-15));
        CHECK(out[1] == Complex(0.0));
    }

    SECTION("pulse phase convention") {
        const double phase = 0.8;
        const auto out = qutrit_pulse(Level::g, Level::e, units::pi / 2.0, phase, one).apply(StateVector::basis(one, {1}));
        CHECK(std::abs(out[2] - Complex(0.0, -1.0) * std::exp(Complex(0.0, -phase))) < 1e-15);
    }

    SECTION("fixed maps") {
        const auto u5 = step5_pulse(one);
        CHECK(distance(u5.apply(StateVector::basis(one, {0})), StateVector::basis(one, {2})) == 0.0);
        CHECK(distance(u5.apply(StateVector::basis(one, {2})), StateVector::basis(one, {0})) == 0.0);
        const auto h = presets::ge_hadamard();
        const double r = 1.0 / std::sqrt(2.0);
        CHECK_THAT(h(1, 1).real(), WithinAbs(r, 1e-15));
        CHECK_THAT(h(2, 1).real(), WithinAbs(-r, 1e-15));
        CHECK_THAT(h(1, 2).real(), WithinAbs(r, 1e-15));
        // two applications make a quarter turn that maps g to -e
        const CMatrix twice = h * h;
        CHECK(std::abs(twice(2, 1) + 1.0) < 1e-15);
        CHECK(std::abs(twice(1, 2) - 1.0) < 1e-15);
        CHECK(std::abs(twice(0, 0) - 1.0) < 1e-15);
        CHECK(testing::max_abs(CMatrix(presets::ig_recombine() * presets::ig_superpose() -
                                       CMatrix::Identity(3, 3))) < 1e-15);
    }
}

TEST_CASE("non-Hermitian evolution never gains norm") {
    const auto layout = scheme_two_layout(2);
    const auto h = build_h_s2(reference_scheme_two(), layout);
    REQUIRE_FALSE(h.hermitian_hint());
    testing::Gen gen(9);
    const auto psi = gen.state(layout);
    std::vector<double> times;
    for (int k = 0; k < 100; ++k) times.push_back(gen.uniform(0.0, 1e-6));
    std::sort(times.begin(), times.end());
    double last = 1.0;
    for (double t : times) {
        const double n = propagate_const(h, t, psi).norm();
        CHECK(n <= last + 1e-10);
        last = n;
    }
    CHECK(last < 1.0);
}
