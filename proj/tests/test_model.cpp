#include <catch_amalgamated.hpp>

#include <cmath>

#include <Eigen/Eigenvalues>

#include "klm/model.hpp"
#include "klm/units.hpp"
#include "test_support.hpp"

using namespace klm;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using units::mhz_2pi;

namespace {

SchemeOneParams random_scheme_one(testing::Gen& gen) {
    SchemeOneParams p;
    p.omega_c = mhz_2pi(gen.uniform(4000, 8000));
    p.omega_s = p.omega_c + mhz_2pi(gen.uniform(100, 1000)) * (gen.uniform(0, 1) < 0.5 ? -1 : 1);
    p.omega_m = p.omega_c + mhz_2pi(gen.uniform(100, 1000)) * (gen.uniform(0, 1) < 0.5 ? -1 : 1);
    p.omega_d = p.omega_s - mhz_2pi(gen.uniform(200, 2000));
    p.Omega = mhz_2pi(gen.uniform(0, 50));
    p.g_s = mhz_2pi(gen.uniform(1, 100));
    p.g_m = mhz_2pi(gen.uniform(1, 50));
    p.N = static_cast<std::uint64_t>(gen.uniform(1, 1e5));
    return p;
}

/// Scaled-down parameters (order-one numbers) for structural checks.
SchemeOneParams toy_scheme_one() {
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

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

} // namespace

TEST_CASE("Stark shifts match their defining formulas on random draws") {
    testing::Gen gen(101);
    for (int trial = 0; trial < 100; ++trial) {
        const auto p = random_scheme_one(gen);
        const auto s = stark_shifts(p);
        const double ds = p.omega_s - p.omega_c, dm = p.omega_m - p.omega_c, dd = p.omega_s - p.omega_d;
        CHECK(rel(s.lambda_sd, p.Omega * p.Omega / dd) < 1e-12);
        CHECK(rel(s.lambda_sc, p.g_s * p.g_s / ds) < 1e-12);
        CHECK(rel(s.lambda_mc, p.g_m * p.g_m / dm) < 1e-12);
        const double lsm = p.g_m * p.g_s / 2.0 * (1.0 / dm + 1.0 / ds);
        CHECK(rel(s.lambda_sm, lsm) < 1e-12);
        CHECK(rel(s.g_eff, std::sqrt(double(p.N)) * lsm) < 1e-12);
    }
}

TEST_CASE("g_eff scales as sqrt(N)") {
    testing::Gen gen(7);
    for (int trial = 0; trial < 20; ++trial) {
        auto p = random_scheme_one(gen);
        const double g1 = stark_shifts(p).g_eff;
        p.N *= 2;
        CHECK_THAT(stark_shifts(p).g_eff / g1, WithinRel(std::sqrt(2.0), 1e-14));
    }
}

TEST_CASE("reference scheme-one parameters give the quoted couplings") {
    const auto p = reference_scheme_one();
    const auto s = stark_shifts(p);
    CHECK_THAT(units::to_mhz_2pi(s.g_eff), WithinRel(250.0, 1e-9));
    CHECK_THAT(units::to_mhz_2pi(s.lambda_sc), WithinRel(7.5, 1e-12));
    CHECK_THAT(units::to_mhz_2pi(double(p.N) * s.lambda_mc), WithinRel(8000.0, 1e-12));
    CHECK(s.lambda_sd == 0.0);
    CHECK_THAT(units::to_mhz_2pi(resonance_residual(p)), WithinRel(-7992.5, 1e-12));
    CHECK(validity_warnings(p).empty());
}

TEST_CASE("resonance residual and the drive solver") {
    testing::Gen gen(31);
    int solved = 0;
    for (int trial = 0; trial < 50; ++trial) {
        auto p = random_scheme_one(gen);
        const auto s = stark_shifts(p);
        const double needed = 0.5 * (double(p.N) * s.lambda_mc - s.lambda_sc) * p.delta_d();
        if (needed < 0.0) {
            CHECK_THROWS_AS(resonant_drive_amplitude(p), RegimeError);
            continue;
        }
        const auto q = with_resonant_drive(p);
        CHECK_THAT(q.Omega, WithinRel(std::sqrt(p.delta_d() * (double(p.N) * s.lambda_mc - s.lambda_sc) / 2.0), 1e-12));
        const double scale = std::abs(double(p.N) * s.lambda_mc) + std::abs(s.lambda_sc);
        CHECK(std::abs(resonance_residual(q)) < 1e-10 * scale);
        ++solved;
    }
    CHECK(solved > 0);

    auto p = toy_scheme_one();
    p.N = 0;
    const auto s = stark_shifts(p);
    CHECK(resonance_residual(p) == 2.0 * s.lambda_sd + s.lambda_sc);
}

TEST_CASE("zero detunings are rejected") {
    auto p = toy_scheme_one();
    p.omega_d = p.omega_s;
    CHECK_THROWS_AS(stark_shifts(p), std::invalid_argument);
    p = toy_scheme_one();
    p.omega_m = p.omega_c;
    CHECK_THROWS_AS(resonance_residual(p), std::invalid_argument);
    CHECK_THROWS_AS(build_h_eff_s1(p, SpaceLayout{qutrit("scq"), mode("mode", 3)}), std::invalid_argument);
}

TEST_CASE("collective spin operators") {
    SECTION("single spin") {
        const auto ops = collective_spin_ops(1, 1);
        CMatrix raise = CMatrix::Zero(2, 2);
        raise(1, 0) = 1.0;
        CHECK(ops.S_plus.matrix() == raise);
        CHECK(ops.S_minus.matrix() == raise.adjoint());
        CHECK(ops.S_z(0, 0) == Complex(-1.0));
        CHECK(ops.S_z(1, 1) == Complex(1.0));
    }
    SECTION("large N acts like a boson at low excitation") {
        const auto ops = collective_spin_ops(10000, 2);
        const auto out = ops.b_dagger.apply(StateVector::basis(ops.n_b.layout(), {0}));
        CHECK_THAT(out[1].real(), WithinAbs(1.0, 1e-15));
        CHECK_THAT(out.norm(), WithinAbs(1.0, 1e-15));
    }
    SECTION("diagonal of [b, b^dagger] below the cutoff") {
        const std::uint64_t N = 40;
        const auto ops = collective_spin_ops(N, 5);
        const auto c = commutator(ops.b, ops.b_dagger);
        for (std::size_t n = 0; n < 5; ++n) CHECK_THAT(c(n, n).real(), WithinAbs(1.0 - 2.0 * double(n) / double(N), 1e-12));
    }
    SECTION("errors") {
        CHECK_THROWS_AS(collective_spin_ops(3, 4), std::invalid_argument);
        CHECK_THROWS_AS(collective_spin_ops(3, 0), std::invalid_argument);
    }
}

TEST_CASE("full scheme-one Hamiltonian") {
    const auto layout = scheme_one_full_layout(3, 2);
    const auto p = toy_scheme_one();

    SECTION("Hermitian in both frames and at any time") {
        const auto lab = build_h_full_s1(p, layout, Frame::lab);
        for (double t : {0.0, 0.37, 2.1, 13.0}) {
            const auto h = lab.at(t);
            CHECK(testing::max_abs(h.matrix() - h.matrix().adjoint()) < 1e-12);
        }
        CHECK_FALSE(lab.is_static());
        const auto rot = build_h_full_s1(p, layout, Frame::drive_rotating);
        CHECK(rot.is_static());
        CHECK(testing::max_abs(rot.static_part.matrix() - rot.static_part.matrix().adjoint()) < 1e-12);
    }

    SECTION("decoupled limit is diagonal with bare energies") {
        auto q = p;
        q.Omega = q.g_s = q.g_m = 0.0;
        const auto h = build_h_full_s1(q, layout, Frame::lab).at(0.4);
        for (std::size_t idx = 0; idx < layout.dimension(); ++idx) {
            const auto d = layout.decode(idx);
            const double scq = d[0] == 2 ? 0.5 * q.omega_s : (d[0] == 1 ? -0.5 * q.omega_s : 0.0);
            const double want = scq + q.omega_c * double(d[1]) + q.omega_m * double(d[2]);
            for (std::size_t col = 0; col < layout.dimension(); ++col)
                CHECK_THAT(std::abs(h(idx, col) - (col == idx ? want : 0.0)), WithinAbs(0.0, 1e-12));
        }
    }

    SECTION("without drive the total excitation number is conserved") {
        auto q = p;
        q.Omega = 0.0;
        const auto n_exc = embed(local::projector(Level::e), "scq", layout) +
                           embed(local::number(4), "res", layout) + embed(local::number(3), "mode", layout);
        for (const auto frame : {Frame::lab, Frame::drive_rotating}) {
            const auto h = build_h_full_s1(q, layout, frame).at(0.8);
            CHECK(testing::max_abs(commutator(h, n_exc).matrix()) < 1e-12);
        }
        // the drive breaks it
        const auto driven = build_h_full_s1(p, layout, Frame::drive_rotating).at(0.0);
        CHECK(testing::max_abs(commutator(driven, n_exc).matrix()) > 1e-3);
    }

    SECTION("missing subsystem") {
        CHECK_THROWS_AS(build_h_full_s1(p, SpaceLayout{qutrit("scq"), mode("mode", 2)}, Frame::lab), std::invalid_argument);
        CHECK_THROWS_AS(scheme_one_full_layout(0, 2), std::invalid_argument);
    }
}

TEST_CASE("effective scheme-one Hamiltonian") {
    const SpaceLayout layout{qutrit("scq"), mode("mode", 3)};
    const auto p = with_resonant_drive(toy_scheme_one());
    REQUIRE(std::abs(resonance_residual(p)) < 1e-12);
    const auto s = stark_shifts(p);
    const auto h = build_h_eff_s1(p, layout);
    CHECK(h.hermitian_hint());

    SECTION("Jaynes-Cummings blocks at resonance") {
        for (std::size_t n = 0; n + 1 < 4; ++n) {
            const auto e = layout.encode({2, n}), g = layout.encode({1, n + 1});
            CHECK_THAT(h(g, e).real(), WithinRel(s.g_eff * std::sqrt(double(n) + 1.0), 1e-12));
            CHECK_THAT(std::abs(h(e, e) - h(g, g)), WithinAbs(0.0, 1e-12));
            // 2x2 block eigenvalue splitting
            Eigen::Matrix2cd block;
            block << h(e, e), h(e, g), h(g, e), h(g, g);
            Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> eig(block);
            const double split = eig.eigenvalues()(1) - eig.eigenvalues()(0);
            CHECK_THAT(split, WithinRel(2.0 * std::abs(s.g_eff) * std::sqrt(double(n) + 1.0), 1e-10));
        }
    }

    SECTION("|i> is a spectator") {
        for (std::size_t n = 0; n < 4; ++n) {
            const auto row = layout.encode({0, n});
            for (std::size_t col = 0; col < layout.dimension(); ++col) {
                const Complex want = col == row ? Complex(double(p.N) * s.lambda_mc * double(n)) : Complex(0.0);
                CHECK(std::abs(h(row, col) - want) < 1e-12);
                CHECK(std::abs(h(col, row) - want) < 1e-12);
            }
        }
    }

    SECTION("no couplings and no drive leave nothing") {
        auto q = p;
        q.g_s = q.g_m = q.Omega = 0.0;
        CHECK(testing::max_abs(build_h_eff_s1(q, layout).matrix()) == 0.0);
    }
}

TEST_CASE("scheme-two Hamiltonian") {
    const auto layout = scheme_two_layout(3);
    const auto ref = reference_scheme_two();

    SECTION("Hermitian without decay") {
        auto p = ref;
        p.Gamma_1 = p.Gamma_2 = p.kappa = 0.0;
        const auto h = build_h_s2(p, layout);
        CHECK(h.hermitian_hint());
        CHECK(testing::max_abs(h.matrix() - h.matrix().adjoint()) < 1e-12 * testing::max_abs(h.matrix()));
    }

    SECTION("both qutrits in |i> are exact eigenvectors") {
        const auto h = build_h_s2(ref, layout);
        for (std::size_t n = 0; n < 4; ++n) {
            const auto idx = layout.encode({0, 0, n});
            const auto out = h.apply(StateVector::basis_index(layout, idx));
            const Complex lambda = out[idx];
            CHECK(testing::max_abs(CVector(out.amplitudes() - lambda * StateVector::basis_index(layout, idx).amplitudes())) == 0.0);
        }
    }

    SECTION("spectrum is dissipative") {
        const auto h = build_h_s2(ref, layout);
        Eigen::ComplexEigenSolver<CMatrix> eig(h.matrix());
        const double scale = testing::max_abs(h.matrix());
        for (Eigen::Index k = 0; k < eig.eigenvalues().size(); ++k) CHECK(eig.eigenvalues()(k).imag() <= 1e-12 * scale);
        CHECK(eig.eigenvalues().imag().minCoeff() < 0.0);
    }

    SECTION("excitation number is conserved without drive or decay") {
        SchemeTwoParams p;
        p.omega_e = 3.0;
        p.omega_g = 0.4;
        p.omega_c = 2.9;
        p.omega_d = 2.7;
        p.g_1 = 0.2;
        p.g_2 = 0.15;
        const auto h = build_h_s2(p, layout);
        const auto n_exc = embed(local::projector(Level::e), "scq1", layout) +
                           embed(local::projector(Level::e), "scq2", layout) + embed(local::number(4), "res", layout);
        CHECK(testing::max_abs(commutator(h, n_exc).matrix()) < 1e-12);
    }

    SECTION("parameter checks") {
        auto p = ref;
        p.kappa = -1.0;
        CHECK_THROWS_AS(build_h_s2(p, layout), std::invalid_argument);
        CHECK_THROWS_AS(build_h_s2(ref, scheme_one_full_layout()), std::invalid_argument);
        CHECK_THAT(units::to_mhz_2pi(ref.Delta()), WithinRel(400.0, 1e-12));
        CHECK(ref.delta() == 0.0);
        const auto w = validity_warnings(ref);
        REQUIRE(w.size() == 1);
        CHECK(w.front() == "|Delta| >> |g_j| (ratio < 10)");
    }
}
