#include <catch_amalgamated.hpp>

#include <cmath>

#include "klm/hilbert.hpp"
#include "klm/model.hpp"
#include "test_support.hpp"

using namespace klm;
using Catch::Matchers::WithinAbs;

namespace {

SpaceLayout qubits(std::size_t n) {
    std::vector<Subsystem> s;
    for (std::size_t k = 0; k < n; ++k) s.push_back(qubit("q" + std::to_string(k + 1)));
    return SpaceLayout(std::move(s));
}

} // namespace

TEST_CASE("SpaceLayout validates labels and dimensions") {
    CHECK(SpaceLayout{qutrit("scq"), mode("res", 4)}.dimension() == 15);
    CHECK_THROWS_AS((SpaceLayout{qubit("a"), qubit("a")}), std::invalid_argument);
    CHECK_THROWS_AS((SpaceLayout{Subsystem{"t", 4, SubsystemKind::qutrit}}), std::invalid_argument);
    CHECK_THROWS_AS((SpaceLayout{Subsystem{"m", 1, SubsystemKind::mode}}), std::invalid_argument);
}

TEST_CASE("mixed-radix encoding puts the first subsystem in the most significant digit") {
    const SpaceLayout l{qutrit("scq"), mode("ens1", 3), mode("ens2", 3)};
    // brute force: enumerate digits in lexicographic order and count
    std::size_t expected = 0;
    for (std::size_t a = 0; a < 3; ++a)
        for (std::size_t b = 0; b < 4; ++b)
            for (std::size_t c = 0; c < 4; ++c) {
                CHECK(l.encode({a, b, c}) == expected);
                CHECK(l.decode(expected) == std::vector<std::size_t>{a, b, c});
                ++expected;
            }
    CHECK(l.basis_label(l.encode({2, 1, 0})) == "|e,1,0>");
}

TEST_CASE("tensor of basis states and identities") {
    const auto z = StateVector::basis(SpaceLayout{qubit("a")}, {0});
    const auto z2 = StateVector::basis(SpaceLayout{qubit("b")}, {0});
    const auto v = tensor(z, z2);
    REQUIRE(v.dimension() == 4);
    CHECK(v[0] == Complex(1.0));
    CHECK(v[1] == Complex(0.0));
    CHECK(v[2] == Complex(0.0));
    CHECK(v[3] == Complex(0.0));

    const auto i2 = DenseOperator::identity(SpaceLayout{qubit("a")});
    const auto i3 = DenseOperator::identity(SpaceLayout{qutrit("b")});
    const auto i6 = tensor(i2, i3);
    CHECK(i6.matrix() == CMatrix::Identity(6, 6));
    CHECK(i6.layout().size() == 2);
}

TEST_CASE("tensor of |e>_s |1>_1 |0>_2 lands at the mixed-radix index") {
    const auto e = StateVector::basis(SpaceLayout{qutrit("scq")}, {2});
    const auto one = StateVector::basis(SpaceLayout{mode("ens1", 3)}, {1});
    const auto zero = StateVector::basis(SpaceLayout{mode("ens2", 3)}, {0});
    const auto v = tensor(e, one, zero);
    // index = 2 * (4*4) + 1 * 4 + 0
    const std::size_t idx = 2 * 16 + 1 * 4 + 0;
    for (std::size_t k = 0; k < v.dimension(); ++k) CHECK(v[k] == Complex(k == idx ? 1.0 : 0.0));
}

TEST_CASE("tensor rejects duplicate labels and empty lists") {
    const auto a = StateVector::basis(SpaceLayout{qubit("a")}, {0});
    CHECK_THROWS_AS(tensor(a, a), std::invalid_argument);
    CHECK_THROWS_AS(tensor(std::span<const StateVector>{}), std::invalid_argument);
    CHECK_THROWS_AS(tensor(std::span<const DenseOperator>{}), std::invalid_argument);
}

TEST_CASE("tensor is associative") {
    testing::Gen gen(11);
    const DenseOperator a(SpaceLayout{qubit("a")}, gen.complex_matrix(2));
    const DenseOperator b(SpaceLayout{qutrit("b")}, gen.complex_matrix(3));
    const DenseOperator c(SpaceLayout{mode("c", 2)}, gen.complex_matrix(3));
    const auto left = tensor(tensor(a, b), c);
    const auto flat = tensor(a, b, c);
    CHECK(left.layout() == flat.layout());
    CHECK(left.matrix() == flat.matrix());
}

TEST_CASE("embed matches explicit Kronecker padding") {
    testing::Gen gen(5);
    const SpaceLayout l{qubit("a"), qutrit("b"), mode("c", 2)};
    const CMatrix op = gen.complex_matrix(3);
    const auto embedded = embed(op, "b", l);
    const auto explicit_kron = tensor(DenseOperator::identity(SpaceLayout{qubit("a")}),
                                      DenseOperator(SpaceLayout{qutrit("b")}, op),
                                      DenseOperator::identity(SpaceLayout{mode("c", 2)}));
    CHECK(embedded.matrix() == explicit_kron.matrix());
}

TEST_CASE("embed places sigma^z and the ladder operator on one slot") {
    const SpaceLayout l{qutrit("scq"), mode("res", 3)};
    const auto sz = embed(local::sigma_z(), "scq", l);
    const auto expected = tensor(DenseOperator(SpaceLayout{qutrit("scq")}, local::sigma_z()),
                                 DenseOperator::identity(SpaceLayout{mode("res", 3)}));
    CHECK(sz.matrix() == expected.matrix());

    const auto a = embed(local::annihilation(4), "res", l);
    for (std::size_t n = 1; n < 4; ++n) {
        const auto out = a.apply(StateVector::basis(l, {1, n}));
        for (std::size_t k = 0; k < l.dimension(); ++k) {
            const double want = k == l.encode({1, n - 1}) ? std::sqrt(double(n)) : 0.0;
            CHECK_THAT(std::abs(out[k] - want), WithinAbs(0.0, 1e-15));
        }
    }
    CHECK(a.apply(StateVector::basis(l, {0, 0})).norm() == 0.0);
}

TEST_CASE("embed X on slot 2 of three qubits flips the middle bit") {
    const auto l = qubits(3);
    CMatrix x(2, 2);
    x << 0, 1, 1, 0;
    const auto out = embed(x, "q2", l).apply(StateVector::basis(l, {0, 1, 0}));
    // |010> is index 2, |000> is index 0
    CHECK(out[0] == Complex(1.0));
    CHECK(out.norm() == 1.0);
}

TEST_CASE("embed errors") {
    const SpaceLayout l{qutrit("scq"), mode("res", 3)};
    CHECK_THROWS_AS(embed(local::sigma_z(), "nope", l), std::invalid_argument);
    CHECK_THROWS_AS(embed(local::annihilation(2), "res", l), std::invalid_argument);
}

TEST_CASE("overlap_fidelity basics") {
    testing::Gen gen(3);
    const auto l = qubits(2);
    const auto psi = gen.state(l);
    CHECK_THAT(overlap_fidelity(psi, psi), WithinAbs(1.0, 1e-14));
    CHECK(overlap_fidelity(StateVector::basis(SpaceLayout{qubit("a")}, {0}),
                           StateVector::basis(SpaceLayout{qubit("a")}, {1})) == 0.0);
    const StateVector rotated(l, std::exp(Complex(0.0, 0.7)) * psi.amplitudes());
    CHECK_THAT(overlap_fidelity(psi, rotated), WithinAbs(1.0, 1e-14));
    const auto phi = gen.state(l);
    CHECK_THAT(overlap_fidelity(psi, phi), WithinAbs(overlap_fidelity(phi, psi), 1e-15));
    CHECK_THROWS_AS(overlap_fidelity(psi, gen.state(qubits(1).concat(SpaceLayout{qutrit("t")}))), std::invalid_argument);
}

TEST_CASE("overlap_fidelity is invariant under a common unitary") {
    testing::Gen gen(17);
    const SpaceLayout l{qutrit("a"), mode("m", 3)};
    for (int trial = 0; trial < 50; ++trial) {
        const auto psi = gen.state(l), phi = gen.state(l);
        const DenseOperator u(l, gen.unitary(12));
        CHECK_THAT(overlap_fidelity(u.apply(psi), u.apply(phi)), WithinAbs(overlap_fidelity(psi, phi), 1e-10));
    }
}

TEST_CASE("normalize reaches unit norm") {
    testing::Gen gen(23);
    const SpaceLayout l{qutrit("a"), qubit("b")};
    for (int trial = 0; trial < 20; ++trial) {
        const StateVector raw(l, 3.7 * gen.complex_vector(6));
        CHECK(std::abs(raw.normalized().norm() - 1.0) < 1e-12);
    }
    CHECK_THROWS_AS(StateVector(l, CVector::Zero(6)).normalized(), std::invalid_argument);
}

TEST_CASE("hermitian_hint is enforced") {
    testing::Gen gen(29);
    const SpaceLayout l{qutrit("a")};
    CHECK_NOTHROW(DenseOperator(l, gen.hermitian(3), true));
    CHECK_THROWS_AS(DenseOperator(l, gen.complex_matrix(3), true), std::invalid_argument);
}

TEST_CASE("commutator of truncated ladder operators") {
    const SpaceLayout l{mode("res", 4)};
    const DenseOperator a(l, local::annihilation(5)), ad(l, local::creation(5));
    CHECK(max_abs_diff(commutator(a, a), DenseOperator::zero(l)) == 0.0);
    const auto c = commutator(a, ad);
    // identity except the top corner, which is -cutoff
    for (std::size_t r = 0; r < 5; ++r)
        for (std::size_t col = 0; col < 5; ++col) {
            const double want = r != col ? 0.0 : (r == 4 ? -4.0 : 1.0);
            CHECK_THAT(std::abs(c(r, col) - want), WithinAbs(0.0, 1e-12));
        }
    CHECK_THROWS_AS(commutator(a, DenseOperator::identity(SpaceLayout{mode("x", 4)})), std::invalid_argument);
}

TEST_CASE("exact collective operators satisfy [b, b^dagger] = 1 - (2/N) n_b") {
    for (std::uint64_t N : {2ull, 5ull, 50ull}) {
        for (std::size_t cutoff = 1; cutoff <= std::min<std::uint64_t>(N, 6); ++cutoff) {
            const auto ops = collective_spin_ops(N, cutoff);
            const auto c = commutator(ops.b, ops.b_dagger);
            const auto expected = DenseOperator::identity(ops.n_b.layout()) - (2.0 / double(N)) * ops.n_b;
            // The top level is a truncation edge unless the cutoff reaches N.
            const std::size_t rows = cutoff == N ? cutoff + 1 : cutoff;
            for (std::size_t r = 0; r < rows; ++r)
                for (std::size_t col = 0; col < rows; ++col)
                    CHECK(std::abs(c(r, col) - expected(r, col)) < 1e-10);
        }
        const auto full = collective_spin_ops(N, static_cast<std::size_t>(std::min<std::uint64_t>(N, 50)));
        const auto c = commutator(full.b, full.b_dagger);
        const auto expected = DenseOperator::identity(full.n_b.layout()) - (2.0 / double(N)) * full.n_b;
        CHECK(max_abs_diff(c, expected) < 1e-10);
    }
}
