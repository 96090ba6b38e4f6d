#pragma once

// Time evolution: exact propagators for constant generators, midpoint
// stepping for driven generators, closed-form Jaynes-Cummings exchange and
// single-qutrit pulse unitaries.

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include "klm/errors.hpp"
#include "klm/hilbert.hpp"
#include "klm/units.hpp"

namespace klm {

class Propagator {
public:
    Propagator(DenseOperator matrix, double duration) : matrix_(std::move(matrix)), duration_(duration) {}

    const SpaceLayout& layout() const { return matrix_.layout(); }
    const DenseOperator& matrix() const { return matrix_; }
    double duration() const { return duration_; }

    StateVector apply(const StateVector& psi) const { return matrix_.apply(psi); }

    /// `next` applied after this one.
    Propagator then(const Propagator& next) const { return {next.matrix_ * matrix_, duration_ + next.duration_}; }

    bool is_unitary(double tol = 1e-10) const { return klm::is_unitary(matrix_.matrix(), tol); }

private:
    DenseOperator matrix_;
    double duration_ = 0.0;
};

namespace detail {

inline void require_finite(const CMatrix& m, const char* what) {
    if (!m.allFinite()) throw NumericalError(std::string(what) + ": non-finite entries");
}

/// exp(-i H t). Hermitian generators go through an eigendecomposition,
/// everything else through Pade scaling-and-squaring.
inline CMatrix expm_minus_i(const CMatrix& h, bool hermitian, double t) {
    require_finite(h, "propagator");
    if (t == 0.0) return CMatrix::Identity(h.rows(), h.cols());
    CMatrix u;
    if (hermitian) {
        Eigen::SelfAdjointEigenSolver<CMatrix> eig(h);
        if (eig.info() != Eigen::Success) throw NumericalError("propagator: eigendecomposition failed");
        const Eigen::VectorXd& w = eig.eigenvalues();
        CVector phases(w.size());
        for (Eigen::Index k = 0; k < w.size(); ++k) phases(k) = std::exp(Complex(0.0, -w(k) * t));
        u = eig.eigenvectors() * phases.asDiagonal() * eig.eigenvectors().adjoint();
    } else {
        const CMatrix arg = Complex(0.0, -t) * h;
        u = arg.exp();
    }
    require_finite(u, "propagator");
    return u;
}

} // namespace detail

inline Propagator propagator_const(const DenseOperator& h, double t) {
    if (t < 0.0) throw std::invalid_argument("propagator_const: negative duration");
    return {DenseOperator(h.layout(), detail::expm_minus_i(h.matrix(), h.hermitian_hint(), t)), t};
}

/// exp(-i H t) psi. Non-Hermitian generators are not renormalized: the
/// squared norm of the result is the survival probability.
inline StateVector propagate_const(const DenseOperator& h, double t, const StateVector& psi) {
    require_same_layout(h.layout(), psi.layout(), "propagate_const");
    return propagator_const(h, t).apply(psi);
}

/// Default step for midpoint propagation: min(2 pi / omega_max / 50, duration / 1000).
inline double default_time_step(double omega_max, double duration) {
    const double by_duration = duration / 1e3;
    if (!(omega_max > 0.0)) return by_duration;
    return std::min(units::two_pi / omega_max / 50.0, by_duration);
}

/// Time-ordered product of midpoint exponentials exp(-i H(t + dt/2) dt);
/// the final step is shortened to land exactly on t1.
/// `h_of_t` is any callable double -> DenseOperator.
template <class HamiltonianFn>
StateVector propagate_timedep(HamiltonianFn&& h_of_t, double t0, double t1, double dt, const StateVector& psi) {
    if (!(dt > 0.0)) throw std::invalid_argument("propagate_timedep: dt must be positive");
    if (!(t1 > t0)) throw std::invalid_argument("propagate_timedep: t1 must exceed t0");
    const double span = t1 - t0;
    const auto full_steps = static_cast<long long>(std::floor(span / dt * (1.0 + 1e-12)));
    CVector v = psi.amplitudes();
    auto step = [&](double start, double width) {
        const DenseOperator h = h_of_t(start + 0.5 * width);
        require_same_layout(h.layout(), psi.layout(), "propagate_timedep");
        v = detail::expm_minus_i(h.matrix(), h.hermitian_hint(), width) * v;
    };
    for (long long k = 0; k < full_steps; ++k) step(t0 + static_cast<double>(k) * dt, dt);
    const double done = static_cast<double>(full_steps) * dt;
    const double rest = span - done;
    if (rest > span * 1e-12) step(t0 + done, rest);
    if (!v.allFinite()) throw NumericalError("propagate_timedep: non-finite state");
    return {psi.layout(), std::move(v)};
}

// ---------------------------------------------------------------------------
// Jaynes-Cummings exchange

/// Phase-dropped resonant exchange between the qutrit and one bosonic mode:
///   |e,n>   -> cos(g sqrt(n+1) t)|e,n>   - i sin(g sqrt(n+1) t)|g,n+1>
///   |g,n+1> -> cos(g sqrt(n+1) t)|g,n+1> - i sin(g sqrt(n+1) t)|e,n>
/// |i,n>, |g,0> and the truncation edge |e,n_max> are left alone.
inline Propagator jc_rotation(double g, double t, const SpaceLayout& layout, const std::string& scq_label = "scq",
                              const std::string& mode_label = "mode") {
    const auto q = layout.position(scq_label);
    const auto m = layout.position(mode_label);
    if (layout.subsystems()[q].kind != SubsystemKind::qutrit)
        throw std::invalid_argument("jc_rotation: '" + scq_label + "' must be a qutrit");
    const auto mode_dim = layout.subsystems()[m].dim;
    const auto d = static_cast<Eigen::Index>(layout.dimension());
    CMatrix u = CMatrix::Identity(d, d);
    for (std::size_t idx = 0; idx < layout.dimension(); ++idx) {
        auto digits = layout.decode(idx);
        if (digits[q] != static_cast<std::size_t>(Level::e) || digits[m] + 1 >= mode_dim) continue;
        const double n = static_cast<double>(digits[m]);
        digits[q] = static_cast<std::size_t>(Level::g);
        digits[m] += 1;
        const auto e_idx = static_cast<Eigen::Index>(idx);
        const auto g_idx = static_cast<Eigen::Index>(layout.encode(digits));
        const double angle = g * std::sqrt(n + 1.0) * t;
        const double c = std::cos(angle), s = std::sin(angle);
        u(e_idx, e_idx) = c;
        u(g_idx, g_idx) = c;
        u(g_idx, e_idx) = Complex(0.0, -s);
        u(e_idx, g_idx) = Complex(0.0, -s);
    }
    return {DenseOperator(layout, std::move(u)), t};
}

/// g (sigma^+ b + sigma^- b^dagger): the exchange part of the effective Hamiltonian.
inline DenseOperator jc_interaction(double g, const SpaceLayout& layout, const std::string& scq_label = "scq",
                                    const std::string& mode_label = "mode") {
    const auto dim = layout.at(mode_label).dim;
    const CMatrix sp = embed(local::sigma_plus(), scq_label, layout).matrix();
    const CMatrix b = embed(local::annihilation(dim), mode_label, layout).matrix();
    CMatrix h = g * (sp * b + (sp * b).adjoint());
    return {layout, std::move(h), true};
}

/// exp(+i H_free t) exp(-i H t): full evolution seen in the frame of H_free.
inline Propagator interaction_picture_propagator(const DenseOperator& h, const DenseOperator& h_free, double t) {
    require_same_layout(h.layout(), h_free.layout(), "interaction_picture_propagator");
    const CMatrix full = detail::expm_minus_i(h.matrix(), h.hermitian_hint(), t);
    const CMatrix back = detail::expm_minus_i(h_free.matrix(), h_free.hermitian_hint(), -t);
    return {DenseOperator(h.layout(), back * full), t};
}

// ---------------------------------------------------------------------------
// single-qutrit pulses

/// 3x3 map acting on the ordered pair (u, v); `uu`..`vv` are the matrix
/// entries <row|M|col>, identity on the third level.
inline CMatrix two_level_map(Level u, Level v, Complex uu, Complex uv, Complex vu, Complex vv) {
    if (u == v) throw std::invalid_argument("two_level_map: levels must differ");
    CMatrix m = CMatrix::Identity(3, 3);
    const auto iu = static_cast<Eigen::Index>(u), iv = static_cast<Eigen::Index>(v);
    m(iu, iu) = uu;
    m(iu, iv) = uv;
    m(iv, iu) = vu;
    m(iv, iv) = vv;
    return m;
}

/// |u> -> cos(theta)|u> - i e^{-i phase} sin(theta)|v>,
/// |v> -> cos(theta)|v> - i e^{+i phase} sin(theta)|u>.
inline CMatrix pulse_matrix(Level u, Level v, double theta, double phase) {
    const double c = std::cos(theta), s = std::sin(theta);
    const Complex minus_i(0.0, -1.0);
    return two_level_map(u, v, c, minus_i * std::exp(Complex(0.0, phase)) * s,
                         minus_i * std::exp(Complex(0.0, -phase)) * s, c);
}

inline Propagator qutrit_pulse(Level u, Level v, double theta, double phase, const SpaceLayout& layout,
                               const std::string& label = "scq", double duration = 0.0) {
    return {embed(pulse_matrix(u, v, theta, phase), label, layout), duration};
}

inline Propagator local_map(const CMatrix& m, const SpaceLayout& layout, const std::string& label,
                            double duration = 0.0) {
    return {embed(m, label, layout), duration};
}

namespace presets {

/// |i> -> |e> exactly, with |e> -> |i> completing the unitary.
inline CMatrix i_to_e() { return two_level_map(Level::i, Level::e, 0.0, 1.0, 1.0, 0.0); }

/// |g> -> (|g> - |e>)/sqrt2, |e> -> (|e> + |g>)/sqrt2.
inline CMatrix ge_hadamard() {
    const double r = 1.0 / std::sqrt(2.0);
    return two_level_map(Level::g, Level::e, r, r, -r, r);
}

/// |i> -> (|i> + |g>)/sqrt2, |g> -> (|g> - |i>)/sqrt2.
inline CMatrix ig_superpose() {
    const double r = 1.0 / std::sqrt(2.0);
    return two_level_map(Level::i, Level::g, r, -r, r, r);
}

/// |i> -> (|i> - |g>)/sqrt2, |g> -> (|i> + |g>)/sqrt2.
inline CMatrix ig_recombine() {
    const double r = 1.0 / std::sqrt(2.0);
    return two_level_map(Level::i, Level::g, r, r, -r, r);
}

} // namespace presets

inline Propagator step5_pulse(const SpaceLayout& layout, const std::string& label = "scq", double duration = 0.0) {
    return local_map(presets::i_to_e(), layout, label, duration);
}

inline Propagator step6_hadamard(const SpaceLayout& layout, const std::string& label = "scq", double duration = 0.0) {
    return local_map(presets::ge_hadamard(), layout, label, duration);
}

} // namespace klm
