#pragma once

// Physical operators and Hamiltonians for both preparation schemes.
//
// Scheme one: a charge qutrit dispersively coupled through a resonator to a
// polar-molecule ensemble, reduced to a Jaynes-Cummings exchange with the
// collective mode.  Scheme two: two qutrits in one resonator under a common
// drive, with non-Hermitian decay on |e> and the photon.
//
// All frequencies are angular frequencies in rad/s with hbar = 1.

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "klm/errors.hpp"
#include "klm/hilbert.hpp"
#include "klm/units.hpp"

namespace klm {

// ---------------------------------------------------------------------------
// scheme one parameters

struct SchemeOneParams {
    double omega_s = 0.0; ///< qutrit g<->e transition
    double omega_d = 0.0; ///< classical drive
    double omega_m = 0.0; ///< molecular transition
    double omega_c = 0.0; ///< resonator
    double Omega = 0.0;   ///< drive Rabi frequency
    double g_s = 0.0;     ///< qutrit-resonator coupling
    double g_m = 0.0;     ///< single-molecule-resonator coupling
    std::uint64_t N = 1;  ///< molecules per ensemble
    double phi = 0.0;
    double phi_prime = 0.0;

    double delta_s() const { return omega_s - omega_c; }
    double delta_m() const { return omega_m - omega_c; }
    double delta_d() const { return omega_s - omega_d; }
};

struct StarkShifts {
    double lambda_sd = 0.0;
    double lambda_sc = 0.0;
    double lambda_mc = 0.0;
    double lambda_sm = 0.0;
    double g_eff = 0.0;
};

inline void require_nonzero_detunings(const SchemeOneParams& p) {
    if (p.delta_s() == 0.0) throw std::invalid_argument("scheme one: zero detuning Delta_s = omega_s - omega_c");
    if (p.delta_m() == 0.0) throw std::invalid_argument("scheme one: zero detuning Delta_m = omega_m - omega_c");
    if (p.delta_d() == 0.0) throw std::invalid_argument("scheme one: zero detuning Delta_d = omega_s - omega_d");
}

inline StarkShifts stark_shifts(const SchemeOneParams& p) {
    require_nonzero_detunings(p);
    StarkShifts s;
    s.lambda_sd = p.Omega * p.Omega / p.delta_d();
    s.lambda_sc = p.g_s * p.g_s / p.delta_s();
    s.lambda_mc = p.g_m * p.g_m / p.delta_m();
    s.lambda_sm = 0.5 * p.g_m * p.g_s * (1.0 / p.delta_m() + 1.0 / p.delta_s());
    s.g_eff = std::sqrt(static_cast<double>(p.N)) * s.lambda_sm;
    return s;
}

/// 2 lambda_sd + lambda_sc - N lambda_mc; zero when the effective exchange is resonant.
inline double resonance_residual(const SchemeOneParams& p) {
    const auto s = stark_shifts(p);
    return 2.0 * s.lambda_sd + s.lambda_sc - static_cast<double>(p.N) * s.lambda_mc;
}

/// Drive amplitude that zeroes the resonance residual at the current Delta_d.
inline double resonant_drive_amplitude(const SchemeOneParams& p) {
    const auto s = stark_shifts(p);
    const double target_sd = 0.5 * (static_cast<double>(p.N) * s.lambda_mc - s.lambda_sc);
    const double omega_sq = target_sd * p.delta_d();
    if (omega_sq < 0.0)
        throw RegimeError("no real drive amplitude satisfies the resonance condition for this sign of Delta_d");
    return std::sqrt(omega_sq);
}

inline SchemeOneParams with_resonant_drive(SchemeOneParams p) {
    p.Omega = resonant_drive_amplitude(p);
    return p;
}

/// Dispersive-regime checks; each entry names a violated ratio. Empty means all pass.
inline std::vector<std::string> validity_warnings(const SchemeOneParams& p) {
    std::vector<std::string> out;
    if (std::abs(p.delta_s()) < 10.0 * std::abs(p.g_s)) out.emplace_back("|Delta_s| < 10 g_s");
    if (std::abs(p.delta_m()) < 10.0 * std::abs(p.g_m)) out.emplace_back("|Delta_m| < 10 g_m");
    if (std::abs(p.delta_d()) < 10.0 * std::abs(p.Omega)) out.emplace_back("|Delta_d| < 10 Omega");
    return out;
}

// ---------------------------------------------------------------------------
// collective spin operators

struct CollectiveSpinOps {
    DenseOperator S_plus;
    DenseOperator S_minus;
    DenseOperator S_z;
    DenseOperator n_b;
    DenseOperator b;
    DenseOperator b_dagger;
};

/// Exact collective operators on the symmetric (Dicke) subspace spanned by
/// |n excitations>, n = 0..excitation_cutoff.
inline CollectiveSpinOps collective_spin_ops(std::uint64_t N, std::size_t excitation_cutoff,
                                             const std::string& label = "ens") {
    if (N < 1) throw std::invalid_argument("collective_spin_ops: N must be positive");
    if (excitation_cutoff < 1) throw std::invalid_argument("collective_spin_ops: cutoff must be >= 1");
    if (excitation_cutoff > N) throw std::invalid_argument("collective_spin_ops: cutoff exceeds N");
    const SpaceLayout layout{mode(label, excitation_cutoff)};
    const auto dim = static_cast<Eigen::Index>(excitation_cutoff + 1);
    const double Nd = static_cast<double>(N);

    CMatrix sp = CMatrix::Zero(dim, dim);
    CMatrix sz = CMatrix::Zero(dim, dim);
    CMatrix nb = CMatrix::Zero(dim, dim);
    for (Eigen::Index n = 0; n < dim; ++n) {
        const double nd = static_cast<double>(n);
        if (n + 1 < dim) sp(n + 1, n) = std::sqrt((nd + 1.0) * (Nd - nd));
        sz(n, n) = 2.0 * nd - Nd;
        nb(n, n) = nd;
    }
    const CMatrix sm = sp.adjoint();
    const double scale = 1.0 / std::sqrt(Nd);
    return {DenseOperator(layout, sp), DenseOperator(layout, sm),       DenseOperator(layout, sz, true),
            DenseOperator(layout, nb, true), DenseOperator(layout, scale * sm), DenseOperator(layout, scale * sp)};
}

// ---------------------------------------------------------------------------
// scheme one Hamiltonians

enum class Frame { lab, drive_rotating };

/// H(t) = static + drive e^{+i w t} + drive^dagger e^{-i w t}.
struct DrivenHamiltonian {
    DenseOperator static_part;
    DenseOperator drive;
    double drive_frequency = 0.0;

    bool is_static() const { return drive_frequency == 0.0 && drive.matrix().isZero(0.0); }

    DenseOperator at(double t) const {
        const Complex ph = std::exp(Complex(0.0, drive_frequency * t));
        CMatrix m = static_part.matrix() + ph * drive.matrix() + std::conj(ph) * drive.matrix().adjoint();
        // Symmetrize to strip rounding asymmetry from the two phase factors.
        m = 0.5 * (m + m.adjoint()).eval();
        return {static_part.layout(), std::move(m), true};
    }
};

struct SchemeOneLabels {
    std::string scq = "scq";
    std::string res = "res";
    std::string mode = "mode";
};

inline SpaceLayout scheme_one_full_layout(std::size_t resonator_cutoff = 4, std::size_t mode_cutoff = 3) {
    if (resonator_cutoff < 1 || mode_cutoff < 1) throw std::invalid_argument("scheme one: cutoffs must be positive");
    return SpaceLayout{qutrit("scq"), mode("res", resonator_cutoff), mode("mode", mode_cutoff)};
}

/// Resonator-explicit Hamiltonian with the ensemble bosonized:
/// S^z -> 2 n_b (constant -N dropped), S^+ -> sqrt(N) b^dagger.
inline DrivenHamiltonian build_h_full_s1(const SchemeOneParams& p, const SpaceLayout& layout, Frame frame,
                                         const SchemeOneLabels& labels = {}) {
    for (const auto* l : {&labels.scq, &labels.res, &labels.mode})
        if (!layout.contains(*l)) throw std::invalid_argument("build_h_full_s1: missing subsystem '" + *l + "'");
    if (layout.at(labels.scq).kind != SubsystemKind::qutrit)
        throw std::invalid_argument("build_h_full_s1: '" + labels.scq + "' must be a qutrit");

    const auto res_dim = layout.at(labels.res).dim;
    const auto mode_dim = layout.at(labels.mode).dim;
    const auto sz = embed(local::sigma_z(), labels.scq, layout, true);
    const auto sp = embed(local::sigma_plus(), labels.scq, layout);
    const auto sm = embed(local::sigma_minus(), labels.scq, layout);
    const auto a = embed(local::annihilation(res_dim), labels.res, layout);
    const auto ad = embed(local::creation(res_dim), labels.res, layout);
    const auto n_a = embed(local::number(res_dim), labels.res, layout, true);
    const auto b = embed(local::annihilation(mode_dim), labels.mode, layout);
    const auto bd = embed(local::creation(mode_dim), labels.mode, layout);
    const auto n_b = embed(local::number(mode_dim), labels.mode, layout, true);
    const double g_coll = p.g_m * std::sqrt(static_cast<double>(p.N));

    CMatrix coupling = p.g_s * (sp.matrix() * a.matrix() + sm.matrix() * ad.matrix()) +
                       g_coll * (bd.matrix() * a.matrix() + b.matrix() * ad.matrix());

    if (frame == Frame::lab) {
        CMatrix h0 = 0.5 * p.omega_s * sz.matrix() + p.omega_m * n_b.matrix() + p.omega_c * n_a.matrix() + coupling;
        return {DenseOperator(layout, h0, true), DenseOperator(layout, p.Omega * sm.matrix()), p.omega_d};
    }
    CMatrix h = 0.5 * (p.omega_s - p.omega_d) * sz.matrix() + p.Omega * (sp.matrix() + sm.matrix()) +
                (p.omega_m - p.omega_d) * n_b.matrix() + (p.omega_c - p.omega_d) * n_a.matrix() + coupling;
    return {DenseOperator(layout, h, true), DenseOperator::zero(layout), 0.0};
}

/// Generator of the lab -> drive-rotating frame change:
/// psi_rot(t) = exp(+i omega_d t R) psi_lab(t), R = sigma^z/2 + a^dagger a + n_b.
inline DenseOperator scheme_one_frame_generator(const SpaceLayout& layout, const SchemeOneLabels& labels = {}) {
    const auto r = 0.5 * embed(local::sigma_z(), labels.scq, layout, true) +
                   embed(local::number(layout.at(labels.res).dim), labels.res, layout, true) +
                   embed(local::number(layout.at(labels.mode).dim), labels.mode, layout, true);
    return r;
}

/// H_eff = 1/2 (2 lambda_sd + lambda_sc) sigma^z + g_eff (sigma^+ b + sigma^- b^dagger) + N lambda_mc b^dagger b
/// with the resonator adiabatically eliminated. The layout may carry other
/// subsystems; they see the identity.
inline DenseOperator build_h_eff_s1(const SchemeOneParams& p, const SpaceLayout& layout,
                                    const std::string& scq_label = "scq", const std::string& mode_label = "mode") {
    if (!layout.contains(scq_label)) throw std::invalid_argument("build_h_eff_s1: missing subsystem '" + scq_label + "'");
    if (!layout.contains(mode_label)) throw std::invalid_argument("build_h_eff_s1: missing subsystem '" + mode_label + "'");
    const auto s = stark_shifts(p);
    const auto dim = layout.at(mode_label).dim;
    const auto sz = embed(local::sigma_z(), scq_label, layout, true);
    const auto sp = embed(local::sigma_plus(), scq_label, layout);
    const auto sm = embed(local::sigma_minus(), scq_label, layout);
    const auto b = embed(local::annihilation(dim), mode_label, layout);
    const auto bd = embed(local::creation(dim), mode_label, layout);
    const auto nb = embed(local::number(dim), mode_label, layout, true);

    CMatrix h = 0.5 * (2.0 * s.lambda_sd + s.lambda_sc) * sz.matrix() +
                s.g_eff * (sp.matrix() * b.matrix() + sm.matrix() * bd.matrix()) +
                static_cast<double>(p.N) * s.lambda_mc * nb.matrix();
    return {layout, std::move(h), true};
}

/// Detuning part of H_eff (everything except the exchange term).
inline DenseOperator build_h_eff_s1_free(const SchemeOneParams& p, const SpaceLayout& layout,
                                         const std::string& scq_label = "scq", const std::string& mode_label = "mode") {
    const auto s = stark_shifts(p);
    const auto dim = layout.at(mode_label).dim;
    CMatrix h = 0.5 * (2.0 * s.lambda_sd + s.lambda_sc) * embed(local::sigma_z(), scq_label, layout).matrix() +
                static_cast<double>(p.N) * s.lambda_mc * embed(local::number(dim), mode_label, layout).matrix();
    return {layout, std::move(h), true};
}

// ---------------------------------------------------------------------------
// scheme two

struct SchemeTwoParams {
    double omega_e = 0.0;
    double omega_g = 0.0;
    double omega_c = 0.0;
    double omega_d = 0.0;
    double Omega_1 = 0.0;
    double Omega_2 = 0.0;
    double g_1 = 0.0;
    double g_2 = 0.0;
    double Gamma_1 = 0.0;
    double Gamma_2 = 0.0;
    double kappa = 0.0;

    /// Resonator detuning from the qutrit g<->e transition.
    double Delta() const { return omega_c - (omega_e - omega_g); }
    /// Drive detuning from the resonator.
    double delta() const { return omega_d - omega_c; }
};

inline std::vector<std::string> validity_warnings(const SchemeTwoParams& p) {
    std::vector<std::string> out;
    const double D = std::abs(p.Delta());
    auto need = [&](bool ok, const char* what) {
        if (!ok) out.emplace_back(what);
    };
    need(D >= 10.0 * p.Gamma_1 && D >= 10.0 * p.Gamma_2, "|Delta| >> Gamma_j (ratio < 10)");
    need(D >= 10.0 * p.kappa, "|Delta| >> kappa (ratio < 10)");
    need(D >= 10.0 * std::abs(p.Omega_1) && D >= 10.0 * std::abs(p.Omega_2), "|Delta| >> |Omega_j| (ratio < 10)");
    need(D >= 10.0 * std::abs(p.g_1) && D >= 10.0 * std::abs(p.g_2), "|Delta| >> |g_j| (ratio < 10)");
    need(std::abs(p.delta()) * 10.0 <= D, "|delta| ~ 0 (|delta| > |Delta|/10)");
    need(std::abs(p.g_1) > std::abs(p.Omega_1) && std::abs(p.g_2) > std::abs(p.Omega_2), "|g_j| > |Omega_j|");
    need(p.g_1 * p.g_1 >= 10.0 * p.Gamma_1 * p.kappa && p.g_2 * p.g_2 >= 10.0 * p.Gamma_2 * p.kappa,
         "|g_j|^2 >> Gamma_j kappa (ratio < 10)");
    return out;
}

struct SchemeTwoLabels {
    std::string scq1 = "scq1";
    std::string scq2 = "scq2";
    std::string res = "res";
};

inline SpaceLayout scheme_two_layout(std::size_t resonator_cutoff = 4) {
    if (resonator_cutoff < 1) throw std::invalid_argument("scheme two: resonator cutoff must be positive");
    return SpaceLayout{qutrit("scq1"), qutrit("scq2"), mode("res", resonator_cutoff)};
}

/// Two-qutrit resonator Hamiltonian in the frame rotating at omega_d
/// (applied to |e>_j and a^dagger a):
///   sum_j [(omega_e - omega_d - i Gamma_j/2)|e><e|_j + omega_g |g><g|_j]
///   + 1/2 sum_j (Omega_j sigma_j^+ + g_j sigma_j^+ a + h.c.)
///   + (omega_c - omega_d - i kappa) a^dagger a
/// |i> levels have zero energy and no matrix elements.
inline DenseOperator build_h_s2(const SchemeTwoParams& p, const SpaceLayout& layout, const SchemeTwoLabels& labels = {}) {
    for (const auto* l : {&labels.scq1, &labels.scq2, &labels.res})
        if (!layout.contains(*l)) throw std::invalid_argument("build_h_s2: missing subsystem '" + *l + "'");
    if (p.Gamma_1 < 0.0 || p.Gamma_2 < 0.0 || p.kappa < 0.0)
        throw std::invalid_argument("build_h_s2: decay rates must be non-negative");

    const auto res_dim = layout.at(labels.res).dim;
    const CMatrix a = embed(local::annihilation(res_dim), labels.res, layout).matrix();
    const CMatrix n_a = embed(local::number(res_dim), labels.res, layout).matrix();
    const auto d = static_cast<Eigen::Index>(layout.dimension());
    CMatrix h = CMatrix::Zero(d, d);

    struct Qutrit {
        const std::string* label;
        double Omega, g, Gamma;
    };
    for (const auto& q : {Qutrit{&labels.scq1, p.Omega_1, p.g_1, p.Gamma_1}, Qutrit{&labels.scq2, p.Omega_2, p.g_2, p.Gamma_2}}) {
        const CMatrix pe = embed(local::projector(Level::e), *q.label, layout).matrix();
        const CMatrix pg = embed(local::projector(Level::g), *q.label, layout).matrix();
        const CMatrix sp = embed(local::sigma_plus(), *q.label, layout).matrix();
        h += Complex(p.omega_e - p.omega_d, -0.5 * q.Gamma) * pe + p.omega_g * pg;
        const CMatrix drive_and_coupling = q.Omega * sp + q.g * sp * a;
        h += 0.5 * (drive_and_coupling + drive_and_coupling.adjoint());
    }
    h += Complex(p.omega_c - p.omega_d, -p.kappa) * n_a;
    const bool hermitian = p.Gamma_1 == 0.0 && p.Gamma_2 == 0.0 && p.kappa == 0.0;
    return {layout, std::move(h), hermitian};
}

// ---------------------------------------------------------------------------
// reference parameter sets
//
// Only couplings and detunings are fixed by the scheme; the absolute
// resonator and qutrit frequencies below are placeholders that set those
// detunings.

inline SchemeOneParams reference_scheme_one() {
    using units::mhz_2pi;
    SchemeOneParams p;
    p.omega_c = mhz_2pi(5000.0);
    p.omega_s = p.omega_c + mhz_2pi(750.0);
    p.omega_m = p.omega_c + mhz_2pi(500.0);
    p.omega_d = p.omega_s - mhz_2pi(1000.0);
    p.Omega = 0.0;
    p.g_s = mhz_2pi(75.0);
    p.g_m = mhz_2pi(20.0);
    p.N = 10000;
    return p;
}

inline SchemeTwoParams reference_scheme_two() {
    using units::mhz_2pi;
    SchemeTwoParams p;
    p.omega_g = 0.0;
    p.omega_e = mhz_2pi(5000.0);
    p.omega_c = p.omega_e - p.omega_g + mhz_2pi(400.0);
    p.omega_d = p.omega_c;
    p.Omega_1 = p.Omega_2 = mhz_2pi(30.0);
    p.g_1 = p.g_2 = mhz_2pi(75.0);
    p.Gamma_1 = p.Gamma_2 = mhz_2pi(0.0064);
    p.kappa = mhz_2pi(0.008);
    return p;
}

} // namespace klm
