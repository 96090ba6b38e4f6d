#pragma once

// Fidelity under timing errors, sweep grids over the error rates, and the
// timing/decoherence feasibility calculator.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <complex>
#include <cstddef>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

#include <Eigen/Dense>

#include "klm/hilbert.hpp"
#include "klm/model.hpp"
#include "klm/protocol.hpp"
#include "klm/units.hpp"

namespace klm {

struct KlmAmplitudes {
    Complex alpha, beta, gamma;
};

/// alpha, beta, gamma of the post-step-6 state for exact timing.
inline KlmAmplitudes ideal_amplitudes(const PulseAngles& a) {
    const Complex ph1 = std::exp(Complex(0.0, -a.phi));
    const Complex ph2 = std::exp(Complex(0.0, -(a.phi + a.phi_prime)));
    return {std::cos(a.theta0), ph1 * std::sin(a.theta0) * std::cos(a.theta2),
            ph2 * std::sin(a.theta0) * std::sin(a.theta2)};
}

/// Amplitudes when each timed step j runs for t_j (1 + eta_j).
inline KlmAmplitudes perturbed_amplitudes(const TimingErrors& eta, const PulseAngles& a, double gt1, double gt3) {
    const double th0 = a.theta0 * (1.0 + eta.eta_0);
    const double th2 = a.theta2 * (1.0 + eta.eta_2);
    const double s1 = std::sin(gt1 * (1.0 + eta.eta_1));
    const double s3 = std::sin(gt3 * (1.0 + eta.eta_3));
    const Complex ph1 = std::exp(Complex(0.0, -a.phi));
    const Complex ph2 = std::exp(Complex(0.0, -(a.phi + a.phi_prime)));
    return {std::cos(th0), ph1 * std::sin(th0) * s1 * std::cos(th2), ph2 * std::sin(th0) * s1 * std::sin(th2) * s3};
}

/// F = |alpha* alpha' + beta* beta' + gamma* gamma'|^2, capped at 1 against rounding.
inline double fidelity_closed_form(const TimingErrors& eta, const PulseAngles& angles = {},
                                   double gt1 = units::pi / 2.0, double gt3 = units::pi / 2.0) {
    const auto id = ideal_amplitudes(angles);
    const auto pt = perturbed_amplitudes(eta, angles, gt1, gt3);
    const double f = std::norm(std::conj(id.alpha) * pt.alpha + std::conj(id.beta) * pt.beta + std::conj(id.gamma) * pt.gamma);
    return std::min(f, 1.0);
}

/// Overlap of the simulated perturbed run with the exact-timing run.
inline double fidelity_simulated(const TimingErrors& eta, const PulseAngles& angles, const SchemeOneParams& p,
                                 Engine engine = Engine::closed_form) {
    const auto ideal = scheme1_run(p, angles, TimingErrors{}, engine).final_state();
    const auto perturbed = scheme1_run(p, angles, eta, engine).final_state();
    return overlap_fidelity(ideal, perturbed);
}

// ---------------------------------------------------------------------------
// sweep

struct SweepAxis {
    std::size_t eta_index = 1;
    double min = 0.0;
    double max = 0.1;
    std::size_t points = 101;

    std::string name() const { return "eta" + std::to_string(eta_index); }

    double value(std::size_t k) const {
        if (points == 1 || k == 0) return min;
        if (k + 1 == points) return max;
        return min + (max - min) * static_cast<double>(k) / static_cast<double>(points - 1);
    }
};

struct SweepSpec {
    SweepAxis axis1{1, 0.0, 0.1, 101};
    SweepAxis axis2{3, 0.0, 0.1, 101};
    TimingErrors fixed; ///< values for the two etas not on an axis
    PulseAngles angles;

    /// Defaults for the two published panels: eta0 = eta2 = 0 or 0.1.
    static SweepSpec panel(double eta0_eta2) {
        SweepSpec s;
        s.fixed.eta_0 = s.fixed.eta_2 = eta0_eta2;
        return s;
    }
};

struct SweepGrid {
    SweepAxis axis1;
    SweepAxis axis2;
    TimingErrors fixed;
    Eigen::MatrixXd results; ///< points1 x points2, row-major by axis1 then axis2

    double at(std::size_t i, std::size_t j) const {
        return results(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
};

namespace detail {
inline void set_eta(TimingErrors& e, std::size_t index, double value) {
    switch (index) {
    case 0: e.eta_0 = value; return;
    case 1: e.eta_1 = value; return;
    case 2: e.eta_2 = value; return;
    case 3: e.eta_3 = value; return;
    }
    throw std::invalid_argument("sweep: axis must be one of eta0..eta3");
}
} // namespace detail

inline SweepGrid sweep(const SweepSpec& spec) {
    if (spec.axis1.points == 0 || spec.axis2.points == 0) throw std::invalid_argument("sweep: point counts must be positive");
    if (spec.axis1.eta_index > 3 || spec.axis2.eta_index > 3) throw std::invalid_argument("sweep: axis must be one of eta0..eta3");
    if (spec.axis1.eta_index == spec.axis2.eta_index) throw std::invalid_argument("sweep: axes must differ");
    spec.angles.validate();

    SweepGrid grid{spec.axis1, spec.axis2, spec.fixed,
                   Eigen::MatrixXd(static_cast<Eigen::Index>(spec.axis1.points), static_cast<Eigen::Index>(spec.axis2.points))};
    for (std::size_t i = 0; i < spec.axis1.points; ++i) {
        for (std::size_t j = 0; j < spec.axis2.points; ++j) {
            TimingErrors e = spec.fixed;
            detail::set_eta(e, spec.axis1.eta_index, spec.axis1.value(i));
            detail::set_eta(e, spec.axis2.eta_index, spec.axis2.value(j));
            e.validate();
            grid.results(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = fidelity_closed_form(e, spec.angles);
        }
    }
    return grid;
}

/// Shortest round-trip decimal form; independent of the C locale.
inline std::string format_double(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    if (res.ec != std::errc{}) throw std::runtime_error("format_double: conversion failed");
    return {buf, res.ptr};
}

/// Header row "<axis1>,<axis2>,fidelity", LF line endings.
inline void write_csv(const SweepGrid& grid, std::ostream& out) {
    out << grid.axis1.name() << ',' << grid.axis2.name() << ",fidelity\n";
    for (std::size_t i = 0; i < grid.axis1.points; ++i)
        for (std::size_t j = 0; j < grid.axis2.points; ++j)
            out << format_double(grid.axis1.value(i)) << ',' << format_double(grid.axis2.value(j)) << ','
                << format_double(grid.at(i, j)) << '\n';
}

inline std::string to_csv(const SweepGrid& grid) {
    std::ostringstream out;
    write_csv(grid, out);
    return out.str();
}

// ---------------------------------------------------------------------------
// timing budget and feasibility

struct TimingBudget {
    double t0 = 0.0, t1 = 0.0, t2 = 0.0, t3 = 0.0;
    double t5 = 0.0, t6 = 0.0; ///< untimed pulses unless supplied
    double total = 0.0;
};

inline TimingBudget timing_budget_s1(const SchemeOneParams& p, const PulseRabi& rabi, const PulseAngles& angles = {},
                                     double step5_duration = 0.0, double step6_duration = 0.0) {
    if (rabi.Omega_prime == 0.0 || rabi.Omega_double_prime == 0.0)
        throw std::invalid_argument("timing_budget_s1: pulse Rabi frequencies must be nonzero");
    const double g = stark_shifts(p).g_eff;
    if (g == 0.0) throw std::invalid_argument("timing_budget_s1: effective coupling is zero");
    TimingBudget b;
    b.t0 = angles.theta0 / std::abs(rabi.Omega_prime);
    b.t1 = units::pi / (2.0 * std::abs(g));
    b.t2 = angles.theta2 / std::abs(rabi.Omega_double_prime);
    b.t3 = b.t1;
    b.t5 = step5_duration;
    b.t6 = step6_duration;
    b.total = b.t0 + b.t1 + b.t2 + b.t3 + b.t5 + b.t6;
    return b;
}

struct FeasibilityInputs {
    double gamma_scq = units::mhz_2pi(0.032);     ///< qutrit dephasing rate
    double gamma_m = units::two_pi * 700.0;       ///< single-molecule collision rate
    double rabi_fraction = 0.1;                   ///< Omega' = Omega'' = fraction * g_eff
    double scheme_two_pulse_duration = units::ns(4.0); ///< each of the two single-qutrit pulses per step
    double gate_phase = -1.5 * units::pi;
    std::size_t n_qubits = 2;
};

struct LimitCheck {
    std::string name;
    double value = 0.0;
    double threshold = 0.0;
    bool pass = false;
};

/// A quoted (rounded) published figure next to its recomputed value.
struct QuotedValue {
    std::string name;
    double quoted = 0.0;
    double computed = 0.0;
    std::string unit;
};

struct FeasibilityReport {
    // scheme one
    StarkShifts shifts;
    double resonance_residual = 0.0;
    double gamma_over_g = 0.0;
    double gamma_m_over_g = 0.0;
    TimingBudget budget;
    std::vector<std::string> scheme_one_warnings;
    // scheme two
    double kappa_over_g = 0.0;
    double Gamma_over_g = 0.0;
    double gate_time = 0.0;
    double two_qubit_total = 0.0;
    double n_qubit_total = 0.0;
    double n_qubit_total_rounded = 0.0; ///< 0.674 us x (n - 1)
    std::vector<std::string> scheme_two_warnings;
    std::vector<LimitCheck> limits;
    std::vector<QuotedValue> quoted;

    bool all_limits_pass() const {
        for (const auto& l : limits)
            if (!l.pass) return false;
        return true;
    }
};

inline FeasibilityReport feasibility_report(const SchemeOneParams& p1, const SchemeTwoParams& p2,
                                            const FeasibilityInputs& in = {}) {
    if (in.n_qubits < 2) throw std::invalid_argument("feasibility_report: n_qubits must be >= 2");
    FeasibilityReport r;
    r.shifts = stark_shifts(p1);
    const double g = r.shifts.g_eff;
    r.resonance_residual = resonance_residual(p1);
    r.gamma_over_g = in.gamma_scq / std::abs(g);
    r.gamma_m_over_g = in.gamma_m / std::abs(g);
    r.budget = timing_budget_s1(p1, PulseRabi::fraction_of(g, in.rabi_fraction));
    r.scheme_one_warnings = validity_warnings(p1);

    r.kappa_over_g = p2.kappa / std::abs(p2.g_1);
    r.Gamma_over_g = p2.Gamma_1 / std::abs(p2.g_1);
    r.gate_time = gate_time_for_phase(in.gate_phase, p2);
    r.two_qubit_total = r.gate_time + 2.0 * in.scheme_two_pulse_duration;
    r.n_qubit_total = r.two_qubit_total * static_cast<double>(in.n_qubits - 1);
    r.n_qubit_total_rounded = units::us(0.674) * static_cast<double>(in.n_qubits - 1);
    r.scheme_two_warnings = validity_warnings(p2);

    const double D = std::abs(p2.Delta());
    auto add = [&](std::string name, double value, double threshold, bool pass) {
        r.limits.push_back({std::move(name), value, threshold, pass});
    };
    add("|Delta|/Gamma", D / p2.Gamma_1, 10.0, D / p2.Gamma_1 >= 10.0);
    add("|Delta|/kappa", D / p2.kappa, 10.0, D / p2.kappa >= 10.0);
    add("|Delta|/|Omega|", D / std::abs(p2.Omega_1), 10.0, D / std::abs(p2.Omega_1) >= 10.0);
    add("|Delta|/|g|", D / std::abs(p2.g_1), 10.0, D / std::abs(p2.g_1) >= 10.0);
    add("|delta|/|Delta|", std::abs(p2.delta()) / D, 0.1, std::abs(p2.delta()) / D <= 0.1);
    add("|g|/|Omega|", std::abs(p2.g_1) / std::abs(p2.Omega_1), 1.0, std::abs(p2.g_1) > std::abs(p2.Omega_1));
    add("|g|^2/(Gamma kappa)", p2.g_1 * p2.g_1 / (p2.Gamma_1 * p2.kappa), 10.0,
        p2.g_1 * p2.g_1 / (p2.Gamma_1 * p2.kappa) >= 10.0);
    add("scheme one total time [ns]", r.budget.total * 1e9, 29.0, r.budget.total < units::ns(29.0));

    r.quoted = {
        {"g_eff", 250.0, units::to_mhz_2pi(g), "2pi MHz"},
        {"scheme one total time (upper bound)", 29.0, r.budget.total * 1e9, "ns"},
        {"gate time", 0.666, r.gate_time * 1e6, "us"},
        {"two-qubit total time", 0.674, r.two_qubit_total * 1e6, "us"},
        {"n-qubit total time", 0.674 * static_cast<double>(in.n_qubits - 1), r.n_qubit_total * 1e6, "us"},
    };
    return r;
}

} // namespace klm
