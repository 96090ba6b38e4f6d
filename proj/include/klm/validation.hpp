#pragma once

// Built-in invariant suite behind `klm_cli validate`. Every check is cheap
// (the whole suite runs in well under a second) and deterministic.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "klm/analysis.hpp"
#include "klm/evolve.hpp"
#include "klm/hilbert.hpp"
#include "klm/model.hpp"
#include "klm/protocol.hpp"

namespace klm::validation {

enum class Status { pass, fail, warn };

inline const char* status_name(Status s) {
    switch (s) {
    case Status::pass: return "PASS";
    case Status::fail: return "FAIL";
    case Status::warn: return "WARN";
    }
    return "FAIL";
}

struct Check {
    std::string name;
    Status status = Status::fail;
    std::string detail;
};

namespace detail {

inline std::string sci(double x) {
    std::ostringstream s;
    s.precision(3);
    s << std::scientific << x;
    return s.str();
}

inline Check bound(std::string name, double value, double limit, const std::string& what) {
    return {std::move(name), value <= limit ? Status::pass : Status::fail, what + " = " + sci(value) + " (limit " + sci(limit) + ")"};
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

} // namespace detail

inline Check six_term_state() {
    const auto psi = scheme1_run(reference_scheme_one(), {}, {}, Engine::closed_form).final_state();
    const auto& l = psi.layout();
    const double r = 1.0 / std::sqrt(6.0);
    CVector want = CVector::Zero(static_cast<Eigen::Index>(l.dimension()));
    const std::array<std::array<std::size_t, 3>, 6> idx{{{1, 0, 0}, {1, 1, 0}, {1, 1, 1}, {2, 0, 0}, {2, 1, 0}, {2, 1, 1}}};
    const std::array<double, 6> sign{1, -1, 1, 1, 1, -1};
    for (std::size_t k = 0; k < 6; ++k) want(static_cast<Eigen::Index>(l.encode({idx[k][0], idx[k][1], idx[k][2]}))) = sign[k] * r;
    return detail::bound("scheme one ideal state", (psi.amplitudes() - want).norm(), 1e-12, "distance");
}

inline Check fidelity_equivalence() {
    std::mt19937_64 rng(2024);
    const auto p = reference_scheme_one();
    double worst = 0.0;
    for (int k = 0; k < 50; ++k) {
        TimingErrors e{detail::uniform(rng, -0.2, 0.2), detail::uniform(rng, -0.2, 0.2), detail::uniform(rng, -0.2, 0.2),
                       detail::uniform(rng, -0.2, 0.2)};
        worst = std::max(worst, std::abs(fidelity_simulated(e, {}, p) - fidelity_closed_form(e)));
    }
    return detail::bound("simulated fidelity equals closed form", worst, 1e-9, "max |dF| over 50 draws");
}

inline Check fidelity_bounded() {
    double worst = 0.0;
    for (int i = 0; i <= 40; ++i)
        for (int j = 0; j <= 40; ++j) worst = std::max(worst, fidelity_closed_form({0.1, -0.2 + 0.01 * i, 0.1, -0.2 + 0.01 * j}));
    return {"fidelity never exceeds one", worst <= 1.0 ? Status::pass : Status::fail, "max F = " + format_double(worst)};
}

inline Check sweep_corners() {
    SweepSpec s = SweepSpec::panel(0.0);
    s.axis1.points = s.axis2.points = 11;
    const auto g = sweep(s);
    double err = std::abs(g.at(10, 10) - fidelity_closed_form({0.0, 0.1, 0.0, 0.1}));
    err = std::max(err, std::abs(g.at(0, 10) - fidelity_closed_form({0.0, 0.0, 0.0, 0.1})));
    const bool origin = g.at(0, 0) == 1.0;
    auto c = detail::bound("sweep corners", err, 1e-12, "corner error");
    if (!origin) {
        c.status = Status::fail;
        c.detail += "; origin is not exactly 1";
    }
    return c;
}

inline Check coupling_derivation() {
    const double g = units::to_mhz_2pi(stark_shifts(reference_scheme_one()).g_eff);
    return detail::bound("g_eff from reference inputs", std::abs(g - 250.0) / 250.0, 1e-9, "relative error vs 250 MHz");
}

inline Check timing_budget() {
    const auto p = reference_scheme_one();
    const auto b = timing_budget_s1(p, PulseRabi::fraction_of(stark_shifts(p).g_eff));
    return {"scheme one timing budget", b.total < units::ns(29.0) ? Status::pass : Status::fail,
            "total = " + format_double(b.total * 1e9) + " ns"};
}

inline Check gate_time() {
    const double t = gate_time_for_phase(-1.5 * units::pi, reference_scheme_two());
    return detail::bound("conditional phase gate time", std::abs(t - units::us(0.666)) / units::us(0.666), 0.01,
                         "relative difference from 0.666 us");
}

inline Check two_qubit_state() {
    const auto psi = scheme2_two_qubit();
    const auto& l = psi.layout();
    const double k = 1.0 / (2.0 * std::sqrt(2.0));
    CVector want = CVector::Zero(9);
    want(static_cast<Eigen::Index>(l.encode({0, 0}))) = 2.0 * k;
    want(static_cast<Eigen::Index>(l.encode({1, 0}))) = Complex(1.0, 1.0) * k;
    want(static_cast<Eigen::Index>(l.encode({1, 1}))) = Complex(-1.0, 1.0) * k;
    return detail::bound("two-qubit gate sequence", (psi.amplitudes() - want).norm(), 1e-12, "distance");
}

inline Check closed_form_recursion() {
    double worst = 0.0;
    for (std::size_t n = 2; n <= 5; ++n) worst = std::max(worst, 1.0 - overlap_fidelity(klm_closed_form(n), scheme2_n_qubit(n)));
    return detail::bound("closed form matches recursion (n = 2..5)", worst, 1e-9, "max 1 - overlap");
}

inline Check measurement_independence() {
    std::mt19937_64 rng(7);
    double worst = 0.0, prob_err = 0.0;
    for (int k = 0; k < 20; ++k) {
        PulseAngles a{detail::uniform(rng, 0.1, 1.4), detail::uniform(rng, 0.1, 1.4), detail::uniform(rng, 0.0, 6.0),
                      detail::uniform(rng, 0.0, 6.0)};
        const auto s = scheme1_run(reference_scheme_one(), a, {}, Engine::closed_form).final_state();
        const auto g = scheme1_measure_feedback(s, Level::g), e = scheme1_measure_feedback(s, Level::e);
        worst = std::max(worst, 1.0 - overlap_fidelity(g.klm_state, e.klm_state));
        prob_err = std::max(prob_err, std::abs(g.probability - 0.5) + std::abs(e.probability - 0.5));
    }
    auto c = detail::bound("measurement outcome independence", std::max(worst, prob_err), 1e-10,
                           "max(1 - overlap, |P - 1/2|)");
    return c;
}

inline Check jc_exactness() {
    const SpaceLayout l{qutrit("scq"), mode("mode", 4)};
    double worst = 0.0;
    for (double t : {0.3, 1.1, 2.9}) worst = std::max(worst, max_abs_diff(propagator_const(jc_interaction(1.3, l), t).matrix(), jc_rotation(1.3, t, l).matrix()));
    return detail::bound("exchange closed form vs matrix exponential", worst, 1e-9, "max entry difference");
}

inline Check midpoint_order() {
    const SpaceLayout l{qutrit("scq"), mode("mode", 2)};
    const auto h0 = jc_interaction(1.0, l) + embed(local::sigma_z(), "scq", l, true);
    const auto v = embed(local::number(3), "mode", l, true);
    auto h = [&](double t) { return h0 + std::cos(2.0 * t) * v; };
    const auto psi = StateVector::basis(l, {2, 0});
    const double T = 2.0, dt = T / 50.0;
    const auto a = propagate_timedep(h, 0.0, T, dt, psi), b = propagate_timedep(h, 0.0, T, dt / 2, psi),
               c = propagate_timedep(h, 0.0, T, dt / 4, psi);
    const double order = std::log2((a.amplitudes() - b.amplitudes()).norm() / (b.amplitudes() - c.amplitudes()).norm());
    const double const_err =
        (propagate_timedep([&](double) { return h0; }, 0.0, T, T / 1e4, psi).amplitudes() - propagate_const(h0, T, psi).amplitudes()).norm();
    const bool ok = std::abs(order - 2.0) < 0.2 && const_err < 1e-8;
    return {"midpoint stepping", ok ? Status::pass : Status::fail,
            "order = " + format_double(order) + ", constant-H error = " + detail::sci(const_err)};
}

inline Check dicke_commutator() {
    double worst = 0.0;
    for (std::uint64_t N : {2ull, 5ull, 50ull}) {
        const std::size_t cutoff = static_cast<std::size_t>(std::min<std::uint64_t>(N, 6));
        const auto ops = collective_spin_ops(N, cutoff);
        const auto c = commutator(ops.b, ops.b_dagger);
        const auto want = DenseOperator::identity(ops.n_b.layout()) - (2.0 / double(N)) * ops.n_b;
        const std::size_t rows = cutoff == N ? cutoff + 1 : cutoff;
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t k = 0; k < rows; ++k) worst = std::max(worst, std::abs(c(r, k) - want(r, k)));
    }
    return detail::bound("collective spin commutator", worst, 1e-10, "max deviation");
}

inline Check cphase_composition() {
    const auto l = scheme_two_register(2);
    double worst = 0.0;
    for (double a : {-2.0, 0.4, 3.1})
        for (double b : {-1.0, 0.7}) worst = std::max(worst, max_abs_diff(cphase_ideal(a, l).then(cphase_ideal(b, l)).matrix(), cphase_ideal(a + b, l).matrix()));
    return detail::bound("conditional phase composes additively", worst, 1e-15, "max entry difference");
}

inline Check engine_agreement() {
    const auto p = with_resonant_drive(reference_scheme_one());
    std::mt19937_64 rng(11);
    double worst = 0.0, high = 0.0;
    for (int k = 0; k < 5; ++k) {
        PulseAngles a{detail::uniform(rng, 0.0, 6.0), detail::uniform(rng, 0.0, 6.0), detail::uniform(rng, 0.0, 6.0),
                      detail::uniform(rng, 0.0, 6.0)};
        TimingErrors e{detail::uniform(rng, -0.2, 0.2), detail::uniform(rng, -0.2, 0.2), detail::uniform(rng, -0.2, 0.2),
                       detail::uniform(rng, -0.2, 0.2)};
        const auto c = scheme1_run(p, a, e, Engine::closed_form);
        const auto n = scheme1_run(p, a, e, Engine::effective_numeric);
        worst = std::max(worst, 1.0 - overlap_fidelity(c.final_state(), n.final_state()));
        for (const auto& s : n.states)
            for (std::size_t idx = 0; idx < s.dimension(); ++idx) {
                const auto d = s.layout().decode(idx);
                if (d[1] >= 2 || d[2] >= 2) high = std::max(high, std::norm(s[idx]));
            }
    }
    auto c = detail::bound("closed-form and numeric engines agree", worst, 1e-8, "max 1 - overlap");
    if (high >= 1e-10) {
        c.status = Status::fail;
        c.detail += "; Fock n >= 2 population " + detail::sci(high);
    }
    return c;
}

inline Check pulse_unitarity() {
    double worst = 0.0;
    for (double th : {0.3, 1.2, 2.5})
        for (double ph : {0.0, 1.0, 4.0}) {
            const CMatrix m = pulse_matrix(Level::i, Level::e, th, ph);
            worst = std::max(worst, (m.adjoint() * m - CMatrix::Identity(3, 3)).cwiseAbs().maxCoeff());
        }
    return detail::bound("qutrit pulses are unitary", worst, 1e-12, "max |U^dag U - I|");
}

inline Check decay_norm() {
    const auto l = scheme_two_layout(2);
    const auto h = build_h_s2(reference_scheme_two(), l);
    CVector v = CVector::Ones(static_cast<Eigen::Index>(l.dimension()));
    const StateVector psi(l, v / v.norm());
    double last = 1.0, rise = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double n = propagate_const(h, units::ns(10.0) * k, psi).norm();
        rise = std::max(rise, n - last);
        last = n;
    }
    return detail::bound("decaying evolution never gains norm", rise, 1e-10, "max norm increase");
}

/// The numeric gate is reported but never fails the suite.
inline Check numeric_gate() {
    const auto p = reference_scheme_two();
    const double target = -1.5 * units::pi;
    try {
        const auto r = cphase_numeric(p, gate_time_for_phase(target, p), 4, 256);
        const double rel = std::abs(r.entangling_phase - target) / std::abs(target);
        const bool ok = rel <= 0.1 && r.leakage < 0.1 && r.survival > 0.95;
        return {"numeric gate reaches the target phase", ok ? Status::pass : Status::warn,
                "phase = " + format_double(r.entangling_phase) + ", leakage = " + detail::sci(r.leakage) +
                    ", survival = " + format_double(r.survival)};
    } catch (const std::exception& e) {
        return {"numeric gate reaches the target phase", Status::warn, e.what()};
    }
}

inline std::vector<Check> run_all() {
    const std::vector<std::function<Check()>> checks{
        six_term_state,   fidelity_equivalence, fidelity_bounded,   sweep_corners,   coupling_derivation,
        timing_budget,    gate_time,            two_qubit_state,    closed_form_recursion,
        measurement_independence, jc_exactness, midpoint_order,     dicke_commutator, cphase_composition,
        engine_agreement, pulse_unitarity,      decay_norm,         numeric_gate};
    std::vector<Check> out;
    for (const auto& f : checks) {
        try {
            out.push_back(f());
        } catch (const std::exception& e) {
            out.push_back({"(check threw)", Status::fail, e.what()});
        }
    }
    return out;
}

inline bool all_passed(const std::vector<Check>& checks) {
    for (const auto& c : checks)
        if (c.status == Status::fail) return false;
    return true;
}

} // namespace klm::validation
