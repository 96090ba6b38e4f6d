#pragma once

// Both KLM preparation schemes end to end.
//
// Scheme one (qutrit + two ensemble modes) runs as a declarative
// PulseProgram: pulses, exchange intervals, decoupling switches and an
// optional measurement with feedback.  Scheme two builds the n-qubit state by
// repeated conditional-phase steps between neighbouring qutrits.

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "klm/errors.hpp"
#include "klm/evolve.hpp"
#include "klm/hilbert.hpp"
#include "klm/model.hpp"
#include "klm/units.hpp"

namespace klm {

// ---------------------------------------------------------------------------
// shared protocol types

/// Relative duration errors Delta t_j / t_j of the four timed steps.
struct TimingErrors {
    double eta_0 = 0.0;
    double eta_1 = 0.0;
    double eta_2 = 0.0;
    double eta_3 = 0.0;

    double operator[](std::size_t j) const {
        switch (j) {
        case 0: return eta_0;
        case 1: return eta_1;
        case 2: return eta_2;
        case 3: return eta_3;
        }
        throw std::out_of_range("TimingErrors: slot must be 0..3");
    }

    void validate() const {
        for (std::size_t j = 0; j < 4; ++j)
            if (!((*this)[j] > -1.0))
                throw std::invalid_argument("TimingErrors: eta_" + std::to_string(j) + " must exceed -1");
    }

    static TimingErrors uniform(double eta) { return {eta, eta, eta, eta}; }
};

/// Pulse areas and phases for scheme one. Defaults give alpha = beta = gamma = 1/sqrt3.
struct PulseAngles {
    double theta0 = std::acos(1.0 / std::sqrt(3.0)); ///< Omega' t0 on |i> <-> |e>
    double theta2 = units::pi / 4.0;                  ///< Omega'' t2 on |g> <-> |e>
    double phi = 0.0;
    double phi_prime = 0.0;

    void validate() const {
        auto check = [](double a, const char* name) {
            if (!(a >= 0.0 && a < units::two_pi))
                throw std::invalid_argument(std::string("PulseAngles: ") + name + " outside [0, 2pi)");
        };
        check(theta0, "theta0");
        check(theta2, "theta2");
        check(phi, "phi");
        check(phi_prime, "phi_prime");
    }
};

/// Rabi frequencies of the two timed classical pulses (rad/s).
struct PulseRabi {
    double Omega_prime = 0.0;
    double Omega_double_prime = 0.0;

    static PulseRabi fraction_of(double g_eff, double fraction = 0.1) {
        return {fraction * std::abs(g_eff), fraction * std::abs(g_eff)};
    }
};

struct RunRecord {
    std::vector<std::string> step_names;
    std::vector<StateVector> states; ///< snapshot after each step; index 0 is the initial state
    std::vector<double> durations;   ///< seconds, parallel to states
    std::optional<Level> outcome;
    std::optional<double> outcome_probability;
    double total_time = 0.0;

    const StateVector& final_state() const { return states.back(); }

    void push(std::string name, StateVector state, double duration) {
        step_names.push_back(std::move(name));
        states.push_back(std::move(state));
        durations.push_back(duration);
        total_time += duration;
    }
};

// ---------------------------------------------------------------------------
// scheme one program

namespace step {

/// Timed two-level pulse; duration = theta (1 + eta) / rabi when rabi > 0.
struct Pulse {
    std::string name;
    Level u = Level::i;
    Level v = Level::e;
    double theta = 0.0;
    double phase = 0.0;
    double rabi = 0.0;
    std::optional<std::size_t> eta_slot;
};

/// Untimed-by-construction map given as a 3x3 qutrit matrix.
struct FixedPulse {
    std::string name;
    CMatrix map;
    double duration = 0.0;
};

/// Resonant exchange with ensemble 1 or 2 for a nominal duration.
struct Interact {
    int ensemble = 1;
    double nominal_duration = 0.0;
    std::optional<std::size_t> eta_slot;
};

/// Tune the qutrit out of resonance: an exact, instantaneous switch.
struct Decouple {};

/// Projective measurement of a qutrit in its level basis.
struct Measure {
    std::string subsystem = "scq";
};

/// Parity diag(1, -1, 1, ...) on `mode` when the recorded outcome is `on_outcome`.
struct Feedback {
    Level on_outcome = Level::e;
    std::string mode = "ens1";
};

} // namespace step

using ProgramStep = std::variant<step::Pulse, step::FixedPulse, step::Interact, step::Decouple, step::Measure, step::Feedback>;

struct PulseProgram {
    std::vector<ProgramStep> steps;
    TimingErrors timing_errors;

    void validate() const {
        timing_errors.validate();
        bool measured = false;
        for (const auto& s : steps) {
            if (const auto* in = std::get_if<step::Interact>(&s)) {
                if (in->ensemble != 1 && in->ensemble != 2)
                    throw std::invalid_argument("PulseProgram: interact must reference ensemble 1 or 2");
            } else if (std::holds_alternative<step::Measure>(s)) {
                if (measured) throw std::invalid_argument("PulseProgram: at most one measure step");
                measured = true;
            } else if (std::holds_alternative<step::Feedback>(s)) {
                if (!measured) throw std::invalid_argument("PulseProgram: feedback before measure");
            }
        }
    }
};

enum class Engine { closed_form, effective_numeric };

/// Measurement outcome choice: a fixed level or a Born-rule sample from a seed.
struct SampledOutcome {
    std::uint64_t seed = 0;
};
using OutcomeChoice = std::variant<Level, SampledOutcome>;

inline SpaceLayout scheme_one_layout(std::size_t mode_cutoff = 3) {
    return SpaceLayout{qutrit("scq"), mode("ens1", mode_cutoff), mode("ens2", mode_cutoff)};
}

namespace detail {

inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline Level sample_level(const std::array<double, 3>& probs, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const double total = probs[0] + probs[1] + probs[2];
    const double u = uniform01(rng) * total;
    double acc = 0.0;
    for (std::size_t k = 0; k < 3; ++k) {
        acc += probs[k];
        if (u < acc) return static_cast<Level>(k);
    }
    return Level::e;
}

/// Populations of each level of qutrit `label`.
inline std::array<double, 3> level_populations(const StateVector& psi, const std::string& label) {
    const auto& layout = psi.layout();
    const auto q = layout.position(label);
    std::array<double, 3> p{0.0, 0.0, 0.0};
    for (std::size_t idx = 0; idx < layout.dimension(); ++idx) p[layout.decode(idx)[q]] += std::norm(psi[idx]);
    return p;
}

inline Level resolve_outcome(const OutcomeChoice& choice, const std::array<double, 3>& probs) {
    if (const auto* fixed = std::get_if<Level>(&choice)) return *fixed;
    return sample_level(probs, std::get<SampledOutcome>(choice).seed);
}

/// Project qutrit `label` onto `level` and renormalize, keeping the full layout.
inline StateVector project(const StateVector& psi, const std::string& label, Level level, double& probability) {
    const auto& layout = psi.layout();
    const auto q = layout.position(label);
    CVector out = CVector::Zero(psi.amplitudes().size());
    for (std::size_t idx = 0; idx < layout.dimension(); ++idx)
        if (layout.decode(idx)[q] == static_cast<std::size_t>(level))
            out(static_cast<Eigen::Index>(idx)) = psi[idx];
    probability = out.squaredNorm();
    if (probability < 1e-14)
        throw std::invalid_argument(std::string("measurement outcome '") + level_name(level) + "' has zero probability");
    return StateVector(layout, out / std::sqrt(probability));
}

inline CMatrix parity(std::size_t dim) {
    CMatrix m = CMatrix::Identity(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (std::size_t n = 1; n < dim; n += 2) m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)) = -1.0;
    return m;
}

} // namespace detail

struct SchemeOneContext {
    SchemeOneParams params;
    Engine engine = Engine::closed_form;
    std::optional<OutcomeChoice> outcome; ///< required when the program measures
};

inline RunRecord run_program(const PulseProgram& program, const StateVector& initial, const SchemeOneContext& ctx) {
    program.validate();
    const auto& layout = initial.layout();
    const auto shifts = stark_shifts(ctx.params);
    const auto& eta = program.timing_errors;
    auto scale = [&](const std::optional<std::size_t>& slot) { return slot ? 1.0 + eta[*slot] : 1.0; };

    RunRecord rec;
    rec.push("initial", initial, 0.0);
    for (const auto& s : program.steps) {
        const StateVector& psi = rec.states.back();
        if (const auto* p = std::get_if<step::Pulse>(&s)) {
            const double theta = p->theta * scale(p->eta_slot);
            const double duration = p->rabi > 0.0 ? theta / p->rabi : 0.0;
            rec.push(p->name, qutrit_pulse(p->u, p->v, theta, p->phase, layout, "scq").apply(psi), duration);
        } else if (const auto* f = std::get_if<step::FixedPulse>(&s)) {
            rec.push(f->name, local_map(f->map, layout, "scq").apply(psi), f->duration);
        } else if (const auto* in = std::get_if<step::Interact>(&s)) {
            const std::string ens = "ens" + std::to_string(in->ensemble);
            const double t = in->nominal_duration * scale(in->eta_slot);
            Propagator u = ctx.engine == Engine::closed_form
                               ? jc_rotation(shifts.g_eff, t, layout, "scq", ens)
                               : interaction_picture_propagator(build_h_eff_s1(ctx.params, layout, "scq", ens),
                                                                build_h_eff_s1_free(ctx.params, layout, "scq", ens), t);
            rec.push("interact_" + ens, u.apply(psi), t);
        } else if (std::holds_alternative<step::Decouple>(s)) {
            rec.push("decouple", psi, 0.0);
        } else if (const auto* m = std::get_if<step::Measure>(&s)) {
            if (!ctx.outcome) throw std::invalid_argument("run_program: measure step without an outcome choice");
            const auto probs = detail::level_populations(psi, m->subsystem);
            const Level level = detail::resolve_outcome(*ctx.outcome, probs);
            double prob = 0.0;
            auto projected = detail::project(psi, m->subsystem, level, prob);
            rec.outcome = level;
            rec.outcome_probability = prob;
            rec.push(std::string("measure_") + level_name(level), std::move(projected), 0.0);
        } else if (const auto* fb = std::get_if<step::Feedback>(&s)) {
            if (rec.outcome == fb->on_outcome)
                rec.push("feedback_parity_" + fb->mode,
                         embed(detail::parity(layout.at(fb->mode).dim), fb->mode, layout).apply(psi), 0.0);
            else
                rec.push("feedback_none", psi, 0.0);
        }
    }
    if (!rec.final_state().amplitudes().allFinite()) throw NumericalError("run_program: non-finite amplitudes");
    return rec;
}

/// Steps 1-6 of scheme one; `with_measurement` appends measure + feedback.
inline PulseProgram scheme1_program(const SchemeOneParams& p, const PulseAngles& angles, const TimingErrors& etas,
                                    const PulseRabi& rabi, bool with_measurement = false) {
    const auto g = stark_shifts(p).g_eff;
    if (g == 0.0) throw std::invalid_argument("scheme1: effective coupling is zero");
    const double t_exchange = units::pi / (2.0 * std::abs(g));
    PulseProgram prog;
    prog.timing_errors = etas;
    prog.steps = {
        step::Pulse{"pulse_ie", Level::i, Level::e, angles.theta0, angles.phi, rabi.Omega_prime, 0},
        step::Interact{1, t_exchange, 1},
        step::Decouple{},
        step::Pulse{"pulse_ge", Level::g, Level::e, angles.theta2, angles.phi_prime, rabi.Omega_double_prime, 2},
        step::Interact{2, t_exchange, 3},
        step::Decouple{},
        step::FixedPulse{"pulse_i_to_e", presets::i_to_e(), 0.0},
        step::FixedPulse{"pulse_ge_hadamard", presets::ge_hadamard(), 0.0},
    };
    if (with_measurement) {
        prog.steps.emplace_back(step::Measure{"scq"});
        prog.steps.emplace_back(step::Feedback{Level::e, "ens1"});
    }
    return prog;
}

/// Scheme one from |i>|0>|0> through the final Hadamard-type pulse
/// (pre-measurement). Pulse phases come from `angles`.
inline RunRecord scheme1_run(const SchemeOneParams& p, const PulseAngles& angles, const TimingErrors& etas,
                             Engine engine, std::optional<PulseRabi> rabi = std::nullopt, std::size_t mode_cutoff = 3) {
    angles.validate();
    etas.validate();
    const auto pulse_rabi = rabi.value_or(PulseRabi::fraction_of(stark_shifts(p).g_eff));
    const auto layout = scheme_one_layout(mode_cutoff);
    const auto initial = StateVector::basis(layout, {static_cast<std::size_t>(Level::i), 0, 0});
    return run_program(scheme1_program(p, angles, etas, pulse_rabi), initial, {p, engine, std::nullopt});
}

/// Angles with the phases taken from the parameter set.
inline PulseAngles angles_from(const SchemeOneParams& p, double theta0 = std::acos(1.0 / std::sqrt(3.0)),
                               double theta2 = units::pi / 4.0) {
    return {theta0, theta2, p.phi, p.phi_prime};
}

struct MeasurementResult {
    StateVector klm_state; ///< over (ens1, ens2)
    Level outcome = Level::g;
    double probability = 0.0;
};

/// Measure the qutrit of a post-step-6 state, drop it, and apply parity
/// feedback on ensemble 1 for outcome e. Both g and e then give the same
/// two-mode state.
inline MeasurementResult scheme1_measure_feedback(const StateVector& state, const OutcomeChoice& choice) {
    const auto& layout = state.layout();
    const auto q = layout.position("scq");
    const auto probs = detail::level_populations(state, "scq");
    const Level level = detail::resolve_outcome(choice, probs);
    double prob = 0.0;
    const auto projected = detail::project(state, "scq", level, prob);

    std::vector<Subsystem> rest;
    for (std::size_t k = 0; k < layout.size(); ++k)
        if (k != q) rest.push_back(layout.subsystems()[k]);
    const SpaceLayout modes(rest);
    CVector amps = CVector::Zero(static_cast<Eigen::Index>(modes.dimension()));
    for (std::size_t idx = 0; idx < layout.dimension(); ++idx) {
        auto digits = layout.decode(idx);
        if (digits[q] != static_cast<std::size_t>(level)) continue;
        digits.erase(digits.begin() + static_cast<std::ptrdiff_t>(q));
        amps(static_cast<Eigen::Index>(modes.encode(digits))) = projected[idx];
    }
    StateVector klm(modes, amps);
    if (level == Level::e) klm = embed(detail::parity(modes.at("ens1").dim), "ens1", modes).apply(klm);
    return {std::move(klm), level, prob};
}

// ---------------------------------------------------------------------------
// scheme two: conditional phase gate

inline SpaceLayout scheme_two_register(std::size_t n) {
    std::vector<Subsystem> subs;
    for (std::size_t k = 1; k <= n; ++k) subs.push_back(qutrit("scq" + std::to_string(k)));
    return SpaceLayout(std::move(subs));
}

/// |gg> -> e^{i phi}|gg> on (q1, q2); every other basis state is fixed.
inline Propagator cphase_ideal(double phi, const SpaceLayout& layout, const std::string& q1 = "scq1",
                               const std::string& q2 = "scq2") {
    const auto a = layout.position(q1), b = layout.position(q2);
    if (a == b) throw std::invalid_argument("cphase_ideal: qutrits must differ");
    const auto d = static_cast<Eigen::Index>(layout.dimension());
    CMatrix u = CMatrix::Identity(d, d);
    const auto g = static_cast<std::size_t>(Level::g);
    const Complex phase = std::exp(Complex(0.0, phi));
    for (std::size_t idx = 0; idx < layout.dimension(); ++idx) {
        const auto digits = layout.decode(idx);
        if (digits[a] == g && digits[b] == g) u(static_cast<Eigen::Index>(idx), static_cast<Eigen::Index>(idx)) = phase;
    }
    return {DenseOperator(layout, std::move(u)), 0.0};
}

/// phi = -t |Omega|^2 / (2 (Delta + delta)), with Omega_1 = Omega_2 = Omega.
inline double phase_for_gate_time(double t, const SchemeTwoParams& p) {
    return -t * p.Omega_1 * p.Omega_1 / (2.0 * (p.Delta() + p.delta()));
}

inline double gate_time_for_phase(double phi, const SchemeTwoParams& p) {
    if (p.Omega_1 == 0.0) throw std::invalid_argument("gate_time_for_phase: Omega must be nonzero");
    const double detuning = p.Delta() + p.delta();
    if (detuning == 0.0) throw std::invalid_argument("gate_time_for_phase: Delta + delta must be nonzero");
    const double t = -2.0 * phi * detuning / (p.Omega_1 * p.Omega_1);
    if (t < 0.0) throw std::invalid_argument("gate_time_for_phase: phase sign not reachable for this detuning");
    return t;
}

struct CPhaseNumericResult {
    double entangling_phase = 0.0;      ///< phi_gg + phi_ii - phi_gi - phi_ig, unwrapped in time
    double leakage = 0.0;               ///< max over branches of population outside computational x vacuum
    double survival = 1.0;              ///< min over branches of the final squared norm
    std::array<double, 4> branch_phases{}; ///< ii, ig, gi, gg (unwrapped)
};

/// Evolve |xy, 0> for x, y in {i, g} under the non-Hermitian two-qutrit
/// Hamiltonian and extract the gauge-invariant conditional phase.
inline CPhaseNumericResult cphase_numeric(const SchemeTwoParams& p, double t, std::size_t cutoff = 4,
                                          std::size_t substeps = 512) {
    if (t < 0.0) throw std::invalid_argument("cphase_numeric: negative time");
    if (substeps == 0) throw std::invalid_argument("cphase_numeric: substeps must be positive");
    const auto layout = scheme_two_layout(cutoff);
    const auto h = build_h_s2(p, layout);
    const CMatrix u = detail::expm_minus_i(h.matrix(), h.hermitian_hint(), t / static_cast<double>(substeps));

    constexpr std::array<std::array<std::size_t, 2>, 4> branches{{{0, 0}, {0, 1}, {1, 0}, {1, 1}}};
    std::array<Eigen::Index, 4> home{};
    std::array<CVector, 4> v;
    for (std::size_t k = 0; k < 4; ++k) {
        home[k] = static_cast<Eigen::Index>(layout.encode({branches[k][0], branches[k][1], 0}));
        v[k] = CVector::Zero(static_cast<Eigen::Index>(layout.dimension()));
        v[k](home[k]) = 1.0;
    }
    auto wrap = [](double x) { return std::remainder(x, units::two_pi); };

    CPhaseNumericResult r;
    std::array<double, 4> last{0.0, 0.0, 0.0, 0.0};
    double last_inv = 0.0;
    for (std::size_t s = 0; s < substeps; ++s) {
        for (auto& vk : v) vk = u * vk;
        std::array<Complex, 4> amp{};
        for (std::size_t k = 0; k < 4; ++k) {
            amp[k] = v[k](home[k]);
            const double w = std::arg(amp[k]);
            r.branch_phases[k] += wrap(w - last[k]);
            last[k] = w;
        }
        const double inv = std::arg(amp[3] * amp[0] / (amp[1] * amp[2]));
        r.entangling_phase += wrap(inv - last_inv);
        last_inv = inv;
    }

    r.leakage = 0.0;
    r.survival = 1.0;
    for (std::size_t k = 0; k < 4; ++k) {
        if (!v[k].allFinite()) throw NumericalError("cphase_numeric: non-finite amplitudes");
        double computational = 0.0;
        for (const auto& b : branches) computational += std::norm(v[k](static_cast<Eigen::Index>(layout.encode({b[0], b[1], 0}))));
        const double total = v[k].squaredNorm();
        r.leakage = std::max(r.leakage, total - computational);
        r.survival = std::min(r.survival, total);
    }
    if (r.leakage > 0.5)
        throw RegimeError("cphase_numeric: leakage " + std::to_string(r.leakage) + " exceeds 0.5; parameters violate the gate limits");
    return r;
}

// ---------------------------------------------------------------------------
// scheme two: KLM recursion

/// Trace of the n-qubit recursion. Stages are snapshots on the full n-qutrit register.
inline RunRecord scheme2_n_qubit_trace(std::size_t n, double gate_phase = -1.5 * units::pi) {
    if (n < 2) throw std::invalid_argument("scheme2_n_qubit: n must be >= 2");
    const auto layout = scheme_two_register(n);
    auto label = [](std::size_t k) { return "scq" + std::to_string(k); };

    RunRecord rec;
    rec.push("initial", StateVector::basis_index(layout, 0), 0.0); // all qutrits in |i>
    auto apply = [&](const Propagator& u, std::string name) { rec.push(std::move(name), u.apply(rec.states.back()), u.duration()); };

    apply(local_map(presets::ig_superpose(), layout, label(1)), "superpose_" + label(1));
    apply(local_map(presets::ig_superpose(), layout, label(2)), "superpose_" + label(2));
    apply(cphase_ideal(gate_phase, layout, label(1), label(2)), "cphase_" + label(1) + "_" + label(2));
    apply(local_map(presets::ig_recombine(), layout, label(2)), "recombine_" + label(2));
    for (std::size_t k = 3; k <= n; ++k) {
        rec.push("decouple_1_to_" + std::to_string(k - 2), rec.states.back(), 0.0);
        apply(local_map(presets::ig_superpose(), layout, label(k)), "superpose_" + label(k));
        apply(cphase_ideal(gate_phase, layout, label(k - 1), label(k)), "cphase_" + label(k - 1) + "_" + label(k));
        apply(local_map(presets::ig_recombine(), layout, label(k)), "recombine_" + label(k));
    }
    return rec;
}

inline StateVector scheme2_n_qubit(std::size_t n, double gate_phase = -1.5 * units::pi) {
    return scheme2_n_qubit_trace(n, gate_phase).final_state();
}

inline StateVector scheme2_two_qubit(double gate_phase = -1.5 * units::pi) { return scheme2_n_qubit(2, gate_phase); }

/// Printed closed-form coefficients on the basis |g>^j |i>^{n-j} (leading
/// qutrits in |g>). Not renormalized.
inline StateVector klm_closed_form(std::size_t n) {
    if (n < 2) throw std::invalid_argument("klm_closed_form: n must be >= 2");
    const auto layout = scheme_two_register(n);
    const Complex im(0.0, 1.0);
    const Complex base = im - 1.0;
    const double nd = static_cast<double>(n);
    const bool even = n % 2 == 0;

    std::vector<Complex> alpha(n + 1);
    alpha[0] = even ? std::pow(2.0, nd / 2.0) : std::pow(2.0, (nd - 1.0) / 2.0);
    for (std::size_t j = 1; j < n; ++j) {
        const double jd = static_cast<double>(j);
        const double mag = even ? std::pow(2.0, nd / 2.0 - jd + 1.0) : std::pow(2.0, (nd + 1.0) / 2.0 - jd);
        alpha[j] = -mag * std::pow(base, static_cast<int>(j) - 2);
    }
    const double top = even ? std::pow(2.0, 2.0 - nd / 2.0) : std::pow(2.0, (3.0 - nd) / 2.0);
    alpha[n] = -top * im * std::pow(base, static_cast<int>(n) - 3);
    const double prefactor = even ? std::pow(std::sqrt(2.0), -(nd + 1.0)) : std::pow(std::sqrt(2.0), -nd);

    CVector amps = CVector::Zero(static_cast<Eigen::Index>(layout.dimension()));
    for (std::size_t j = 0; j <= n; ++j) {
        std::vector<std::size_t> digits(n, static_cast<std::size_t>(Level::i));
        for (std::size_t k = 0; k < j; ++k) digits[k] = static_cast<std::size_t>(Level::g);
        amps(static_cast<Eigen::Index>(layout.encode(digits))) = prefactor * alpha[j];
    }
    return {layout, std::move(amps)};
}

} // namespace klm
