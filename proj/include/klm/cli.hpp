#pragma once

// Subcommand bodies for the command-line front end. Each takes a parsed
// config and returns the report text; argument handling, file output and
// exit codes live in the executable.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "klm/analysis.hpp"
#include "klm/errors.hpp"
#include "klm/io.hpp"
#include "klm/protocol.hpp"

namespace klm::cli {

using io::Json;

enum ExitCode : int { ok = 0, validation_failure = 1, config_error = 2, numerical_failure = 3, regime_violation = 4 };

namespace detail {

inline Json run_record_json(const RunRecord& rec) {
    Json steps = Json::array();
    for (std::size_t k = 0; k < rec.states.size(); ++k)
        steps.push_back({{"name", rec.step_names[k]},
                         {"duration_s", rec.durations[k]},
                         {"amplitudes", io::amplitudes_json(rec.states[k])}});
    return steps;
}

inline void require_finite(const StateVector& psi, const char* what) {
    if (!psi.amplitudes().allFinite()) throw NumericalError(std::string(what) + ": non-finite amplitudes");
}

inline OutcomeChoice outcome_choice(const io::SchemeOneConfig& c) {
    switch (c.measurement) {
    case io::MeasurementMode::g: return Level::g;
    case io::MeasurementMode::e: return Level::e;
    case io::MeasurementMode::i: return Level::i;
    default: return SampledOutcome{c.seed};
    }
}

} // namespace detail

inline Json scheme1(const io::SchemeOneConfig& cfg, const std::string& config_hash) {
    SchemeOneParams p = cfg.params;
    if (cfg.resonant_drive) p = with_resonant_drive(p);
    const auto shifts = stark_shifts(p);
    if (shifts.g_eff == 0.0) throw std::invalid_argument("scheme one: effective coupling is zero");
    const auto rabi = PulseRabi::fraction_of(shifts.g_eff, cfg.rabi_fraction);

    const auto rec = scheme1_run(p, cfg.angles, cfg.etas, cfg.engine, rabi, cfg.mode_cutoff);
    const auto ideal = scheme1_run(p, cfg.angles, TimingErrors{}, cfg.engine, rabi, cfg.mode_cutoff);
    detail::require_finite(rec.final_state(), "scheme1");

    auto warnings = validity_warnings(p);
    const double residual = resonance_residual(p);
    if (std::abs(residual) > 1e-6 * std::abs(shifts.g_eff))
        warnings.push_back("effective exchange is off resonance by " + format_double(residual) +
                           " rad/s; the closed-form engine assumes resonance");

    Json report{{"command", "scheme1"}, {"config_sha256", config_hash}, {"config", io::resolved(cfg)}};
    report["derived"] = {{"lambda_sd", shifts.lambda_sd}, {"lambda_sc", shifts.lambda_sc},
                         {"lambda_mc", shifts.lambda_mc}, {"lambda_sm", shifts.lambda_sm},
                         {"g_eff", shifts.g_eff},         {"g_eff_x2pi_MHz", units::to_mhz_2pi(shifts.g_eff)},
                         {"Omega_used", p.Omega},         {"resonance_residual", residual},
                         {"pulse_rabi", rabi.Omega_prime}};
    report["layout"] = io::layout_json(rec.final_state().layout());
    report["steps"] = detail::run_record_json(rec);
    report["total_time_s"] = rec.total_time;
    report["pre_measurement_state"] = io::state_json(rec.final_state());
    report["fidelity_vs_ideal"] = overlap_fidelity(ideal.final_state(), rec.final_state());
    report["fidelity_closed_form"] = fidelity_closed_form(cfg.etas, cfg.angles);

    if (cfg.measurement != io::MeasurementMode::none) {
        const auto m = scheme1_measure_feedback(rec.final_state(), detail::outcome_choice(cfg));
        detail::require_finite(m.klm_state, "scheme1 measurement");
        Json meas{{"mode", io::measurement_name(cfg.measurement)},
                  {"outcome", std::string(1, level_name(m.outcome))},
                  {"probability", m.probability},
                  {"feedback", m.outcome == Level::e ? "parity on ens1" : "none"}};
        if (cfg.measurement == io::MeasurementMode::sample) meas["seed"] = cfg.seed;
        report["measurement"] = meas;
        report["klm_state"] = io::state_json(m.klm_state);
        const auto reference = scheme1_measure_feedback(ideal.final_state(), Level::g).klm_state;
        report["klm_fidelity_vs_ideal"] = overlap_fidelity(reference, m.klm_state);
    }
    report["warnings"] = io::warnings_json(warnings);
    return report;
}

inline Json scheme2(const io::SchemeTwoConfig& cfg, const std::string& config_hash) {
    const auto& p = cfg.params;
    Json report{{"command", "scheme2"}, {"config_sha256", config_hash}, {"config", io::resolved(cfg)}};

    std::optional<double> gate_time;
    const double detuning = p.Delta() + p.delta();
    if (p.Omega_1 != 0.0 && detuning != 0.0 && cfg.gate_phase * detuning <= 0.0)
        gate_time = gate_time_for_phase(cfg.gate_phase, p);

    double phase = cfg.gate_phase;
    if (cfg.mode == io::GateMode::numeric) {
        if (!gate_time) throw std::invalid_argument("numeric gate: the requested phase is not reachable with these parameters");
        const auto r = cphase_numeric(p, *gate_time, cfg.photon_cutoff, cfg.substeps);
        phase = r.entangling_phase;
        report["gate"] = {{"gate_time_s", *gate_time},
                          {"target_phase", cfg.gate_phase},
                          {"entangling_phase", r.entangling_phase},
                          {"relative_phase_error", std::abs(r.entangling_phase - cfg.gate_phase) / std::abs(cfg.gate_phase)},
                          {"leakage", r.leakage},
                          {"survival", r.survival},
                          {"branch_phases",
                           {{"ii", r.branch_phases[0]}, {"ig", r.branch_phases[1]}, {"gi", r.branch_phases[2]}, {"gg", r.branch_phases[3]}}}};
    } else {
        report["gate"] = {{"gate_time_s", gate_time ? Json(*gate_time) : Json(nullptr)}, {"phase", cfg.gate_phase}};
    }

    const auto trace = scheme2_n_qubit_trace(cfg.n, phase);
    detail::require_finite(trace.final_state(), "scheme2");
    const auto closed = klm_closed_form(cfg.n);
    report["steps"] = detail::run_record_json(trace);
    report["final_state"] = io::state_json(trace.final_state());
    report["closed_form"] = {{"state", io::state_json(closed)},
                             {"overlap", overlap_fidelity(closed, trace.final_state())},
                             {"norm", closed.norm()}};
    if (gate_time) {
        const double two = *gate_time + 2.0 * cfg.pulse_duration;
        report["timing"] = {{"gate_time_s", *gate_time},
                            {"pulse_duration_s", cfg.pulse_duration},
                            {"two_qubit_total_s", two},
                            {"n_qubit_total_s", two * static_cast<double>(cfg.n - 1)},
                            {"assumption", "each step adds two single-qutrit pulses of pulse_duration_ns"}};
    }
    report["warnings"] = io::warnings_json(validity_warnings(p));
    return report;
}

struct SweepOutput {
    std::string csv;
    Json sidecar;
};

inline SweepOutput sweep(const io::SweepConfig& cfg, const std::string& config_hash) {
    const auto grid = klm::sweep(cfg.spec);
    Json corners = Json::array();
    auto ends = [](std::size_t points) {
        return points == 1 ? std::vector<std::size_t>{0} : std::vector<std::size_t>{0, points - 1};
    };
    for (std::size_t i : ends(grid.axis1.points))
        for (std::size_t j : ends(grid.axis2.points)) {
            Json c;
            c[grid.axis1.name()] = grid.axis1.value(i);
            c[grid.axis2.name()] = grid.axis2.value(j);
            c["fidelity"] = grid.at(i, j);
            corners.push_back(c);
        }
    Json side{{"command", "sweep"},
              {"config_sha256", config_hash},
              {"config", io::resolved(cfg)},
              {"columns", {grid.axis1.name(), grid.axis2.name(), "fidelity"}},
              {"rows", grid.axis1.points * grid.axis2.points},
              {"corners", corners},
              {"min_fidelity", grid.results.minCoeff()},
              {"max_fidelity", grid.results.maxCoeff()}};
    return {to_csv(grid), side};
}

inline Json report(const io::ReportConfig& cfg, const std::string& config_hash) {
    const auto r = feasibility_report(cfg.scheme_one, cfg.scheme_two, cfg.inputs);
    const auto& s = r.shifts;
    Json out{{"command", "report"},
             {"config_sha256", config_hash.empty() ? Json(nullptr) : Json(config_hash)},
             {"config", io::resolved(cfg)}};
    out["scheme_one"] = {
        {"coupling_chain",
         {{"delta_s", cfg.scheme_one.delta_s()},
          {"delta_m", cfg.scheme_one.delta_m()},
          {"lambda_sm", s.lambda_sm},
          {"sqrt_N", std::sqrt(static_cast<double>(cfg.scheme_one.N))},
          {"g_eff", s.g_eff},
          {"g_eff_x2pi_MHz", units::to_mhz_2pi(s.g_eff)}}},
        {"stark_shifts", {{"lambda_sd", s.lambda_sd}, {"lambda_sc", s.lambda_sc}, {"N_lambda_mc", static_cast<double>(cfg.scheme_one.N) * s.lambda_mc}}},
        {"resonance_residual", r.resonance_residual},
        {"gamma_over_g", r.gamma_over_g},
        {"gamma_m_over_g", r.gamma_m_over_g},
        {"timing_budget_s",
         {{"t0", r.budget.t0}, {"t1", r.budget.t1}, {"t2", r.budget.t2}, {"t3", r.budget.t3},
          {"t5", r.budget.t5}, {"t6", r.budget.t6}, {"total", r.budget.total}}},
        {"warnings", io::warnings_json(r.scheme_one_warnings)}};
    out["scheme_two"] = {{"kappa_over_g", r.kappa_over_g},
                         {"Gamma_over_g", r.Gamma_over_g},
                         {"gate_time_s", r.gate_time},
                         {"two_qubit_total_s", r.two_qubit_total},
                         {"n_qubits", cfg.inputs.n_qubits},
                         {"n_qubit_total_s", r.n_qubit_total},
                         {"n_qubit_total_rounded_s", r.n_qubit_total_rounded},
                         {"warnings", io::warnings_json(r.scheme_two_warnings)}};
    Json limits = Json::array();
    for (const auto& l : r.limits)
        limits.push_back({{"name", l.name}, {"value", l.value}, {"threshold", l.threshold}, {"status", l.pass ? "pass" : "warn"}});
    out["limits"] = limits;
    Json quoted = Json::array();
    for (const auto& q : r.quoted)
        quoted.push_back({{"name", q.name}, {"quoted", q.quoted}, {"computed", q.computed}, {"unit", q.unit}});
    out["quoted_vs_computed"] = quoted;
    out["assumptions"] = {"steps 5 and 6 of scheme one are instantaneous",
                          "pulse Rabi frequencies are pulse_rabi_fraction x g_eff",
                          "each scheme-two step adds two single-qutrit pulses of pulse_duration_ns"};
    return out;
}

} // namespace klm::cli
