#pragma once

// Run configuration parsing and report serialization.
//
// Configs are JSON. A frequency key `name` may be given in rad/s as `name`
// or in units of 2 pi x MHz as `name_x2pi_MHz`; the resolved config always
// carries rad/s under the plain name.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>
#include <openssl/evp.h>

#include "klm/analysis.hpp"
#include "klm/hilbert.hpp"
#include "klm/model.hpp"
#include "klm/protocol.hpp"
#include "klm/units.hpp"

namespace klm::io {

using Json = nlohmann::ordered_json;

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline std::string sha256_hex(const std::string& bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256: digest failed");
    std::ostringstream out;
    for (unsigned int k = 0; k < len; ++k) out << std::hex << std::setw(2) << std::setfill('0') << int(digest[k]);
    return out.str();
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline Json parse_json(const std::string& text) {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
}

/// Reads one JSON object, remembering which keys were used so leftovers
/// can be rejected.
class Section {
public:
    Section(const Json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
        if (!obj_.is_object()) throw ConfigError("'" + where() + "' must be an object");
    }

    bool has(const std::string& key) const { return obj_.contains(key); }

    double number(const std::string& key) {
        const auto& v = require(key);
        if (!v.is_number()) throw ConfigError("key '" + full(key) + "' must be a number");
        const double x = v.get<double>();
        if (!std::isfinite(x)) throw ConfigError("key '" + full(key) + "' must be finite");
        return x;
    }

    double number_or(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }

    std::uint64_t unsigned_integer(const std::string& key) {
        const auto& v = require(key);
        const bool ok = v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
        if (!ok) throw ConfigError("key '" + full(key) + "' must be a non-negative integer");
        return v.get<std::uint64_t>();
    }

    std::uint64_t unsigned_or(const std::string& key, std::uint64_t fallback) {
        return has(key) ? unsigned_integer(key) : fallback;
    }

    std::string string_or(const std::string& key, const std::string& fallback) {
        if (!has(key)) return fallback;
        const auto& v = require(key);
        if (!v.is_string()) throw ConfigError("key '" + full(key) + "' must be a string");
        return v.get<std::string>();
    }

    /// Angular frequency in rad/s from either `key` or `key_x2pi_MHz`.
    double frequency(const std::string& key) {
        const std::string scaled = key + "_x2pi_MHz";
        const bool plain = has(key), mhz = has(scaled);
        if (plain && mhz) throw ConfigError("key '" + full(key) + "' given twice (rad/s and x2pi_MHz)");
        if (mhz) return units::mhz_2pi(number(scaled));
        if (plain) return number(key);
        throw ConfigError("missing required key '" + full(key) + "' (or '" + full(scaled) + "')");
    }

    double frequency_or(const std::string& key, double fallback) {
        return has(key) || has(key + "_x2pi_MHz") ? frequency(key) : fallback;
    }

    bool has_frequency(const std::string& key) const { return has(key) || has(key + "_x2pi_MHz"); }

    Section child(const std::string& key) { return {require(key), full(key)}; }

    void finish() const {
        for (const auto& item : obj_.items())
            if (!used_.count(item.key())) throw ConfigError("unknown key '" + full(item.key()) + "'");
    }

private:
    const Json& require(const std::string& key) {
        if (!obj_.contains(key)) throw ConfigError("missing required key '" + full(key) + "'");
        used_.insert(key);
        return obj_.at(key);
    }

    std::string where() const { return path_.empty() ? "<root>" : path_; }
    std::string full(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    const Json& obj_;
    std::string path_;
    std::set<std::string> used_;
};

// ---------------------------------------------------------------------------
// parameter sections

inline SchemeOneParams parse_scheme_one_params(Section s) {
    SchemeOneParams p;
    p.omega_s = s.frequency("omega_s");
    p.omega_d = s.frequency("omega_d");
    p.omega_m = s.frequency("omega_m");
    p.omega_c = s.frequency("omega_c");
    p.Omega = s.frequency("Omega");
    p.g_s = s.frequency("g_s");
    p.g_m = s.frequency("g_m");
    p.N = s.unsigned_integer("N");
    if (p.N == 0) throw ConfigError("key 'N' must be at least 1");
    p.phi = s.number_or("phi", 0.0);
    p.phi_prime = s.number_or("phi_prime", 0.0);
    s.finish();
    return p;
}

inline Json to_json(const SchemeOneParams& p) {
    return Json{{"omega_s", p.omega_s}, {"omega_d", p.omega_d}, {"omega_m", p.omega_m}, {"omega_c", p.omega_c},
                {"Omega", p.Omega},     {"g_s", p.g_s},         {"g_m", p.g_m},         {"N", p.N},
                {"phi", p.phi},         {"phi_prime", p.phi_prime}};
}

/// Per-qutrit quantities accept a shared key (`g`) or both indexed keys (`g_1`, `g_2`).
inline std::pair<double, double> pair_frequency(Section& s, const std::string& key) {
    const bool shared = s.has_frequency(key);
    const bool one = s.has_frequency(key + "_1"), two = s.has_frequency(key + "_2");
    if (shared && (one || two)) throw ConfigError("key '" + key + "' given both shared and per-qutrit");
    if (shared) {
        const double v = s.frequency(key);
        return {v, v};
    }
    if (!one && !two) throw ConfigError("missing required key '" + key + "' (or '" + key + "_1' and '" + key + "_2')");
    return {s.frequency(key + "_1"), s.frequency(key + "_2")};
}

inline SchemeTwoParams parse_scheme_two_params(Section s) {
    SchemeTwoParams p;
    p.omega_e = s.frequency("omega_e");
    p.omega_g = s.frequency("omega_g");
    p.omega_c = s.frequency("omega_c");
    p.omega_d = s.frequency("omega_d");
    std::tie(p.Omega_1, p.Omega_2) = pair_frequency(s, "Omega");
    std::tie(p.g_1, p.g_2) = pair_frequency(s, "g");
    std::tie(p.Gamma_1, p.Gamma_2) = pair_frequency(s, "Gamma");
    p.kappa = s.frequency("kappa");
    s.finish();
    if (p.Gamma_1 < 0.0 || p.Gamma_2 < 0.0 || p.kappa < 0.0) throw ConfigError("decay rates must be non-negative");
    return p;
}

inline Json to_json(const SchemeTwoParams& p) {
    return Json{{"omega_e", p.omega_e}, {"omega_g", p.omega_g}, {"omega_c", p.omega_c}, {"omega_d", p.omega_d},
                {"Omega_1", p.Omega_1}, {"Omega_2", p.Omega_2}, {"g_1", p.g_1},         {"g_2", p.g_2},
                {"Gamma_1", p.Gamma_1}, {"Gamma_2", p.Gamma_2}, {"kappa", p.kappa}};
}

inline TimingErrors parse_etas(Section s, TimingErrors e = {}) {
    e.eta_0 = s.number_or("eta_0", e.eta_0);
    e.eta_1 = s.number_or("eta_1", e.eta_1);
    e.eta_2 = s.number_or("eta_2", e.eta_2);
    e.eta_3 = s.number_or("eta_3", e.eta_3);
    s.finish();
    try {
        e.validate();
    } catch (const std::invalid_argument& err) {
        throw ConfigError(err.what());
    }
    return e;
}

inline Json to_json(const TimingErrors& e) {
    return Json{{"eta_0", e.eta_0}, {"eta_1", e.eta_1}, {"eta_2", e.eta_2}, {"eta_3", e.eta_3}};
}

// ---------------------------------------------------------------------------
// run configs

enum class MeasurementMode { none, sample, g, e, i };

struct SchemeOneConfig {
    SchemeOneParams params;
    bool resonant_drive = false;
    PulseAngles angles;
    TimingErrors etas;
    Engine engine = Engine::closed_form;
    std::size_t mode_cutoff = 3;
    double rabi_fraction = 0.1;
    MeasurementMode measurement = MeasurementMode::sample;
    std::uint64_t seed = 0;
};

enum class GateMode { ideal, numeric };

struct SchemeTwoConfig {
    SchemeTwoParams params;
    std::size_t n = 2;
    double gate_phase = -1.5 * units::pi;
    GateMode mode = GateMode::ideal;
    std::size_t photon_cutoff = 4;
    std::size_t substeps = 512;
    double pulse_duration = units::ns(4.0);
};

struct SweepConfig {
    SweepSpec spec;
    std::optional<SchemeOneParams> params;
};

struct ReportConfig {
    SchemeOneParams scheme_one = reference_scheme_one();
    SchemeTwoParams scheme_two = reference_scheme_two();
    FeasibilityInputs inputs;
};

inline Engine parse_engine_s1(const std::string& name) {
    if (name == "closed-form") return Engine::closed_form;
    if (name == "effective-numeric") return Engine::effective_numeric;
    throw ConfigError("engine '" + name + "' does not apply to scheme one (closed-form | effective-numeric)");
}

inline const char* engine_name(Engine e) { return e == Engine::closed_form ? "closed-form" : "effective-numeric"; }

inline GateMode parse_engine_s2(const std::string& name) {
    if (name == "ideal-gate") return GateMode::ideal;
    if (name == "numeric-gate") return GateMode::numeric;
    throw ConfigError("engine '" + name + "' does not apply to scheme two (ideal-gate | numeric-gate)");
}

inline const char* engine_name(GateMode m) { return m == GateMode::ideal ? "ideal-gate" : "numeric-gate"; }

inline MeasurementMode parse_measurement(const std::string& name) {
    if (name == "none") return MeasurementMode::none;
    if (name == "sample") return MeasurementMode::sample;
    if (name == "g") return MeasurementMode::g;
    if (name == "e") return MeasurementMode::e;
    if (name == "i") return MeasurementMode::i;
    throw ConfigError("key 'measurement' must be one of none, sample, g, e, i");
}

inline const char* measurement_name(MeasurementMode m) {
    switch (m) {
    case MeasurementMode::none: return "none";
    case MeasurementMode::sample: return "sample";
    case MeasurementMode::g: return "g";
    case MeasurementMode::e: return "e";
    case MeasurementMode::i: return "i";
    }
    return "none";
}

inline void require_scheme(Section& root, const std::string& want) {
    const auto got = root.string_or("scheme", "");
    if (got.empty()) throw ConfigError("missing required key 'scheme'");
    if (got != want) throw ConfigError("key 'scheme' is '" + got + "' but this command needs '" + want + "'");
}

inline std::size_t as_size(std::uint64_t v) { return static_cast<std::size_t>(v); }

inline SchemeOneConfig parse_scheme_one(const Json& doc) {
    Section root(doc, "");
    require_scheme(root, "one");
    SchemeOneConfig c;
    c.params = parse_scheme_one_params(root.child("params"));
    const auto drive = root.string_or("drive", "as-given");
    if (drive != "as-given" && drive != "resonant") throw ConfigError("key 'drive' must be 'as-given' or 'resonant'");
    c.resonant_drive = drive == "resonant";
    c.angles = angles_from(c.params);
    if (root.has("angles")) {
        auto a = root.child("angles");
        c.angles.theta0 = a.number_or("theta0", c.angles.theta0);
        c.angles.theta2 = a.number_or("theta2", c.angles.theta2);
        a.finish();
    }
    try {
        c.angles.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (root.has("etas")) c.etas = parse_etas(root.child("etas"));
    c.engine = parse_engine_s1(root.string_or("engine", "closed-form"));
    c.mode_cutoff = as_size(root.unsigned_or("mode_cutoff", 3));
    if (c.mode_cutoff < 2) throw ConfigError("key 'mode_cutoff' must be at least 2");
    c.rabi_fraction = root.number_or("pulse_rabi_fraction", 0.1);
    if (!(c.rabi_fraction > 0.0)) throw ConfigError("key 'pulse_rabi_fraction' must be positive");
    c.measurement = parse_measurement(root.string_or("measurement", "sample"));
    c.seed = root.unsigned_or("seed", 0);
    root.finish();
    return c;
}

inline Json resolved(const SchemeOneConfig& c) {
    return Json{{"scheme", "one"},
                {"params", to_json(c.params)},
                {"drive", c.resonant_drive ? "resonant" : "as-given"},
                {"angles", {{"theta0", c.angles.theta0}, {"theta2", c.angles.theta2}}},
                {"etas", to_json(c.etas)},
                {"engine", engine_name(c.engine)},
                {"mode_cutoff", c.mode_cutoff},
                {"pulse_rabi_fraction", c.rabi_fraction},
                {"measurement", measurement_name(c.measurement)},
                {"seed", c.seed}};
}

inline SchemeTwoConfig parse_scheme_two(const Json& doc) {
    Section root(doc, "");
    require_scheme(root, "two");
    SchemeTwoConfig c;
    c.params = parse_scheme_two_params(root.child("params"));
    c.n = as_size(root.unsigned_or("n", 2));
    if (c.n < 2) throw ConfigError("key 'n' must be at least 2");
    c.gate_phase = root.number_or("gate_phase", c.gate_phase);
    c.mode = parse_engine_s2(root.string_or("engine", "ideal-gate"));
    c.photon_cutoff = as_size(root.unsigned_or("photon_cutoff", 4));
    if (c.photon_cutoff < 1) throw ConfigError("key 'photon_cutoff' must be at least 1");
    c.substeps = as_size(root.unsigned_or("substeps", 512));
    if (c.substeps < 1) throw ConfigError("key 'substeps' must be at least 1");
    c.pulse_duration = units::ns(root.number_or("pulse_duration_ns", 4.0));
    if (c.pulse_duration < 0.0) throw ConfigError("key 'pulse_duration_ns' must be non-negative");
    root.finish();
    return c;
}

inline Json resolved(const SchemeTwoConfig& c) {
    return Json{{"scheme", "two"},
                {"params", to_json(c.params)},
                {"n", c.n},
                {"gate_phase", c.gate_phase},
                {"engine", engine_name(c.mode)},
                {"photon_cutoff", c.photon_cutoff},
                {"substeps", c.substeps},
                {"pulse_duration_ns", c.pulse_duration * 1e9}};
}

inline SweepAxis parse_axis(Section s, SweepAxis a) {
    a.eta_index = as_size(s.unsigned_or("eta", a.eta_index));
    a.min = s.number_or("min", a.min);
    a.max = s.number_or("max", a.max);
    a.points = as_size(s.unsigned_or("points", a.points));
    s.finish();
    if (a.eta_index > 3) throw ConfigError("sweep axis 'eta' must be 0..3");
    if (a.points == 0) throw ConfigError("sweep axis 'points' must be positive");
    return a;
}

inline Json to_json(const SweepAxis& a) {
    return Json{{"eta", a.eta_index}, {"min", a.min}, {"max", a.max}, {"points", a.points}};
}

inline SweepConfig parse_sweep(const Json& doc) {
    Section root(doc, "");
    require_scheme(root, "one");
    SweepConfig c;
    if (root.has("params")) c.params = parse_scheme_one_params(root.child("params"));
    if (c.params) {
        c.spec.angles.phi = c.params->phi;
        c.spec.angles.phi_prime = c.params->phi_prime;
    }
    if (root.has("angles")) {
        auto a = root.child("angles");
        c.spec.angles.theta0 = a.number_or("theta0", c.spec.angles.theta0);
        c.spec.angles.theta2 = a.number_or("theta2", c.spec.angles.theta2);
        a.finish();
    }
    if (root.has("sweep")) {
        auto s = root.child("sweep");
        if (s.has("axis1")) c.spec.axis1 = parse_axis(s.child("axis1"), c.spec.axis1);
        if (s.has("axis2")) c.spec.axis2 = parse_axis(s.child("axis2"), c.spec.axis2);
        if (s.has("fixed")) c.spec.fixed = parse_etas(s.child("fixed"));
        s.finish();
    }
    root.finish();
    if (c.spec.axis1.eta_index == c.spec.axis2.eta_index) throw ConfigError("sweep axes must use different etas");
    try {
        c.spec.angles.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return c;
}

inline Json resolved(const SweepConfig& c) {
    Json j{{"scheme", "one"}};
    if (c.params) j["params"] = to_json(*c.params);
    j["angles"] = {{"theta0", c.spec.angles.theta0}, {"theta2", c.spec.angles.theta2},
                   {"phi", c.spec.angles.phi},       {"phi_prime", c.spec.angles.phi_prime}};
    j["sweep"] = {{"axis1", to_json(c.spec.axis1)}, {"axis2", to_json(c.spec.axis2)}, {"fixed", to_json(c.spec.fixed)}};
    return j;
}

inline ReportConfig parse_report(const Json& doc) {
    Section root(doc, "");
    ReportConfig c;
    if (root.has("scheme_one")) c.scheme_one = parse_scheme_one_params(root.child("scheme_one"));
    if (root.has("scheme_two")) c.scheme_two = parse_scheme_two_params(root.child("scheme_two"));
    if (root.has("feasibility")) {
        auto f = root.child("feasibility");
        c.inputs.gamma_scq = f.frequency_or("gamma_scq", c.inputs.gamma_scq);
        c.inputs.gamma_m = f.frequency_or("gamma_m", c.inputs.gamma_m);
        c.inputs.rabi_fraction = f.number_or("pulse_rabi_fraction", c.inputs.rabi_fraction);
        c.inputs.scheme_two_pulse_duration = units::ns(f.number_or("pulse_duration_ns", c.inputs.scheme_two_pulse_duration * 1e9));
        c.inputs.gate_phase = f.number_or("gate_phase", c.inputs.gate_phase);
        c.inputs.n_qubits = as_size(f.unsigned_or("n_qubits", c.inputs.n_qubits));
        f.finish();
    }
    root.finish();
    if (c.inputs.n_qubits < 2) throw ConfigError("key 'feasibility.n_qubits' must be at least 2");
    if (!(c.inputs.rabi_fraction > 0.0)) throw ConfigError("key 'feasibility.pulse_rabi_fraction' must be positive");
    return c;
}

inline Json resolved(const ReportConfig& c) {
    return Json{{"scheme_one", to_json(c.scheme_one)},
                {"scheme_two", to_json(c.scheme_two)},
                {"feasibility",
                 {{"gamma_scq", c.inputs.gamma_scq},
                  {"gamma_m", c.inputs.gamma_m},
                  {"pulse_rabi_fraction", c.inputs.rabi_fraction},
                  {"pulse_duration_ns", c.inputs.scheme_two_pulse_duration * 1e9},
                  {"gate_phase", c.inputs.gate_phase},
                  {"n_qubits", c.inputs.n_qubits}}}};
}

// ---------------------------------------------------------------------------
// serialization

inline Json complex_json(Complex z) { return Json::array({z.real(), z.imag()}); }

/// Nonzero amplitudes as [{"basis": "|g,1,0>", "amplitude": [re, im]}, ...].
inline Json amplitudes_json(const StateVector& psi, double threshold = 1e-14) {
    Json out = Json::array();
    for (std::size_t k = 0; k < psi.dimension(); ++k)
        if (std::abs(psi[k]) > threshold)
            out.push_back({{"basis", psi.layout().basis_label(k)}, {"amplitude", complex_json(psi[k])}});
    return out;
}

inline Json layout_json(const SpaceLayout& layout) {
    Json out = Json::array();
    for (const auto& s : layout.subsystems()) out.push_back({{"label", s.label}, {"dim", s.dim}});
    return out;
}

inline Json state_json(const StateVector& psi) {
    return Json{{"layout", layout_json(psi.layout())}, {"norm", psi.norm()}, {"amplitudes", amplitudes_json(psi)}};
}

inline Json warnings_json(const std::vector<std::string>& w) {
    Json out = Json::array();
    for (const auto& s : w) out.push_back(s);
    return out;
}

/// JSON text with a trailing newline; the output is byte-stable for equal inputs.
inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

} // namespace klm::io
