// klm_cli: run the two KLM preparation schemes, fidelity sweeps, the
// feasibility report and the built-in invariant suite.
//
// Exit codes: 0 ok, 1 validation failure, 2 config error, 3 numerical
// failure, 4 regime violation.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "klm/cli.hpp"
#include "klm/errors.hpp"
#include "klm/io.hpp"
#include "klm/validation.hpp"

namespace {

using klm::cli::ExitCode;
using klm::io::ConfigError;
using klm::io::Json;

struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string engine;
};

void write_text(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::cout << text;
        std::cout.flush();
        return;
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw ConfigError("cannot write '" + path + "'");
    f << text;
    if (!f) throw ConfigError("failed writing '" + path + "'");
}

struct LoadedConfig {
    Json doc;
    std::string hash;
};

LoadedConfig load(const Options& o) {
    if (o.config.empty()) throw ConfigError("--config is required for this command");
    const auto bytes = klm::io::read_file(o.config);
    return {klm::io::parse_json(bytes), klm::io::sha256_hex(bytes)};
}

int run_scheme1(const Options& o) {
    const auto c = load(o);
    auto cfg = klm::io::parse_scheme_one(c.doc);
    if (!o.engine.empty()) cfg.engine = klm::io::parse_engine_s1(o.engine);
    if (o.seed) {
        cfg.seed = *o.seed;
        if (cfg.measurement == klm::io::MeasurementMode::none) cfg.measurement = klm::io::MeasurementMode::sample;
    }
    write_text(o.out, klm::io::dump(klm::cli::scheme1(cfg, c.hash)));
    return ExitCode::ok;
}

int run_scheme2(const Options& o) {
    const auto c = load(o);
    auto cfg = klm::io::parse_scheme_two(c.doc);
    if (!o.engine.empty()) cfg.mode = klm::io::parse_engine_s2(o.engine);
    if (o.seed) throw ConfigError("--seed does not apply to scheme2");
    write_text(o.out, klm::io::dump(klm::cli::scheme2(cfg, c.hash)));
    return ExitCode::ok;
}

int run_sweep(const Options& o) {
    const auto c = load(o);
    const auto cfg = klm::io::parse_sweep(c.doc);
    if (!o.engine.empty() && o.engine != "closed-form")
        throw ConfigError("sweep evaluates the closed-form fidelity only");
    const auto result = klm::cli::sweep(cfg, c.hash);
    write_text(o.out, result.csv);
    if (!o.out.empty()) write_text(o.out + ".meta.json", klm::io::dump(result.sidecar));
    return ExitCode::ok;
}

int run_report(const Options& o) {
    klm::io::ReportConfig cfg;
    std::string hash;
    if (!o.config.empty()) {
        const auto c = load(o);
        cfg = klm::io::parse_report(c.doc);
        hash = c.hash;
    }
    write_text(o.out, klm::io::dump(klm::cli::report(cfg, hash)));
    return ExitCode::ok;
}

int run_validate(const Options& o) {
    const auto checks = klm::validation::run_all();
    std::size_t width = 0;
    for (const auto& c : checks) width = std::max(width, c.name.size());
    Json rows = Json::array();
    for (const auto& c : checks) {
        std::cerr << klm::validation::status_name(c.status) << "  " << c.name << std::string(width - c.name.size() + 2, ' ')
                  << c.detail << '\n';
        rows.push_back({{"name", c.name}, {"status", klm::validation::status_name(c.status)}, {"detail", c.detail}});
    }
    const bool ok = klm::validation::all_passed(checks);
    if (!o.out.empty()) write_text(o.out, klm::io::dump(Json{{"command", "validate"}, {"passed", ok}, {"checks", rows}}));
    return ok ? ExitCode::ok : ExitCode::validation_failure;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"KLM-state preparation simulator"};
    app.require_subcommand(1);
    Options o;

    auto add_common = [&](CLI::App* sub, bool engine) {
        sub->add_option("--config", o.config, "run configuration (JSON)");
        sub->add_option("--out", o.out, "output path (default: standard output)");
        sub->add_option("--seed", o.seed, "seed for sampled measurement outcomes");
        if (engine)
            sub->add_option("--engine", o.engine, "closed-form | effective-numeric | ideal-gate | numeric-gate")
                ->check(CLI::IsMember({"closed-form", "effective-numeric", "ideal-gate", "numeric-gate"}));
    };
    auto* s1 = app.add_subcommand("scheme1", "qutrit + two molecular ensembles");
    auto* s2 = app.add_subcommand("scheme2", "n qutrits via conditional phase gates");
    auto* sw = app.add_subcommand("sweep", "fidelity grid over two timing-error rates (CSV)");
    auto* va = app.add_subcommand("validate", "run the built-in invariant suite");
    auto* rp = app.add_subcommand("report", "feasibility and timing report");
    add_common(s1, true);
    add_common(s2, true);
    add_common(sw, true);
    add_common(rp, false);
    va->add_option("--out", o.out, "write the results as JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ExitCode::ok : ExitCode::config_error;
    }

    try {
        if (s1->parsed()) return run_scheme1(o);
        if (s2->parsed()) return run_scheme2(o);
        if (sw->parsed()) return run_sweep(o);
        if (va->parsed()) return run_validate(o);
        if (rp->parsed()) return run_report(o);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return ExitCode::config_error;
    } catch (const klm::RegimeError& e) {
        std::cerr << "regime violation: " << e.what() << '\n';
        return ExitCode::regime_violation;
    } catch (const klm::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return ExitCode::numerical_failure;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return ExitCode::config_error;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return ExitCode::numerical_failure;
    }
    return ExitCode::config_error;
}
