#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "secest/config.hpp"
#include "secest/errors.hpp"
#include "secest/ieee14.hpp"
#include "secest/json_io.hpp"
#include "secest/trace_io.hpp"

namespace secest::cli {

namespace fs = std::filesystem;

namespace {

int exit_code_for(const Error& e) {
    switch (e.code()) {
    case Errc::infeasible:
        return kExitInfeasible;
    case Errc::non_finite_input:
    case Errc::non_finite_state:
        return kExitRuntime;
    default:
        return kExitInput;
    }
}

void apply_env_tolerance() {
    const char* env = std::getenv("SECEST_TOL");
    if (!env) return;
    char* end = nullptr;
    double tol = std::strtod(env, &end);
    if (end && *end == '\0' && tol > 0.0) tolerances().zero_rel = tol;
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) raise(Errc::io_error, "cannot open " + path + " for writing");
    out << text;
}

struct AnalysisBundle {
    model::SystemModel system;
    std::vector<subspace::SensorDecomposition> decs;
    subspace::CoverageIndex cov;
    int s_max = 0;
};

AnalysisBundle analyze_system(model::SystemModel sys) {
    AnalysisBundle b{std::move(sys), {}, {}, 0};
    b.decs = subspace::decompose_all(b.system.modal);
    b.cov = subspace::coverage(b.decs, b.system.n());
    b.s_max = subspace::sparse_observability_index(b.cov); // throws not_observable
    subspace::check_sparsity_budget(b.system, b.cov);
    return b;
}

// ---------------------------------------------------------------- analyze

int cmd_analyze(const std::string& system_path, const std::string& out_path, bool with_oracle) {
    io::SystemFile file = io::load_system_file(system_path);
    AnalysisBundle b = analyze_system(io::assemble(file));

    std::vector<subspace::CheckReport> checks;
    checks.reserve(b.decs.size());
    for (const auto& dec : b.decs) checks.push_back(subspace::verify_decomposition(dec, b.system.modal));

    double condition = cond2(b.system.modal.from_modal);
    std::string report = io::analysis_report_json(b.system, b.decs, b.cov, b.s_max, checks, condition);

    if (with_oracle) {
        int oracle = subspace::sparse_observability_bruteforce(b.system.modal.dynamics,
                                                               b.system.modal.output);
        report.pop_back(); // trailing newline
        report.pop_back(); // closing brace; re-open the object
        report += ",\n  \"s_max_bruteforce\": " + std::to_string(oracle) + "\n}\n";
    }

    if (out_path.empty())
        std::cout << report;
    else
        write_text_file(out_path, report);
    return kExitOk;
}

// ----------------------------------------------------------------- design

int cmd_design(const std::string& system_path, const std::string& out_path,
               const gains::SearchOptions& opts) {
    io::SystemFile file = io::load_system_file(system_path);
    AnalysisBundle b = analyze_system(io::assemble(file));

    double bw = gains::modal_process_bound(b.system.modal, file.process_bound);
    double bv = file.measurement_bound;

    // Feasibility sweep first so the failure report lists every bad sensor.
    std::vector<gains::SpectralGainResult> spectral(b.decs.size());
    std::vector<int> infeasible;
    for (size_t i = 0; i < b.decs.size(); ++i) {
        gains::SearchOptions per = opts;
        per.seed = opts.seed ^ (0x9e3779b97f4a7c15ULL * (i + 1));
        spectral[i] = gains::min_spectral_gain(b.decs[i].reduced_dynamics,
                                               b.decs[i].reduced_output, per);
        if (!spectral[i].feasible) infeasible.push_back(static_cast<int>(i));
    }
    if (!infeasible.empty()) {
        std::cerr << "Infeasible: no stabilizing gain satisfies the spectral bound for "
                  << infeasible.size() << " sensor(s):\n";
        for (int i : infeasible)
            std::cerr << "  sensor " << i << ": sigma* = " << spectral[i].sigma
                      << " vs bound " << spectral[i].feasibility_bound << "\n";
        return kExitInfeasible;
    }

    std::vector<gains::GainDesign> designs(b.decs.size());
    for (size_t i = 0; i < b.decs.size(); ++i) {
        gains::SearchOptions per = opts;
        per.seed = opts.seed ^ (0x9e3779b97f4a7c15ULL * (i + 1));
        designs[i] = gains::design_gain(b.decs[i].reduced_dynamics, b.decs[i].reduced_output,
                                        bw, bv, per);
    }
    gains::DetectorConfig det = gains::compute_gamma(designs, b.decs, bw, bv);
    io::save_gains(designs, det, out_path);
    std::cout << "gamma " << det.gamma << " over " << designs.size() << " sensors -> "
              << out_path << "\n";
    return kExitOk;
}

// --------------------------------------------------------------- simulate

struct SimulateConfig {
    std::string system_path;
    std::string gains_path;
    std::string scenario_path;
    std::string preset;
    std::string params_path;
    long horizon = 2000;
    std::uint64_t seed = 0;
    std::string out_dir = ".";
    double gamma_override = 0.0; // 0 = none
    int repeats = 1;
    bool no_luenberger = false;
    gains::SearchOptions search;
};

// Best-effort gains for systems where the spectral bound is unattainable
// (the 14-bus benchmark): take the spectral-minimizing gain per sensor, then
// shrink uniformly until the Luenberger closed loop is stable so the
// baseline comparison stays finite.
std::vector<gains::GainDesign> best_effort_gains(const AnalysisBundle& b,
                                                 double bw, double bv,
                                                 const gains::SearchOptions& opts) {
    std::vector<gains::GainDesign> designs(b.decs.size());
    for (size_t i = 0; i < b.decs.size(); ++i) {
        const auto& dec = b.decs[i];
        if (dec.dim() == 0) {
            designs[i] = {CVec(), 0.0, bw, 0.0, 0.0};
            continue;
        }
        gains::SearchOptions per = opts;
        per.seed = opts.seed ^ (0x9e3779b97f4a7c15ULL * (i + 1));
        gains::SpectralGainResult r =
            gains::min_spectral_gain(dec.reduced_dynamics, dec.reduced_output, per);
        gains::GainDesign d;
        d.gain = r.gain;
        d.sigma = r.sigma;
        double denom = 1.0 - (2.0 * std::sqrt(static_cast<double>(dec.dim())) + 1.0) * r.sigma;
        d.cost = denom > 0.0 ? (bw + bv * r.gain.norm()) / denom
                             : std::numeric_limits<double>::infinity();
        d.beta = r.gain.squaredNorm();
        d.alpha = r.sigma * r.sigma;
        designs[i] = d;
    }

    auto spectral_radius = [&](double scale) {
        CMat acl = b.system.modal.dynamics;
        for (size_t i = 0; i < b.decs.size(); ++i) {
            if (b.decs[i].dim() == 0) continue;
            CVec lifted = b.decs[i].lift(designs[i].gain * scale);
            acl -= lifted * b.system.modal.output.row(static_cast<int>(i));
        }
        Eigen::ComplexEigenSolver<CMat> es(acl, false);
        return es.eigenvalues().cwiseAbs().maxCoeff();
    };

    double scale = 1.0;
    for (int iter = 0; iter < 40 && spectral_radius(scale) >= 1.0 - 1e-9; ++iter) scale *= 0.7;
    if (scale < 1.0) {
        for (auto& d : designs) {
            d.gain *= scale;
            d.beta = d.gain.squaredNorm();
        }
        std::cerr << "note: Luenberger stabilization scaled all gains by " << scale << "\n";
    }
    return designs;
}

int cmd_simulate(const SimulateConfig& cfg) {
    model::SystemModel sys;
    sim::KnownInput input;
    const sim::KnownInput* input_ptr = nullptr;
    threat::AttackScenario scenario;
    double preset_gamma = 0.0;
    double file_bw = 0.0, file_bv = 0.0;

    if (!cfg.preset.empty()) {
        ieee14::Ieee14Params params = cfg.params_path.empty()
                                          ? ieee14::Ieee14Params::defaults()
                                          : io::load_ieee14_params(cfg.params_path);
        ieee14::Ieee14Model m = ieee14::build_ieee14(params);
        sys = std::move(m.system);
        input = std::move(m.input);
        input_ptr = &input;
        file_bw = sys.raw->process_noise_bound;
        file_bv = sys.raw->measurement_noise_bound;
        preset_gamma = 0.5;
        threat::AttackSignal sig = cfg.preset == "ieee14-slope"
                                       ? threat::AttackSignal::slope(0.2)
                                       : threat::AttackSignal::uniform(-10.0, 10.0);
        scenario = threat::AttackScenario::switching_ieee14(sig, cfg.seed);
    } else {
        io::SystemFile file = io::load_system_file(cfg.system_path);
        sys = io::assemble(file);
        file_bw = file.process_bound;
        file_bv = file.measurement_bound;
        if (cfg.scenario_path.empty())
            scenario = threat::AttackScenario::none();
        else
            scenario = io::load_scenario(cfg.scenario_path);
    }

    AnalysisBundle b = analyze_system(std::move(sys));
    double bw = gains::modal_process_bound(b.system.modal, file_bw);

    std::vector<gains::GainDesign> designs;
    gains::DetectorConfig det;
    if (!cfg.gains_path.empty()) {
        std::tie(designs, det) = io::load_gains(cfg.gains_path);
        if (designs.size() != b.decs.size())
            raise(Errc::dimension_mismatch, "gains file covers " + std::to_string(designs.size()) +
                                                " sensors, system has " +
                                                std::to_string(b.decs.size()));
    } else if (!cfg.preset.empty()) {
        gains::SearchOptions opts = cfg.search;
        opts.starts = std::min(opts.starts, 3);
        opts.evals_per_start = std::min(opts.evals_per_start, 400);
        designs = best_effort_gains(b, bw, file_bv, opts);
    } else {
        designs = gains::design_all(b.decs, bw, file_bv, cfg.search);
    }

    double gamma = cfg.gamma_override > 0.0 ? cfg.gamma_override : preset_gamma;
    if (gamma > 0.0)
        det = gains::detector_with_gamma(gamma, designs, b.decs, bw, file_bv);
    else if (det.thresholds.empty())
        det = gains::compute_gamma(designs, b.decs, bw, file_bv);

    fs::create_directories(cfg.out_dir);

    auto run_one = [&](int repeat) {
        sim::SimOptions opts;
        opts.horizon = cfg.horizon;
        opts.seed = cfg.seed + static_cast<std::uint64_t>(repeat);
        opts.with_luenberger = !cfg.no_luenberger;
        sim::SimulationTrace trace = sim::run(b.system, b.decs, designs, det.gamma, scenario,
                                              opts, input_ptr);
        std::string suffix = cfg.repeats > 1 ? "_r" + std::to_string(repeat) : "";
        io::write_trace_csv(trace, cfg.out_dir + "/trace" + suffix + ".csv");
        write_text_file(cfg.out_dir + "/metrics" + suffix + ".json",
                        io::metrics_json(sim::metrics(trace)));
        return trace.aborted;
    };

    bool aborted = false;
    if (cfg.repeats <= 1) {
        aborted = run_one(0);
    } else {
        // Independent repeats with derived seeds; each writes its own files.
        std::vector<std::thread> pool;
        std::vector<char> flags(cfg.repeats, 0);
        unsigned workers = std::max(1u, std::thread::hardware_concurrency());
        std::atomic<int> next{0};
        for (unsigned w = 0; w < std::min<unsigned>(workers, cfg.repeats); ++w)
            pool.emplace_back([&] {
                for (int r; (r = next.fetch_add(1)) < cfg.repeats;)
                    flags[r] = run_one(r) ? 1 : 0;
            });
        for (auto& t : pool) t.join();
        aborted = std::any_of(flags.begin(), flags.end(), [](char c) { return c != 0; });
    }

    if (aborted) {
        std::cerr << "simulation aborted on non-finite state; partial trace retained\n";
        return kExitRuntime;
    }
    return kExitOk;
}

// ----------------------------------------------------------------- report

int cmd_report(const std::string& trace_path, const std::string& metrics_path, int bus,
               int sensor, const std::string& out_dir) {
    sim::SimulationTrace trace = io::read_trace_csv(trace_path);

    // Threshold annotations come from the metrics written next to the trace.
    std::vector<double> thresholds;
    double gamma = 0.0;
    {
        std::string path = metrics_path;
        if (path.empty()) {
            fs::path p(trace_path);
            path = (p.parent_path() / "metrics.json").string();
        }
        std::ifstream in(path);
        if (in) {
            try {
                auto j = nlohmann::json::parse(in);
                gamma = j.value("gamma", 0.0);
                if (j.contains("thresholds"))
                    thresholds = j["thresholds"].get<std::vector<double>>();
            } catch (const nlohmann::json::parse_error&) {
                raise(Errc::parse_error, path + ": malformed metrics file");
            }
        }
    }

    if (bus < 1 || 2 * bus > trace.n)
        raise(Errc::invalid_parameter, "bus " + std::to_string(bus) +
                                           " has no states in an n = " +
                                           std::to_string(trace.n) + " trace");
    int angle = 2 * (bus - 1);
    int freq = angle + 1;
    if (sensor < 0) sensor = 4 * (bus - 1);
    if (sensor >= trace.m)
        raise(Errc::invalid_parameter, "sensor index out of range");

    fs::create_directories(out_dir);

    {
        std::ofstream out(out_dir + "/fig_states_bus" + std::to_string(bus) + ".csv",
                          std::ios::binary);
        out << "k,angle_true,angle_secure,angle_luen,freq_true,freq_secure,freq_luen\n";
        for (size_t k = 0; k < trace.steps.size(); ++k) {
            const auto& r = trace.steps[k];
            out << k << ',' << io::format_double(r.x_true(angle)) << ','
                << io::format_double(r.x_secure(angle)) << ','
                << io::format_double(r.x_luenberger(angle)) << ','
                << io::format_double(r.x_true(freq)) << ','
                << io::format_double(r.x_secure(freq)) << ','
                << io::format_double(r.x_luenberger(freq)) << '\n';
        }
    }
    {
        double threshold = sensor < static_cast<int>(thresholds.size()) ? thresholds[sensor]
                                                                        : 0.0;
        std::ofstream out(out_dir + "/fig_residue_sensor" + std::to_string(sensor) + ".csv",
                          std::ios::binary);
        out << "k,residue_before,residue_after,threshold,triggered\n";
        for (size_t k = 0; k < trace.steps.size(); ++k) {
            const auto& r = trace.steps[k];
            double before = r.residues(sensor);
            bool trig = r.triggered[sensor] != 0;
            double after = trig ? 0.0 : before; // reset replaces the local state outright
            out << k << ',' << io::format_double(before) << ',' << io::format_double(after)
                << ',' << io::format_double(threshold) << ',' << (trig ? 1 : 0) << '\n';
        }
    }
    if (gamma > 0.0)
        std::cout << "report written to " << out_dir << " (gamma " << gamma << ")\n";
    else
        std::cout << "report written to " << out_dir << "\n";
    return kExitOk;
}

} // namespace

int run(int argc, const char* const* argv) {
    apply_env_tolerance();

    CLI::App app{"Secure state estimation under time-varying sparse sensor attacks"};
    app.require_subcommand(1);
    app.footer("Exit codes: 0 ok, 2 invalid input, 3 infeasible gain design, 4 runtime abort.");

    std::string system_path, out_path, scenario_path, gains_path, preset, params_path;
    std::string trace_path, metrics_path, out_dir = ".";
    bool with_oracle = false, no_luenberger = false;
    long horizon = 2000;
    std::uint64_t seed = 0;
    double gamma_override = 0.0;
    int repeats = 1, bus = 5, sensor = -1;
    gains::SearchOptions search;

    CLI::App* analyze = app.add_subcommand("analyze", "Observable-subspace and redundancy analysis");
    analyze->add_option("--system", system_path, "System JSON file")->required();
    analyze->add_option("--out", out_path, "Report path (default: stdout)");
    analyze->add_flag("--oracle", with_oracle, "Also run the exhaustive subset-rank check");

    CLI::App* design = app.add_subcommand("design", "Observer gain and detector design");
    design->add_option("--system", system_path, "System JSON file")->required();
    design->add_option("--out", out_path, "Gains JSON output")->default_val("gains.json");
    design->add_option("--starts", search.starts, "Multi-start count");
    design->add_option("--evals", search.evals_per_start, "Evaluations per start");
    design->add_option("--grid", search.grid_points, "Outer grid points");
    design->add_option("--seed", search.seed, "Search seed");

    CLI::App* simulate = app.add_subcommand("simulate", "Closed-loop attack simulation");
    simulate->add_option("--system", system_path, "System JSON file");
    simulate->add_option("--scenario", scenario_path, "Attack scenario JSON");
    simulate->add_option("--gains", gains_path, "Gains JSON (default: design inline)");
    simulate->add_option("--preset", preset, "ieee14-random | ieee14-slope")
        ->check(CLI::IsMember({"ieee14-random", "ieee14-slope"}));
    simulate->add_option("--params", params_path, "14-bus parameter JSON override");
    simulate->add_option("--horizon", horizon, "Steps to simulate")->check(CLI::NonNegativeNumber);
    simulate->add_option("--seed", seed, "Noise/attack seed");
    simulate->add_option("--out-dir", out_dir, "Output directory");
    simulate->add_option("--gamma", gamma_override, "Detector parameter override");
    simulate->add_option("--repeats", repeats, "Monte Carlo repetitions")
        ->check(CLI::PositiveNumber);
    simulate->add_flag("--no-luenberger", no_luenberger, "Skip the baseline observer");

    CLI::App* report = app.add_subcommand("report", "Plot-ready series from a trace");
    report->add_option("--trace", trace_path, "Trace CSV")->required();
    report->add_option("--metrics", metrics_path, "Metrics JSON (default: next to trace)");
    report->add_option("--bus", bus, "Bus selection (interleaved angle/frequency layout)");
    report->add_option("--sensor", sensor, "Sensor for the residue series");
    report->add_option("--out-dir", out_dir, "Output directory");

    try {
        app.parse(argc, const_cast<char**>(argv));
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitInput;
    }

    try {
        if (app.got_subcommand(analyze)) return cmd_analyze(system_path, out_path, with_oracle);
        if (app.got_subcommand(design)) return cmd_design(system_path, out_path, search);
        if (app.got_subcommand(simulate)) {
            SimulateConfig cfg;
            cfg.system_path = system_path;
            cfg.scenario_path = scenario_path;
            cfg.gains_path = gains_path;
            cfg.preset = preset;
            cfg.params_path = params_path;
            cfg.horizon = horizon;
            cfg.seed = seed;
            cfg.out_dir = out_dir;
            cfg.gamma_override = gamma_override;
            cfg.repeats = repeats;
            cfg.no_luenberger = no_luenberger;
            cfg.search = search;
            if (cfg.preset.empty() && cfg.system_path.empty())
                raise(Errc::invalid_parameter, "simulate requires --system or --preset");
            return cmd_simulate(cfg);
        }
        if (app.got_subcommand(report))
            return cmd_report(trace_path, metrics_path, bus, sensor, out_dir);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    }
    return kExitInput;
}

int run(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.push_back("secest");
    for (const auto& a : args) argv.push_back(a.c_str());
    return run(static_cast<int>(argv.size()), argv.data());
}

} // namespace secest::cli
