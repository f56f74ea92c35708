#include "wavecore/io_cli.hpp"

#include "wavecore/errors.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#ifndef WAVECORE_VERSION
#define WAVECORE_VERSION "0.0.0"
#endif

namespace wavecore {

namespace fs = std::filesystem;

const char* tool_version() noexcept { return WAVECORE_VERSION; }

void RunConfig::validate() const {
    params.validate();
    if (dx && !(*dx > 0.0)) throw DomainError("--dx must be positive");
    if (dz && !(*dz > 0.0)) throw DomainError("--dz must be positive");
    if (reference_dx && !(*reference_dx > 0.0)) throw DomainError("reference dx must be positive");
    for (double d : dx_list) {
        if (!(d > 0.0)) throw DomainError("dx_list entries must be positive");
    }
    if (grid_n < 2) throw DomainError("--grid-n must be at least 2");
    if (!(alpha >= 0.5 && alpha <= 1.0)) throw DomainError("--alpha must lie in [0.5, 1]");
    if (!(dt > 0.0)) throw DomainError("--dt must be positive");
    if (!(t_end >= 0.0)) throw DomainError("--t-end must be non-negative");
    if (threads < 0) throw DomainError("--threads must be non-negative");
}

nlohmann::ordered_json RunConfig::to_json() const {
    nlohmann::ordered_json j;
    j["schema"] = kSchemaVersion;
    j["case"] = fmt::format("{},{}", order.h(), order.v());
    j["dx"] = dx ? nlohmann::ordered_json(*dx) : nlohmann::ordered_json();
    j["dz"] = dz ? nlohmann::ordered_json(*dz) : nlohmann::ordered_json();
    j["cs"] = params.cs;
    j["n_freq"] = params.N;
    j["grid_n"] = grid_n;
    j["alpha"] = alpha;
    j["dt"] = dt;
    j["t_end"] = t_end;
    j["out"] = out_dir;
    j["threads"] = threads;
    j["fold"] = fold ? nlohmann::ordered_json(to_string(*fold)) : nlohmann::ordered_json();
    j["scaling"] = to_string(scaling);
    j["allocation"] = to_string(allocation);
    j["desk"] = desk;
    j["reference_dx"] = reference_dx ? nlohmann::ordered_json(*reference_dx) : nlohmann::ordered_json();
    j["dx_list"] = dx_list;
    j["norm"] = to_string(norm);
    return j;
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
    if (!j.is_object()) {
        throw DomainError("config must be a JSON object");
    }
    RunConfig c;
    try {
        for (const auto& [key, v] : j.items()) {
            if (key == "schema") {
                if (v.get<int>() != kSchemaVersion) {
                    throw DomainError(fmt::format("unsupported config schema {}", v.dump()));
                }
            } else if (key == "case") {
                c.order = OrderCase::parse(v.get<std::string>());
            } else if (key == "dx") {
                if (!v.is_null()) c.dx = v.get<double>();
            } else if (key == "dz") {
                if (!v.is_null()) c.dz = v.get<double>();
            } else if (key == "cs") {
                c.params.cs = v.get<double>();
            } else if (key == "n_freq") {
                c.params.N = v.get<double>();
            } else if (key == "grid_n") {
                c.grid_n = v.get<int>();
            } else if (key == "alpha") {
                c.alpha = v.get<double>();
            } else if (key == "dt") {
                c.dt = v.get<double>();
            } else if (key == "t_end") {
                c.t_end = v.get<double>();
            } else if (key == "out") {
                c.out_dir = v.get<std::string>();
            } else if (key == "threads") {
                c.threads = v.get<int>();
            } else if (key == "fold") {
                if (!v.is_null()) c.fold = parse_fold(v.get<std::string>());
            } else if (key == "scaling") {
                c.scaling = parse_scaling(v.get<std::string>());
            } else if (key == "allocation") {
                c.allocation = parse_allocation(v.get<std::string>());
            } else if (key == "desk") {
                c.desk = v.get<bool>();
            } else if (key == "reference_dx") {
                if (!v.is_null()) c.reference_dx = v.get<double>();
            } else if (key == "dx_list") {
                c.dx_list = v.get<std::vector<double>>();
            } else if (key == "norm") {
                c.norm = parse_error_norm(v.get<std::string>());
            } else {
                throw DomainError("unknown config key '" + key + "'");
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw DomainError(std::string("malformed config: ") + e.what());
    }
    c.validate();
    return c;
}

RunConfig RunConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw DomainError("cannot read config " + path);
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DomainError("config " + path + " is not valid JSON: " + e.what());
    }
    return from_json(j);
}

std::string metadata_block(const std::string& command, const RunConfig& cfg) {
    auto j = cfg.to_json();
    // The output location does not affect the data.
    j.erase("out");
    std::string out = fmt::format("# wavecore {}\n# command: {}\n# schema: {}\n", tool_version(), command,
                                  kSchemaVersion);
    out += "# config: " + j.dump() + "\n";
    return out;
}

void write_analytic_csv(std::ostream& out, const RunConfig& cfg) {
    const double dx = cfg.dx.value_or(1000.0);
    const double dz = cfg.dz.value_or(1000.0);
    const double kmax = 2.0 * std::numbers::pi / dx;
    const double lmax = 2.0 * std::numbers::pi / dz;
    out << "k,l,omega_acoustic,omega_gravity\n";
    const int n = cfg.grid_n;
    for (int j = 0; j < n; ++j) {
        const double l = lmax * j / (n - 1);
        for (int i = 0; i < n; ++i) {
            const double k = kmax * i / (n - 1);
            const AnalyticModes m = analytic_omega(k, l, cfg.params);
            out << fmt::format("{},{},{},{}\n", k, l, m.omega_plus, m.omega_minus);
        }
    }
}

namespace {

double pct(double discrete, double analytic) {
    return analytic > 0.0 ? 100.0 * (discrete - analytic) / analytic : 0.0;
}

nlohmann::ordered_json stats_json(const ErrorStats& s) {
    nlohmann::ordered_json j;
    j["normalized_l2"] = s.normalized_l2;
    j["max_err"] = s.max_err;
    j["min_err"] = s.min_err;
    j["max_abs"] = s.max_abs;
    j["min_abs"] = s.min_abs;
    j["rms_rel"] = s.rms_rel;
    return j;
}

std::string case_tag(const OrderCase& c) { return fmt::format("h{}v{}", c.h(), c.v()); }

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::trunc | std::ios::binary);
    if (!out) {
        throw IntegrityError("cannot open " + path + " for writing");
    }
    return out;
}

std::string prepare_dir(const RunConfig& cfg) {
    std::error_code ec;
    fs::create_directories(cfg.out_dir, ec);
    if (ec) {
        throw IntegrityError("cannot create output directory " + cfg.out_dir + ": " + ec.message());
    }
    return cfg.out_dir;
}

void write_json(const std::string& path, const nlohmann::ordered_json& j) {
    auto out = open_out(path);
    out << j.dump(2) << '\n';
}

}  // namespace

void write_dispersion_csv(std::ostream& out, const DispersionSurface& s, const std::string& metadata) {
    out << metadata;
    out << "k_tilde,l_tilde,omega_gravity,omega_acoustic,err_gravity_pct,err_acoustic_pct\n";
    for (const auto& p : s.points) {
        const double g = p.omega[static_cast<std::size_t>(Regime::Gravity)];
        const double a = p.omega[static_cast<std::size_t>(Regime::Acoustic)];
        out << fmt::format("{},{},{},{},{},{}\n", p.k_tilde, p.l_tilde, g, a,
                           pct(g, p.analytic[static_cast<std::size_t>(Regime::Gravity)]),
                           pct(a, p.analytic[static_cast<std::size_t>(Regime::Acoustic)]));
    }
}

nlohmann::ordered_json dispersion_stats_json(const DispersionSurface& s) {
    nlohmann::ordered_json j;
    j["schema"] = kSchemaVersion;
    j["case"] = s.order.label();
    j["N"] = s.params.N;
    j["cs"] = s.params.cs;
    j["dx"] = s.dx;
    j["dz"] = s.dz;
    j["grid_n"] = s.grid_n;
    j["fold"] = to_string(s.fold);
    j["fold_scores"] = {{"reflect", s.fold_scores[0]}, {"shift", s.fold_scores[1]}};
    j["scaling"] = to_string(s.scaling);
    j["allocation"] = to_string(s.mode);
    j["gravity"] = stats_json(error_stats(s, Regime::Gravity));
    j["acoustic"] = stats_json(error_stats(s, Regime::Acoustic));
    return j;
}

void write_extrema_csv(std::ostream& out, const GravityWaveResult& r, const std::string& metadata) {
    out << metadata;
    out << "time,b_min,b_max,energy,b_mean\n";
    for (std::size_t i = 0; i < r.times.size(); ++i) {
        out << fmt::format("{},{},{},{},{}\n", r.times[i], r.b_min[i], r.b_max[i], r.energy[i], r.b_mean[i]);
    }
}

void append_ledger(const std::string& path, const ConvergenceResult& r, const ConvergenceConfig& cfg,
                   const std::string& metadata) {
    const bool fresh = !fs::exists(path) || fs::file_size(path) == 0;
    std::ofstream out(path, std::ios::app | std::ios::binary);
    if (!out) {
        throw IntegrityError("cannot open ledger " + path);
    }
    if (fresh) {
        out << metadata << kLedgerHeader << '\n';
    }
    for (const auto& p : r.points) {
        out << fmt::format("\"{}\",{},{},{},{},{},{},{:.3f}\n", r.order.label(), p.dx, cfg.dz, cfg.base.dt,
                           cfg.base.alpha, p.error, r.slope, p.wallclock);
    }
}

std::vector<std::string> cmd_analytic(const RunConfig& cfg) {
    cfg.validate();
    const std::string dir = prepare_dir(cfg);
    const std::string path = (fs::path(dir) / "analytic.csv").string();
    auto out = open_out(path);
    out << metadata_block("analytic", cfg);
    write_analytic_csv(out, cfg);
    return {path};
}

std::vector<std::string> cmd_dispersion(const RunConfig& cfg) {
    cfg.validate();
    if (cfg.grid_n < 8) {
        throw DomainError("--grid-n must be at least 8 for a dispersion sweep");
    }
    const std::string dir = prepare_dir(cfg);
    SweepOptions opts;
    opts.grid_n = cfg.grid_n;
    opts.scaling = cfg.scaling;
    opts.mode = cfg.allocation;
    opts.fold = cfg.fold;
    opts.threads = cfg.threads;
    const DispersionSurface s =
        allocate_branches(cfg.order, cfg.dx.value_or(1000.0), cfg.dz.value_or(1000.0), cfg.params, opts);
    const std::string stem = (fs::path(dir) / ("dispersion_" + case_tag(cfg.order))).string();
    {
        auto out = open_out(stem + ".csv");
        write_dispersion_csv(out, s, metadata_block("dispersion", cfg));
    }
    write_json(stem + ".json", dispersion_stats_json(s));
    return {stem + ".csv", stem + ".json"};
}

GravityWaveConfig gravity_wave_config(const RunConfig& cfg) {
    GravityWaveConfig g = GravityWaveConfig::for_case(cfg.order);
    if (cfg.dx) g.dx = *cfg.dx;
    if (cfg.dz) g.dz = *cfg.dz;
    g.params = cfg.params;
    g.alpha = cfg.alpha;
    g.dt = cfg.dt;
    g.t_end = cfg.t_end;
    g.threads = cfg.threads;
    return g;
}

ConvergenceConfig convergence_config(const RunConfig& cfg) {
    ConvergenceConfig c = cfg.desk ? ConvergenceConfig::desk() : ConvergenceConfig{};
    c.base = gravity_wave_config(cfg);
    if (cfg.dz) c.dz = *cfg.dz;
    if (cfg.reference_dx) c.reference_dx = *cfg.reference_dx;
    if (!cfg.dx_list.empty()) c.dx_list = cfg.dx_list;
    c.norm = cfg.norm;
    return c;
}

std::vector<std::string> cmd_gravity_wave(const RunConfig& cfg) {
    cfg.validate();
    const std::string dir = prepare_dir(cfg);
    const GravityWaveConfig g = gravity_wave_config(cfg);
    const GravityWaveResult r = run_gravity_wave(g);
    const std::string meta = metadata_block("gravity-wave", cfg);
    const std::string stem = (fs::path(dir) / ("gravity_wave_" + case_tag(cfg.order))).string();
    std::vector<std::string> written;
    if (r.steps == 0) {
        write_snapshot_binary(stem + "_initial.bin", *r.system, r.initial, 0.0);
        written.push_back(stem + "_initial.bin");
        return written;
    }
    const double t = r.steps * g.dt;
    write_snapshot_binary(stem + "_final.bin", *r.system, r.final_state, t);
    written.push_back(stem + "_final.bin");
    std::vector<std::string> lines;
    std::istringstream ms(meta);
    for (std::string line; std::getline(ms, line);) {
        lines.push_back(line.substr(2));
    }
    write_snapshot_csv(stem + "_final.csv", *r.system, r.final_state, t, lines);
    written.push_back(stem + "_final.csv");
    {
        auto out = open_out(stem + "_extrema.csv");
        write_extrema_csv(out, r, meta);
    }
    written.push_back(stem + "_extrema.csv");

    nlohmann::ordered_json j;
    j["schema"] = kSchemaVersion;
    j["case"] = cfg.order.label();
    j["nx"] = r.system->mesh.nx;
    j["nz"] = r.system->mesh.nz;
    j["dx"] = r.system->mesh.dx;
    j["dz"] = r.system->mesh.dz;
    j["steps"] = r.steps;
    j["b_min"] = r.b_min.back();
    j["b_max"] = r.b_max.back();
    j["max_energy_drift"] = r.max_energy_drift;
    write_json(stem + "_summary.json", j);
    written.push_back(stem + "_summary.json");
    return written;
}

std::vector<std::string> cmd_convergence(const RunConfig& cfg) {
    cfg.validate();
    const std::string dir = prepare_dir(cfg);
    const ConvergenceConfig c = convergence_config(cfg);
    const ConvergenceResult r = run_convergence(cfg.order, c);
    const std::string ledger = (fs::path(dir) / "convergence_ledger.csv").string();
    append_ledger(ledger, r, c, metadata_block("convergence", cfg));

    nlohmann::ordered_json j;
    j["schema"] = kSchemaVersion;
    j["case"] = cfg.order.label();
    j["norm"] = to_string(c.norm);
    j["reference_dx"] = r.reference_dx;
    j["slope"] = r.slope;
    constexpr std::array<ErrorNorm, 2> norms{ErrorNorm::ReferenceQuadrature, ErrorNorm::CoarseProjection};
    for (ErrorNorm n : norms) {
        j["slopes"][to_string(n)] = r.slopes[static_cast<std::size_t>(n)];
    }
    auto& pts = j["points"] = nlohmann::ordered_json::array();
    for (const auto& p : r.points) {
        nlohmann::ordered_json row{{"dx", p.dx}, {"nx", p.nx}, {"error", p.error}};
        for (ErrorNorm n : norms) {
            row["errors"][to_string(n)] = p.errors[static_cast<std::size_t>(n)];
        }
        pts.push_back(row);
    }
    const std::string summary = (fs::path(dir) / ("convergence_" + case_tag(cfg.order) + ".json")).string();
    write_json(summary, j);
    return {ledger, summary};
}

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"Split-order compatible finite elements: dispersion analysis and gravity-wave runs", "wavecore"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", tool_version());

    std::string config_path;
    std::string case_text;
    double dx = 0, dz = 0, cs = 0, n_freq = 0, alpha = 0, dt = 0, t_end = 0, reference_dx = 0;
    int grid_n = 0, threads = 0;
    std::string out_dir, fold, scaling, allocation, norm;
    app.add_option("--config", config_path, "JSON config file; flags override its values");
    app.add_option("--case", case_text, "order case h,v with h, v in {0,1}");
    app.add_option("--dx", dx, "horizontal cell size (m)");
    app.add_option("--dz", dz, "vertical cell size (m)");
    app.add_option("--cs", cs, "sound speed (m/s)");
    app.add_option("--n-freq", n_freq, "buoyancy frequency N (1/s)");
    app.add_option("--grid-n", grid_n, "wavenumber grid points per direction");
    app.add_option("--alpha", alpha, "implicit off-centring weight in [0.5, 1]");
    app.add_option("--dt", dt, "timestep (s)");
    app.add_option("--t-end", t_end, "end time (s)");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--threads", threads, "worker threads (default: WAVECORE_THREADS or all cores)");
    app.add_option("--fold", fold, "extended-sector convention")->check(CLI::IsMember({"reflect", "shift"}));
    app.add_option("--scaling", scaling, "sweep scaling")->check(CLI::IsMember({"dof-spacing", "cell-size"}));
    app.add_option("--allocation", allocation, "branch allocation")
        ->check(CLI::IsMember({"pointwise", "sector-constant"}));
    app.add_option("--reference-dx", reference_dx, "convergence reference spacing (m)");
    app.add_option("--norm", norm, "convergence error norm")
        ->check(CLI::IsMember({"reference-quadrature", "coarse-projection"}));
    bool desk = false;
    app.add_flag("--desk", desk, "convergence: reference 240 m and four coarse spacings");

    auto* analytic = app.add_subcommand("analytic", "analytic dispersion relation on a grid");
    auto* dispersion = app.add_subcommand("dispersion", "discrete dispersion surface and error statistics");
    auto* gravity = app.add_subcommand("gravity-wave", "gravity-wave benchmark run");
    auto* convergence = app.add_subcommand("convergence", "gravity-wave convergence study");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        RunConfig cfg = config_path.empty() ? RunConfig{} : RunConfig::load(config_path);
        auto given = [&](const char* name) { return app.count(name) > 0; };
        if (given("--case")) cfg.order = OrderCase::parse(case_text);
        if (given("--dx")) cfg.dx = dx;
        if (given("--dz")) cfg.dz = dz;
        if (given("--cs")) cfg.params.cs = cs;
        if (given("--n-freq")) cfg.params.N = n_freq;
        if (given("--grid-n")) cfg.grid_n = grid_n;
        if (given("--alpha")) cfg.alpha = alpha;
        if (given("--dt")) cfg.dt = dt;
        if (given("--t-end")) cfg.t_end = t_end;
        if (given("--out")) cfg.out_dir = out_dir;
        if (given("--threads")) cfg.threads = threads;
        if (given("--fold")) cfg.fold = parse_fold(fold);
        if (given("--scaling")) cfg.scaling = parse_scaling(scaling);
        if (given("--allocation")) cfg.allocation = parse_allocation(allocation);
        if (given("--reference-dx")) cfg.reference_dx = reference_dx;
        if (given("--norm")) cfg.norm = parse_error_norm(norm);
        if (desk) cfg.desk = true;
        cfg.validate();

        std::vector<std::string> written;
        if (analytic->parsed()) {
            written = cmd_analytic(cfg);
        } else if (dispersion->parsed()) {
            written = cmd_dispersion(cfg);
        } else if (gravity->parsed()) {
            written = cmd_gravity_wave(cfg);
        } else if (convergence->parsed()) {
            written = cmd_convergence(cfg);
        }
        for (const auto& w : written) {
            std::cerr << "wrote " << w << '\n';
        }
        return kExitOk;
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIntegrity;
    }
}

}  // namespace wavecore
