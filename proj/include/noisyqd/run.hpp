#pragma once

// Mode runners behind `noisyqd run`: compute, then write tables and
// summary.json into the output directory.

#include <charconv>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "noisyqd/config.hpp"
#include "noisyqd/verify.hpp"

namespace noisyqd {

// Shortest round-trip decimal form; locale independent.
inline std::string format_number(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, r.ptr);
}

struct Table {
    std::string name;  // file stem
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

inline std::string to_csv(const Table& t) {
    std::string out;
    for (std::size_t c = 0; c < t.columns.size(); ++c) out += (c ? "," : "") + t.columns[c];
    out += '\n';
    for (const auto& row : t.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out += ',';
            out += format_number(row[c]);
        }
        out += '\n';
    }
    return out;
}

inline json to_json(const Table& t) { return {{"columns", t.columns}, {"rows", t.rows}}; }

struct RunResult {
    std::vector<std::filesystem::path> files;
    json summary;
    bool verification_passed = true;
};

namespace run_detail {

inline void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw Error("write failed for '" + path.string() + "'");
}

inline json oscillator_summary(const ComplexFrequency& f, double mass) {
    const auto sc = localisation_scales(mass, f);
    json levels = json::array();
    for (int n = 0; n < 5; ++n) {
        const auto full = spectrum(n, f, WidthConvention::full);
        const auto stable = spectrum(n, f, WidthConvention::stable_ground);
        levels.push_back({{"n", n},
                          {"energy_re", full.energy_re},
                          {"width_full", full.width},
                          {"width_stable_ground", stable.width},
                          {"lifetime_full", full.lifetime},
                          {"lifetime_stable_ground", stable.lifetime}});
    }
    json s = {{"omega1", f.omega1},
              {"omega2", f.omega2},
              {"lifetime_tau", sc.tau},
              {"penetration_depth", sc.depth},
              {"resonances", levels}};
    s["coherent_uncertainty"] = f.omega1 > 0.0 ? json(coherent_uncertainty(f)) : json(nullptr);
    return s;
}

inline Table heatmap_from(const std::vector<double>& times, const std::vector<RealField>& densities,
                          const SpatialGrid& g) {
    Table t{"psi2_heatmap", {"t", "x", "psi2"}, {}};
    for (std::size_t s = 0; s < times.size(); ++s)
        for (std::size_t j = 0; j < g.size(); ++j) t.rows.push_back({times[s], g.x(j), densities[s][j]});
    return t;
}

inline RealField density_of(const WaveFunction& psi) {
    RealField d(psi.values.size());
    for (std::size_t j = 0; j < d.size(); ++j) d[j] = std::norm(psi.values[j]);
    return d;
}

inline void add_trajectory_tables(const Trajectory& tr, std::vector<Table>& tables) {
    std::vector<double> times;
    std::vector<RealField> dens;
    for (const auto& s : tr.snapshots) {
        times.push_back(s.time);
        dens.push_back(density_of(s));
    }
    tables.push_back(heatmap_from(times, dens, tr.snapshots.front().grid));
    Table cur{"current", {"t", "probe_x", "J_R"}, {}};
    for (std::size_t k = 0; k < tr.times.size(); ++k)
        for (std::size_t p = 0; p < tr.probes.size(); ++p) cur.rows.push_back({tr.times[k], tr.probes[p], tr.current[p][k]});
    tables.push_back(std::move(cur));
    Table nrm{"norm", {"t", "norm2"}, {}};
    for (std::size_t k = 0; k < tr.times.size(); ++k) nrm.rows.push_back({tr.times[k], tr.norm2[k]});
    tables.push_back(std::move(nrm));
}

}  // namespace run_detail

inline json run_verification(const RunConfig& cfg, bool& all_passed) {
    VerifyOptions opts;
    opts.realizations = cfg.verify.realizations;
    opts.master_seed = cfg.ensemble.config.master_seed;
    opts.max_concurrency = cfg.ensemble.config.max_concurrency;
    const auto names = cfg.verify.criteria.empty() ? cross_module_criteria() : cfg.verify.criteria;
    for (const auto& n : names) {
        bool known = false;
        for (const auto& e : criteria_table()) known = known || n == e.name;
        if (!known) throw ConfigError("unknown verification criterion '" + n + "'");
    }
    json results = json::array();
    all_passed = true;
    for (const auto& n : names) {
        const auto r = run_criterion(n, opts);
        all_passed = all_passed && r.passed;
        results.push_back(to_json(r));
    }
    return {{"passed", all_passed}, {"criteria", results}};
}

inline RunResult run(const RunConfig& cfg) {
    namespace fs = std::filesystem;
    RunResult result;
    std::vector<Table> tables;
    json summary = {{"mode", std::string(mode_name(cfg.mode))},
                    {"seed", cfg.ensemble.config.master_seed},
                    {"config", to_json(cfg)}};
    json verify_report;

    if (auto f = cfg.system.oscillator_frequency(); f && cfg.mode != Mode::analytic)
        summary["oscillator"] = run_detail::oscillator_summary(*f, cfg.system.mass);

    switch (cfg.mode) {
        case Mode::analytic: {
            const auto f = cfg.analytic_frequency();
            const SpatialGrid g = cfg.grid.grid();
            summary["oscillator"] = run_detail::oscillator_summary(f, cfg.system.mass);
            Table t{"psi2_heatmap", {"t", "x", "psi2"}, {}};
            for (std::size_t k = 1; k <= cfg.analytic.n_times; ++k) {
                const double time = cfg.analytic.t_max * static_cast<double>(k) / static_cast<double>(cfg.analytic.n_times);
                for (std::size_t j = 0; j < g.size(); ++j)
                    t.rows.push_back({time, g.x(j), std::norm(point_source_psi(cfg.system.mass, f, g.x(j), time))});
            }
            tables.push_back(std::move(t));
            break;
        }
        case Mode::effective:
        case Mode::stochastic: {
            const auto spec = cfg.system.spec();
            const auto& evo = cfg.evolution.config;
            Trajectory tr;
            if (cfg.mode == Mode::stochastic) {
                const auto noise = sample_noise(trajectory_seed(cfg.ensemble.config.master_seed, 0), evo, spec.sigma2);
                tr = evolve(cfg.initial_state(), spec, evo, &noise, cfg.evolution.probes);
            } else {
                tr = evolve(cfg.initial_state(), spec, evo, nullptr, cfg.evolution.probes);
            }
            run_detail::add_trajectory_tables(tr, tables);
            summary["final"] = {{"t", tr.times.back()}, {"norm2", tr.norm2.back()}, {"mean_x", tr.mean_x.back()},
                                {"mean_x2", tr.mean_x2.back()}};
            break;
        }
        case Mode::ensemble: {
            const auto spec = cfg.system.spec();
            const auto& evo = cfg.evolution.config;
            const auto& ens = cfg.ensemble.config;
            const auto psi0 = cfg.initial_state();
            if (cfg.ensemble.average == "density") {
                const auto avg = average_density(psi0, spec, evo, ens);
                const RealField diag = avg.mean.diagonal();
                tables.push_back(run_detail::heatmap_from({avg.mean.time}, {diag}, psi0.grid));
                const Complex tr = avg.mean.trace();
                tables.push_back({"trace_purity", {"t", "trace_re", "trace_im", "purity"},
                                  {{avg.mean.time, tr.real(), tr.imag(), avg.mean.purity()}}});
                summary["final"] = {{"t", avg.mean.time}, {"n", avg.n}, {"trace_re", tr.real()},
                                    {"purity", avg.mean.purity()}, {"mean_sample_trace", avg.mean_sample_norm2},
                                    {"stderr_norm", avg.stderr_norm()}};
            } else {
                const auto acc = accumulate_amplitude(psi0, spec, evo, ens, 0, ens.n_realizations);
                std::vector<double> times;
                std::vector<RealField> dens;
                Table cur{"current", {"t", "probe_x", "J_R"}, {}};
                Table nrm{"norm", {"t", "norm2"}, {}};
                for (std::size_t s = 0; s < acc.snapshots.size(); ++s) {
                    const auto st = acc.state(s);
                    times.push_back(st.mean.time);
                    dens.push_back(run_detail::density_of(st.mean));
                    nrm.rows.push_back({st.mean.time, norm2(st.mean)});
                    if (!cfg.evolution.probes.empty()) {
                        const RealField j = probability_current(st.mean);
                        for (double p : cfg.evolution.probes) cur.rows.push_back({st.mean.time, p, interpolate(psi0.grid, j, p)});
                    }
                }
                tables.push_back(run_detail::heatmap_from(times, dens, psi0.grid));
                tables.push_back(std::move(cur));
                tables.push_back(std::move(nrm));
                const auto fin = acc.final_state();
                summary["final"] = {{"t", fin.mean.time}, {"n", fin.n}, {"norm2_of_mean", norm2(fin.mean)},
                                    {"mean_sample_norm2", fin.mean_sample_norm2}, {"stderr_norm", fin.stderr_norm()}};
            }
            break;
        }
        case Mode::master: {
            const auto psi0 = cfg.initial_state();
            const auto tr = evolve_density(DensityMatrix::pure(psi0), cfg.system.spec(), cfg.master);
            tables.push_back(run_detail::heatmap_from(tr.snapshot_times, tr.diagonals, psi0.grid));
            Table tp{"trace_purity", {"t", "trace_re", "trace_im", "purity"}, {}};
            for (std::size_t k = 0; k < tr.times.size(); ++k)
                tp.rows.push_back({tr.times[k], tr.trace[k].real(), tr.trace[k].imag(), tr.purity[k]});
            tables.push_back(std::move(tp));
            summary["final"] = {{"t", tr.times.back()}, {"trace_re", tr.trace.back().real()}, {"purity", tr.purity.back()}};
            break;
        }
        case Mode::verify: {
            bool ok = true;
            verify_report = run_verification(cfg, ok);
            result.verification_passed = ok;
            summary["verification_passed"] = ok;
            break;
        }
    }

    const fs::path dir(cfg.outputs.directory);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error("cannot create output directory '" + dir.string() + "': " + ec.message());
    for (const auto& t : tables) {
        const bool csv = cfg.outputs.format == "csv";
        const fs::path p = dir / (t.name + (csv ? ".csv" : ".json"));
        run_detail::write_file(p, csv ? to_csv(t) : to_json(t).dump() + "\n");
        result.files.push_back(p);
    }
    if (!verify_report.is_null()) {
        const fs::path p = dir / "verify_report.json";
        run_detail::write_file(p, verify_report.dump(2) + "\n");
        result.files.push_back(p);
    }
    const fs::path p = dir / "summary.json";
    run_detail::write_file(p, summary.dump(2) + "\n");
    result.files.push_back(p);
    result.summary = std::move(summary);
    return result;
}

}  // namespace noisyqd
