#pragma once

#include <filesystem>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "ckr/config.hpp"
#include "ckr/io.hpp"
#include "ckr/metrics.hpp"
#include "ckr/reconstruct.hpp"

namespace ckr::commands {

// exit codes shared by all subcommands
inline constexpr int kOk = 0;
inline constexpr int kError = 1;
inline constexpr int kWarnings = 2;

namespace fs = std::filesystem;

inline std::string index_name(const std::string& stem, std::size_t i,
                              const std::string& ext = ".csv") {
    std::ostringstream os;
    os << stem << '_' << std::setw(3) << std::setfill('0') << i << ext;
    return os.str();
}

inline int cmd_validate(const RunConfig& cfg, std::ostream& out,
                        const std::string& json_path = "") {
    const NormalizedParams np = cfg.normalized();
    const auto op0 = solve_cavity_field(0.0, np, np.I0, cfg.solver_tol, cfg.solver_max_iter);
    const ValidityReport vr = check_delta_kick_validity(cfg.physical, cfg.F, op0.I_c);
    const Timescales ts = timescales(np, cfg.physical.T);
    const SensitivityReport sr = sensitivity_report(np);

    out << "reduced units:\n"
        << "  K_target          " << np.K_nominal << "\n"
        << "  kbar              " << np.kbar << (ts.deep_quantum ? "   (deep quantum regime)" : "")
        << "\n"
        << "  F                 " << np.F << "\n"
        << "  phi0              " << np.phi0 << "\n"
        << "  kerr_scale        " << np.kerr_scale << "\n"
        << "  Delta/Gamma       " << np.delta_over_gamma << "\n"
        << "  kick_calibration  " << np.kick_calibration << " m^2/W\n";
    out << "delta-kick validity:\n"
        << "  N_max             " << vr.N_max << "\n"
        << "  ratio@n_kicks     " << vr.validity_ratio << (vr.kick_count_ok ? "" : "   WARN") << "\n"
        << "  tau_c             " << vr.tau_c << " s" << (vr.tau_ok ? "" : "   WARN (tau < 3 tau_c)")
        << "\n"
        << "  F expected        " << vr.F_expected << " (mismatch " << vr.F_mismatch * 100.0
        << "%)" << (vr.F_consistent ? "" : "   WARN") << "\n";
    out << "kick-strength formulas at the operating point (paper variants):\n"
        << "  K (Eq.3, V0 = hbar Omega0^2/(8 Delta))  " << vr.K_eq3 << "\n"
        << "  K (omega_r T^2 Omega0^2 / 2 Delta)      " << vr.K_half_T2 << "\n"
        << "  K (Airy product form)                   " << vr.K_airy_product << "\n";
    out << "timescales:\n"
        << "  t_E               " << ts.t_E_kicks << " kicks\n"
        << "  t_L               " << ts.t_L_kicks << " kicks\n";
    out << "transmission sensitivity:\n"
        << "  max |k_L DeltaL|  " << sr.max_abs_klDeltaL << "\n"
        << "  dS/I0             " << sr.dS_over_I0 << "\n"
        << "  K variation       " << sr.K_rel_variation * 100.0 << "%"
        << (sr.K_variation_ok ? "" : "   WARN (> 5%, disturbs the KR dynamics)") << "\n";
    for (const auto& w : vr.warnings) out << "warning: " << w << "\n";

    if (!json_path.empty()) {
        io::json j;
        io::json jp;
        io::to_json(jp, np);
        j["params"] = jp;
        j["N_max"] = vr.N_max;
        j["validity_ratio"] = vr.validity_ratio;
        j["tau_c"] = vr.tau_c;
        j["F_expected"] = vr.F_expected;
        j["F_mismatch"] = vr.F_mismatch;
        j["K_formulas"] = {vr.K_eq3, vr.K_half_T2, vr.K_airy_product};
        j["t_E_kicks"] = ts.t_E_kicks;
        j["t_L_kicks"] = ts.t_L_kicks;
        j["deep_quantum"] = ts.deep_quantum;
        j["dS_over_I0"] = sr.dS_over_I0;
        j["K_rel_variation"] = sr.K_rel_variation;
        j["warnings"] = vr.warnings;
        io::write_file(json_path, j.dump(2) + "\n");
    }

    const bool warned = !vr.warnings.empty() || !sr.K_variation_ok || ts.deep_quantum;
    return warned ? kWarnings : kOk;
}

// Writes trajectory_NNN.csv and series_NNN.csv per ensemble member.
inline int cmd_simulate(const RunConfig& cfg, std::ostream& out) {
    const NormalizedParams np = cfg.normalized();
    validate_flank(np, np.I0);
    const std::vector<State> ics = cfg.initial_conditions();
    const EnsembleResult res =
        simulate_ensemble(ics, cfg.n_kicks, np, cfg.seed, cfg.kick_options());
    if (!res.errors.empty()) {
        for (const auto& [i, msg] : res.errors)
            std::cerr << "trajectory " << i << ": " << msg << "\n";
        return kError;
    }
    fs::create_directories(cfg.out_dir);
    const bool as_json = cfg.format == "json";
    const char* ext = as_json ? ".json" : ".csv";
    for (std::size_t i = 0; i < res.records.size(); ++i) {
        const auto& rec = res.records[i];
        const TransmissionSeries ts = transmission_series(rec);
        io::write_file((fs::path(cfg.out_dir) / index_name("trajectory", i, ext)).string(),
                       as_json ? io::serialize_trajectory_json(rec) : io::serialize_trajectory(rec));
        io::write_file((fs::path(cfg.out_dir) / index_name("series", i, ext)).string(),
                       as_json ? io::serialize_series_json(ts) : io::serialize_series(ts));
    }
    out << "wrote " << res.records.size() << " trajectories x " << cfg.n_kicks << " kicks to "
        << cfg.out_dir << "\n";
    return kOk;
}

inline int cmd_reconstruct(const RunConfig& cfg, const std::vector<std::string>& series_paths,
                           std::ostream& out) {
    if (series_paths.empty()) {
        std::cerr << "reconstruct: no series files given\n";
        return kError;
    }
    fs::create_directories(cfg.out_dir);
    const bool as_json = cfg.format == "json";
    for (std::size_t i = 0; i < series_paths.size(); ++i) {
        const TransmissionSeries ts = io::parse_series_any(io::read_file(series_paths[i]));
        const double eps = cfg.resolved_eps(ts.params);
        const ReconstructedTrajectory rt =
            reconstruct_trajectory(ts, eps, cfg.solver_tol, cfg.solver_max_iter);
        const std::string name = "recon_" + fs::path(series_paths[i]).stem().string() +
                                 (as_json ? ".json" : ".csv");
        io::write_file((fs::path(cfg.out_dir) / name).string(),
                       as_json ? io::serialize_reconstruction_json(rt, ts.params, ts.seed)
                               : io::serialize_reconstruction(rt, ts.params, ts.seed));
        out << series_paths[i] << ": " << rt.x.size() << " points, " << rt.restarts
            << " restarts, " << rt.flagged.size() << " flagged\n";
    }
    return kOk;
}

// Fidelity report plus the two phase-map point clouds for plotting.
inline int cmd_compare(const RunConfig& cfg, const std::string& truth_path,
                       const std::string& recon_path, std::ostream& out) {
    const TrajectoryRecord truth = io::parse_trajectory_any(io::read_file(truth_path));
    const ReconstructedTrajectory recon = io::parse_reconstruction_any(io::read_file(recon_path));

    const double delta = cfg.resolved_delta(truth.params);
    const FidelityReport rep = trajectory_fidelity(truth, recon, delta);

    fs::create_directories(cfg.out_dir);
    io::write_file((fs::path(cfg.out_dir) / "fidelity.json").string(),
                   io::fidelity_to_json(rep).dump(2) + "\n");

    std::ostringstream pa, pb;
    pa << "x,p\n";
    for (const auto& k : truth.kicks)
        pa << io::format_double(mod_2pi(k.X)) << ',' << io::format_double(mod_2pi(k.P)) << '\n';
    pb << "x,p\n";
    for (std::size_t n = 0; n < recon.x.size(); ++n)
        pb << io::format_double(recon.x[n]) << ',' << io::format_double(recon.p[n]) << '\n';
    io::write_file((fs::path(cfg.out_dir) / "phase_map_truth.csv").string(), pa.str());
    io::write_file((fs::path(cfg.out_dir) / "phase_map_recon.csv").string(), pb.str());

    out << "matched_fraction " << rep.matched_fraction << " (delta " << delta << ")\n"
        << "mean_distance    " << rep.mean_distance << "\n"
        << "restart_fraction " << rep.restart_fraction << "\n"
        << "flagged_fraction " << rep.flagged_fraction << "\n";
    return kOk;
}

// First-return pairs (S_n, S_{n+1}); multiple series are emitted per file,
// never pairing across file boundaries.
inline int cmd_first_return(const RunConfig& cfg, const std::vector<std::string>& series_paths,
                            std::ostream& out) {
    if (series_paths.empty()) {
        std::cerr << "first-return: no series files given\n";
        return kError;
    }
    std::vector<std::pair<double, double>> pairs;
    for (const auto& path : series_paths) {
        const TransmissionSeries ts = io::parse_series_any(io::read_file(path));
        if (ts.samples.size() < 2)
            throw SizeError("first-return: series " + path + " has fewer than 2 samples");
        for (std::size_t n = 0; n + 1 < ts.samples.size(); ++n)
            pairs.emplace_back(ts.samples[n], ts.samples[n + 1]);
    }
    fs::create_directories(cfg.out_dir);
    io::write_file((fs::path(cfg.out_dir) / "first_return.csv").string(),
                   io::serialize_first_return(pairs));
    out << "wrote " << pairs.size() << " pairs to " << cfg.out_dir << "/first_return.csv\n";
    return kOk;
}

}  // namespace ckr::commands
