#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ckr/cavity.hpp"
#include "ckr/dynamics.hpp"
#include "ckr/errors.hpp"
#include "ckr/params.hpp"

namespace ckr {

// One run of the pipeline: physics, run size, tolerances, output selection.
struct RunConfig {
    PhysicalParams physical = cesium_default();
    double K_target = 0.8;
    double F = 1e6;
    std::optional<double> phi0;        // nullopt: arcsin(1/F), the half-transmission point
    std::optional<double> g_override = 0.0;  // nullopt: physical position-dependent g_a
    int n_kicks = 150;
    int n_trajectories = 20;
    std::uint64_t seed = 20050319;
    double solver_tol = 1e-12;
    int solver_max_iter = 50;
    std::optional<double> eps;    // coherence tolerance; nullopt: default rule
    std::optional<double> delta;  // fidelity tolerance; nullopt: default rule
    std::string ic_mode = "golden";  // golden | grid | list
    int ic_grid_nx = 5;
    int ic_grid_np = 4;
    std::vector<State> ic_list;
    std::string out_dir = "out";
    std::string format = "csv";

    double resolved_phi0() const { return phi0 ? *phi0 : std::asin(1.0 / F); }

    bool se_enabled() const { return !g_override || *g_override > 0.0; }

    // Noiseless default 1e-3 * 2pi; widened to kbar when spontaneous emission
    // can shift p by up to kbar per kick.
    double resolved_eps(const NormalizedParams& np) const {
        if (eps) return *eps;
        const double base = 1e-3 * two_pi;
        return se_enabled() ? std::max(base, np.kbar) : base;
    }

    double resolved_delta(const NormalizedParams& np) const {
        if (delta) return *delta;
        return se_enabled() ? std::max(1e-3, np.kbar) : 1e-3;
    }

    NormalizedParams normalized() const {
        return normalize(physical, K_target, resolved_phi0(), F, solver_tol, solver_max_iter);
    }

    KickOptions kick_options() const {
        KickOptions o;
        o.g_override = g_override;
        o.solver_tol = solver_tol;
        o.solver_max_iter = solver_max_iter;
        return o;
    }

    std::vector<State> initial_conditions() const {
        std::vector<State> ics;
        if (ic_mode == "list") {
            if (ic_list.empty()) throw ParamError("config: ic_mode=list but no icN entries");
            return ic_list;
        }
        if (ic_mode == "grid") {
            for (int i = 0; i < ic_grid_nx; ++i)
                for (int j = 0; j < ic_grid_np; ++j)
                    ics.push_back({two_pi * (i + 0.5) / ic_grid_nx, two_pi * (j + 0.5) / ic_grid_np});
            return ics;
        }
        if (ic_mode == "golden") {
            // low-discrepancy spread over the torus: golden-ratio stride in X,
            // uniform comb in P
            const double golden = 0.6180339887498949;
            for (int i = 0; i < n_trajectories; ++i) {
                const double fx = std::fmod(golden * (i + 1), 1.0);
                ics.push_back({two_pi * fx, two_pi * (i + 0.5) / n_trajectories});
            }
            return ics;
        }
        throw ParamError("config: unknown ic_mode '" + ic_mode + "'");
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace detail

// Flat key = value text; '#' starts a comment; keys mirror PhysicalParams
// field names (SI units) plus the run keys documented in the README.
inline RunConfig parse_config(std::istream& in) {
    std::map<std::string, std::string> kv;
    std::vector<std::pair<int, State>> ics;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw IoError("config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string val = detail::trim(line.substr(eq + 1));
        if (key.rfind("ic", 0) == 0 && key.size() > 2 &&
            key.find_first_not_of("0123456789", 2) == std::string::npos) {
            const int idx = std::stoi(key.substr(2));
            std::istringstream vs(val);
            double x, p;
            char comma;
            if (!(vs >> x >> comma >> p) || comma != ',')
                throw IoError("config line " + std::to_string(lineno) + ": icN wants 'X,P'");
            ics.emplace_back(idx, State{x, p});
            continue;
        }
        kv[key] = val;
    }

    RunConfig cfg;
    if (auto it = kv.find("preset"); it != kv.end()) {
        if (it->second == "cesium-default")
            cfg.physical = cesium_default();
        else
            throw ParamError("config: unknown preset '" + it->second + "'");
        kv.erase(it);
    }

    auto take_d = [&](const char* key, double& target) {
        if (auto it = kv.find(key); it != kv.end()) {
            target = std::stod(it->second);
            kv.erase(it);
        }
    };
    auto take_i = [&](const char* key, int& target) {
        if (auto it = kv.find(key); it != kv.end()) {
            target = std::stoi(it->second);
            kv.erase(it);
        }
    };

    take_d("lambda_L", cfg.physical.lambda_L);
    take_d("M", cfg.physical.M);
    take_d("Gamma", cfg.physical.Gamma);
    take_d("Delta", cfg.physical.Delta);
    take_d("T", cfg.physical.T);
    take_d("tau", cfg.physical.tau);
    take_d("I0", cfg.physical.I0);
    take_d("I_s", cfg.physical.I_s);
    take_d("Tmirror", cfg.physical.Tmirror);
    take_d("L", cfg.physical.L);
    take_d("L_at", cfg.physical.L_at);
    take_d("K_target", cfg.K_target);
    take_d("F", cfg.F);
    take_i("n_kicks", cfg.n_kicks);
    take_i("n_trajectories", cfg.n_trajectories);
    take_i("solver_max_iter", cfg.solver_max_iter);
    take_d("solver_tol", cfg.solver_tol);
    take_i("ic_grid_nx", cfg.ic_grid_nx);
    take_i("ic_grid_np", cfg.ic_grid_np);

    if (auto it = kv.find("phi0"); it != kv.end()) {
        if (it->second != "auto") cfg.phi0 = std::stod(it->second);
        kv.erase(it);
    }
    if (auto it = kv.find("g_override"); it != kv.end()) {
        if (it->second == "physical")
            cfg.g_override.reset();
        else
            cfg.g_override = std::stod(it->second);
        kv.erase(it);
    }
    if (auto it = kv.find("eps"); it != kv.end()) {
        if (it->second != "auto") cfg.eps = std::stod(it->second);
        kv.erase(it);
    }
    if (auto it = kv.find("delta"); it != kv.end()) {
        if (it->second != "auto") cfg.delta = std::stod(it->second);
        kv.erase(it);
    }
    if (auto it = kv.find("seed"); it != kv.end()) {
        cfg.seed = std::stoull(it->second);
        kv.erase(it);
    }
    if (auto it = kv.find("ic_mode"); it != kv.end()) {
        cfg.ic_mode = it->second;
        kv.erase(it);
    }
    if (auto it = kv.find("out"); it != kv.end()) {
        cfg.out_dir = it->second;
        kv.erase(it);
    }
    if (auto it = kv.find("format"); it != kv.end()) {
        cfg.format = it->second;
        kv.erase(it);
    }
    if (!kv.empty()) throw IoError("config: unknown key '" + kv.begin()->first + "'");

    if (!ics.empty()) {
        std::sort(ics.begin(), ics.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        for (auto& [idx, s] : ics) cfg.ic_list.push_back(s);
        cfg.ic_mode = "list";
        cfg.n_trajectories = static_cast<int>(cfg.ic_list.size());
    }
    cfg.n_kicks = std::max(cfg.n_kicks, 1);
    if (cfg.n_trajectories < 1) throw ParamError("config: n_trajectories must be >= 1");
    return cfg;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path);
    return parse_config(in);
}

}  // namespace ckr
