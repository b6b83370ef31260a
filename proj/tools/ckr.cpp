// Command-line driver for the cavity kicked-rotor pipeline:
// validate | simulate | reconstruct | compare | first-return.

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ckr/commands.hpp"
#include "ckr/config.hpp"

namespace {

struct CommonFlags {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> kicks;
    std::optional<int> trajectories;
    std::optional<double> g_override;
    std::optional<std::string> out_dir;
    std::optional<std::string> format;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--config", f.config_path, "run configuration file (key = value)");
    cmd->add_option("--seed", f.seed, "RNG master seed (u64)");
    cmd->add_option("--kicks", f.kicks, "kicks per trajectory");
    cmd->add_option("--trajectories", f.trajectories, "ensemble size");
    cmd->add_option("--g-override", f.g_override, "constant per-kick fluorescence probability");
    cmd->add_option("--out", f.out_dir, "output directory");
    cmd->add_option("--format", f.format, "point-file format: csv|json")
        ->check(CLI::IsMember({"csv", "json"}));
}

ckr::RunConfig resolve(const CommonFlags& f) {
    ckr::RunConfig cfg;
    if (!f.config_path.empty()) cfg = ckr::load_config(f.config_path);
    if (f.seed) cfg.seed = *f.seed;
    if (f.kicks) cfg.n_kicks = *f.kicks;
    if (f.trajectories) cfg.n_trajectories = *f.trajectories;
    if (f.g_override) cfg.g_override = *f.g_override;
    if (f.out_dir) cfg.out_dir = *f.out_dir;
    if (f.format) cfg.format = *f.format;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cavity kicked rotor: simulation and phase-space reconstruction"};
    app.require_subcommand(1);

    CommonFlags fv, fs, fr, fc, ff;
    std::vector<std::string> series_paths, fr_paths;
    std::string truth_path, recon_path, validate_json;

    auto* validate = app.add_subcommand("validate", "parameter and regime diagnostics");
    add_common(validate, fv);
    validate->add_option("--json", validate_json, "also write a machine-readable report");

    auto* simulate = app.add_subcommand("simulate", "generate trajectories and transmission series");
    add_common(simulate, fs);

    auto* reconstruct = app.add_subcommand("reconstruct", "invert transmission series");
    add_common(reconstruct, fr);
    reconstruct->add_option("series", series_paths, "series_NNN.csv files")->required();

    auto* compare = app.add_subcommand("compare", "score a reconstruction against ground truth");
    add_common(compare, fc);
    compare->add_option("truth", truth_path, "trajectory_NNN.csv")->required();
    compare->add_option("recon", recon_path, "recon_series_NNN.csv")->required();

    auto* first_return = app.add_subcommand("first-return", "emit the (S_n, S_n+1) map");
    add_common(first_return, ff);
    first_return->add_option("series", fr_paths, "series_NNN.csv files")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (validate->parsed())
            return ckr::commands::cmd_validate(resolve(fv), std::cout, validate_json);
        if (simulate->parsed()) return ckr::commands::cmd_simulate(resolve(fs), std::cout);
        if (reconstruct->parsed())
            return ckr::commands::cmd_reconstruct(resolve(fr), series_paths, std::cout);
        if (compare->parsed())
            return ckr::commands::cmd_compare(resolve(fc), truth_path, recon_path, std::cout);
        if (first_return->parsed())
            return ckr::commands::cmd_first_return(resolve(ff), fr_paths, std::cout);
    } catch (const ckr::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return ckr::commands::kError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return ckr::commands::kError;
    }
    return ckr::commands::kError;
}
