#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "ckr/dynamics.hpp"
#include "ckr/errors.hpp"
#include "ckr/metrics.hpp"
#include "ckr/params.hpp"
#include "ckr/reconstruct.hpp"

namespace ckr::io {

using nlohmann::json;

// Shortest decimal representation that parses back to the same double.
inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw IoError("bad numeric field '" + std::string(s) + "'");
    return v;
}

inline void to_json(json& j, const NormalizedParams& np) {
    j = json{{"K_nominal", np.K_nominal},
             {"kbar", np.kbar},
             {"F", np.F},
             {"phi0", np.phi0},
             {"kerr_scale", np.kerr_scale},
             {"delta_over_gamma", np.delta_over_gamma},
             {"g_scale", np.g_scale},
             {"kick_calibration", np.kick_calibration},
             {"tmirror", np.tmirror},
             {"I_sat", np.I_sat},
             {"gamma", np.gamma},
             {"tau", np.tau},
             {"I0", np.I0}};
}

inline NormalizedParams params_from_json(const json& j) {
    NormalizedParams np;
    np.K_nominal = j.at("K_nominal").get<double>();
    np.kbar = j.at("kbar").get<double>();
    np.F = j.at("F").get<double>();
    np.phi0 = j.at("phi0").get<double>();
    np.kerr_scale = j.at("kerr_scale").get<double>();
    np.delta_over_gamma = j.at("delta_over_gamma").get<double>();
    np.g_scale = j.at("g_scale").get<double>();
    np.kick_calibration = j.at("kick_calibration").get<double>();
    np.tmirror = j.at("tmirror").get<double>();
    np.I_sat = j.at("I_sat").get<double>();
    np.gamma = j.at("gamma").get<double>();
    np.tau = j.at("tau").get<double>();
    np.I0 = j.at("I0").get<double>();
    return np;
}

inline std::string metadata_line(const std::string& schema, const NormalizedParams& np,
                                 std::uint64_t seed) {
    json meta;
    meta["schema"] = schema;
    json jp;
    to_json(jp, np);
    meta["params"] = jp;
    meta["seed"] = seed;
    return "# " + meta.dump();
}

struct Header {
    std::string schema;
    NormalizedParams params;
    std::uint64_t seed = 0;
};

inline Header parse_metadata(const std::string& line, const std::string& expect_schema) {
    if (line.size() < 2 || line[0] != '#')
        throw IoError("missing '# {json}' metadata header");
    Header h;
    json meta;
    try {
        meta = json::parse(line.substr(1));
    } catch (const json::exception& e) {
        throw IoError(std::string("bad metadata header: ") + e.what());
    }
    h.schema = meta.at("schema").get<std::string>();
    if (h.schema != expect_schema)
        throw IoError("schema mismatch: expected " + expect_schema + ", got " + h.schema);
    h.params = params_from_json(meta.at("params"));
    h.seed = meta.at("seed").get<std::uint64_t>();
    return h;
}

inline std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return out;
}

// ---- trajectory files: n,X,P,K_eff,S_over_I0,se_dp,g_a --------------------

inline std::string serialize_trajectory(const TrajectoryRecord& rec) {
    std::ostringstream os;
    os << metadata_line("ckr.trajectory.v1", rec.params, rec.seed) << '\n';
    os << "n,X,P,K_eff,S_over_I0,se_dp,g_a\n";
    for (const auto& k : rec.kicks) {
        os << k.n << ',' << format_double(k.X) << ',' << format_double(k.P) << ','
           << format_double(k.K_eff) << ',' << format_double(k.S_over_I0) << ','
           << format_double(k.se_dp) << ',' << format_double(k.g_a) << '\n';
    }
    return os.str();
}

inline TrajectoryRecord parse_trajectory(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw IoError("empty trajectory file");
    const Header h = parse_metadata(line, "ckr.trajectory.v1");
    if (!std::getline(in, line) || line != "n,X,P,K_eff,S_over_I0,se_dp,g_a")
        throw IoError("bad trajectory column header");
    TrajectoryRecord rec;
    rec.params = h.params;
    rec.seed = h.seed;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        ++row;
        const auto f = split_csv(line);
        if (f.size() != 7) throw IoError("trajectory row " + std::to_string(row) + ": want 7 fields");
        KickRecord k;
        k.n = static_cast<int>(parse_double(f[0]));
        k.X = parse_double(f[1]);
        k.P = parse_double(f[2]);
        k.K_eff = parse_double(f[3]);
        k.S_over_I0 = parse_double(f[4]);
        k.se_dp = parse_double(f[5]);
        k.g_a = parse_double(f[6]);
        rec.kicks.push_back(k);
    }
    return rec;
}

// ---- series files: n,S_over_I0 ---------------------------------------------

inline std::string serialize_series(const TransmissionSeries& ts) {
    std::ostringstream os;
    os << metadata_line("ckr.series.v1", ts.params, ts.seed) << '\n';
    os << "n,S_over_I0\n";
    for (std::size_t n = 0; n < ts.samples.size(); ++n)
        os << n << ',' << format_double(ts.samples[n]) << '\n';
    return os.str();
}

inline TransmissionSeries parse_series(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw IoError("empty series file");
    const Header h = parse_metadata(line, "ckr.series.v1");
    if (!std::getline(in, line) || line != "n,S_over_I0")
        throw IoError("bad series column header");
    TransmissionSeries ts;
    ts.params = h.params;
    ts.seed = h.seed;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        ++row;
        const auto f = split_csv(line);
        if (f.size() != 2) throw IoError("series row " + std::to_string(row) + ": want 2 fields");
        const double s = parse_double(f[1]);
        if (!(s > 0.0 && s <= 1.0))
            throw SignalRangeError("series row " + std::to_string(row) +
                                   ": S_over_I0 outside (0, 1]");
        ts.samples.push_back(s);
    }
    return ts;
}

// ---- reconstruction files: n,x,p,restart_flag,flagged ----------------------

inline std::string serialize_reconstruction(const ReconstructedTrajectory& rt,
                                            const NormalizedParams& np, std::uint64_t seed) {
    std::ostringstream os;
    json meta;
    meta["schema"] = "ckr.recon.v1";
    json jp;
    to_json(jp, np);
    meta["params"] = jp;
    meta["seed"] = seed;
    meta["restarts"] = rt.restarts;
    os << "# " << meta.dump() << '\n';
    os << "n,x,p,restart_flag,flagged\n";
    for (std::size_t n = 0; n < rt.x.size(); ++n) {
        os << n << ',' << format_double(rt.x[n]) << ',' << format_double(rt.p[n]) << ','
           << int(rt.restart_flag[n]) << ',' << int(rt.flag[n]) << '\n';
    }
    return os.str();
}

inline ReconstructedTrajectory parse_reconstruction(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw IoError("empty reconstruction file");
    if (line.empty() || line[0] != '#') throw IoError("missing metadata header");
    json meta;
    try {
        meta = json::parse(line.substr(1));
    } catch (const json::exception& e) {
        throw IoError(std::string("bad metadata header: ") + e.what());
    }
    if (meta.at("schema").get<std::string>() != "ckr.recon.v1")
        throw IoError("schema mismatch for reconstruction file");
    ReconstructedTrajectory rt;
    rt.restarts = meta.at("restarts").get<int>();
    if (!std::getline(in, line) || line != "n,x,p,restart_flag,flagged")
        throw IoError("bad reconstruction column header");
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        ++row;
        const auto f = split_csv(line);
        if (f.size() != 5)
            throw IoError("reconstruction row " + std::to_string(row) + ": want 5 fields");
        rt.x.push_back(parse_double(f[1]));
        rt.p.push_back(parse_double(f[2]));
        rt.restart_flag.push_back(static_cast<std::uint8_t>(parse_double(f[3])));
        const auto fl = static_cast<std::uint8_t>(parse_double(f[4]));
        rt.flag.push_back(fl);
        if (fl) rt.flagged.push_back(rt.x.size() - 1);
    }
    return rt;
}

// ---- JSON variants of the three file schemas --------------------------------

inline std::string serialize_trajectory_json(const TrajectoryRecord& rec) {
    json j;
    j["schema"] = "ckr.trajectory.v1";
    json jp;
    to_json(jp, rec.params);
    j["params"] = jp;
    j["seed"] = rec.seed;
    j["columns"] = {"n", "X", "P", "K_eff", "S_over_I0", "se_dp", "g_a"};
    json rows = json::array();
    for (const auto& k : rec.kicks)
        rows.push_back({k.n, k.X, k.P, k.K_eff, k.S_over_I0, k.se_dp, k.g_a});
    j["kicks"] = rows;
    return j.dump() + "\n";
}

inline std::string serialize_series_json(const TransmissionSeries& ts) {
    json j;
    j["schema"] = "ckr.series.v1";
    json jp;
    to_json(jp, ts.params);
    j["params"] = jp;
    j["seed"] = ts.seed;
    j["samples"] = ts.samples;
    return j.dump() + "\n";
}

inline std::string serialize_reconstruction_json(const ReconstructedTrajectory& rt,
                                                 const NormalizedParams& np, std::uint64_t seed) {
    json j;
    j["schema"] = "ckr.recon.v1";
    json jp;
    to_json(jp, np);
    j["params"] = jp;
    j["seed"] = seed;
    j["restarts"] = rt.restarts;
    j["columns"] = {"n", "x", "p", "restart_flag", "flagged"};
    json rows = json::array();
    for (std::size_t n = 0; n < rt.x.size(); ++n)
        rows.push_back({n, rt.x[n], rt.p[n], int(rt.restart_flag[n]), int(rt.flag[n])});
    j["points"] = rows;
    return j.dump() + "\n";
}

namespace detail {

inline json parse_json_payload(const std::string& text, const std::string& expect_schema) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw IoError(std::string("bad json payload: ") + e.what());
    }
    if (j.at("schema").get<std::string>() != expect_schema)
        throw IoError("schema mismatch: expected " + expect_schema);
    return j;
}

}  // namespace detail

inline TrajectoryRecord parse_trajectory_json(const std::string& text) {
    const json j = detail::parse_json_payload(text, "ckr.trajectory.v1");
    TrajectoryRecord rec;
    rec.params = params_from_json(j.at("params"));
    rec.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& row : j.at("kicks")) {
        KickRecord k;
        k.n = row.at(0).get<int>();
        k.X = row.at(1).get<double>();
        k.P = row.at(2).get<double>();
        k.K_eff = row.at(3).get<double>();
        k.S_over_I0 = row.at(4).get<double>();
        k.se_dp = row.at(5).get<double>();
        k.g_a = row.at(6).get<double>();
        rec.kicks.push_back(k);
    }
    return rec;
}

inline TransmissionSeries parse_series_json(const std::string& text) {
    const json j = detail::parse_json_payload(text, "ckr.series.v1");
    TransmissionSeries ts;
    ts.params = params_from_json(j.at("params"));
    ts.seed = j.at("seed").get<std::uint64_t>();
    ts.samples = j.at("samples").get<std::vector<double>>();
    for (std::size_t i = 0; i < ts.samples.size(); ++i)
        if (!(ts.samples[i] > 0.0 && ts.samples[i] <= 1.0))
            throw SignalRangeError("series row " + std::to_string(i + 1) +
                                   ": S_over_I0 outside (0, 1]");
    return ts;
}

inline ReconstructedTrajectory parse_reconstruction_json(const std::string& text) {
    const json j = detail::parse_json_payload(text, "ckr.recon.v1");
    ReconstructedTrajectory rt;
    rt.restarts = j.at("restarts").get<int>();
    for (const auto& row : j.at("points")) {
        rt.x.push_back(row.at(1).get<double>());
        rt.p.push_back(row.at(2).get<double>());
        rt.restart_flag.push_back(static_cast<std::uint8_t>(row.at(3).get<int>()));
        const auto fl = static_cast<std::uint8_t>(row.at(4).get<int>());
        rt.flag.push_back(fl);
        if (fl) rt.flagged.push_back(rt.x.size() - 1);
    }
    return rt;
}

// Format is detected by the leading byte: json payloads start with '{',
// csv files with the '#' metadata line.
inline bool looks_like_json(const std::string& text) {
    for (char c : text) {
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r') continue;
        return c == '{';
    }
    return false;
}

inline TrajectoryRecord parse_trajectory_any(const std::string& text) {
    if (looks_like_json(text)) return parse_trajectory_json(text);
    std::istringstream in(text);
    return parse_trajectory(in);
}

inline TransmissionSeries parse_series_any(const std::string& text) {
    if (looks_like_json(text)) return parse_series_json(text);
    std::istringstream in(text);
    return parse_series(in);
}

inline ReconstructedTrajectory parse_reconstruction_any(const std::string& text) {
    if (looks_like_json(text)) return parse_reconstruction_json(text);
    std::istringstream in(text);
    return parse_reconstruction(in);
}

// ---- first-return map: S_n,S_n1 ---------------------------------------------

inline std::string serialize_first_return(const std::vector<std::pair<double, double>>& pairs) {
    std::ostringstream os;
    os << "# {\"schema\":\"ckr.firstreturn.v1\"}\n";
    os << "S_n,S_n1\n";
    for (const auto& [a, b] : pairs) os << format_double(a) << ',' << format_double(b) << '\n';
    return os.str();
}

// ---- fidelity report --------------------------------------------------------

inline json fidelity_to_json(const FidelityReport& r) {
    return json{{"matched_fraction", r.matched_fraction},
                {"mean_distance", r.mean_distance},
                {"restart_fraction", r.restart_fraction},
                {"flagged_fraction", r.flagged_fraction},
                {"n_points", r.n_points}};
}

// ---- file helpers -----------------------------------------------------------

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << content;
    if (!out) throw IoError("write failed for " + path);
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace ckr::io
