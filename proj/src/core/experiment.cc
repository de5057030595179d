// Copyright 2026 The toomdtc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "toomdtc/experiment.h"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <json.hpp>
#include <numbers>
#include <set>
#include <sstream>

#include "toomdtc/analysis.h"
#include "toomdtc/format.h"
#include "toomdtc/parallel.h"
#include "toomdtc/svg.h"

#ifndef TOOMDTC_VERSION
#define TOOMDTC_VERSION "unknown"
#endif

namespace toomdtc {

namespace fs = std::filesystem;

std::string_view to_string(Engine e) {
    switch (e) {
        case Engine::Clifford:
            return "clifford";
        case Engine::Dense:
            return "dense";
        case Engine::NonClifford:
            return "nonclifford";
        case Engine::Jump:
            return "jump";
        case Engine::Classical:
            return "classical";
    }
    return "?";
}

std::optional<Engine> parse_engine(std::string_view text) {
    for (auto e : {Engine::Clifford, Engine::Dense, Engine::NonClifford, Engine::Jump, Engine::Classical}) {
        if (text == to_string(e)) {
            return e;
        }
    }
    return std::nullopt;
}

std::string code_version() {
    return TOOMDTC_VERSION;
}

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("sha256 failed");
    }
    static const char *hex = "0123456789abcdef";
    std::string out;
    for (unsigned i = 0; i < len; i++) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 15];
    }
    return out;
}

// ---------------------------------------------------------------------------
// Config text

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

bool valid_key(std::string_view k) {
    if (k.empty()) {
        return false;
    }
    return std::all_of(k.begin(), k.end(), [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '.';
    });
}

}  // namespace

RawConfig parse_config_text(std::string_view text, std::string source_name) {
    RawConfig raw;
    raw.source = std::string(text);
    std::set<std::string> seen;
    size_t line_no = 0;
    size_t pos = 0;
    while (pos <= text.size()) {
        size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) {
            end = text.size();
        }
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        line_no++;
        if (auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) {
            if (end == text.size()) {
                break;
            }
            continue;
        }
        std::string where = source_name + " line " + std::to_string(line_no);
        auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ValidationError(where, "expected `key = value`");
        }
        std::string key(trim(line.substr(0, eq)));
        std::string_view value = trim(line.substr(eq + 1));
        if (!valid_key(key)) {
            throw ValidationError(where, "malformed key '" + key + "'");
        }
        if (!seen.insert(key).second) {
            throw ValidationError(key, "set more than once (" + where + ")");
        }
        if (value.starts_with("sweep(")) {
            if (!value.ends_with(")")) {
                throw ValidationError(key, "unterminated sweep(...) list");
            }
            if (raw.sweep_key) {
                throw ValidationError(key, "only one key may be swept; '" + *raw.sweep_key + "' is already swept");
            }
            raw.sweep_key = key;
            std::string_view body = value.substr(6, value.size() - 7);
            while (true) {
                auto comma = body.find(',');
                auto item = trim(body.substr(0, comma));
                if (item.empty()) {
                    throw ValidationError(key, "empty value in sweep list");
                }
                raw.sweep_values.emplace_back(item);
                if (comma == std::string_view::npos) {
                    break;
                }
                body = body.substr(comma + 1);
            }
            raw.entries.push_back({key, raw.sweep_values.front(), line_no});
            continue;
        }
        if (value.empty()) {
            throw ValidationError(key, "missing value");
        }
        raw.entries.push_back({key, std::string(value), line_no});
        if (end == text.size()) {
            break;
        }
    }
    return raw;
}

RawConfig load_config_file(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open config file '" + path + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(), path);
}

RawConfig RawConfig::point(size_t i) const {
    if (!sweep_key || i >= sweep_values.size()) {
        throw std::out_of_range("sweep point out of range");
    }
    RawConfig out = *this;
    for (auto &e : out.entries) {
        if (e.key == *sweep_key) {
            e.value = sweep_values[i];
        }
    }
    out.sweep_key.reset();
    out.sweep_values.clear();
    return out;
}

// ---------------------------------------------------------------------------
// Validation

namespace {

double parse_real(const std::string &key, std::string_view v) {
    double scale = 1.0;
    if (v.ends_with("pi")) {
        scale = std::numbers::pi;
        v.remove_suffix(2);
        v = trim(v);
        if (v.ends_with("*")) {
            v.remove_suffix(1);
            v = trim(v);
        }
        if (v.empty()) {
            return scale;
        }
    }
    double out = 0;
    auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size() || !std::isfinite(out)) {
        throw ValidationError(key, "expected a number, got '" + std::string(v) + "'");
    }
    return out * scale;
}

uint64_t parse_uint(const std::string &key, std::string_view v) {
    uint64_t out = 0;
    auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
        throw ValidationError(key, "expected a non-negative integer, got '" + std::string(v) + "'");
    }
    return out;
}

uint32_t parse_u32(const std::string &key, std::string_view v) {
    uint64_t x = parse_uint(key, v);
    if (x > UINT32_MAX) {
        throw ValidationError(key, "value too large");
    }
    return static_cast<uint32_t>(x);
}

bool parse_bool(const std::string &key, std::string_view v) {
    if (v == "true" || v == "on" || v == "yes" || v == "1") {
        return true;
    }
    if (v == "false" || v == "off" || v == "no" || v == "0") {
        return false;
    }
    throw ValidationError(key, "expected true or false, got '" + std::string(v) + "'");
}

double parse_probability(const std::string &key, std::string_view v) {
    double p = parse_real(key, v);
    if (!(p >= 0 && p <= 1)) {
        throw ValidationError(key, "probability must lie in [0, 1], got " + std::string(v));
    }
    return p;
}

enum EngineMask : unsigned {
    kClifford = 1,
    kDense = 2,
    kNonClifford = 4,
    kJump = 8,
    kClassical = 16,
    kAll = 31,
    kProtocol = kClifford | kDense | kClassical,
};

unsigned mask_of(Engine e) {
    return 1u << static_cast<unsigned>(e);
}

struct KeyInfo {
    unsigned engines;
};

const std::map<std::string, KeyInfo> &key_table() {
    static const std::map<std::string, KeyInfo> table = {
        {"engine", {kAll}},
        {"lattice.kind", {kAll}},
        {"lattice.rows", {kAll}},
        {"lattice.cols", {kAll}},
        {"lattice.size", {kAll}},
        {"trajectories", {kAll}},
        {"master_seed", {kAll}},
        {"threads", {kAll}},
        {"output.dir", {kAll}},
        {"output.svg", {kAll}},
        {"p_flip", {kProtocol}},
        {"p_nec", {kProtocol | kNonClifford}},
        {"p_unit", {kProtocol}},
        {"p_reset", {kProtocol}},
        {"p_me", {kProtocol}},
        {"p_dep", {kProtocol}},
        {"rule", {kProtocol}},
        {"steps", {kProtocol | kNonClifford}},
        {"init", {kProtocol}},
        {"classical.sublattice_mode", {kClassical}},
        {"nonclifford.h", {kNonClifford}},
        {"nonclifford.delta_h", {kNonClifford}},
        {"nonclifford.J", {kNonClifford}},
        {"nonclifford.delta_J", {kNonClifford}},
        {"jump.gamma", {kJump}},
        {"jump.t_max", {kJump}},
        {"jump.variant", {kJump}},
        {"jump.sample_dt", {kJump}},
        {"jump.drive_period", {kJump}},
        {"jump.drive_theta", {kJump}},
        {"jump.bernoulli_dt", {kJump}},
        {"jump.init", {kJump}},
        {"analysis.fit_t_min", {kProtocol | kNonClifford}},
        {"analysis.fit_t_max", {kProtocol | kNonClifford}},
        {"analysis.histogram_bins", {kClifford | kClassical}},
        {"analysis.histogram_t_min", {kClifford | kClassical}},
        {"analysis.histogram_t_max", {kClifford | kClassical}},
        {"analysis.steady_state", {kClifford}},
        {"analysis.burn_in", {kClifford}},
        {"analysis.samples", {kClifford}},
        {"analysis.spacing", {kClifford}},
    };
    return table;
}

}  // namespace

ExperimentConfig build_config(const RawConfig &raw) {
    if (raw.sweep_key && raw.sweep_values.size() != 1) {
        throw ValidationError(*raw.sweep_key, "swept key has several values; run it with the sweep verb");
    }
    std::map<std::string, std::string> kv;
    for (const auto &e : raw.entries) {
        if (!key_table().contains(e.key)) {
            throw ValidationError(e.key, "unknown key");
        }
        kv[e.key] = e.value;
    }
    ExperimentConfig cfg;
    if (auto it = kv.find("engine"); it != kv.end()) {
        auto e = parse_engine(it->second);
        if (!e) {
            throw ValidationError("engine", "unknown engine '" + it->second +
                                                "' (clifford, dense, nonclifford, jump, classical)");
        }
        cfg.engine = *e;
    }
    for (const auto &[key, value] : kv) {
        if (!(key_table().at(key).engines & mask_of(cfg.engine))) {
            throw ValidationError(key, "not used by engine " + std::string(to_string(cfg.engine)));
        }
    }
    auto get = [&](const std::string &k) -> const std::string * {
        auto it = kv.find(k);
        return it == kv.end() ? nullptr : &it->second;
    };

    // Lattice.
    if (auto v = get("lattice.kind")) {
        auto k = parse_lattice_kind(*v);
        if (!k) {
            throw ValidationError("lattice.kind", "unknown lattice kind '" + *v + "'");
        }
        cfg.lattice_kind = *k;
    }
    if (auto v = get("lattice.size")) {
        if (get("lattice.rows") || get("lattice.cols")) {
            throw ValidationError("lattice.size", "cannot be combined with lattice.rows or lattice.cols");
        }
        cfg.rows = cfg.cols = parse_u32("lattice.size", *v);
    }
    if (auto v = get("lattice.rows")) {
        cfg.rows = parse_u32("lattice.rows", *v);
    }
    if (auto v = get("lattice.cols")) {
        cfg.cols = parse_u32("lattice.cols", *v);
    }
    std::optional<Lattice> lattice;
    try {
        lattice = cfg.lattice();
    } catch (const std::invalid_argument &e) {
        throw ValidationError("lattice", e.what());
    }
    uint32_t n = lattice->num_sites();

    if (auto v = get("trajectories")) {
        cfg.trajectories = parse_uint("trajectories", *v);
    }
    if (cfg.trajectories == 0) {
        throw ValidationError("trajectories", "must be at least 1");
    }
    if (auto v = get("master_seed")) {
        cfg.master_seed = parse_uint("master_seed", *v);
    }
    if (auto v = get("threads")) {
        cfg.threads = parse_u32("threads", *v);
    }
    if (auto v = get("output.dir")) {
        cfg.output_dir = *v;
    }
    if (auto v = get("output.svg")) {
        cfg.svg = parse_bool("output.svg", *v);
    }

    // Protocol.
    auto &p = cfg.protocol;
    for (auto [key, field] : {std::pair{"p_flip", &p.p_flip}, {"p_nec", &p.p_nec}, {"p_unit", &p.p_unit},
                              {"p_reset", &p.p_reset}, {"p_me", &p.p_me}, {"p_dep", &p.p_dep}}) {
        if (auto v = get(key)) {
            *field = parse_probability(key, *v);
        }
    }
    if (auto v = get("rule")) {
        auto r = parse_rule(*v);
        if (!r) {
            throw ValidationError("rule", "unknown rule '" + *v + "'");
        }
        p.rule = *r;
    }
    p.steps = 100;
    if (auto v = get("steps")) {
        p.steps = parse_u32("steps", *v);
    }
    p.validate();
    if (auto v = get("init")) {
        cfg.init = InitSpec::parse(*v);
    }
    if (cfg.init.kind == InitKind::Pattern && cfg.init.pattern.size() != n) {
        throw ValidationError("init", "pattern has " + std::to_string(cfg.init.pattern.size()) +
                                          " signs but the lattice has " + std::to_string(n) + " sites");
    }

    // Engine specifics.
    if (cfg.engine == Engine::Classical) {
        if (p.p_unit != 0) {
            throw ValidationError("p_unit", "the classical automaton needs p_unit = 0");
        }
        if (p.p_dep != 0) {
            throw ValidationError("p_dep", "the classical automaton needs p_dep = 0");
        }
        if (cfg.init.kind == InitKind::AllZero) {
            throw ValidationError("init", "all_zero has no classical counterpart");
        }
        if (auto v = get("classical.sublattice_mode")) {
            cfg.sublattice_mode = parse_bool("classical.sublattice_mode", *v);
        }
    }
    auto &nc = cfg.nonclifford;
    nc.p_nec = get("p_nec") ? p.p_nec : nc.p_nec;
    nc.steps = p.steps;
    for (auto [key, field] : {std::pair{"nonclifford.h", &nc.h}, {"nonclifford.delta_h", &nc.delta_h},
                              {"nonclifford.J", &nc.J}, {"nonclifford.delta_J", &nc.delta_J}}) {
        if (auto v = get(key)) {
            *field = parse_real(key, *v);
        }
    }
    if (nc.delta_h < 0) {
        throw ValidationError("nonclifford.delta_h", "must be non-negative");
    }
    if (nc.delta_J < 0) {
        throw ValidationError("nonclifford.delta_J", "must be non-negative");
    }
    auto &jp = cfg.jump;
    if (auto v = get("jump.gamma")) {
        jp.gamma = parse_real("jump.gamma", *v);
        if (!(jp.gamma > 0)) {
            throw ValidationError("jump.gamma", "must be positive");
        }
    }
    if (auto v = get("jump.t_max")) {
        jp.t_max = parse_real("jump.t_max", *v);
        if (!(jp.t_max >= 0)) {
            throw ValidationError("jump.t_max", "must be non-negative");
        }
    }
    if (auto v = get("jump.variant")) {
        auto jv = parse_jump_variant(*v);
        if (!jv) {
            throw ValidationError("jump.variant", "unknown jump variant '" + *v + "'");
        }
        jp.variant = *jv;
    }
    if (auto v = get("jump.sample_dt")) {
        jp.sample_dt = parse_real("jump.sample_dt", *v);
        if (!(jp.sample_dt > 0)) {
            throw ValidationError("jump.sample_dt", "must be positive");
        }
    }
    if (auto v = get("jump.drive_period")) {
        jp.drive_period = parse_real("jump.drive_period", *v);
        if (jp.drive_period < 0) {
            throw ValidationError("jump.drive_period", "must be non-negative");
        }
    }
    if (auto v = get("jump.drive_theta")) {
        jp.drive_theta = parse_real("jump.drive_theta", *v);
    }
    if (auto v = get("jump.bernoulli_dt")) {
        jp.bernoulli_dt = parse_real("jump.bernoulli_dt", *v);
        if (jp.bernoulli_dt < 0 || jp.bernoulli_dt * jp.gamma > 1) {
            throw ValidationError("jump.bernoulli_dt", "needs 0 <= gamma * bernoulli_dt <= 1");
        }
    }
    if (auto v = get("jump.init")) {
        if (v->starts_with("cat:")) {
            cfg.jump_init.cat = true;
            cfg.jump_init.alpha = parse_real("jump.init", std::string_view(*v).substr(4));
            if (!(cfg.jump_init.alpha >= 0 && cfg.jump_init.alpha <= 1)) {
                throw ValidationError("jump.init", "cat amplitude must lie in [0, 1]");
            }
        } else {
            try {
                cfg.jump_init.product = InitSpec::parse(*v);
            } catch (const ValidationError &e) {
                throw ValidationError("jump.init", e.what());
            }
            if (cfg.jump_init.product.kind == InitKind::Pattern && cfg.jump_init.product.pattern.size() != n) {
                throw ValidationError("jump.init", "pattern length does not match the lattice");
            }
        }
    }

    // Analysis.
    auto &an = cfg.analysis;
    if (auto v = get("analysis.fit_t_min")) {
        an.fit_t_min = parse_uint("analysis.fit_t_min", *v);
    }
    if (auto v = get("analysis.fit_t_max")) {
        an.fit_t_max = parse_uint("analysis.fit_t_max", *v);
    }
    if (an.fit_t_min > an.fit_t_max) {
        throw ValidationError("analysis.fit_t_max", "must not be below analysis.fit_t_min");
    }
    if (auto v = get("analysis.histogram_bins")) {
        an.histogram_bins = parse_uint("analysis.histogram_bins", *v);
        if (an.histogram_bins != 0 && an.histogram_bins < 8) {
            throw ValidationError("analysis.histogram_bins", "needs at least 8 bins (or 0 to disable)");
        }
    }
    if (auto v = get("analysis.histogram_t_min")) {
        an.histogram_t_min = parse_uint("analysis.histogram_t_min", *v);
    }
    if (auto v = get("analysis.histogram_t_max")) {
        an.histogram_t_max = parse_uint("analysis.histogram_t_max", *v);
    }
    if (an.histogram_t_min > an.histogram_t_max) {
        throw ValidationError("analysis.histogram_t_max", "must not be below analysis.histogram_t_min");
    }
    if (auto v = get("analysis.steady_state")) {
        an.steady_state = parse_bool("analysis.steady_state", *v);
    }
    if (auto v = get("analysis.burn_in")) {
        an.burn_in = parse_u32("analysis.burn_in", *v);
    }
    if (auto v = get("analysis.samples")) {
        an.samples = parse_u32("analysis.samples", *v);
        if (an.samples == 0) {
            throw ValidationError("analysis.samples", "must be at least 1");
        }
    }
    if (auto v = get("analysis.spacing")) {
        an.spacing = parse_u32("analysis.spacing", *v);
        if (an.spacing == 0) {
            throw ValidationError("analysis.spacing", "must be at least 1");
        }
    }

    // Capacity, before any compute.
    if (cfg.engine == Engine::Dense || cfg.engine == Engine::NonClifford || cfg.engine == Engine::Jump) {
        if (n > DenseState::kDefaultMaxQubits) {
            throw ValidationError("lattice", "engine " + std::string(to_string(cfg.engine)) + " holds at most " +
                                                 std::to_string(DenseState::kDefaultMaxQubits) +
                                                 " qubits; the lattice has " + std::to_string(n));
        }
    }
    return cfg;
}

// ---------------------------------------------------------------------------
// Running

namespace {

/// Per-time mean and standard error of real-valued per-trajectory series,
/// summed in trajectory order.
struct SeriesStats {
    std::vector<double> mean;
    std::vector<double> stderr_of_mean;
};

SeriesStats series_stats(const std::vector<std::vector<double>> &rows) {
    SeriesStats s;
    if (rows.empty()) {
        return s;
    }
    size_t len = rows.front().size();
    auto count = static_cast<double>(rows.size());
    s.mean.assign(len, 0);
    s.stderr_of_mean.assign(len, 0);
    for (size_t t = 0; t < len; t++) {
        double sum = 0;
        for (const auto &r : rows) {
            sum += r[t];
        }
        double m = sum / count;
        double ss = 0;
        for (const auto &r : rows) {
            ss += (r[t] - m) * (r[t] - m);
        }
        s.mean[t] = m;
        s.stderr_of_mean[t] = rows.size() > 1 ? std::sqrt(ss / (count - 1) / count) : 0.0;
    }
    return s;
}

std::string magnetization_csv(const SeriesStats &s) {
    std::ostringstream out;
    out << "t,mean_M,stderr_M,mean_M_even_parity_tag\n";
    for (size_t t = 0; t < s.mean.size(); t++) {
        out << t << ',' << format_double(s.mean[t]) << ',' << format_double(s.stderr_of_mean[t]) << ','
            << (t % 2 == 0 ? 1 : 0) << '\n';
    }
    return out.str();
}

std::string fit_csv(const DecayFit &f) {
    std::ostringstream out;
    out << "status,tau,tau_stderr,amplitude,t_min,t_max,points,residual\n";
    out << to_string(f.status) << ',' << format_double(f.tau) << ',' << format_double(f.tau_stderr) << ','
        << format_double(f.amplitude) << ',' << f.t_min << ',' << f.t_max << ',' << f.points << ','
        << format_double(f.residual) << '\n';
    return out.str();
}

/// Collects every file written during one invocation.
class OutputSink {
   public:
    explicit OutputSink(fs::path root) : root_(std::move(root)) {
    }
    void write(const std::string &rel, const std::string &content) {
        fs::path path = root_ / rel;
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
        if (ec) {
            throw IoError("cannot create directory '" + path.parent_path().string() + "': " + ec.message());
        }
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) {
            throw IoError("cannot write '" + path.string() + "'");
        }
        files_.push_back({rel, sha256_hex(content), content.size()});
    }
    void write_manifest(const RawConfig &raw, const std::string &verb, double wall_seconds) {
        nlohmann::ordered_json j;
        j["config_sha256"] = sha256_hex(raw.source);
        j["code_version"] = code_version();
        j["verb"] = verb;
        j["wall_clock_seconds"] = wall_seconds;
        auto arr = nlohmann::ordered_json::array();
        for (const auto &f : files_) {
            arr.push_back({{"path", f.path}, {"sha256", f.sha256}, {"bytes", f.bytes}});
        }
        j["files"] = arr;
        std::string text = j.dump(2) + "\n";
        fs::path path = root_ / "manifest.json";
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out << text;
        if (!out) {
            throw IoError("cannot write '" + path.string() + "'");
        }
    }
    std::vector<std::string> paths() const {
        std::vector<std::string> out;
        for (const auto &f : files_) {
            out.push_back(f.path);
        }
        out.push_back("manifest.json");
        return out;
    }

   private:
    struct File {
        std::string path;
        std::string sha256;
        size_t bytes;
    };
    fs::path root_;
    std::vector<File> files_;
};

/// Scalars of one point, for sweep tables.
struct PointSummary {
    uint32_t num_sites = 0;
    DecayFit fit;
    double last_mean = std::nan("");
    std::optional<SteadyStateMoments> steady;
    double median_first_below = std::nan("");
};

std::vector<double> times_of(size_t len) {
    std::vector<double> t(len);
    for (size_t i = 0; i < len; i++) {
        t[i] = static_cast<double>(i);
    }
    return t;
}

void write_series_outputs(OutputSink &sink, const std::string &prefix, const ExperimentConfig &cfg,
                          const SeriesStats &s, const std::string &csv, PointSummary &summary) {
    sink.write(prefix + "magnetization.csv", csv);
    summary.fit = fit_decay(s.mean, cfg.analysis.fit_t_min, cfg.analysis.fit_t_max, s.stderr_of_mean);
    sink.write(prefix + "fit.csv", fit_csv(summary.fit));
    summary.last_mean = s.mean.empty() ? std::nan("") : s.mean.back();
    if (cfg.svg) {
        PlotSpec plot;
        plot.title = "mean magnetization (" + std::string(to_string(cfg.engine)) + ")";
        plot.x_label = "t";
        plot.y_label = "M";
        plot.series.push_back({"mean M", times_of(s.mean.size()), s.mean, s.stderr_of_mean, false});
        sink.write(prefix + "magnetization.svg", line_plot_svg(plot));
    }
}

SeriesStats stats_of(const EnsembleStats &e) {
    SeriesStats s;
    for (size_t t = 0; t < e.num_times(); t++) {
        s.mean.push_back(e.mean(t));
        s.stderr_of_mean.push_back(e.stderr_of_mean(t));
    }
    return s;
}

DenseState dense_initial(const InitSpec &init, uint32_t n, Rng &rng) {
    if (init.kind == InitKind::AllZero) {
        return DenseState::all_zero(n);
    }
    auto signs = initial_signs(init, n, rng);
    return DenseState::product_x(signs);
}

PointSummary run_point(const ExperimentConfig &cfg, uint64_t point, OutputSink &sink, const std::string &prefix) {
    const Lattice lattice = cfg.lattice();
    const uint32_t n = lattice.num_sites();
    PointSummary summary;
    summary.num_sites = n;
    const auto &an = cfg.analysis;

    switch (cfg.engine) {
        case Engine::Clifford:
        case Engine::Classical: {
            std::optional<Histogram> hist;
            if (an.histogram_bins > 0) {
                hist.emplace(an.histogram_bins, -1.0, 1.0);
            }
            auto visit = [&](uint64_t, const TrajectoryRecord &rec) {
                if (!hist) {
                    return;
                }
                for (size_t t = an.histogram_t_min; t < rec.x_sum.size() && t <= an.histogram_t_max; t++) {
                    if (t % 2 == 0) {
                        hist->add(rec.magnetization(t));
                    }
                }
            };
            EnsembleStats stats;
            if (cfg.engine == Engine::Clifford) {
                stats = run_ensemble(lattice, cfg.protocol, cfg.init, cfg.master_seed, point, cfg.trajectories,
                                     cfg.threads, {}, visit);
            } else {
                auto ap = AutomatonParams::from_protocol(cfg.protocol);
                ap.sublattice_mode = cfg.sublattice_mode;
                stats = run_classical_ensemble(lattice, ap, cfg.init, cfg.master_seed, point, cfg.trajectories,
                                               cfg.threads, {}, visit);
            }
            write_series_outputs(sink, prefix, cfg, stats_of(stats), stats.to_csv(), summary);
            if (hist) {
                sink.write(prefix + "histogram.csv", hist->to_csv());
                if (cfg.svg) {
                    sink.write(prefix + "histogram.svg", histogram_svg(*hist, "even-time M"));
                }
            }
            if (an.steady_state) {
                SteadyStateSpec spec;
                spec.burn_in = an.burn_in;
                spec.samples_per_trajectory = an.samples;
                spec.sample_spacing = an.spacing;
                spec.trajectories = cfg.trajectories;
                spec.master_seed = cfg.master_seed;
                // Keeps the steady-state streams apart from the time-series ones.
                spec.point_index = point + (uint64_t{1} << 32);
                spec.threads = cfg.threads;
                auto ss = steady_state_moments(lattice, cfg.protocol, spec);
                std::ostringstream out;
                out << "m2,m4,binder_u,binder_stderr,rms,rms_stderr,burn_in_drift,burn_in_drift_stderr\n";
                out << format_double(ss.binder.m2) << ',' << format_double(ss.binder.m4) << ','
                    << format_double(ss.binder.u) << ',' << format_double(ss.binder.stderr_u) << ','
                    << format_double(ss.rms) << ',' << format_double(ss.rms_stderr) << ','
                    << format_double(ss.burn_in_drift) << ',' << format_double(ss.burn_in_drift_stderr) << '\n';
                sink.write(prefix + "steady_state.csv", out.str());
                summary.steady = std::move(ss);
            }
            break;
        }
        case Engine::Dense: {
            std::vector<std::vector<double>> rows(cfg.trajectories);
            parallel_for(cfg.trajectories, cfg.threads, [&](size_t i) {
                Rng rng(stream_seed(cfg.master_seed, point, i));
                DenseState psi = dense_initial(cfg.init, n, rng);
                auto &row = rows[i];
                row.reserve(cfg.protocol.steps + 1);
                row.push_back(psi.magnetization());
                for (uint32_t t = 1; t <= cfg.protocol.steps; t++) {
                    step_pulse(psi, lattice, cfg.protocol, rng);
                    step_correct(psi, lattice, cfg.protocol, rng);
                    row.push_back(psi.magnetization());
                }
            });
            auto s = series_stats(rows);
            write_series_outputs(sink, prefix, cfg, s, magnetization_csv(s), summary);
            break;
        }
        case Engine::NonClifford: {
            std::vector<std::vector<double>> rows(cfg.trajectories);
            parallel_for(cfg.trajectories, cfg.threads, [&](size_t i) {
                Rng rng(stream_seed(cfg.master_seed, point, i));
                NonCliffordModel model(lattice, cfg.nonclifford, rng);
                rows[i] = model.run(rng);
            });
            auto s = series_stats(rows);
            write_series_outputs(sink, prefix, cfg, s, magnetization_csv(s), summary);
            std::ostringstream out;
            out << "trajectory,first_even_t_below_half\n";
            std::vector<double> firsts;
            for (size_t i = 0; i < rows.size(); i++) {
                size_t f = first_even_below(rows[i], 0.5);
                double v = f == SIZE_MAX ? std::numeric_limits<double>::infinity() : static_cast<double>(f);
                firsts.push_back(v);
                out << i << ',' << format_double(v) << '\n';
            }
            std::sort(firsts.begin(), firsts.end());
            size_t m = firsts.size();
            summary.median_first_below = m % 2 ? firsts[m / 2] : 0.5 * (firsts[m / 2 - 1] + firsts[m / 2]);
            out << "median," << format_double(summary.median_first_below) << '\n';
            sink.write(prefix + "lifetime.csv", out.str());
            break;
        }
        case Engine::Jump: {
            std::vector<std::vector<JumpSample>> samples(cfg.trajectories);
            parallel_for(cfg.trajectories, cfg.threads, [&](size_t i) {
                Rng rng(stream_seed(cfg.master_seed, point, i));
                DenseState psi = cfg.jump_init.cat
                                     ? DenseState::cat(n, cfg.jump_init.alpha,
                                                       std::sqrt(1 - cfg.jump_init.alpha * cfg.jump_init.alpha))
                                     : dense_initial(cfg.jump_init.product, n, rng);
                samples[i] = jump_trajectory(psi, lattice, cfg.jump, rng);
            });
            size_t len = samples.front().size();
            std::vector<std::vector<double>> rows(samples.size());
            for (size_t i = 0; i < samples.size(); i++) {
                for (const auto &s : samples[i]) {
                    rows[i].push_back(s.magnetization);
                }
            }
            auto s = series_stats(rows);
            std::ostringstream out;
            out << "t,mean_M,stderr_M,diag_plus,diag_minus,offdiag\n";
            std::vector<double> ts, off;
            for (size_t k = 0; k < len; k++) {
                std::vector<JumpSample> at;
                at.reserve(samples.size());
                for (const auto &traj : samples) {
                    at.push_back(traj[k]);
                }
                auto c = cat_coherence(at);
                out << format_double(samples.front()[k].t) << ',' << format_double(s.mean[k]) << ','
                    << format_double(s.stderr_of_mean[k]) << ',' << format_double(c.diag_plus) << ','
                    << format_double(c.diag_minus) << ',' << format_double(c.offdiag) << '\n';
                ts.push_back(samples.front()[k].t);
                off.push_back(c.offdiag);
            }
            sink.write(prefix + "coherence.csv", out.str());
            summary.last_mean = s.mean.empty() ? std::nan("") : s.mean.back();
            if (cfg.svg) {
                PlotSpec plot;
                plot.title = "cat coherence (" + std::string(to_string(cfg.jump.variant)) + ")";
                plot.x_label = "t";
                plot.y_label = "value";
                plot.series.push_back({"mean M", ts, s.mean, s.stderr_of_mean, false});
                plot.series.push_back({"|off-diagonal|", ts, off, {}, false});
                sink.write(prefix + "coherence.svg", line_plot_svg(plot));
            }
            break;
        }
    }
    return summary;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

RunResult run_experiment(const RawConfig &raw) {
    auto start = std::chrono::steady_clock::now();
    ExperimentConfig cfg = build_config(raw);
    OutputSink sink(cfg.output_dir);
    run_point(cfg, 0, sink, "");
    RunResult result;
    result.wall_seconds = seconds_since(start);
    sink.write_manifest(raw, "run", result.wall_seconds);
    result.files = sink.paths();
    return result;
}

RunResult run_sweep(const RawConfig &raw) {
    auto start = std::chrono::steady_clock::now();
    if (!raw.sweep_key) {
        throw ValidationError("sweep", "no key is declared as sweep(...)");
    }
    const std::string &key = *raw.sweep_key;
    if (key == "engine" || key == "output.dir" || key == "output.svg" || key == "threads") {
        throw ValidationError(key, "this key cannot be swept");
    }
    // Validate every point before running any of them.
    std::vector<ExperimentConfig> points;
    for (size_t i = 0; i < raw.sweep_values.size(); i++) {
        points.push_back(build_config(raw.point(i)));
    }
    OutputSink sink(points.front().output_dir);
    std::vector<PointSummary> summaries;
    for (size_t i = 0; i < points.size(); i++) {
        summaries.push_back(run_point(points[i], i, sink, "point_" + std::to_string(i) + "/"));
    }

    std::ostringstream table;
    table << key << ",point,num_sites,fit_status,tau,tau_stderr,last_mean_M,binder_u,binder_stderr,rms,rms_stderr,"
                    "median_first_even_t_below_half\n";
    auto nan = std::nan("");
    for (size_t i = 0; i < points.size(); i++) {
        const auto &s = summaries[i];
        table << raw.sweep_values[i] << ',' << i << ',' << s.num_sites << ',' << to_string(s.fit.status) << ','
              << format_double(s.fit.tau) << ',' << format_double(s.fit.tau_stderr) << ','
              << format_double(s.last_mean) << ',' << format_double(s.steady ? s.steady->binder.u : nan) << ','
              << format_double(s.steady ? s.steady->binder.stderr_u : nan) << ','
              << format_double(s.steady ? s.steady->rms : nan) << ','
              << format_double(s.steady ? s.steady->rms_stderr : nan) << ',' << format_double(s.median_first_below)
              << '\n';
    }
    sink.write("sweep.csv", table.str());

    bool size_sweep = key == "lattice.size" || key == "lattice.rows" || key == "lattice.cols";
    if (size_sweep) {
        std::vector<SizedTau> taus;
        std::vector<double> ls, ts, es;
        for (size_t i = 0; i < points.size(); i++) {
            if (summaries[i].fit.ok()) {
                double l = static_cast<double>(key == "lattice.rows" ? points[i].rows : points[i].cols);
                taus.push_back({l, summaries[i].fit.tau});
                ls.push_back(l);
                ts.push_back(summaries[i].fit.tau);
                es.push_back(summaries[i].fit.tau_stderr);
            }
        }
        auto xi = fit_xi(taus);
        std::ostringstream out;
        out << "ok,xi,slope,intercept,r2,sizes_used,reason\n";
        out << (xi.ok ? 1 : 0) << ',' << format_double(xi.xi) << ',' << format_double(xi.slope) << ','
            << format_double(xi.intercept) << ',' << format_double(xi.r2) << ',' << taus.size() << ",\""
            << xi.reason << "\"\n";
        sink.write("xi.csv", out.str());
        if (points.front().svg) {
            PlotSpec plot;
            plot.title = "lifetime vs size";
            plot.x_label = "L";
            plot.y_label = "tau";
            plot.log_y = true;
            plot.series.push_back({"tau", ls, ts, es, true});
            sink.write("tau_vs_L.svg", line_plot_svg(plot));
        }
    }
    RunResult result;
    result.wall_seconds = seconds_since(start);
    sink.write_manifest(raw, "sweep", result.wall_seconds);
    result.files = sink.paths();
    return result;
}

}  // namespace toomdtc
