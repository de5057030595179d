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


#ifndef TOOMDTC_EXPERIMENT_H
#define TOOMDTC_EXPERIMENT_H

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "toomdtc/automaton.h"
#include "toomdtc/dense.h"
#include "toomdtc/lattice.h"
#include "toomdtc/protocol.h"

namespace toomdtc {

/// File-system failure while reading a config or writing outputs.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Engine : uint8_t { Clifford, Dense, NonClifford, Jump, Classical };

std::string_view to_string(Engine e);
std::optional<Engine> parse_engine(std::string_view text);

/// Config file as written: `key = value` lines, `#` comments, and at most
/// one `key = sweep(v1, v2, ...)`.
struct RawConfig {
    struct Entry {
        std::string key;
        std::string value;
        size_t line = 0;
    };
    std::vector<Entry> entries;
    std::optional<std::string> sweep_key;
    std::vector<std::string> sweep_values;
    /// Exact bytes the config was parsed from (hashed into the manifest).
    std::string source;

    /// Copy with the swept key bound to sweep_values[i].
    RawConfig point(size_t i) const;
};

/// Throws ValidationError("line N", ...) on syntax errors and on a second
/// swept key.
RawConfig parse_config_text(std::string_view text, std::string source_name = "config");
RawConfig load_config_file(const std::string &path);

struct AnalysisOptions {
    size_t fit_t_min = 10;
    size_t fit_t_max = SIZE_MAX;
    size_t histogram_bins = 0;
    size_t histogram_t_min = 0;
    size_t histogram_t_max = SIZE_MAX;
    bool steady_state = false;
    uint32_t burn_in = 0;
    uint32_t samples = 1;
    uint32_t spacing = 1;
};

/// Initial state of the jump engine: a product state or a cat state.
struct JumpInit {
    bool cat = false;
    double alpha = 1.0;
    InitSpec product;
};

struct ExperimentConfig {
    Engine engine = Engine::Clifford;
    LatticeKind lattice_kind = LatticeKind::SquarePeriodic;
    uint32_t rows = 4;
    uint32_t cols = 4;
    ProtocolParams protocol;
    InitSpec init;
    uint64_t trajectories = 100;
    uint64_t master_seed = 1;
    unsigned threads = 0;
    NonCliffordParams nonclifford;
    JumpParams jump;
    JumpInit jump_init;
    bool sublattice_mode = true;
    AnalysisOptions analysis;
    std::string output_dir = "out";
    bool svg = false;

    Lattice lattice() const {
        return Lattice::build(lattice_kind, rows, cols);
    }
};

/// Validates every key against the engine and checks dense capacity, all
/// before any compute. Errors name the offending key.
ExperimentConfig build_config(const RawConfig &raw);

struct RunResult {
    /// Paths relative to the output directory, in write order.
    std::vector<std::string> files;
    double wall_seconds = 0;
};

/// Runs an unswept config (a swept one with a single value also works) and
/// writes CSVs, optional SVGs and manifest.json into the output directory.
RunResult run_experiment(const RawConfig &raw);
/// Runs every point of the swept key into point_<i>/ and writes sweep.csv
/// (plus xi.csv when the swept key is a lattice size) and one manifest.
RunResult run_sweep(const RawConfig &raw);

std::string sha256_hex(std::string_view data);
std::string code_version();

}  // namespace toomdtc

#endif
