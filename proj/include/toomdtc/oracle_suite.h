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


#ifndef TOOMDTC_ORACLE_SUITE_H
#define TOOMDTC_ORACLE_SUITE_H

#include <cstdint>
#include <string>
#include <vector>

#include "toomdtc/lattice.h"
#include "toomdtc/protocol.h"

namespace toomdtc {

/// Random Clifford programs (gates, Pauli measurements, resets) on at most 4
/// qubits, run on the tableau and on a density matrix side by side.
struct CliffordProgramReport {
    size_t programs = 0;
    size_t deterministic_checks = 0;
    size_t random_branches = 0;
    /// Largest |oracle probability - tableau prediction| over all outcomes.
    double worst_probability_error = 0;
    /// Largest |sampled frequency - 1/2| over the sampled random branches.
    double worst_frequency_deviation = 0;
    size_t sampled_branches = 0;
    /// Final-state stabilizer and <X_q> agreement.
    double worst_expectation_error = 0;
    bool pass = false;
};

/// The first random branch of each program is also sampled `draws` times on
/// fresh copies; its frequency must lie within frequency_tolerance of 1/2.
CliffordProgramReport check_random_clifford_programs(size_t programs, size_t draws, double frequency_tolerance,
                                                     uint64_t seed);

struct PeriodEnsembleReport {
    uint32_t t_max = 0;
    /// Largest |sampled mean M - oracle M| / SE over t = 1..t_max.
    double max_z = 0;
    double max_abs = 0;
    bool pass = false;
};

/// Stabilizer ensemble against repeated oracle_apply_period. Cells with zero
/// sampled variance must agree to 1e-12.
PeriodEnsembleReport check_period_ensemble(const Lattice &lattice, const ProtocolParams &params,
                                           uint64_t trajectories, uint32_t t_max, double tolerance_se,
                                           uint64_t seed, unsigned threads = 0);

struct OracleCheck {
    std::string name;
    bool pass = false;
    std::string detail;
};

/// Small-N equivalence suite behind the `oracle-check` verb.
std::vector<OracleCheck> run_oracle_suite(uint64_t seed, unsigned threads = 0);

}  // namespace toomdtc

#endif
