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


#ifndef TOOMDTC_AUTOMATON_H
#define TOOMDTC_AUTOMATON_H

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "toomdtc/lattice.h"
#include "toomdtc/protocol.h"
#include "toomdtc/rng.h"

namespace toomdtc {

/// Classical +-1 spins on a lattice, one bit per site (set bit = -1).
class SpinGrid {
   public:
    explicit SpinGrid(const Lattice &lattice);
    static SpinGrid from_signs(const Lattice &lattice, const std::vector<int> &signs);

    const Lattice &lattice() const {
        return *lattice_;
    }
    uint32_t num_sites() const {
        return lattice_->num_sites();
    }
    int get(SiteId j) const {
        return ((bits_[j >> 6] >> (j & 63)) & 1) ? -1 : 1;
    }
    void set(SiteId j, int v) {
        uint64_t m = uint64_t{1} << (j & 63);
        bits_[j >> 6] = v < 0 ? (bits_[j >> 6] | m) : (bits_[j >> 6] & ~m);
    }
    void flip(SiteId j) {
        bits_[j >> 6] ^= uint64_t{1} << (j & 63);
    }
    void invert_all();
    int64_t sum() const;
    uint32_t count_minus() const;
    double magnetization() const {
        return static_cast<double>(sum()) / num_sites();
    }
    std::vector<int> signs() const;

    /// One text line per lattice row (coords() first component), '0' for +1
    /// and '1' for -1, rows in ascending order.
    std::string to_raster() const;
    static SpinGrid from_raster(const Lattice &lattice, const std::string &text);

    bool operator==(const SpinGrid &other) const {
        return lattice_ == other.lattice_ && bits_ == other.bits_;
    }

   private:
    static size_t words_for(uint32_t n);

    const Lattice *lattice_;
    std::vector<uint64_t> bits_;
};

/// Synchronous Toom update: every site whose North and East neighbors both
/// differ from it flips. Sites missing either neighbor never flip.
SpinGrid nec_step(const SpinGrid &grid);
/// Synchronous majority update with the same thresholds as the quantum rule.
SpinGrid majority_step(const SpinGrid &grid);

struct AutomatonParams {
    double p_flip = 0;
    double p_nec = 0;
    double p_me = 0;
    double p_reset = 0;
    Rule rule = Rule::NEC;
    uint32_t steps = 0;
    /// A-then-B passes as in the quantum protocol; synchronous otherwise.
    bool sublattice_mode = true;

    /// Classical limit of a protocol: p_unit and p_dep must be zero.
    static AutomatonParams from_protocol(const ProtocolParams &p);
};

/// Flips with p_flip, resets to +1 with p_reset, then applies the rule per
/// site with probability p_nec, inverting each compared bond with p_me.
/// Returns the number of rule-triggered flips.
uint32_t noisy_automaton_step(SpinGrid &grid, const AutomatonParams &params, Rng &rng);

TrajectoryRecord run_classical_trajectory(const Lattice &lattice, const AutomatonParams &params,
                                          const InitSpec &init, uint64_t seed,
                                          const TrajectoryOptions &options = {});

EnsembleStats run_classical_ensemble(const Lattice &lattice, const AutomatonParams &params, const InitSpec &init,
                                     uint64_t master_seed, uint64_t point_index, uint64_t count,
                                     unsigned threads = 0, const TrajectoryOptions &options = {},
                                     const std::function<void(uint64_t, const TrajectoryRecord &)> &visit = {});

struct MarginalReport {
    bool pass = false;
    double max_abs_deviation = 0;
    /// Largest |difference| / combined standard error.
    double max_z = 0;
    size_t worst_t = 0;
    SiteId worst_site = 0;
    size_t comparisons = 0;
};

/// Per-site, per-time <X_j> comparison of two ensembles recorded with site
/// data. Cells where both standard errors vanish must agree exactly.
MarginalReport marginals_match(const EnsembleStats &a, const EnsembleStats &b, double tolerance_se = 4.0,
                               size_t max_t = SIZE_MAX);

}  // namespace toomdtc

#endif
