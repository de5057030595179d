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

#ifndef TOOMDTC_PROTOCOL_H
#define TOOMDTC_PROTOCOL_H

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "toomdtc/lattice.h"
#include "toomdtc/rng.h"
#include "toomdtc/stabilizer.h"

namespace toomdtc {

enum class Rule : uint8_t { NEC, MajorityVote };

std::string_view to_string(Rule r);
std::optional<Rule> parse_rule(std::string_view text);

/// Probabilities of one experiment. Everything is per qubit (or per site)
/// per period.
struct ProtocolParams {
    double p_flip = 0;
    double p_nec = 0;
    double p_unit = 0;
    double p_reset = 0;
    double p_me = 0;
    double p_dep = 0;
    Rule rule = Rule::NEC;
    uint32_t steps = 0;

    /// Throws ValidationError naming the offending key.
    void validate() const;
};

/// Error carrying the config key path it is about.
struct ValidationError : std::invalid_argument {
    ValidationError(std::string key, const std::string &message)
        : std::invalid_argument(key + ": " + message), key(std::move(key)) {
    }
    std::string key;
};

enum class InitKind : uint8_t { AllPlus, AllMinus, AllZero, RandomX, Pattern };

/// Initial state of a trajectory. RandomX draws each X sign independently
/// with P(+1) = (1 + m0) / 2 from the trajectory stream; Pattern uses the
/// explicit signs.
struct InitSpec {
    InitKind kind = InitKind::AllPlus;
    double m0 = 1.0;
    std::vector<int> pattern;

    /// `all_plus`, `all_minus`, `all_zero`, `random_x:<m0>`, `pattern:+-+...`.
    static InitSpec parse(std::string_view text);
    std::string str() const;
};

/// X signs of an initial product state (empty for AllZero).
std::vector<int> initial_signs(const InitSpec &init, uint32_t n, Rng &rng);
StabilizerState make_initial_state(const InitSpec &init, uint32_t n, Rng &rng);

/// Strict-majority threshold for k measured bonds: 2 in the bulk (k = 4),
/// floor(k / 2) + 1 otherwise.
uint32_t majority_threshold(uint32_t k);

/// Outcome bookkeeping of one feedback site.
struct FeedbackResult {
    /// True and recorded outcomes (+1/-1) in measurement order.
    std::array<int8_t, 4> true_outcome{};
    std::array<int8_t, 4> recorded{};
    uint8_t count = 0;
    bool fired = false;
};

// The step functions are templates over the engine so that the dense
// simulator can be driven through the identical decision sequence. They are
// instantiated for StabilizerState and DenseState.

/// N_1: flips, then entangling gates, then resets, then depolarization, each
/// sub-step sweeping sites in ascending order with one draw per site.
template <typename State>
void step_pulse(State &state, const Lattice &lattice, const ProtocolParams &params, Rng &rng);

/// Measure W_n then W_e, corrupt each record with probability p_me, pulse
/// the center iff both records are -1. Requires NEC targets at j.
template <typename State>
FeedbackResult nec_correct_site(State &state, const Lattice &lattice, SiteId j, double p_me, Rng &rng);

template <typename State>
FeedbackResult majority_correct_site(State &state, const Lattice &lattice, SiteId j, double p_me, Rng &rng);

/// N_2: sublattice A in ascending order, then B. One p_nec draw per site;
/// sites without targets for the rule do nothing after their draw. Returns
/// the number of pulses fired.
template <typename State>
uint32_t step_correct(State &state, const Lattice &lattice, const ProtocolParams &params, Rng &rng);

/// Projectively samples sum_j X_j on a copy of the state.
int64_t sample_x_sum(const StabilizerState &state, Rng &rng);

struct TrajectoryOptions {
    bool record_sites = false;
};

/// Exact integer record of one trajectory: M(t) = x_sum[t] / num_sites.
struct TrajectoryRecord {
    uint32_t num_sites = 0;
    std::vector<int32_t> x_sum;
    std::vector<uint32_t> pulses;
    /// (steps + 1) * num_sites expect_x values when requested.
    std::vector<int8_t> site_x;

    double magnetization(size_t t) const {
        return static_cast<double>(x_sum[t]) / num_sites;
    }
    std::vector<double> magnetization_series() const;
};

/// Builds the initial state, records t = 0, then applies step_pulse and
/// step_correct for t = 1..steps. Deterministic in seed.
TrajectoryRecord run_trajectory(const Lattice &lattice, const ProtocolParams &params, const InitSpec &init,
                                uint64_t seed, const TrajectoryOptions &options = {});

/// Streaming moments of an ensemble of trajectory records. All sums are
/// integers, so merging is exact and order independent.
struct EnsembleStats {
    uint32_t num_sites = 0;
    uint64_t count = 0;
    std::vector<int64_t> sum;
    std::vector<int64_t> sum_sq;
    /// Per (t, site) sums of expect_x and squares, when site records exist.
    std::vector<int64_t> site_sum;
    std::vector<int64_t> site_sum_sq;

    void add(const TrajectoryRecord &rec);
    void merge(const EnsembleStats &other);
    size_t num_times() const {
        return sum.size();
    }
    double mean(size_t t) const;
    double stderr_of_mean(size_t t) const;
    double site_mean(size_t t, SiteId j) const;
    double site_stderr(size_t t, SiteId j) const;
    /// `t,mean_M,stderr_M,mean_M_even_parity_tag` rows.
    std::string to_csv() const;
};

/// Runs trajectories [0, count) of one sweep point in parallel. Seeds are
/// stream_seed(master_seed, point_index, trajectory). The visitor, when
/// given, sees every record in trajectory order on the calling thread.
EnsembleStats run_ensemble(const Lattice &lattice, const ProtocolParams &params, const InitSpec &init,
                           uint64_t master_seed, uint64_t point_index, uint64_t count, unsigned threads = 0,
                           const TrajectoryOptions &options = {},
                           const std::function<void(uint64_t, const TrajectoryRecord &)> &visit = {});

}  // namespace toomdtc

#endif
