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


#include "toomdtc/automaton.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "toomdtc/parallel.h"

namespace toomdtc {

SpinGrid::SpinGrid(const Lattice &lattice) : lattice_(&lattice), bits_(words_for(lattice.num_sites()), 0) {
}

SpinGrid SpinGrid::from_signs(const Lattice &lattice, const std::vector<int> &signs) {
    if (signs.size() != lattice.num_sites()) {
        throw std::invalid_argument("sign vector does not match the lattice");
    }
    SpinGrid g(lattice);
    for (SiteId j = 0; j < signs.size(); j++) {
        g.set(j, signs[j]);
    }
    return g;
}

size_t SpinGrid::words_for(uint32_t n) {
    return (size_t{n} + 63) / 64;
}

void SpinGrid::invert_all() {
    for (auto &w : bits_) {
        w = ~w;
    }
    uint32_t tail = num_sites() & 63;
    if (tail != 0) {
        bits_.back() &= (uint64_t{1} << tail) - 1;
    }
}

uint32_t SpinGrid::count_minus() const {
    uint32_t c = 0;
    for (auto w : bits_) {
        c += static_cast<uint32_t>(std::popcount(w));
    }
    return c;
}

int64_t SpinGrid::sum() const {
    return static_cast<int64_t>(num_sites()) - 2 * static_cast<int64_t>(count_minus());
}

std::vector<int> SpinGrid::signs() const {
    std::vector<int> out(num_sites());
    for (SiteId j = 0; j < num_sites(); j++) {
        out[j] = get(j);
    }
    return out;
}

std::string SpinGrid::to_raster() const {
    std::string out;
    uint32_t row = 0;
    for (SiteId j = 0; j < num_sites(); j++) {
        uint32_t r = lattice_->coords(j).first;
        if (j > 0 && r != row) {
            out.push_back('\n');
        }
        row = r;
        out.push_back(get(j) < 0 ? '1' : '0');
    }
    out.push_back('\n');
    return out;
}

SpinGrid SpinGrid::from_raster(const Lattice &lattice, const std::string &text) {
    SpinGrid g(lattice);
    SiteId j = 0;
    for (char c : text) {
        if (c == '\n' || c == '\r') {
            continue;
        }
        if (c != '0' && c != '1') {
            throw std::invalid_argument("raster accepts only '0' and '1'");
        }
        if (j >= lattice.num_sites()) {
            throw std::invalid_argument("raster has more cells than the lattice");
        }
        g.set(j++, c == '1' ? -1 : 1);
    }
    if (j != lattice.num_sites()) {
        throw std::invalid_argument("raster has fewer cells than the lattice");
    }
    return g;
}

namespace {

// True bond values X_j X_k for the rule's bonds at j, in measurement order.
size_t rule_bonds(const SpinGrid &g, SiteId j, Rule rule, int out[4]) {
    const Lattice &lat = g.lattice();
    if (rule == Rule::NEC) {
        auto t = lat.nec_targets(j);
        if (!t) {
            return 0;
        }
        out[0] = g.get(t->first.owner) * g.get(t->first.other);
        out[1] = g.get(t->second.owner) * g.get(t->second.other);
        return 2;
    }
    auto bonds = lat.majority_bonds(j);
    for (size_t i = 0; i < bonds.size(); i++) {
        out[i] = g.get(bonds[i].owner) * g.get(bonds[i].other);
    }
    return bonds.size();
}

uint32_t rule_threshold(Rule rule, size_t k) {
    return rule == Rule::NEC ? 2 : majority_threshold(static_cast<uint32_t>(k));
}

SpinGrid synchronous(const SpinGrid &grid, Rule rule) {
    SpinGrid next = grid;
    int w[4];
    for (SiteId j = 0; j < grid.num_sites(); j++) {
        size_t k = rule_bonds(grid, j, rule, w);
        if (k == 0) {
            continue;
        }
        uint32_t walls = 0;
        for (size_t i = 0; i < k; i++) {
            walls += w[i] < 0;
        }
        if (walls >= rule_threshold(rule, k)) {
            next.flip(j);
        }
    }
    return next;
}

// One site's feedback decision with record errors; draws one value per bond.
bool decide(const SpinGrid &g, SiteId j, Rule rule, double p_me, Rng &rng) {
    int w[4];
    size_t k = rule_bonds(g, j, rule, w);
    if (k == 0) {
        return false;
    }
    uint32_t walls = 0;
    for (size_t i = 0; i < k; i++) {
        int rec = uniform01(rng) < p_me ? -w[i] : w[i];
        walls += rec < 0;
    }
    return walls >= rule_threshold(rule, k);
}

}  // namespace

SpinGrid nec_step(const SpinGrid &grid) {
    return synchronous(grid, Rule::NEC);
}

SpinGrid majority_step(const SpinGrid &grid) {
    return synchronous(grid, Rule::MajorityVote);
}

AutomatonParams AutomatonParams::from_protocol(const ProtocolParams &p) {
    if (p.p_unit != 0 || p.p_dep != 0) {
        throw std::invalid_argument("the classical limit needs p_unit = p_dep = 0");
    }
    AutomatonParams a;
    a.p_flip = p.p_flip;
    a.p_nec = p.p_nec;
    a.p_me = p.p_me;
    a.p_reset = p.p_reset;
    a.rule = p.rule;
    a.steps = p.steps;
    a.sublattice_mode = true;
    return a;
}

uint32_t noisy_automaton_step(SpinGrid &grid, const AutomatonParams &params, Rng &rng) {
    uint32_t n = grid.num_sites();
    for (SiteId j = 0; j < n; j++) {
        if (uniform01(rng) < params.p_flip) {
            grid.flip(j);
        }
    }
    for (SiteId j = 0; j < n; j++) {
        if (uniform01(rng) < params.p_reset) {
            grid.set(j, 1);
        }
    }
    uint32_t fired = 0;
    if (params.sublattice_mode) {
        for (Sublattice s : {Sublattice::A, Sublattice::B}) {
            for (SiteId j : grid.lattice().sites_in(s)) {
                if (!(uniform01(rng) < params.p_nec)) {
                    continue;
                }
                if (decide(grid, j, params.rule, params.p_me, rng)) {
                    grid.flip(j);
                    fired++;
                }
            }
        }
        return fired;
    }
    std::vector<SiteId> flips;
    for (SiteId j = 0; j < n; j++) {
        if (!(uniform01(rng) < params.p_nec)) {
            continue;
        }
        if (decide(grid, j, params.rule, params.p_me, rng)) {
            flips.push_back(j);
        }
    }
    for (SiteId j : flips) {
        grid.flip(j);
    }
    return static_cast<uint32_t>(flips.size());
}

TrajectoryRecord run_classical_trajectory(const Lattice &lattice, const AutomatonParams &params,
                                          const InitSpec &init, uint64_t seed, const TrajectoryOptions &options) {
    if (init.kind == InitKind::AllZero) {
        throw std::invalid_argument("the classical automaton needs an X-basis product initial state");
    }
    uint32_t n = lattice.num_sites();
    Rng rng(seed);
    SpinGrid grid = SpinGrid::from_signs(lattice, initial_signs(init, n, rng));
    TrajectoryRecord rec;
    rec.num_sites = n;
    rec.x_sum.reserve(params.steps + 1);
    rec.pulses.reserve(params.steps + 1);
    auto observe = [&](uint32_t fired) {
        rec.x_sum.push_back(static_cast<int32_t>(grid.sum()));
        rec.pulses.push_back(fired);
        if (options.record_sites) {
            for (SiteId j = 0; j < n; j++) {
                rec.site_x.push_back(static_cast<int8_t>(grid.get(j)));
            }
        }
    };
    observe(0);
    for (uint32_t t = 1; t <= params.steps; t++) {
        observe(noisy_automaton_step(grid, params, rng));
    }
    return rec;
}

EnsembleStats run_classical_ensemble(const Lattice &lattice, const AutomatonParams &params, const InitSpec &init,
                                     uint64_t master_seed, uint64_t point_index, uint64_t count, unsigned threads,
                                     const TrajectoryOptions &options,
                                     const std::function<void(uint64_t, const TrajectoryRecord &)> &visit) {
    EnsembleStats total;
    constexpr uint64_t kChunk = 1024;
    std::vector<TrajectoryRecord> recs;
    for (uint64_t start = 0; start < count; start += kChunk) {
        uint64_t len = std::min(kChunk, count - start);
        recs.assign(len, {});
        parallel_for(len, threads, [&](size_t i) {
            recs[i] = run_classical_trajectory(lattice, params, init, stream_seed(master_seed, point_index, start + i),
                                               options);
        });
        for (uint64_t i = 0; i < len; i++) {
            total.add(recs[i]);
            if (visit) {
                visit(start + i, recs[i]);
            }
        }
    }
    return total;
}

MarginalReport marginals_match(const EnsembleStats &a, const EnsembleStats &b, double tolerance_se, size_t max_t) {
    if (a.num_sites != b.num_sites || a.num_times() != b.num_times()) {
        throw std::invalid_argument("ensembles have different shapes");
    }
    if (a.site_sum.empty() || b.site_sum.empty()) {
        throw std::invalid_argument("marginal comparison needs per-site records");
    }
    MarginalReport rep;
    rep.pass = true;
    size_t t_end = std::min(a.num_times(), max_t == SIZE_MAX ? max_t : max_t + 1);
    for (size_t t = 0; t < t_end; t++) {
        for (SiteId j = 0; j < a.num_sites; j++) {
            double d = std::abs(a.site_mean(t, j) - b.site_mean(t, j));
            double se = std::hypot(a.site_stderr(t, j), b.site_stderr(t, j));
            rep.comparisons++;
            double z = se > 0 ? d / se : (d > 0 ? INFINITY : 0.0);
            if (d > rep.max_abs_deviation) {
                rep.max_abs_deviation = d;
            }
            if (z > rep.max_z) {
                rep.max_z = z;
                rep.worst_t = t;
                rep.worst_site = j;
            }
            if (z > tolerance_se) {
                rep.pass = false;
            }
        }
    }
    return rep;
}

}  // namespace toomdtc
