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

#include "toomdtc/protocol.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "toomdtc/dense.h"
#include "toomdtc/format.h"
#include "toomdtc/parallel.h"

namespace toomdtc {

std::string_view to_string(Rule r) {
    return r == Rule::NEC ? "NEC" : "MajorityVote";
}

std::optional<Rule> parse_rule(std::string_view text) {
    if (text == "NEC" || text == "nec") {
        return Rule::NEC;
    }
    if (text == "MajorityVote" || text == "majority" || text == "majority_vote") {
        return Rule::MajorityVote;
    }
    return std::nullopt;
}

void ProtocolParams::validate() const {
    auto check = [](const char *key, double v) {
        if (!(v >= 0 && v <= 1)) {
            throw ValidationError(key, "probability must lie in [0, 1], got " + format_double(v));
        }
    };
    check("p_flip", p_flip);
    check("p_nec", p_nec);
    check("p_unit", p_unit);
    check("p_reset", p_reset);
    check("p_me", p_me);
    check("p_dep", p_dep);
}

InitSpec InitSpec::parse(std::string_view text) {
    InitSpec spec;
    if (text == "all_plus" || text == "AllPlus") {
        spec.kind = InitKind::AllPlus;
    } else if (text == "all_minus" || text == "AllMinus") {
        spec.kind = InitKind::AllMinus;
    } else if (text == "all_zero" || text == "AllZero") {
        spec.kind = InitKind::AllZero;
    } else if (text.starts_with("random_x:")) {
        spec.kind = InitKind::RandomX;
        auto body = text.substr(9);
        auto res = std::from_chars(body.data(), body.data() + body.size(), spec.m0);
        if (res.ec != std::errc() || res.ptr != body.data() + body.size() || !(spec.m0 >= -1 && spec.m0 <= 1)) {
            throw ValidationError("init", "random_x needs a mean magnetization in [-1, 1]");
        }
    } else if (text.starts_with("pattern:")) {
        spec.kind = InitKind::Pattern;
        for (char c : text.substr(8)) {
            if (c != '+' && c != '-') {
                throw ValidationError("init", "pattern accepts only '+' and '-'");
            }
            spec.pattern.push_back(c == '+' ? 1 : -1);
        }
    } else {
        throw ValidationError("init", "unknown initial state '" + std::string(text) + "'");
    }
    return spec;
}

std::string InitSpec::str() const {
    switch (kind) {
        case InitKind::AllPlus:
            return "all_plus";
        case InitKind::AllMinus:
            return "all_minus";
        case InitKind::AllZero:
            return "all_zero";
        case InitKind::RandomX:
            return "random_x:" + format_double(m0);
        case InitKind::Pattern: {
            std::string s = "pattern:";
            for (int v : pattern) {
                s.push_back(v > 0 ? '+' : '-');
            }
            return s;
        }
    }
    return "?";
}

std::vector<int> initial_signs(const InitSpec &init, uint32_t n, Rng &rng) {
    switch (init.kind) {
        case InitKind::AllPlus:
            return std::vector<int>(n, 1);
        case InitKind::AllMinus:
            return std::vector<int>(n, -1);
        case InitKind::AllZero:
            return {};
        case InitKind::RandomX: {
            std::vector<int> s(n);
            double p_plus = 0.5 * (1 + init.m0);
            for (auto &v : s) {
                v = uniform01(rng) < p_plus ? 1 : -1;
            }
            return s;
        }
        case InitKind::Pattern:
            if (init.pattern.size() != n) {
                throw ValidationError("init", "pattern length does not match the lattice");
            }
            return init.pattern;
    }
    return {};
}

StabilizerState make_initial_state(const InitSpec &init, uint32_t n, Rng &rng) {
    if (init.kind == InitKind::AllZero) {
        return StabilizerState::all_zero(n);
    }
    auto signs = initial_signs(init, n, rng);
    return StabilizerState::product_x(signs);
}

uint32_t majority_threshold(uint32_t k) {
    return k == 4 ? 2 : k / 2 + 1;
}

template <typename State>
void step_pulse(State &state, const Lattice &lattice, const ProtocolParams &params, Rng &rng) {
    uint32_t n = lattice.num_sites();
    for (SiteId j = 0; j < n; j++) {
        if (uniform01(rng) < params.p_flip) {
            state.zpulse(j);
        }
    }
    for (SiteId j = 0; j < n; j++) {
        if (uniform01(rng) < params.p_unit) {
            uint32_t k = lattice.degree(j);
            if (k == 0) {
                continue;
            }
            size_t pick = uniform_index(rng, k);
            for (int d = 0; d < 4; d++) {
                SiteId other = lattice.neighbor(j, static_cast<Direction>(d));
                if (other == kNoSite) {
                    continue;
                }
                if (pick-- == 0) {
                    state.zz_half(j, other);
                    break;
                }
            }
        }
    }
    for (SiteId j = 0; j < n; j++) {
        if (uniform01(rng) < params.p_reset) {
            state.reset_plus(j, rng);
        }
    }
    for (SiteId j = 0; j < n; j++) {
        state.depolarize(j, params.p_dep, rng);
    }
}

namespace {

int8_t record(int truth, double p_me, Rng &rng) {
    bool invert = uniform01(rng) < p_me;
    return static_cast<int8_t>(invert ? -truth : truth);
}

}  // namespace

template <typename State>
FeedbackResult nec_correct_site(State &state, const Lattice &lattice, SiteId j, double p_me, Rng &rng) {
    auto targets = lattice.nec_targets(j);
    if (!targets) {
        throw std::invalid_argument("site has no NEC targets");
    }
    FeedbackResult res;
    res.count = 2;
    res.true_outcome[0] = static_cast<int8_t>(state.measure_xx(targets->first.owner, targets->first.other, rng).value);
    res.true_outcome[1] =
        static_cast<int8_t>(state.measure_xx(targets->second.owner, targets->second.other, rng).value);
    res.recorded[0] = record(res.true_outcome[0], p_me, rng);
    res.recorded[1] = record(res.true_outcome[1], p_me, rng);
    res.fired = res.recorded[0] == -1 && res.recorded[1] == -1;
    if (res.fired) {
        state.zpulse(j);
    }
    return res;
}

template <typename State>
FeedbackResult majority_correct_site(State &state, const Lattice &lattice, SiteId j, double p_me, Rng &rng) {
    auto bonds = lattice.majority_bonds(j);
    FeedbackResult res;
    res.count = static_cast<uint8_t>(bonds.size());
    uint32_t walls = 0;
    for (size_t i = 0; i < bonds.size(); i++) {
        res.true_outcome[i] = static_cast<int8_t>(state.measure_xx(bonds[i].owner, bonds[i].other, rng).value);
    }
    for (size_t i = 0; i < bonds.size(); i++) {
        res.recorded[i] = record(res.true_outcome[i], p_me, rng);
        walls += res.recorded[i] == -1;
    }
    res.fired = !bonds.empty() && walls >= majority_threshold(res.count);
    if (res.fired) {
        state.zpulse(j);
    }
    return res;
}

template <typename State>
uint32_t step_correct(State &state, const Lattice &lattice, const ProtocolParams &params, Rng &rng) {
    uint32_t fired = 0;
    for (Sublattice s : {Sublattice::A, Sublattice::B}) {
        for (SiteId j : lattice.sites_in(s)) {
            if (!(uniform01(rng) < params.p_nec)) {
                continue;
            }
            if (params.rule == Rule::NEC) {
                if (lattice.nec_targets(j)) {
                    fired += nec_correct_site(state, lattice, j, params.p_me, rng).fired;
                }
            } else if (lattice.degree(j) > 0) {
                fired += majority_correct_site(state, lattice, j, params.p_me, rng).fired;
            }
        }
    }
    return fired;
}

template void step_pulse<StabilizerState>(StabilizerState &, const Lattice &, const ProtocolParams &, Rng &);
template void step_pulse<DenseState>(DenseState &, const Lattice &, const ProtocolParams &, Rng &);
template FeedbackResult nec_correct_site<StabilizerState>(StabilizerState &, const Lattice &, SiteId, double, Rng &);
template FeedbackResult nec_correct_site<DenseState>(DenseState &, const Lattice &, SiteId, double, Rng &);
template FeedbackResult majority_correct_site<StabilizerState>(StabilizerState &, const Lattice &, SiteId, double,
                                                               Rng &);
template FeedbackResult majority_correct_site<DenseState>(DenseState &, const Lattice &, SiteId, double, Rng &);
template uint32_t step_correct<StabilizerState>(StabilizerState &, const Lattice &, const ProtocolParams &, Rng &);
template uint32_t step_correct<DenseState>(DenseState &, const Lattice &, const ProtocolParams &, Rng &);

int64_t sample_x_sum(const StabilizerState &state, Rng &rng) {
    StabilizerState copy = state;
    int64_t total = 0;
    for (size_t q = 0; q < copy.num_qubits(); q++) {
        total += copy.measure_x(q, rng).value;
    }
    return total;
}

std::vector<double> TrajectoryRecord::magnetization_series() const {
    std::vector<double> out(x_sum.size());
    for (size_t t = 0; t < x_sum.size(); t++) {
        out[t] = magnetization(t);
    }
    return out;
}

TrajectoryRecord run_trajectory(const Lattice &lattice, const ProtocolParams &params, const InitSpec &init,
                                uint64_t seed, const TrajectoryOptions &options) {
    uint32_t n = lattice.num_sites();
    Rng rng(seed);
    StabilizerState state = make_initial_state(init, n, rng);
    TrajectoryRecord rec;
    rec.num_sites = n;
    rec.x_sum.reserve(params.steps + 1);
    rec.pulses.reserve(params.steps + 1);
    if (options.record_sites) {
        rec.site_x.reserve(size_t{params.steps + 1} * n);
    }
    auto observe = [&](uint32_t pulses) {
        int32_t total = 0;
        for (SiteId j = 0; j < n; j++) {
            int v = state.expect_x(j);
            total += v;
            if (options.record_sites) {
                rec.site_x.push_back(static_cast<int8_t>(v));
            }
        }
        rec.x_sum.push_back(total);
        rec.pulses.push_back(pulses);
    };
    observe(0);
    for (uint32_t t = 1; t <= params.steps; t++) {
        step_pulse(state, lattice, params, rng);
        observe(step_correct(state, lattice, params, rng));
    }
    return rec;
}

void EnsembleStats::add(const TrajectoryRecord &rec) {
    if (count == 0 && sum.empty()) {
        num_sites = rec.num_sites;
        sum.assign(rec.x_sum.size(), 0);
        sum_sq.assign(rec.x_sum.size(), 0);
        if (!rec.site_x.empty()) {
            site_sum.assign(rec.site_x.size(), 0);
            site_sum_sq.assign(rec.site_x.size(), 0);
        }
    }
    if (rec.x_sum.size() != sum.size() || rec.num_sites != num_sites) {
        throw std::invalid_argument("trajectory record shape does not match the ensemble");
    }
    for (size_t t = 0; t < sum.size(); t++) {
        int64_t v = rec.x_sum[t];
        sum[t] += v;
        sum_sq[t] += v * v;
    }
    if (!site_sum.empty()) {
        if (rec.site_x.size() != site_sum.size()) {
            throw std::invalid_argument("trajectory site record shape does not match the ensemble");
        }
        for (size_t k = 0; k < site_sum.size(); k++) {
            int64_t v = rec.site_x[k];
            site_sum[k] += v;
            site_sum_sq[k] += v * v;
        }
    }
    count++;
}

void EnsembleStats::merge(const EnsembleStats &other) {
    if (other.count == 0) {
        return;
    }
    if (count == 0) {
        *this = other;
        return;
    }
    if (other.sum.size() != sum.size() || other.num_sites != num_sites || other.site_sum.size() != site_sum.size()) {
        throw std::invalid_argument("cannot merge ensembles of different shapes");
    }
    for (size_t t = 0; t < sum.size(); t++) {
        sum[t] += other.sum[t];
        sum_sq[t] += other.sum_sq[t];
    }
    for (size_t k = 0; k < site_sum.size(); k++) {
        site_sum[k] += other.site_sum[k];
        site_sum_sq[k] += other.site_sum_sq[k];
    }
    count += other.count;
}

namespace {

double mean_of(int64_t s, uint64_t n, double scale) {
    return static_cast<double>(s) / static_cast<double>(n) / scale;
}

double stderr_of(int64_t s, int64_t q, uint64_t n, double scale) {
    if (n < 2) {
        return std::nan("");
    }
    auto nn = static_cast<__int128>(n);
    __int128 numer = nn * q - static_cast<__int128>(s) * s;
    double var = static_cast<double>(numer) / (static_cast<double>(n) * static_cast<double>(n - 1));
    return std::sqrt(std::max(0.0, var) / static_cast<double>(n)) / scale;
}

}  // namespace

double EnsembleStats::mean(size_t t) const {
    return mean_of(sum[t], count, num_sites);
}

double EnsembleStats::stderr_of_mean(size_t t) const {
    return stderr_of(sum[t], sum_sq[t], count, num_sites);
}

double EnsembleStats::site_mean(size_t t, SiteId j) const {
    return mean_of(site_sum[t * num_sites + j], count, 1.0);
}

double EnsembleStats::site_stderr(size_t t, SiteId j) const {
    size_t k = t * num_sites + j;
    return stderr_of(site_sum[k], site_sum_sq[k], count, 1.0);
}

std::string EnsembleStats::to_csv() const {
    std::ostringstream out;
    out << "t,mean_M,stderr_M,mean_M_even_parity_tag\n";
    for (size_t t = 0; t < sum.size(); t++) {
        out << t << ',' << format_double(mean(t)) << ',' << format_double(stderr_of_mean(t)) << ','
            << (t % 2 == 0 ? 1 : 0) << '\n';
    }
    return out.str();
}

EnsembleStats run_ensemble(const Lattice &lattice, const ProtocolParams &params, const InitSpec &init,
                           uint64_t master_seed, uint64_t point_index, uint64_t count, unsigned threads,
                           const TrajectoryOptions &options,
                           const std::function<void(uint64_t, const TrajectoryRecord &)> &visit) {
    params.validate();
    EnsembleStats total;
    constexpr uint64_t kChunk = 256;
    std::vector<TrajectoryRecord> recs;
    for (uint64_t start = 0; start < count; start += kChunk) {
        uint64_t len = std::min(kChunk, count - start);
        recs.assign(len, {});
        parallel_for(len, threads, [&](size_t i) {
            recs[i] = run_trajectory(lattice, params, init, stream_seed(master_seed, point_index, start + i), options);
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

}  // namespace toomdtc
