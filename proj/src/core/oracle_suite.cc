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


#include "toomdtc/oracle_suite.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "toomdtc/circuit.h"
#include "toomdtc/dense.h"
#include "toomdtc/format.h"
#include "toomdtc/stabilizer.h"

namespace toomdtc {

namespace {

PauliString random_pauli(size_t n, Rng &rng) {
    const char ps[4] = {'I', 'X', 'Y', 'Z'};
    for (;;) {
        PauliString p(n);
        for (size_t q = 0; q < n; q++) {
            p.set(q, ps[uniform_index(rng, 4)]);
        }
        p.sign = bernoulli(rng, 0.5);
        if (!p.is_identity()) {
            return p;
        }
    }
}

DenseState random_state(size_t n, Rng &rng) {
    std::normal_distribution<double> g;
    DenseState s(n);
    for (auto &a : s.amplitudes()) {
        a = Complex(g(rng), g(rng));
    }
    s.normalize();
    return s;
}

}  // namespace

CliffordProgramReport check_random_clifford_programs(size_t programs, size_t draws, double frequency_tolerance,
                                                     uint64_t seed) {
    const Gate one_q[] = {Gate::X, Gate::Y, Gate::Z, Gate::H, Gate::S, Gate::S_DAG, Gate::ZPULSE};
    const Gate two_q[] = {Gate::CX, Gate::CZ, Gate::ZZHALF};
    CliffordProgramReport report;
    report.programs = programs;
    for (size_t program = 0; program < programs; program++) {
        Rng rng(stream_seed(seed, 0, program));
        size_t n = 1 + uniform_index(rng, 4);
        StabilizerState s(n);
        DensityMatrix rho(n);
        bool sampled = false;
        size_t ops = 1 + uniform_index(rng, 30);
        for (size_t op = 0; op < ops; op++) {
            int kind = static_cast<int>(uniform_index(rng, n >= 2 ? 6 : 4));
            if (kind == 0) {
                std::vector<uint32_t> t{static_cast<uint32_t>(uniform_index(rng, n))};
                Gate g = one_q[uniform_index(rng, 7)];
                s.apply(g, t);
                rho.apply(g, t);
                continue;
            }
            if (kind >= 4) {
                auto a = static_cast<uint32_t>(uniform_index(rng, n));
                auto b = static_cast<uint32_t>(uniform_index(rng, n - 1));
                b += b >= a ? 1 : 0;
                std::vector<uint32_t> t{a, b};
                Gate g = two_q[uniform_index(rng, 3)];
                s.apply(g, t);
                rho.apply(g, t);
                continue;
            }
            // Measurement (kind 1, 2) or reset to |+> (kind 3).
            bool reset = kind == 3;
            uint32_t q = reset ? static_cast<uint32_t>(uniform_index(rng, n)) : 0;
            PauliString p = reset ? PauliString(n) : random_pauli(n, rng);
            if (reset) {
                p.set(q, 'X');
            }
            PauliMask mask = PauliMask::from(p);
            double p_plus = rho.probability(mask, 1) / rho.trace();
            if (!s.peek(p).has_value() && !sampled && draws > 0) {
                sampled = true;
                Rng sampler(stream_seed(seed, 1, program));
                size_t plus = 0;
                for (size_t d = 0; d < draws; d++) {
                    StabilizerState copy = s;
                    plus += copy.measure(p, sampler).value == 1 ? 1 : 0;
                }
                double freq = static_cast<double>(plus) / static_cast<double>(draws);
                report.worst_frequency_deviation = std::max(report.worst_frequency_deviation, std::abs(freq - 0.5));
                report.sampled_branches++;
            }
            MeasurementOutcome out;
            if (reset) {
                Rng probe = rng;
                StabilizerState copy = s;
                out = copy.measure_x(q, probe);
                s.reset_plus(q, rng);
            } else {
                out = s.measure(p, rng);
            }
            double predicted = out.deterministic ? (out.value == 1 ? 1.0 : 0.0) : 0.5;
            report.worst_probability_error = std::max(report.worst_probability_error, std::abs(p_plus - predicted));
            (out.deterministic ? report.deterministic_checks : report.random_branches)++;
            rho.project(mask, out.value);
            rho.scale(1.0 / rho.trace());
            if (reset && out.value == -1) {
                rho.conj_pauli(PauliMask::z_on(q));
            }
        }
        for (const auto &g : s.stabilizers()) {
            double e = rho.expect(PauliMask::from(g)) / rho.trace();
            report.worst_expectation_error = std::max(report.worst_expectation_error, std::abs(e - 1.0));
        }
        for (size_t q = 0; q < n; q++) {
            double e = rho.expect_x(q) / rho.trace();
            report.worst_expectation_error =
                std::max(report.worst_expectation_error, std::abs(e - static_cast<double>(s.expect_x(q))));
        }
    }
    report.pass = report.worst_probability_error < 1e-9 && report.worst_expectation_error < 1e-9 &&
                  report.worst_frequency_deviation <= frequency_tolerance;
    return report;
}

PeriodEnsembleReport check_period_ensemble(const Lattice &lattice, const ProtocolParams &params,
                                           uint64_t trajectories, uint32_t t_max, double tolerance_se,
                                           uint64_t seed, unsigned threads) {
    ProtocolParams p = params;
    p.steps = t_max;
    auto stats = run_ensemble(lattice, p, InitSpec{}, seed, 0, trajectories, threads);
    DensityMatrix rho = DensityMatrix::from_pure(DenseState::all_plus(lattice.num_sites()));
    PeriodEnsembleReport report;
    report.t_max = t_max;
    report.pass = true;
    for (uint32_t t = 1; t <= t_max; t++) {
        oracle_apply_period(rho, lattice, p);
        double exact = rho.magnetization() / rho.trace();
        double diff = std::abs(stats.mean(t) - exact);
        double se = stats.stderr_of_mean(t);
        report.max_abs = std::max(report.max_abs, diff);
        if (se == 0) {
            report.pass = report.pass && diff < 1e-12;
        } else {
            report.max_z = std::max(report.max_z, diff / se);
            report.pass = report.pass && diff <= tolerance_se * se;
        }
    }
    return report;
}

std::vector<OracleCheck> run_oracle_suite(uint64_t seed, unsigned threads) {
    std::vector<OracleCheck> out;
    auto fmt = [](double v) { return format_double(v); };

    {
        auto r = check_random_clifford_programs(200, 10000, 0.02, seed);
        std::ostringstream d;
        d << r.programs << " programs, " << r.deterministic_checks << " deterministic and " << r.random_branches
          << " random outcomes; worst probability error " << fmt(r.worst_probability_error)
          << ", worst sampled |f - 1/2| " << fmt(r.worst_frequency_deviation) << " over " << r.sampled_branches
          << " branches";
        out.push_back({"clifford_programs_vs_density_matrix", r.pass, d.str()});
    }
    {
        auto lat = Lattice::square_open(2, 2);
        ProtocolParams p;
        p.p_flip = 0.95;
        p.p_nec = 0.8;
        p.p_unit = 0.02;
        p.p_reset = 0.02;
        p.p_me = 0.01;
        auto r = check_period_ensemble(lat, p, 20000, 5, 3.0, seed, threads);
        out.push_back({"period_channel_vs_ensemble_2x2", r.pass,
                       "max |dM| " + fmt(r.max_abs) + ", max z " + fmt(r.max_z) + " for t <= 5"});
    }
    {
        Rng rng(stream_seed(seed, 2, 0));
        ProtocolParams p;
        p.p_nec = 1.0;
        double worst = 0;
        for (auto [rows, cols] : {std::pair{2u, 2u}, {2u, 3u}}) {
            auto lat = Lattice::square_open(rows, cols);
            auto layout = HardwareLayout::for_lattice(lat);
            auto in = random_state(lat.num_sites(), rng);
            DensityMatrix expect = DensityMatrix::from_pure(in);
            oracle_correct(expect, lat, p);
            for (auto variant : {RoundVariant::MeasureAndFeedback, RoundVariant::ToffoliReset}) {
                for (auto gs : {GateSet::CrossResonance, GateSet::CPhase}) {
                    auto c = compile_nec_round(layout, lat, variant, {gs, true});
                    auto got = reduced_system_state(simulate_branches(c, embed_system(in, layout.num_ancilla())),
                                                    lat.num_sites());
                    worst = std::max(worst, got.max_abs_diff(expect));
                }
            }
        }
        out.push_back({"compiled_round_vs_channel", worst < 1e-10, "max |d rho| " + fmt(worst)});
    }
    {
        ProtocolParams p;
        p.p_nec = 1.0;
        double worst = 0;
        for (auto lat : {Lattice::square_open(2, 2), Lattice::square_periodic(3, 3)}) {
            auto cat = DenseState::cat(lat.num_sites(), 0.6, 0.8);
            DensityMatrix rho = DensityMatrix::from_pure(cat);
            oracle_correct(rho, lat, p);
            worst = std::max(worst, 1.0 - rho.fidelity(cat));
        }
        out.push_back({"cat_state_invariance", worst <= 1e-10, "max infidelity " + fmt(worst)});
    }
    return out;
}

}  // namespace toomdtc
