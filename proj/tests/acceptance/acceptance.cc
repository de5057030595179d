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


// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.
//
//   toomdtc_acceptance [--only C1,C5] [--out DIR] [--threads N]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "toomdtc/analysis.h"
#include "toomdtc/automaton.h"
#include "toomdtc/circuit.h"
#include "toomdtc/dense.h"
#include "toomdtc/format.h"
#include "toomdtc/lattice.h"
#include "toomdtc/oracle_suite.h"
#include "toomdtc/parallel.h"
#include "toomdtc/protocol.h"
#include "toomdtc/svg.h"

using namespace toomdtc;
namespace fs = std::filesystem;

namespace {

struct Context {
    unsigned threads = 0;
    std::optional<fs::path> out;

    void save(const std::string &name, const std::string &content) const {
        if (!out) {
            return;
        }
        fs::create_directories(*out);
        std::ofstream(*out / name, std::ios::binary) << content;
    }
};

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string fmt(double v, int digits = 4) {
    if (!std::isfinite(v)) {
        return format_double(v);
    }
    std::ostringstream o;
    o.precision(digits);
    o << v;
    return o.str();
}

// Standard noise point of the lifetime experiments.
ProtocolParams standard_params(uint32_t steps) {
    ProtocolParams p;
    p.p_flip = 0.95;
    p.p_nec = 0.8;
    p.p_unit = 0.02;
    p.p_reset = 0.02;
    p.p_me = 0.01;
    p.steps = steps;
    return p;
}

// ---------------------------------------------------------------------------
// C1: period-2 oscillations at L = 8.

Verdict c1_oscillations(const Context &ctx) {
    auto lat = Lattice::square_periodic(8, 8);
    auto stats = run_ensemble(lat, standard_params(200), InitSpec{}, 101, 0, 1000, ctx.threads);
    ctx.save("c1_magnetization.csv", stats.to_csv());
    double min_even = 1, max_odd = -1;
    for (size_t t = 10; t <= 100; t++) {
        if (t % 2 == 0) {
            min_even = std::min(min_even, stats.mean(t));
        } else {
            max_odd = std::max(max_odd, stats.mean(t));
        }
    }
    bool pass = min_even > 0.5 && max_odd < -0.5;
    return {pass, "L=8, 1000 traj, 10<=t<=100: min even <M> = " + fmt(min_even) + " (> 0.5), max odd <M> = " +
                      fmt(max_odd) + " (< -0.5)"};
}

// ---------------------------------------------------------------------------
// C2 and C3 share the L = 12 ensemble.

struct LifetimeRun {
    uint32_t L;
    uint32_t steps;
    EnsembleStats stats;
    DecayFit fit;
    // Fraction of trajectories with M > 0 (ties count half) at each even t.
    std::vector<double> plus_fraction;
    std::optional<Histogram> histogram;
};

constexpr size_t kPlateauTMin = 10;

LifetimeRun lifetime_run(const Context &ctx, uint32_t L, uint32_t steps, bool with_histogram) {
    LifetimeRun run{L, steps, {}, {}, {}, {}};
    auto lat = Lattice::square_periodic(L, L);
    const double n = lat.num_sites();
    if (with_histogram) {
        // One bin per five attainable values of M = k * 2 / N, edges between
        // attainable values so that no bin is favoured by aliasing.
        double half = 1.0 / n;
        size_t values = lat.num_sites() + 1;
        run.histogram.emplace(values / 5, -1 - half, -1 - half + (values / 5) * 5 * 2 * half);
    }
    std::vector<double> plus(steps / 2 + 1, 0.0);
    auto visit = [&](uint64_t, const TrajectoryRecord &rec) {
        for (size_t t = 0; t < rec.x_sum.size(); t += 2) {
            int32_t s = rec.x_sum[t];
            plus[t / 2] += s > 0 ? 1.0 : (s == 0 ? 0.5 : 0.0);
            if (run.histogram && t >= kPlateauTMin) {
                run.histogram->add(rec.magnetization(t));
            }
        }
    };
    run.stats = run_ensemble(lat, standard_params(steps), InitSpec{}, 202, L, 1000, ctx.threads, {}, visit);
    for (auto &v : plus) {
        v /= static_cast<double>(run.stats.count);
    }
    run.plus_fraction = std::move(plus);
    std::vector<double> mean, se;
    for (size_t t = 0; t < run.stats.num_times(); t++) {
        mean.push_back(run.stats.mean(t));
        se.push_back(run.stats.stderr_of_mean(t));
    }
    run.fit = fit_decay(mean, kPlateauTMin, SIZE_MAX, se);
    ctx.save("c2_magnetization_L" + std::to_string(L) + ".csv", run.stats.to_csv());
    return run;
}

std::vector<LifetimeRun> &lifetime_runs(const Context &ctx) {
    static std::vector<LifetimeRun> runs;
    if (runs.empty()) {
        const std::pair<uint32_t, uint32_t> plan[] = {{4, 400}, {6, 800}, {8, 1600}, {10, 3000}, {12, 6000}};
        for (auto [L, steps] : plan) {
            runs.push_back(lifetime_run(ctx, L, steps, L == 12));
        }
    }
    return runs;
}

Verdict c2_lifetime_scaling(const Context &ctx) {
    auto &runs = lifetime_runs(ctx);
    std::vector<SizedTau> taus;
    std::ostringstream table, detail;
    table << "L,steps,status,tau,tau_stderr,amplitude,points\n";
    bool increasing = true;
    double prev = 0;
    for (const auto &r : runs) {
        table << r.L << ',' << r.steps << ',' << to_string(r.fit.status) << ',' << format_double(r.fit.tau) << ','
              << format_double(r.fit.tau_stderr) << ',' << format_double(r.fit.amplitude) << ',' << r.fit.points
              << '\n';
        detail << "tau(" << r.L << ")=" << (r.fit.ok() ? fmt(r.fit.tau) : std::string(to_string(r.fit.status)))
               << ' ';
        if (!r.fit.ok() || !(r.fit.tau > prev)) {
            increasing = false;
        }
        prev = r.fit.ok() ? r.fit.tau : prev;
        if (r.fit.ok()) {
            taus.push_back({static_cast<double>(r.L), r.fit.tau});
        }
    }
    auto xi = fit_xi(taus);
    ctx.save("c2_tau.csv", table.str());
    if (ctx.out) {
        PlotSpec plot;
        plot.title = "lifetime vs L";
        plot.x_label = "L";
        plot.y_label = "tau";
        plot.log_y = true;
        PlotSeries s{"tau", {}, {}, {}, true};
        for (const auto &r : runs) {
            s.x.push_back(r.L);
            s.y.push_back(r.fit.tau);
            s.err.push_back(r.fit.tau_stderr);
        }
        plot.series.push_back(s);
        ctx.save("c2_tau_vs_L.svg", line_plot_svg(plot));
    }
    bool pass = increasing && xi.ok && xi.slope > 0 && xi.r2 > 0.9;
    detail << "| strictly increasing: " << (increasing ? "yes" : "no") << ", slope " << fmt(xi.slope) << " (> 0), R^2 "
           << fmt(xi.r2) << " (> 0.9), xi " << fmt(xi.xi);
    if (!xi.ok) {
        detail << " [" << xi.reason << "]";
    }
    return {pass, detail.str()};
}

Verdict c3_bimodal_histogram(const Context &ctx) {
    const auto &run = lifetime_runs(ctx).back();
    const Histogram &h = *run.histogram;
    ctx.save("c3_histogram.csv", h.to_csv());
    if (ctx.out) {
        ctx.save("c3_histogram.svg", histogram_svg(h, "even-time M, L = 12"));
    }
    // The tallest local maximum on each side of M = 0.
    auto maxima = h.local_maxima();
    std::optional<size_t> pos, neg;
    for (size_t b : maxima) {
        double c = h.center(b);
        auto &slot = c > 0 ? pos : neg;
        if (c != 0 && (!slot || h.counts[b] > h.counts[*slot])) {
            slot = b;
        }
    }
    bool bimodal = pos && neg && h.center(*pos) > 0.7 && h.center(*neg) < -0.7;

    // Weight of the initial-sign peak at checkpoints before and past tau.
    const double tau = run.fit.ok() ? run.fit.tau : std::nan("");
    const double n = static_cast<double>(run.stats.count);
    std::vector<size_t> checkpoints;
    for (double frac : {0.05, 0.25, 0.5, 1.0, 1.5, 2.0}) {
        auto t = static_cast<size_t>(frac * tau) & ~size_t{1};
        if (std::isfinite(tau) && t >= kPlateauTMin && t <= run.steps) {
            checkpoints.push_back(t);
        }
    }
    checkpoints.push_back(run.steps & ~uint32_t{1});
    checkpoints.erase(std::unique(checkpoints.begin(), checkpoints.end()), checkpoints.end());
    std::ostringstream weights;
    weights << "t,plus_fraction,stderr\n";
    bool monotone = true;
    bool above_half = true;
    double prev = 1, prev_se = 0;
    std::string trail;
    for (size_t t : checkpoints) {
        double w = run.plus_fraction[t / 2];
        double se = std::sqrt(std::max(w * (1 - w), 0.0) / n);
        weights << t << ',' << format_double(w) << ',' << format_double(se) << '\n';
        // Non-increasing within two combined standard errors.
        monotone = monotone && w <= prev + 2 * std::hypot(se, prev_se);
        above_half = above_half && w >= 0.5 - 2 * se;
        prev = w;
        prev_se = se;
        trail += fmt(w, 3) + "@" + std::to_string(t) + " ";
    }
    ctx.save("c3_peak_weight.csv", weights.str());
    double first = run.plus_fraction[checkpoints.front() / 2];
    double last = run.plus_fraction[checkpoints.back() / 2];
    bool toward_half = std::abs(last - 0.5) < std::abs(first - 0.5);
    bool passed_tau = std::isfinite(tau) && checkpoints.back() > tau;
    bool pass = bimodal && monotone && above_half && toward_half && passed_tau;
    std::string detail = "L=12 even t>=10: peaks at M=" + (pos ? fmt(h.center(*pos), 3) : "none") + " and " +
                         (neg ? fmt(h.center(*neg), 3) : "none") + " (|M| > 0.7); +peak weight " + trail +
                         "(tau=" + fmt(tau) + "): monotone " + (monotone ? "yes" : "no") + ", toward 1/2 " +
                         (toward_half ? "yes" : "no") + ", t passes tau " + (passed_tau ? "yes" : "no");
    return {pass, detail};
}

// ---------------------------------------------------------------------------
// C4: autocorrelator at separation L/2 on L = 20.

Verdict c4_paramagnetic_contrast(const Context &ctx) {
    const uint32_t L = 20;
    auto lat = Lattice::square_periodic(L, L);
    SiteId jp = lat.site_at(0, 0);
    SiteId far = lat.site_at(L / 2, 0);
    std::ostringstream csv;
    csv << "p_unit,t,C,stderr\n";
    auto measure = [&](double p_unit, uint64_t point) {
        ProtocolParams p = standard_params(0);
        p.p_unit = p_unit;
        AutocorrelatorSpec spec;
        spec.j_prime = jp;
        spec.targets = {far};
        spec.t_max = 11;
        spec.reps = 600;
        spec.master_seed = 404;
        spec.point_index = point;
        spec.threads = ctx.threads;
        auto r = autocorrelator(lat, p, spec);
        for (size_t t = 0; t <= spec.t_max; t++) {
            csv << format_double(p_unit) << ',' << t << ',' << format_double(r.mean[t][0]) << ','
                << format_double(r.stderr_of_mean[t][0]) << '\n';
        }
        return r;
    };
    auto para = measure(0.1, 0);
    auto dtc = measure(0.02, 1);
    ctx.save("c4_autocorrelator.csv", csv.str());
    double pm = para.mean[10][0], ps = para.stderr_of_mean[10][0];
    double dm = dtc.mean[10][0], ds = dtc.stderr_of_mean[10][0];
    double om = dtc.mean[11][0], os = dtc.stderr_of_mean[11][0];
    bool para_zero = std::abs(pm) <= 3 * ps;
    bool dtc_positive = ds > 0 && dm > 5 * ds;
    bool reversal = os > 0 && om < -5 * os;
    bool pass = para_zero && dtc_positive && reversal;
    return {pass, "L=20, |j-j'|=10, 600 reps: p_unit=0.1 C(10)=" + fmt(pm) + "+-" + fmt(ps) +
                      " (|C| <= 3 SE); p_unit=0.02 C(10)=" + fmt(dm) + "+-" + fmt(ds) + " (> 5 SE), C(11)=" + fmt(om) +
                      "+-" + fmt(os) + " (< -5 SE)"};
}

// ---------------------------------------------------------------------------
// C5: Binder crossing and scaling collapse.

Verdict c5_binder_criticality(const Context &ctx) {
    const std::vector<double> grid{0.030, 0.035, 0.040, 0.045, 0.050, 0.055, 0.060};
    const std::vector<uint32_t> sizes{8, 12, 16};
    std::vector<std::vector<double>> binder_curves, rms_curves, binder_err;
    std::ostringstream csv;
    csv << "L,p_unit,binder_u,binder_stderr,rms,rms_stderr,burn_in,burn_in_drift,burn_in_drift_stderr\n";
    uint64_t point = 0;
    for (uint32_t L : sizes) {
        auto lat = Lattice::square_periodic(L, L);
        std::vector<double> u, r, ue;
        for (double p_unit : grid) {
            ProtocolParams p;
            p.p_flip = 0.95;
            p.p_nec = 0.8;
            p.p_unit = p_unit;
            SteadyStateSpec spec;
            spec.burn_in = L * L;
            spec.samples_per_trajectory = 20;
            spec.sample_spacing = 2;
            spec.trajectories = 800;
            spec.master_seed = 505;
            spec.point_index = point++;
            spec.threads = ctx.threads;
            auto m = steady_state_moments(lat, p, spec);
            u.push_back(m.binder.u);
            ue.push_back(m.binder.stderr_u);
            r.push_back(m.rms);
            csv << L << ',' << format_double(p_unit) << ',' << format_double(m.binder.u) << ','
                << format_double(m.binder.stderr_u) << ',' << format_double(m.rms) << ','
                << format_double(m.rms_stderr) << ',' << spec.burn_in << ',' << format_double(m.burn_in_drift) << ','
                << format_double(m.burn_in_drift_stderr) << '\n';
        }
        binder_curves.push_back(u);
        binder_err.push_back(ue);
        rms_curves.push_back(r);
    }
    ctx.save("c5_binder.csv", csv.str());
    auto crossing = binder_crossing(grid, binder_curves);
    std::vector<double> dsizes(sizes.begin(), sizes.end());
    double q_ref = std::nan(""), q_nu2 = std::nan(""), q_beta = std::nan("");
    if (crossing.ok) {
        q_ref = scaling_collapse(grid, dsizes, rms_curves, crossing.p_c, 1.0, 0.125, CollapseObservable::Rms);
        q_nu2 = scaling_collapse(grid, dsizes, rms_curves, crossing.p_c, 2.0, 0.125, CollapseObservable::Rms);
        q_beta = scaling_collapse(grid, dsizes, rms_curves, crossing.p_c, 1.0, 0.5, CollapseObservable::Rms);
    }
    if (ctx.out) {
        PlotSpec plot;
        plot.title = "Binder cumulant";
        plot.x_label = "p_unit";
        plot.y_label = "U";
        for (size_t k = 0; k < sizes.size(); k++) {
            plot.series.push_back({"L=" + std::to_string(sizes[k]), grid, binder_curves[k], binder_err[k], true});
        }
        if (crossing.ok) {
            plot.marker_x = crossing.p_c;
        }
        ctx.save("c5_binder.svg", line_plot_svg(plot));
        if (crossing.ok) {
            for (auto [nu, beta, name] : {std::tuple{1.0, 0.125, "nu1_beta0.125"}, {2.0, 0.125, "nu2_beta0.125"},
                                          {1.0, 0.5, "nu1_beta0.5"}}) {
                PlotSpec c;
                c.title = std::string("RMS collapse ") + name;
                c.x_label = "(p - p_c) L^(1/nu)";
                c.y_label = "R L^(beta/nu)";
                for (size_t k = 0; k < sizes.size(); k++) {
                    PlotSeries s{"L=" + std::to_string(sizes[k]), {}, {}, {}, true};
                    for (size_t i = 0; i < grid.size(); i++) {
                        s.x.push_back((grid[i] - crossing.p_c) * std::pow(dsizes[k], 1 / nu));
                        s.y.push_back(rms_curves[k][i] * std::pow(dsizes[k], beta / nu));
                    }
                    c.series.push_back(s);
                }
                ctx.save(std::string("c5_collapse_") + name + ".svg", line_plot_svg(c));
            }
        }
    }
    bool in_window = crossing.ok && crossing.p_c >= 0.035 && crossing.p_c <= 0.050;
    for (double pc : crossing.pairwise) {
        in_window = in_window && pc >= 0.035 && pc <= 0.050;
    }
    bool collapse = q_ref < q_nu2 && q_ref < q_beta;
    std::string pairs;
    for (double pc : crossing.pairwise) {
        pairs += fmt(pc) + " ";
    }
    return {in_window && collapse,
            "L={8,12,16}: crossings " + (crossing.ok ? pairs : crossing.reason + " ") + "p_c=" + fmt(crossing.p_c) +
                " (all in [0.035, 0.050]); RMS collapse quality (1,1/8)=" + fmt(q_ref) + " vs (2,1/8)=" + fmt(q_nu2) +
                " and (1,1/2)=" + fmt(q_beta)};
}

// ---------------------------------------------------------------------------
// C6: tableau engine against the density-matrix oracle.

Verdict c6_oracle_equivalence(const Context &ctx) {
    auto progs = check_random_clifford_programs(200, 10000, 0.02, 606);
    ProtocolParams p = standard_params(5);
    p.p_dep = 0.01;
    auto period = check_period_ensemble(Lattice::square_open(2, 2), p, 20000, 5, 3.0, 607, ctx.threads);
    bool pass = progs.pass && period.pass;
    return {pass, "200 programs: " + std::to_string(progs.deterministic_checks) + " deterministic / " +
                      std::to_string(progs.random_branches) + " random outcomes, max |P_oracle - P_tableau| " +
                      fmt(progs.worst_probability_error) + ", final-state error " +
                      fmt(progs.worst_expectation_error) + ", sampled |f - 1/2| <= " +
                      fmt(progs.worst_frequency_deviation) + " (<= 0.02, 1e4 draws, " +
                      std::to_string(progs.sampled_branches) + " branches); 2x2 period channel vs 20000 traj: max z " +
                      fmt(period.max_z) + " (<= 3) for t <= 5"};
}

// ---------------------------------------------------------------------------
// C7: decoherence-free subspace and the incoherent jump variant.

Verdict c7_decoherence_free(const Context &ctx) {
    const double alpha = 0.6, beta = 0.8;
    ProtocolParams p;
    p.p_nec = 1.0;
    double worst = 0;
    for (auto lat : {Lattice::square_open(2, 2), Lattice::square_periodic(3, 3)}) {
        auto cat = DenseState::cat(lat.num_sites(), alpha, beta);
        auto rho = DensityMatrix::from_pure(cat);
        oracle_correct(rho, lat, p);
        worst = std::max(worst, 1 - rho.fidelity(cat));
        // The sampled engine too: every branch must leave the cat unchanged.
        for (uint64_t r = 0; r < 20; r++) {
            Rng rng(stream_seed(707, lat.num_sites(), r));
            DenseState psi = cat;
            step_correct(psi, lat, p, rng);
            double f = psi.fidelity(cat);
            worst = std::max(worst, 1 - f * f);
        }
    }
    bool dfs = worst <= 1e-10;

    auto lat = Lattice::square_periodic(3, 3);
    JumpParams jp;
    jp.gamma = 1.0;
    jp.t_max = 5.0;
    jp.sample_dt = 0.25;
    jp.variant = JumpVariant::IncoherentNEC;
    const uint64_t reps = 20000;
    std::vector<std::vector<JumpSample>> samples(reps);
    parallel_for(reps, ctx.threads, [&](size_t i) {
        Rng rng(stream_seed(708, 0, i));
        DenseState psi = DenseState::cat(lat.num_sites(), alpha, beta);
        samples[i] = jump_trajectory(psi, lat, jp, rng);
    });
    std::ostringstream csv;
    csv << "t,diag_plus,diag_minus,offdiag\n";
    CatCoherence start{}, end{};
    double max_diag_dev = 0;
    for (size_t k = 0; k < samples.front().size(); k++) {
        std::vector<JumpSample> at;
        for (const auto &s : samples) {
            at.push_back(s[k]);
        }
        auto c = cat_coherence(at);
        if (k == 0) {
            start = c;
        }
        end = c;
        max_diag_dev = std::max({max_diag_dev, std::abs(c.diag_plus - alpha * alpha),
                                 std::abs(c.diag_minus - beta * beta)});
        csv << format_double(at.front().t) << ',' << format_double(c.diag_plus) << ',' << format_double(c.diag_minus)
            << ',' << format_double(c.offdiag) << '\n';
    }
    ctx.save("c7_incoherent_jump.csv", csv.str());
    bool decays = end.offdiag <= 0.5 * start.offdiag;
    bool diag = max_diag_dev <= 0.02;
    return {dfs && decays && diag,
            "N=4,9 alpha=3/5: max infidelity " + fmt(worst) + " (<= 1e-10); incoherent jumps, 3x3, 20000 traj: "
            "|rho_+-| " + fmt(start.offdiag) + " -> " + fmt(end.offdiag) + " by t=5/Gamma (>= 50% decay), max diagonal "
            "drift " + fmt(max_diag_dev) + " (<= 0.02)"};
}

// ---------------------------------------------------------------------------
// C8: compiled gadgets against the projector algebra.

// (1 + w X_0 X_1)/2 on system qubits 0 and 1.
DenseState bond_projection(const DenseState &psi, int w) {
    DenseState out = psi;
    for (size_t k = 0; k < psi.dim(); k++) {
        out.amplitudes()[k] = (psi.amplitudes()[k] + static_cast<double>(w) * psi.amplitudes()[k ^ 3]) / 2.0;
    }
    return out;
}

// psi (x) |sign> on one extra (top) qubit, |sign> an X eigenstate.
DenseState with_x_ancilla(const DenseState &psi, int sign) {
    DenseState out(psi.num_qubits() + 1);
    const double h = 1 / std::sqrt(2.0);
    for (size_t k = 0; k < psi.dim(); k++) {
        out.amplitudes()[k] = psi.amplitudes()[k] * h;
        out.amplitudes()[k + psi.dim()] = psi.amplitudes()[k] * h * static_cast<double>(sign);
    }
    return out;
}

double amp_diff(const DenseState &a, const DenseState &b) {
    double m = 0;
    for (size_t k = 0; k < a.dim(); k++) {
        m = std::max(m, std::abs(a.amplitudes()[k] - b.amplitudes()[k]));
    }
    return m;
}

Verdict c8_gadgets(const Context &) {
    std::vector<DenseState> inputs;
    for (int s0 : {1, -1}) {
        for (int s1 : {1, -1}) {
            std::vector<int> signs{s0, s1};
            inputs.push_back(DenseState::product_x(signs));
        }
    }
    DenseState sup(2);
    sup.amplitudes() = {Complex(0.5, 0.1), Complex(-0.3, 0.4), Complex(0.2, -0.5), Complex(0.1, 0.43)};
    sup.normalize();
    inputs.push_back(sup);
    double gadget_err = 0;
    HardwareLayout pair(2, 1, {{0, 0}, {1, 0}});
    for (auto gs : {GateSet::CrossResonance, GateSet::CPhase}) {
        Circuit c(2, 1);
        compile_dw_measurement(c, pair, 0, 1, {gs, true});
        for (const auto &in : inputs) {
            auto branches = simulate_branches(c, with_x_ancilla(in, +1));
            for (int r : {1, -1}) {
                // Record +1 marks a wall: projection onto X_0 X_1 = -1.
                DenseState expect = with_x_ancilla(bond_projection(in, -r), r);
                double w = expect.norm() * expect.norm();
                const CircuitBranch *b = nullptr;
                for (const auto &br : branches) {
                    if (br.records.size() == 1 && br.records[0] == r) {
                        b = &br;
                    }
                }
                if (w < 1e-14) {
                    gadget_err = std::max(gadget_err, b ? b->weight : 0.0);
                    continue;
                }
                gadget_err = b ? std::max({gadget_err, amp_diff(b->state, expect), std::abs(b->weight - w)}) : 1.0;
            }
        }
    }

    double round_err = 0;
    auto lat = Lattice::square_open(2, 2);
    auto layout = HardwareLayout::for_lattice(lat);
    ProtocolParams p;
    p.p_nec = 1.0;
    std::mt19937_64 rng(808);
    std::normal_distribution<double> g;
    std::vector<DenseState> round_inputs{DenseState::cat(4, 0.6, 0.8)};
    for (int k = 0; k < 3; k++) {
        DenseState s(4);
        for (auto &a : s.amplitudes()) {
            a = Complex(g(rng), g(rng));
        }
        s.normalize();
        round_inputs.push_back(s);
    }
    const std::pair<RoundVariant, GateSet> variants[] = {{RoundVariant::MeasureAndFeedback, GateSet::CrossResonance},
                                                         {RoundVariant::MeasureAndFeedback, GateSet::CPhase},
                                                         {RoundVariant::ToffoliReset, GateSet::CrossResonance},
                                                         {RoundVariant::ToffoliReset, GateSet::CPhase}};
    for (auto [variant, gs] : variants) {
        auto c = compile_nec_round(layout, lat, variant, {gs, true});
        for (const auto &in : round_inputs) {
            auto expect = DensityMatrix::from_pure(in);
            oracle_correct(expect, lat, p);
            auto got = reduced_system_state(simulate_branches(c, embed_system(in, layout.num_ancilla())), 4);
            round_err = std::max(round_err, got.max_abs_diff(expect));
        }
    }
    bool pass = gadget_err <= 1e-10 && round_err <= 1e-10;
    return {pass, "W gadget (CR, CPHASE) on 4 product inputs + 1 superposition: max amplitude error " +
                      fmt(gadget_err) + "; full round on 2x2 (CR, CPHASE, Toffoli-reset x2) after ancilla trace: max "
                      "|d rho| " + fmt(round_err) + " (<= 1e-10)"};
}

// ---------------------------------------------------------------------------
// C9: classical limit.

Verdict c9_classical_limit(const Context &ctx) {
    auto lat = Lattice::square_periodic(6, 6);
    ProtocolParams p;
    p.p_flip = 0.95;
    p.p_nec = 0.8;
    p.p_me = 0.01;
    p.steps = 50;
    TrajectoryOptions opt;
    opt.record_sites = true;
    auto quantum = run_ensemble(lat, p, InitSpec{}, 909, 0, 10000, ctx.threads, opt);
    auto classical =
        run_classical_ensemble(lat, AutomatonParams::from_protocol(p), InitSpec{}, 910, 0, 10000, ctx.threads, opt);
    auto report = marginals_match(quantum, classical, 4.0, 50);
    return {report.pass, "L=6, 1e4 samples each, t<=50: " + std::to_string(report.comparisons) +
                             " site-time cells, max z " + fmt(report.max_z) + " (<= 4) at t=" +
                             std::to_string(report.worst_t) + " site " + std::to_string(report.worst_site) +
                             ", max |d<X_j>| " + fmt(report.max_abs_deviation)};
}

// ---------------------------------------------------------------------------
// C10: non-Clifford size trend.

Verdict c10_nonclifford_trend(const Context &ctx) {
    NonCliffordParams p;
    p.h = 0.9 * std::numbers::pi / 2;
    p.delta_h = 0.2;
    p.J = 1.0;
    p.delta_J = 0.2;
    p.p_nec = 0.9;
    p.steps = 120;
    std::ostringstream csv;
    csv << "lattice,trajectory,first_even_t_below_half\n";
    auto median_first = [&](const Lattice &lat, const std::string &name, uint64_t point) {
        std::vector<double> first(200);
        parallel_for(first.size(), ctx.threads, [&](size_t i) {
            Rng rng(stream_seed(1010, point, i));
            NonCliffordModel model(lat, p, rng);
            auto series = model.run(rng);
            size_t f = first_even_below(series, 0.5);
            first[i] = f == SIZE_MAX ? std::numeric_limits<double>::infinity() : static_cast<double>(f);
        });
        for (size_t i = 0; i < first.size(); i++) {
            csv << name << ',' << i << ',' << format_double(first[i]) << '\n';
        }
        std::sort(first.begin(), first.end());
        return 0.5 * (first[99] + first[100]);
    };
    double small = median_first(Lattice::square_open(2, 3), "open_2x3", 0);
    double large = median_first(Lattice::square_open(3, 4), "open_3x4", 1);
    ctx.save("c10_nonclifford.csv", csv.str());
    return {large > small, "h=0.9 pi/2, p_NEC=0.9, J=1, dJ=dh=0.2, 200 traj: median first even t with M < 0.5 is " +
                               fmt(small) + " on open 2x3 and " + fmt(large) + " on open 3x4 (must grow)"};
}

// ---------------------------------------------------------------------------
// C11: dependence on the initial magnetization.

Verdict c11_random_initial_states(const Context &ctx) {
    auto lat = Lattice::square_periodic(12, 12);
    const size_t t_min = 40, t_max = 200;
    std::ostringstream csv;
    csv << "m0,amplitude,stderr\n";
    std::vector<OscillationAmplitude> amps;
    uint64_t point = 0;
    for (double m0 : {1.0, 0.5, 0.1}) {
        InitSpec init;
        if (m0 == 1.0) {
            init.kind = InitKind::AllPlus;
        } else {
            init.kind = InitKind::RandomX;
            init.m0 = m0;
        }
        std::vector<TrajectoryRecord> records;
        run_ensemble(lat, standard_params(t_max), init, 1111, point++, 1000, ctx.threads, {},
                     [&](uint64_t, const TrajectoryRecord &r) { records.push_back(r); });
        amps.push_back(oscillation_amplitude(records, t_min, t_max));
        csv << format_double(m0) << ',' << format_double(amps.back().amplitude) << ','
            << format_double(amps.back().stderr_amplitude) << '\n';
    }
    ctx.save("c11_amplitude.csv", csv.str());
    double diff = std::abs(amps[0].amplitude - amps[1].amplitude);
    double se = std::hypot(amps[0].stderr_amplitude, amps[1].stderr_amplitude);
    bool agree = diff <= 2 * se;
    bool above = amps[0].amplitude > amps[2].amplitude && amps[1].amplitude > amps[2].amplitude;
    return {agree && above, "L=12, 1000 traj, 40<=t<=200: A(1.0)=" + fmt(amps[0].amplitude) + "+-" +
                                fmt(amps[0].stderr_amplitude) + ", A(0.5)=" + fmt(amps[1].amplitude) + "+-" +
                                fmt(amps[1].stderr_amplitude) + " (|diff| " + fmt(diff) + " <= 2 SE = " + fmt(2 * se) +
                                "), A(0.1)=" + fmt(amps[2].amplitude) + "+-" + fmt(amps[2].stderr_amplitude) +
                                " (below both)"};
}

}  // namespace

int main(int argc, char **argv) {
    Context ctx;
    std::set<std::string> only;
    for (int i = 1; i < argc; i++) {
        std::string a = argv[i];
        if (a == "--only" && i + 1 < argc) {
            std::stringstream list(argv[++i]);
            std::string item;
            while (std::getline(list, item, ',')) {
                only.insert(item);
            }
        } else if (a == "--out" && i + 1 < argc) {
            ctx.out = fs::path(argv[++i]);
        } else if (a == "--threads" && i + 1 < argc) {
            ctx.threads = static_cast<unsigned>(std::stoul(argv[++i]));
        } else {
            std::cerr << "usage: " << argv[0] << " [--only C1,C2,...] [--out DIR] [--threads N]\n";
            return 2;
        }
    }
    const std::vector<std::tuple<std::string, std::string, std::function<Verdict(const Context &)>>> criteria = {
        {"C1", "period-2 oscillations", c1_oscillations},
        {"C2", "exponential lifetime scaling", c2_lifetime_scaling},
        {"C3", "bimodal histogram", c3_bimodal_histogram},
        {"C4", "paramagnetic contrast", c4_paramagnetic_contrast},
        {"C5", "Binder criticality", c5_binder_criticality},
        {"C6", "oracle equivalence", c6_oracle_equivalence},
        {"C7", "decoherence-free subspace", c7_decoherence_free},
        {"C8", "gadget correctness", c8_gadgets},
        {"C9", "classical-limit equivalence", c9_classical_limit},
        {"C10", "non-Clifford size trend", c10_nonclifford_trend},
        {"C11", "random-initial-state dependence", c11_random_initial_states},
    };
    int failures = 0;
    for (const auto &[id, name, fn] : criteria) {
        if (!only.empty() && !only.contains(id)) {
            continue;
        }
        auto start = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = fn(ctx);
        } catch (const std::exception &e) {
            v = {false, std::string("error: ") + e.what()};
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        failures += v.pass ? 0 : 1;
        std::cout << (v.pass ? "PASS " : "FAIL ") << id << ' ' << name << ": " << v.detail << " [" << fmt(secs, 3)
                  << " s]" << std::endl;
    }
    return failures == 0 ? 0 : 1;
}
