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


#include "toomdtc/analysis.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "toomdtc/format.h"
#include "toomdtc/parallel.h"
#include "toomdtc/rng.h"
#include "toomdtc/stabilizer.h"

namespace toomdtc {

std::string_view to_string(FitStatus s) {
    switch (s) {
        case FitStatus::Ok:
            return "ok";
        case FitStatus::Unresolvable:
            return "unresolvable";
        case FitStatus::NoDecay:
            return "no_decay";
    }
    return "?";
}

LinearFit linear_fit(std::span<const double> x, std::span<const double> y, std::span<const double> w) {
    if (x.size() != y.size() || (!w.empty() && w.size() != x.size())) {
        throw std::invalid_argument("linear_fit inputs differ in length");
    }
    if (x.size() < 2) {
        throw std::invalid_argument("linear_fit needs at least two points");
    }
    double sw = 0, sx = 0, sy = 0;
    for (size_t i = 0; i < x.size(); i++) {
        double wi = w.empty() ? 1.0 : w[i];
        sw += wi;
        sx += wi * x[i];
        sy += wi * y[i];
    }
    double mx = sx / sw, my = sy / sw;
    double sxx = 0, sxy = 0, syy = 0;
    for (size_t i = 0; i < x.size(); i++) {
        double wi = w.empty() ? 1.0 : w[i];
        sxx += wi * (x[i] - mx) * (x[i] - mx);
        sxy += wi * (x[i] - mx) * (y[i] - my);
        syy += wi * (y[i] - my) * (y[i] - my);
    }
    LinearFit f;
    if (sxx <= 0) {
        throw std::invalid_argument("linear_fit needs distinct abscissae");
    }
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double rss = 0;
    for (size_t i = 0; i < x.size(); i++) {
        double wi = w.empty() ? 1.0 : w[i];
        double r = y[i] - f.intercept - f.slope * x[i];
        rss += wi * r * r;
    }
    f.r2 = syy > 0 ? 1 - rss / syy : 1.0;
    if (x.size() > 2) {
        f.slope_stderr = std::sqrt(rss / static_cast<double>(x.size() - 2) / sxx);
    }
    return f;
}

namespace {

// Levenberg-Marquardt for y = A exp(-k t) with weights w.
struct ExpFit {
    double a;
    double k;
    double chi2;
    std::array<double, 3> cov;  // var a, cov ak, var k (unscaled)
};

ExpFit fit_exponential(const std::vector<double> &t, const std::vector<double> &y, const std::vector<double> &w,
                       double a0, double k0) {
    auto chi2_of = [&](double a, double k) {
        double s = 0;
        for (size_t i = 0; i < t.size(); i++) {
            double r = y[i] - a * std::exp(-k * t[i]);
            s += w[i] * r * r;
        }
        return s;
    };
    double a = a0, k = k0, lambda = 1e-3;
    double chi2 = chi2_of(a, k);
    for (int iter = 0; iter < 200; iter++) {
        double jaa = 0, jak = 0, jkk = 0, ga = 0, gk = 0;
        for (size_t i = 0; i < t.size(); i++) {
            double e = std::exp(-k * t[i]);
            double da = e;
            double dk = -a * t[i] * e;
            double r = y[i] - a * e;
            jaa += w[i] * da * da;
            jak += w[i] * da * dk;
            jkk += w[i] * dk * dk;
            ga += w[i] * da * r;
            gk += w[i] * dk * r;
        }
        bool improved = false;
        for (int tries = 0; tries < 30 && !improved; tries++) {
            double m00 = jaa * (1 + lambda), m11 = jkk * (1 + lambda), m01 = jak;
            double det = m00 * m11 - m01 * m01;
            if (!(det > 0)) {
                lambda *= 10;
                continue;
            }
            double sa = (m11 * ga - m01 * gk) / det;
            double sk = (m00 * gk - m01 * ga) / det;
            double c = chi2_of(a + sa, k + sk);
            if (c < chi2) {
                bool small = std::abs(sa) <= 1e-12 * (std::abs(a) + 1e-300) && std::abs(sk) <= 1e-12 * (std::abs(k) + 1e-300);
                a += sa;
                k += sk;
                double rel = (chi2 - c) / std::max(chi2, 1e-300);
                chi2 = c;
                lambda = std::max(lambda / 10, 1e-12);
                improved = true;
                if (small || rel < 1e-14) {
                    iter = 1000;
                }
            } else {
                lambda *= 10;
            }
        }
        if (!improved) {
            break;
        }
    }
    double jaa = 0, jak = 0, jkk = 0;
    for (size_t i = 0; i < t.size(); i++) {
        double e = std::exp(-k * t[i]);
        double dk = -a * t[i] * e;
        jaa += w[i] * e * e;
        jak += w[i] * e * dk;
        jkk += w[i] * dk * dk;
    }
    double det = jaa * jkk - jak * jak;
    ExpFit f{a, k, chi2, {jkk / det, -jak / det, jaa / det}};
    return f;
}

}  // namespace

DecayFit fit_decay(std::span<const double> series, size_t t_min, size_t t_max, std::span<const double> stderr_values) {
    if (!stderr_values.empty() && stderr_values.size() != series.size()) {
        throw std::invalid_argument("stderr series length differs from the value series");
    }
    DecayFit fit;
    if (series.empty()) {
        return fit;
    }
    t_max = std::min(t_max, series.size() - 1);
    fit.t_min = t_min;
    fit.t_max = t_max;
    std::vector<double> ts, ys, ses;
    for (size_t t = t_min + (t_min % 2); t <= t_max; t += 2) {
        ts.push_back(static_cast<double>(t));
        ys.push_back(series[t]);
        ses.push_back(stderr_values.empty() ? 0.0 : stderr_values[t]);
    }
    fit.points = ts.size();
    if (ts.size() < 8) {
        return fit;
    }
    bool weighted = !stderr_values.empty() && std::all_of(ses.begin(), ses.end(), [](double s) { return s > 0; });
    bool above_floor = false;
    for (size_t i = 0; i < ys.size(); i++) {
        if (weighted ? ys[i] > 3 * ses[i] : ys[i] > 0) {
            above_floor = true;
        }
    }
    if (!above_floor) {
        return fit;
    }

    bool all_positive = std::all_of(ys.begin(), ys.end(), [](double v) { return v > 0; });
    if (all_positive) {
        std::vector<double> logs(ys.size()), w(ys.size(), 1.0);
        for (size_t i = 0; i < ys.size(); i++) {
            logs[i] = std::log(ys[i]);
            if (weighted) {
                double rel = ses[i] / ys[i];
                w[i] = 1 / (rel * rel);
            }
        }
        auto lf = linear_fit(ts, logs, w);
        fit.amplitude = std::exp(lf.intercept);
        double rss = 0;
        for (size_t i = 0; i < ts.size(); i++) {
            double r = logs[i] - lf.intercept - lf.slope * ts[i];
            rss += w[i] * r * r;
        }
        fit.residual = std::sqrt(rss);
        if (!(lf.slope < 0)) {
            fit.status = FitStatus::NoDecay;
            fit.tau = std::numeric_limits<double>::infinity();
            return fit;
        }
        double slope_se = lf.slope_stderr;
        if (weighted) {
            // Absolute weights: the covariance is (X^T W X)^{-1}.
            double sw = 0, sx = 0, sxx = 0;
            for (size_t i = 0; i < ts.size(); i++) {
                sw += w[i];
                sx += w[i] * ts[i];
                sxx += w[i] * ts[i] * ts[i];
            }
            slope_se = std::sqrt(sw / (sw * sxx - sx * sx));
        }
        fit.status = FitStatus::Ok;
        fit.tau = -1 / lf.slope;
        fit.tau_stderr = slope_se / (lf.slope * lf.slope);
        return fit;
    }

    std::vector<double> w(ys.size(), 1.0);
    if (weighted) {
        for (size_t i = 0; i < ys.size(); i++) {
            w[i] = 1 / (ses[i] * ses[i]);
        }
    }
    // Start from a log-linear fit of the positive part.
    double a0 = std::max(ys.front(), 1e-3), k0 = 1.0 / std::max(1.0, ts.back() - ts.front());
    {
        std::vector<double> pt, pl;
        for (size_t i = 0; i < ys.size(); i++) {
            if (ys[i] > 0) {
                pt.push_back(ts[i]);
                pl.push_back(std::log(ys[i]));
            }
        }
        if (pt.size() >= 2 && pt.front() != pt.back()) {
            auto lf = linear_fit(pt, pl);
            if (lf.slope < 0) {
                a0 = std::exp(lf.intercept);
                k0 = -lf.slope;
            }
        }
    }
    auto ef = fit_exponential(ts, ys, w, a0, k0);
    fit.amplitude = ef.a;
    fit.residual = std::sqrt(ef.chi2);
    if (!(ef.k > 0) || !std::isfinite(ef.k)) {
        fit.status = FitStatus::NoDecay;
        fit.tau = std::numeric_limits<double>::infinity();
        return fit;
    }
    double var_k = ef.cov[2];
    if (!weighted && ts.size() > 2) {
        var_k *= ef.chi2 / static_cast<double>(ts.size() - 2);
    }
    fit.status = FitStatus::Ok;
    fit.tau = 1 / ef.k;
    fit.tau_stderr = std::sqrt(std::max(0.0, var_k)) / (ef.k * ef.k);
    return fit;
}

ScalingFit fit_xi(std::span<const SizedTau> taus) {
    ScalingFit out;
    std::vector<double> x, y;
    for (const auto &st : taus) {
        if (st.tau > 0 && std::isfinite(st.tau)) {
            x.push_back(st.size);
            y.push_back(std::log(st.tau));
        }
    }
    if (x.size() < 3) {
        out.reason = "fewer than three sizes with a resolvable tau";
        return out;
    }
    auto lf = linear_fit(x, y);
    out.slope = lf.slope;
    out.intercept = lf.intercept;
    out.r2 = lf.r2;
    if (!(lf.slope > 0)) {
        out.reason = "no exponential scaling: log tau does not grow with L";
        return out;
    }
    out.ok = true;
    out.xi = 1 / lf.slope;
    return out;
}

BinderResult binder_from_moments(std::span<const double> m2, std::span<const double> m4) {
    BinderResult r;
    size_t n = m2.size();
    if (n != m4.size() || n < 2) {
        return r;
    }
    double s2 = std::accumulate(m2.begin(), m2.end(), 0.0);
    double s4 = std::accumulate(m4.begin(), m4.end(), 0.0);
    r.m2 = s2 / n;
    r.m4 = s4 / n;
    if (!(r.m2 > 0)) {
        return r;
    }
    auto u_of = [](double a2, double a4) { return (3 - a4 / (a2 * a2)) / 2; };
    r.u = u_of(r.m2, r.m4);
    double mean_j = 0;
    std::vector<double> uj(n);
    for (size_t i = 0; i < n; i++) {
        double a2 = (s2 - m2[i]) / (n - 1);
        double a4 = (s4 - m4[i]) / (n - 1);
        uj[i] = a2 > 0 ? u_of(a2, a4) : r.u;
        mean_j += uj[i];
    }
    mean_j /= n;
    double var = 0;
    for (double v : uj) {
        var += (v - mean_j) * (v - mean_j);
    }
    r.stderr_u = std::sqrt(var * (n - 1) / n);
    r.ok = true;
    return r;
}

BinderResult binder(std::span<const double> samples) {
    std::vector<double> m2(samples.size()), m4(samples.size());
    for (size_t i = 0; i < samples.size(); i++) {
        m2[i] = samples[i] * samples[i];
        m4[i] = m2[i] * m2[i];
    }
    return binder_from_moments(m2, m4);
}

CrossingResult binder_crossing(std::span<const double> grid, const std::vector<std::vector<double>> &curves) {
    CrossingResult out;
    if (curves.size() < 2) {
        out.reason = "need at least two sizes";
        return out;
    }
    for (const auto &c : curves) {
        if (c.size() != grid.size()) {
            throw std::invalid_argument("curve length differs from the grid");
        }
    }
    for (size_t k = 0; k < curves.size(); k++) {
        for (size_t l = k + 1; l < curves.size(); l++) {
            std::vector<double> d(grid.size());
            for (size_t i = 0; i < grid.size(); i++) {
                d[i] = curves[k][i] - curves[l][i];
            }
            // Among the sign changes, keep the one that best separates the
            // grid into a side where d is mostly positive and one where it is
            // mostly negative; isolated noise crossings score low.
            double best_score = -1;
            double best_x = 0;
            double total = std::accumulate(d.begin(), d.end(), 0.0);
            double left = 0;
            for (size_t i = 0; i + 1 < grid.size(); i++) {
                left += d[i];
                bool change = (d[i] <= 0 && d[i + 1] > 0) || (d[i] >= 0 && d[i + 1] < 0) ||
                              (d[i] == 0 && d[i + 1] == 0 && false);
                if (!change || (d[i] == 0 && d[i + 1] == 0)) {
                    continue;
                }
                double score = std::abs(left - (total - left));
                double x = d[i] == d[i + 1] ? grid[i] : grid[i] + (grid[i + 1] - grid[i]) * d[i] / (d[i] - d[i + 1]);
                if (score > best_score) {
                    best_score = score;
                    best_x = x;
                }
            }
            if (best_score < 0) {
                out.reason = "curves " + std::to_string(k) + " and " + std::to_string(l) + " do not cross on the grid";
                out.pairwise.clear();
                return out;
            }
            out.pairwise.push_back(best_x);
        }
    }
    double mean = std::accumulate(out.pairwise.begin(), out.pairwise.end(), 0.0) / out.pairwise.size();
    double var = 0;
    for (double v : out.pairwise) {
        var += (v - mean) * (v - mean);
    }
    out.p_c = mean;
    out.spread = out.pairwise.size() > 1 ? std::sqrt(var / (out.pairwise.size() - 1)) : 0.0;
    out.ok = true;
    return out;
}

double scaling_collapse(std::span<const double> grid, std::span<const double> sizes,
                        const std::vector<std::vector<double>> &curves, double p_c, double nu, double beta,
                        CollapseObservable observable) {
    if (curves.size() != sizes.size()) {
        throw std::invalid_argument("one curve per size is required");
    }
    size_t m = curves.size();
    std::vector<std::vector<double>> xs(m), ys(m);
    for (size_t k = 0; k < m; k++) {
        if (curves[k].size() != grid.size()) {
            throw std::invalid_argument("curve length differs from the grid");
        }
        double xscale = std::pow(sizes[k], 1 / nu);
        double yscale = observable == CollapseObservable::Rms ? std::pow(sizes[k], beta / nu) : 1.0;
        for (size_t i = 0; i < grid.size(); i++) {
            xs[k].push_back((grid[i] - p_c) * xscale);
            ys[k].push_back(curves[k][i] * yscale);
        }
    }
    auto interp = [](const std::vector<double> &x, const std::vector<double> &y, double at, double &out) {
        if (x.empty() || at < x.front() || at > x.back()) {
            return false;
        }
        auto it = std::upper_bound(x.begin(), x.end(), at);
        size_t i = it == x.end() ? x.size() - 1 : static_cast<size_t>(it - x.begin());
        if (i == 0) {
            out = y[0];
            return true;
        }
        double f = (at - x[i - 1]) / (x[i] - x[i - 1]);
        out = y[i - 1] + f * (y[i] - y[i - 1]);
        return true;
    };
    double sq = 0;
    size_t used = 0;
    double sum_y = 0, sum_yy = 0;
    size_t all = 0;
    for (size_t k = 0; k < m; k++) {
        for (size_t i = 0; i < grid.size(); i++) {
            sum_y += ys[k][i];
            sum_yy += ys[k][i] * ys[k][i];
            all++;
            double acc = 0;
            size_t others = 0;
            for (size_t l = 0; l < m; l++) {
                double v;
                if (l != k && interp(xs[l], ys[l], xs[k][i], v)) {
                    acc += v;
                    others++;
                }
            }
            if (others == 0) {
                continue;
            }
            double master = acc / others;
            sq += (ys[k][i] - master) * (ys[k][i] - master);
            used++;
        }
    }
    if (used == 0) {
        return std::numeric_limits<double>::infinity();
    }
    double mean = sum_y / all;
    double var = sum_yy / all - mean * mean;
    double msd = sq / used;
    if (var <= 0) {
        return msd;
    }
    return msd / var;
}

void Histogram::add(double v) {
    if (counts.empty()) {
        throw std::logic_error("histogram has no bins");
    }
    double f = (v - lo) / (hi - lo) * static_cast<double>(bins());
    auto b = static_cast<int64_t>(std::floor(f));
    b = std::clamp<int64_t>(b, 0, static_cast<int64_t>(bins()) - 1);
    counts[static_cast<size_t>(b)]++;
}

uint64_t Histogram::total() const {
    return std::accumulate(counts.begin(), counts.end(), uint64_t{0});
}

std::vector<size_t> Histogram::local_maxima() const {
    std::vector<size_t> out;
    size_t n = bins();
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j + 1 < n && counts[j + 1] == counts[i]) {
            j++;
        }
        bool left_ok = i == 0 || counts[i - 1] < counts[i];
        bool right_ok = j + 1 == n || counts[j + 1] < counts[i];
        if (counts[i] > 0 && left_ok && right_ok) {
            out.push_back(i);
        }
        i = j + 1;
    }
    return out;
}

std::string Histogram::to_csv() const {
    std::ostringstream out;
    out << "bin_lo,bin_hi,count\n";
    for (size_t b = 0; b < bins(); b++) {
        double a = lo + (hi - lo) * static_cast<double>(b) / static_cast<double>(bins());
        double c = lo + (hi - lo) * static_cast<double>(b + 1) / static_cast<double>(bins());
        out << format_double(a) << ',' << format_double(c) << ',' << counts[b] << '\n';
    }
    return out.str();
}

Histogram histogram_even_m(std::span<const TrajectoryRecord> records, size_t bins, size_t t_min, size_t t_max) {
    if (bins < 8) {
        throw std::invalid_argument("histogram needs at least 8 bins");
    }
    Histogram h(bins);
    for (const auto &r : records) {
        size_t end = std::min(t_max, r.x_sum.empty() ? 0 : r.x_sum.size() - 1);
        for (size_t t = t_min + (t_min % 2); t <= end && t < r.x_sum.size(); t += 2) {
            h.add(r.magnetization(t));
        }
    }
    return h;
}

namespace {

uint32_t default_burn_in(const Lattice &lattice, uint32_t requested) {
    if (requested > 0) {
        return requested;
    }
    auto [a, b] = lattice.dims();
    return 5 * std::max(a, b);
}

}  // namespace

AutocorrelatorResult autocorrelator(const Lattice &lattice, const ProtocolParams &params,
                                    const AutocorrelatorSpec &spec) {
    params.validate();
    if (spec.reps == 0) {
        throw std::invalid_argument("autocorrelator needs at least one repetition");
    }
    uint32_t n = lattice.num_sites();
    for (SiteId j : spec.targets) {
        if (j >= n) {
            throw std::out_of_range("autocorrelator target outside the lattice");
        }
    }
    if (spec.j_prime >= n) {
        throw std::out_of_range("autocorrelator reference site outside the lattice");
    }
    AutocorrelatorResult res;
    res.burn_in = default_burn_in(lattice, spec.burn_in);
    size_t k = spec.targets.size();
    size_t cells = size_t{spec.t_max + 1} * k;
    std::vector<int64_t> sum(cells, 0), sum_sq(cells, 0);
    constexpr uint64_t kChunk = 256;
    std::vector<std::vector<int8_t>> rows;
    for (uint64_t start = 0; start < spec.reps; start += kChunk) {
        uint64_t len = std::min(kChunk, spec.reps - start);
        rows.assign(len, {});
        parallel_for(len, spec.threads, [&](size_t i) {
            Rng rng(stream_seed(spec.master_seed, spec.point_index, start + i));
            StabilizerState state = StabilizerState::all_zero(n);
            for (uint32_t t = 0; t < res.burn_in; t++) {
                step_pulse(state, lattice, params, rng);
                step_correct(state, lattice, params, rng);
            }
            int m = state.measure_x(spec.j_prime, rng).value;
            auto &row = rows[i];
            row.reserve(cells);
            for (uint32_t t = 0; t <= spec.t_max; t++) {
                if (t > 0) {
                    step_pulse(state, lattice, params, rng);
                    step_correct(state, lattice, params, rng);
                }
                for (SiteId j : spec.targets) {
                    row.push_back(static_cast<int8_t>(m * state.expect_x(j)));
                }
            }
        });
        for (const auto &row : rows) {
            for (size_t c = 0; c < cells; c++) {
                sum[c] += row[c];
                sum_sq[c] += row[c] * row[c];
            }
        }
    }
    double reps = static_cast<double>(spec.reps);
    res.mean.assign(spec.t_max + 1, std::vector<double>(k));
    res.stderr_of_mean.assign(spec.t_max + 1, std::vector<double>(k));
    for (uint32_t t = 0; t <= spec.t_max; t++) {
        for (size_t q = 0; q < k; q++) {
            size_t c = t * k + q;
            double mean = sum[c] / reps;
            res.mean[t][q] = mean;
            double var = spec.reps > 1 ? (sum_sq[c] - reps * mean * mean) / (reps - 1) : NAN;
            res.stderr_of_mean[t][q] = std::sqrt(std::max(0.0, var) / reps);
        }
    }
    return res;
}

SteadyStateMoments steady_state_moments(const Lattice &lattice, const ProtocolParams &params,
                                        const SteadyStateSpec &spec) {
    params.validate();
    if (spec.trajectories < 2 || spec.samples_per_trajectory == 0) {
        throw std::invalid_argument("steady-state sampling needs >= 2 trajectories and >= 1 sample each");
    }
    uint32_t n = lattice.num_sites();
    uint32_t burn = default_burn_in(lattice, spec.burn_in);
    // Burn-in drift probes: up to 8 projective samples in each of the last two
    // quarters of burn-in.
    std::vector<uint32_t> probe_q3, probe_q4;
    for (uint32_t k = 0; k < 8; k++) {
        uint32_t a = burn / 2 + (burn / 4) * k / 8;
        uint32_t b = 3 * burn / 4 + (burn - 3 * burn / 4) * k / 8;
        if (a >= 1 && (probe_q3.empty() || probe_q3.back() != a)) {
            probe_q3.push_back(a);
        }
        if (b >= 1 && (probe_q4.empty() || probe_q4.back() != b)) {
            probe_q4.push_back(b);
        }
    }
    SteadyStateMoments out;
    out.m2_per_trajectory.resize(spec.trajectories);
    out.m4_per_trajectory.resize(spec.trajectories);
    std::vector<double> drift(spec.trajectories);
    parallel_for(spec.trajectories, spec.threads, [&](size_t i) {
        Rng rng(stream_seed(spec.master_seed, spec.point_index, i));
        StabilizerState state = StabilizerState::all_zero(n);
        double q3 = 0, q4 = 0;
        size_t i3 = 0, i4 = 0;
        for (uint32_t t = 1; t <= burn; t++) {
            step_pulse(state, lattice, params, rng);
            step_correct(state, lattice, params, rng);
            bool in3 = i3 < probe_q3.size() && probe_q3[i3] == t;
            bool in4 = i4 < probe_q4.size() && probe_q4[i4] == t;
            if (in3 || in4) {
                double m = static_cast<double>(sample_x_sum(state, rng)) / n;
                if (in3) {
                    q3 += m * m;
                    i3++;
                }
                if (in4) {
                    q4 += m * m;
                    i4++;
                }
            }
        }
        drift[i] = (i4 ? q4 / i4 : 0.0) - (i3 ? q3 / i3 : 0.0);
        double s2 = 0, s4 = 0;
        for (uint32_t s = 0; s < spec.samples_per_trajectory; s++) {
            if (s > 0) {
                for (uint32_t k = 0; k < spec.sample_spacing; k++) {
                    step_pulse(state, lattice, params, rng);
                    step_correct(state, lattice, params, rng);
                }
            }
            double m = static_cast<double>(sample_x_sum(state, rng)) / n;
            s2 += m * m;
            s4 += m * m * m * m;
        }
        out.m2_per_trajectory[i] = s2 / spec.samples_per_trajectory;
        out.m4_per_trajectory[i] = s4 / spec.samples_per_trajectory;
    });
    out.binder = binder_from_moments(out.m2_per_trajectory, out.m4_per_trajectory);
    double nt = static_cast<double>(spec.trajectories);
    out.rms = std::sqrt(out.binder.m2);
    double var2 = 0;
    for (double v : out.m2_per_trajectory) {
        var2 += (v - out.binder.m2) * (v - out.binder.m2);
    }
    var2 /= (nt - 1);
    double m2_se = std::sqrt(var2 / nt);
    out.rms_stderr = out.rms > 0 ? m2_se / (2 * out.rms) : 0.0;
    double dm = std::accumulate(drift.begin(), drift.end(), 0.0) / nt;
    double dv = 0;
    for (double v : drift) {
        dv += (v - dm) * (v - dm);
    }
    out.burn_in_drift = dm;
    out.burn_in_drift_stderr = std::sqrt(dv / (nt - 1) / nt);
    return out;
}

size_t first_even_below(std::span<const double> series, double threshold) {
    for (size_t t = 0; t < series.size(); t += 2) {
        if (series[t] < threshold) {
            return t;
        }
    }
    return SIZE_MAX;
}

OscillationAmplitude oscillation_amplitude(std::span<const TrajectoryRecord> records, size_t t_min, size_t t_max) {
    OscillationAmplitude out;
    if (records.size() < 2) {
        throw std::invalid_argument("oscillation amplitude needs at least two records");
    }
    std::vector<double> amp;
    amp.reserve(records.size());
    for (const auto &r : records) {
        double se = 0, so = 0;
        size_t ne = 0, no = 0;
        for (size_t t = t_min; t <= t_max && t < r.x_sum.size(); t++) {
            (t % 2 == 0 ? se : so) += r.magnetization(t);
            (t % 2 == 0 ? ne : no)++;
        }
        if (ne == 0 || no == 0) {
            throw std::invalid_argument("window must contain both even and odd times");
        }
        amp.push_back((se / ne - so / no) / 2);
    }
    double n = static_cast<double>(amp.size());
    double mean = std::accumulate(amp.begin(), amp.end(), 0.0) / n;
    double var = 0;
    for (double a : amp) {
        var += (a - mean) * (a - mean);
    }
    out.amplitude = mean;
    out.stderr_amplitude = std::sqrt(var / (n - 1) / n);
    return out;
}

}  // namespace toomdtc
