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


#ifndef TOOMDTC_ANALYSIS_H
#define TOOMDTC_ANALYSIS_H

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "toomdtc/lattice.h"
#include "toomdtc/protocol.h"

namespace toomdtc {

enum class FitStatus : uint8_t { Ok, Unresolvable, NoDecay };

std::string_view to_string(FitStatus s);

struct DecayFit {
    FitStatus status = FitStatus::Unresolvable;
    double tau = 0;
    double tau_stderr = 0;
    double amplitude = 0;
    size_t t_min = 0;
    size_t t_max = 0;
    size_t points = 0;
    /// Weighted residual norm of the exponential model.
    double residual = 0;
    bool ok() const {
        return status == FitStatus::Ok;
    }
};

/// Fits A e^{-t/tau} to the even-time entries of `series` (indexed by t) in
/// [t_min, t_max]. `stderr_values`, when given, weights each point and sets
/// the noise floor; otherwise the fit is unweighted. Uses a log-linear fit
/// when every point is positive and Levenberg-Marquardt otherwise.
DecayFit fit_decay(std::span<const double> series, size_t t_min = 10, size_t t_max = SIZE_MAX,
                   std::span<const double> stderr_values = {});

struct ScalingFit {
    bool ok = false;
    std::string reason;
    double xi = 0;
    double slope = 0;
    double intercept = 0;
    double r2 = 0;
};

struct SizedTau {
    double size;
    double tau;
};

/// Regression of log tau on L; xi = 1 / slope.
ScalingFit fit_xi(std::span<const SizedTau> taus);

struct BinderResult {
    bool ok = false;
    double u = 0;
    double stderr_u = 0;
    double m2 = 0;
    double m4 = 0;
};

/// U = (3 - <M^4>/<M^2>^2)/2 over per-sample M values, jackknife error.
BinderResult binder(std::span<const double> samples);
/// Same, from per-trajectory averages of M^2 and M^4 (one entry per
/// independent trajectory); the jackknife runs over trajectories.
BinderResult binder_from_moments(std::span<const double> m2, std::span<const double> m4);

struct CrossingResult {
    bool ok = false;
    std::string reason;
    double p_c = 0;
    /// Standard deviation of the pairwise crossings.
    double spread = 0;
    std::vector<double> pairwise;
};

/// curves[k][i] is U at grid[i] for size k. Each pair crosses where U_k - U_l
/// changes sign, interpolated linearly; with several sign changes the one
/// splitting the summed difference most evenly into opposite signs wins.
CrossingResult binder_crossing(std::span<const double> grid, const std::vector<std::vector<double>> &curves);

enum class CollapseObservable : uint8_t { Binder, Rms };

/// Mean squared deviation of rescaled points from the master curve formed by
/// the other sizes, relative to the overall spread of the rescaled ordinates.
/// Abscissa (p - p_c) L^{1/nu}; RMS ordinates are scaled by L^{beta/nu}.
double scaling_collapse(std::span<const double> grid, std::span<const double> sizes,
                        const std::vector<std::vector<double>> &curves, double p_c, double nu, double beta,
                        CollapseObservable observable);

struct Histogram {
    double lo = -1;
    double hi = 1;
    std::vector<uint64_t> counts;

    explicit Histogram(size_t bins = 0, double lo_ = -1, double hi_ = 1) : lo(lo_), hi(hi_), counts(bins, 0) {
    }
    size_t bins() const {
        return counts.size();
    }
    double center(size_t b) const {
        return lo + (hi - lo) * (static_cast<double>(b) + 0.5) / static_cast<double>(bins());
    }
    void add(double v);
    uint64_t total() const;
    /// Bins strictly greater than both neighbors (plateaus count once, at
    /// their left edge); edge bins compare with their single neighbor.
    std::vector<size_t> local_maxima() const;
    std::string to_csv() const;
};

/// Even-time sample magnetizations of every record within [t_min, t_max].
Histogram histogram_even_m(std::span<const TrajectoryRecord> records, size_t bins, size_t t_min = 0,
                           size_t t_max = SIZE_MAX);

struct AutocorrelatorSpec {
    SiteId j_prime = 0;
    std::vector<SiteId> targets;
    uint32_t t_max = 0;
    /// 0 selects 5 L (L = the larger lattice dimension).
    uint32_t burn_in = 0;
    uint64_t reps = 0;
    uint64_t master_seed = 0;
    uint64_t point_index = 0;
    unsigned threads = 0;
};

struct AutocorrelatorResult {
    /// mean[t][k], stderr[t][k] for target k.
    std::vector<std::vector<double>> mean;
    std::vector<std::vector<double>> stderr_of_mean;
    uint32_t burn_in = 0;
};

/// From |0...0>, evolve burn_in periods, measure X_{j'} -> m, then record
/// m <X_j(t)> for t = 0..t_max.
AutocorrelatorResult autocorrelator(const Lattice &lattice, const ProtocolParams &params,
                                    const AutocorrelatorSpec &spec);

struct SteadyStateSpec {
    /// 0 selects 5 L.
    uint32_t burn_in = 0;
    uint32_t samples_per_trajectory = 1;
    uint32_t sample_spacing = 1;
    uint64_t trajectories = 0;
    uint64_t master_seed = 0;
    uint64_t point_index = 0;
    unsigned threads = 0;
};

struct SteadyStateMoments {
    BinderResult binder;
    double rms = 0;
    double rms_stderr = 0;
    /// <M^2> over the last quarter of burn-in minus over the third quarter,
    /// and its standard error; a drift well inside one SE marks stationarity.
    double burn_in_drift = 0;
    double burn_in_drift_stderr = 0;
    std::vector<double> m2_per_trajectory;
    std::vector<double> m4_per_trajectory;
};

/// Steady-state moments from |0...0>: projective X samples of the whole
/// lattice, taken after burn-in.
SteadyStateMoments steady_state_moments(const Lattice &lattice, const ProtocolParams &params,
                                        const SteadyStateSpec &spec);

/// First even t with series[t] < threshold, or SIZE_MAX.
size_t first_even_below(std::span<const double> series, double threshold);

struct OscillationAmplitude {
    double amplitude = 0;
    double stderr_amplitude = 0;
};

/// Per-trajectory (mean M over even t - mean M over odd t) / 2 in
/// [t_min, t_max], averaged over trajectories.
OscillationAmplitude oscillation_amplitude(std::span<const TrajectoryRecord> records, size_t t_min, size_t t_max);

struct LinearFit {
    double slope = 0;
    double intercept = 0;
    double slope_stderr = 0;
    double r2 = 0;
};

/// Weighted least squares y = a + b x (weights may be empty).
LinearFit linear_fit(std::span<const double> x, std::span<const double> y, std::span<const double> w = {});

}  // namespace toomdtc

#endif
