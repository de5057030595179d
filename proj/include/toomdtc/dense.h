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

#ifndef TOOMDTC_DENSE_H
#define TOOMDTC_DENSE_H

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "toomdtc/lattice.h"
#include "toomdtc/pauli.h"
#include "toomdtc/protocol.h"
#include "toomdtc/rng.h"
#include "toomdtc/stabilizer.h"

namespace toomdtc {

using Complex = std::complex<double>;

/// Row-major 2x2 matrix.
struct Mat2 {
    Complex a, b, c, d;
};

/// Thrown when a dense engine is asked for more qubits than its cap.
struct CapacityError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Pauli string packed into single words (n <= 64).
struct PauliMask {
    uint64_t x = 0;
    uint64_t z = 0;
    bool sign = false;
    /// Number of Y factors; contributes i^ys to the operator.
    unsigned ys = 0;

    static PauliMask from(const PauliString &p);
    static PauliMask x_on(size_t q) {
        return {uint64_t{1} << q, 0, false, 0};
    }
    static PauliMask xx_on(size_t a, size_t b) {
        return {(uint64_t{1} << a) | (uint64_t{1} << b), 0, false, 0};
    }
    static PauliMask z_on(size_t q) {
        return {0, uint64_t{1} << q, false, 0};
    }
    /// P|b> = coeff(b) |b ^ x>.
    Complex coeff(uint64_t b) const;
};

/// Pure state on n qubits in the computational basis. Qubit q is bit q of
/// the basis index.
class DenseState {
   public:
    static constexpr size_t kDefaultMaxQubits = 20;

    explicit DenseState(size_t n, size_t max_qubits = kDefaultMaxQubits);
    static DenseState all_zero(size_t n);
    static DenseState all_plus(size_t n);
    static DenseState product_x(std::span<const int> signs);
    /// alpha |+...+> + beta |-...->, normalized.
    static DenseState cat(size_t n, Complex alpha, Complex beta);

    size_t num_qubits() const {
        return n_;
    }
    size_t dim() const {
        return amps_.size();
    }
    const std::vector<Complex> &amplitudes() const {
        return amps_;
    }
    std::vector<Complex> &amplitudes() {
        return amps_;
    }

    void apply(Gate g, std::span<const uint32_t> targets);
    void apply_1q(const Mat2 &m, size_t q);
    /// |psi> <- P |psi>.
    void apply_pauli(const PauliMask &p);
    /// exp(-i theta P / 2).
    void apply_pauli_rotation(const PauliMask &p, double theta);
    /// diag(1, 1, 1, e^{i theta}) on (a, b).
    void apply_cphase(size_t a, size_t b, double theta);

    void x(size_t q);
    void y(size_t q);
    void z(size_t q);
    /// e^{-i pi Z/2} = -i Z, global phase kept.
    void zpulse(size_t q);
    void h(size_t q);
    void s(size_t q);
    void s_dag(size_t q);
    void cx(size_t c, size_t t);
    void cz(size_t a, size_t b);
    /// e^{-i pi Z_a Z_b / 4}.
    void zz_half(size_t a, size_t b);
    /// prod_j e^{-i theta_j Z_j / 2}.
    void pulse_unitary(std::span<const double> thetas);

    double expect(const PauliMask &p) const;
    double expect_x(size_t q) const;
    /// N^{-1} sum_j <X_j>.
    double magnetization() const;
    /// Probability of outcome value (+1/-1) when measuring p.
    double probability(const PauliMask &p, int value) const;
    /// Projects onto the value eigenspace of p and renormalizes.
    void project(const PauliMask &p, int value);

    /// Born-rule measurement. Outcomes within 1e-12 of certain consume no
    /// draw; otherwise one draw u gives +1 iff u < P(+1).
    MeasurementOutcome measure(const PauliMask &p, Rng &rng);
    MeasurementOutcome measure_x(size_t q, Rng &rng) {
        return measure(PauliMask::x_on(q), rng);
    }
    MeasurementOutcome measure_xx(size_t a, size_t b, Rng &rng) {
        return measure(PauliMask::xx_on(a, b), rng);
    }
    MeasurementOutcome measure_z(size_t q, Rng &rng) {
        return measure(PauliMask::z_on(q), rng);
    }
    void reset_plus(size_t q, Rng &rng);
    void reset_zero(size_t q, Rng &rng);
    /// Same draw convention as StabilizerState::depolarize.
    void depolarize(size_t q, double p, Rng &rng);

    double norm() const;
    void normalize();
    Complex inner(const DenseState &other) const;
    /// |<this|other>|.
    double fidelity(const DenseState &other) const;

   private:
    size_t n_;
    std::vector<Complex> amps_;
};

/// Density matrix on n qubits, row-major, same basis as DenseState.
class DensityMatrix {
   public:
    static constexpr size_t kDefaultMaxQubits = 9;

    explicit DensityMatrix(size_t n, size_t max_qubits = kDefaultMaxQubits);
    static DensityMatrix from_pure(const DenseState &psi, size_t max_qubits = kDefaultMaxQubits);

    size_t num_qubits() const {
        return n_;
    }
    size_t dim() const {
        return d_;
    }
    Complex &at(size_t r, size_t c) {
        return rho_[r * d_ + c];
    }
    Complex at(size_t r, size_t c) const {
        return rho_[r * d_ + c];
    }
    const std::vector<Complex> &data() const {
        return rho_;
    }

    /// rho <- U rho U^dag for a listed gate.
    void apply(Gate g, std::span<const uint32_t> targets);
    void apply_1q(const Mat2 &m, size_t q);
    /// rho <- D rho D^dag for diagonal D.
    void apply_diagonal(std::span<const Complex> diag);
    /// rho <- P rho P.
    void conj_pauli(const PauliMask &p);
    /// rho <- (1 - p) rho + p P rho P.
    void mix_pauli(const PauliMask &p, double prob);
    /// rho <- Pi rho Pi with Pi = (1 + value P)/2, unnormalized.
    void project(const PauliMask &p, int value);
    /// Tr[(1 + value P)/2 rho].
    double probability(const PauliMask &p, int value) const;

    /// rho <- rho + w * other.
    void add_scaled(const DensityMatrix &other, double w);
    void scale(double w);

    double trace() const;
    double expect(const PauliMask &p) const;
    double expect_x(size_t q) const {
        return expect(PauliMask::x_on(q));
    }
    double magnetization() const;
    /// <psi|rho|psi>.
    double fidelity(const DenseState &psi) const;
    double max_abs_diff(const DensityMatrix &other) const;
    double hermiticity_error() const;

   private:
    size_t n_;
    size_t d_;
    std::vector<Complex> rho_;
};

/// Exact channel of one feedback site (NEC or majority rule, with record
/// errors and the p_nec selection coin), applied to rho.
void oracle_correct_site(DensityMatrix &rho, const Lattice &lattice, SiteId j, const ProtocolParams &params);
/// Exact pulse channel N_1.
void oracle_pulse(DensityMatrix &rho, const Lattice &lattice, const ProtocolParams &params);
/// Exact correction channel N_2 (sublattice A then B).
void oracle_correct(DensityMatrix &rho, const Lattice &lattice, const ProtocolParams &params);
/// One full period N_2 o N_1, every branch summed with its weight.
void oracle_apply_period(DensityMatrix &rho, const Lattice &lattice, const ProtocolParams &params);

/// Parameters of the disordered non-Clifford model.
struct NonCliffordParams {
    double h = 0.9 * 1.5707963267948966;
    double delta_h = 0.2;
    double J = 1.0;
    double delta_J = 0.2;
    double p_nec = 0.9;
    uint32_t steps = 100;
};

/// One disorder realization of the non-Clifford model. The XX couplings are
/// drawn once at construction (static); the Z fields are redrawn each step.
class NonCliffordModel {
   public:
    NonCliffordModel(const Lattice &lattice, const NonCliffordParams &params, Rng &rng);

    const std::vector<Bond> &bonds() const {
        return bonds_;
    }
    const std::vector<double> &couplings() const {
        return couplings_;
    }
    /// U^(Z)_t then U^(X) then the measurement-feedback layer. Returns the
    /// number of feedback pulses applied.
    uint32_t step(DenseState &psi, Rng &rng) const;
    /// M(t) for t = 0..steps from |+...+>.
    std::vector<double> run(Rng &rng) const;

   private:
    const Lattice *lattice_;
    NonCliffordParams params_;
    std::vector<Bond> bonds_;
    std::vector<double> couplings_;
};

enum class JumpVariant : uint8_t { CoherentNEC, IncoherentNEC, MajorityVote5 };

std::string_view to_string(JumpVariant v);
std::optional<JumpVariant> parse_jump_variant(std::string_view text);

struct JumpParams {
    double gamma = 1.0;
    double t_max = 10.0;
    JumpVariant variant = JumpVariant::CoherentNEC;
    /// Optional drive: a Z pulse of angle drive_theta on every qubit at
    /// times drive_period, 2 drive_period, ... (0 disables).
    double drive_period = 0.0;
    double drive_theta = 3.141592653589793;
    /// Sampling grid for the returned series.
    double sample_dt = 0.5;
    /// Fixed-step Bernoulli mode (dt > 0): each site fires with
    /// probability gamma * dt per step instead of Poisson waiting times.
    double bernoulli_dt = 0.0;
};

struct JumpSample {
    double t;
    double magnetization;
    /// <+...+|psi>, <-...-|psi>.
    Complex amp_plus;
    Complex amp_minus;
};

/// Applies one jump event at site j of the given variant.
void apply_jump_event(DenseState &psi, const Lattice &lattice, SiteId j, JumpVariant variant, Rng &rng);

/// Evolves psi until t_max, sampling on the sample_dt grid (t = 0 included).
std::vector<JumpSample> jump_trajectory(DenseState &psi, const Lattice &lattice, const JumpParams &params, Rng &rng);

struct CatCoherence {
    double diag_plus;
    double diag_minus;
    double offdiag;
};

CatCoherence cat_coherence(const DensityMatrix &rho);
CatCoherence cat_coherence(const DenseState &psi);
/// Trajectory average: diagonal weights averaged, off-diagonal amplitude
/// products averaged as complex numbers before taking the magnitude.
CatCoherence cat_coherence(std::span<const JumpSample> samples);

}  // namespace toomdtc

#endif
