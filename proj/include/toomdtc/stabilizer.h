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

#ifndef TOOMDTC_STABILIZER_H
#define TOOMDTC_STABILIZER_H

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "toomdtc/pauli.h"
#include "toomdtc/rng.h"

namespace toomdtc {

enum class Gate : uint8_t { X, Y, Z, H, S, S_DAG, CX, CZ, ZPULSE, ZZHALF };

std::string_view to_string(Gate g);
std::optional<Gate> parse_gate(std::string_view name);
/// Number of qubit targets the gate takes (1 or 2).
size_t gate_arity(Gate g);

struct MeasurementOutcome {
    int value;  // +1 or -1
    bool deterministic;
};

/// Stabilizer state of n qubits.
///
/// Stored as the inverse of the Clifford C that prepares the state from
/// |0...0>: row q holds C^dag X_q C and row n + q holds C^dag Z_q C. In this
/// form the expectation of a Pauli P is read off its image C^dag P C, which
/// is cheap for the few-qubit observables the protocol measures. Gates are
/// folded in on the output side, collapse operations on the input side.
class StabilizerState {
   public:
    /// |0...0>.
    explicit StabilizerState(size_t n);
    static StabilizerState all_zero(size_t n);
    static StabilizerState all_plus(size_t n);
    /// Product state stabilized by {s_j X_j}; signs are +1 or -1.
    static StabilizerState product_x(std::span<const int> signs);

    size_t num_qubits() const {
        return n_;
    }

    /// Validated entry point; throws on bad arity, range or repeated targets.
    void apply(Gate g, std::span<const uint32_t> targets);

    void x(size_t q);
    void y(size_t q);
    void z(size_t q);
    /// e^{-i pi Z/2}; identical to z() since the global phase is dropped.
    void zpulse(size_t q) {
        z(q);
    }
    void h(size_t q);
    void s(size_t q);
    void s_dag(size_t q);
    void cx(size_t c, size_t t);
    void cz(size_t a, size_t b);
    /// e^{-i pi Z_a Z_b / 4}.
    void zz_half(size_t a, size_t b);

    /// Projective measurement of a Hermitian Pauli product. One rng draw is
    /// consumed iff the outcome is random.
    MeasurementOutcome measure(const PauliString &p, Rng &rng);
    MeasurementOutcome measure_x(size_t q, Rng &rng);
    MeasurementOutcome measure_xx(size_t a, size_t b, Rng &rng);

    /// Measure X_q and apply Z on a -1 outcome.
    void reset_plus(size_t q, Rng &rng);
    /// With probability p one of X, Y, Z uniformly. Exactly one draw.
    void depolarize(size_t q, double p, Rng &rng);

    /// +1 / -1 if +-X_q is a stabilizer, else 0. No randomness, no mutation.
    int expect_x(size_t q) const;
    /// Sum of expect_x over every qubit.
    int64_t sum_expect_x() const;
    /// Deterministic value of p if it has one.
    std::optional<int> peek(const PauliString &p) const;
    /// C^dag P C.
    PauliString image(const PauliString &p) const;

    /// Generators C Z_k C^dag. With canonical set, the generator list is
    /// brought to a reduced row-echelon form that depends only on the state.
    std::vector<PauliString> stabilizers(bool canonical = false) const;
    /// Generators C X_k C^dag.
    std::vector<PauliString> destabilizers() const;
    /// One generator per line, e.g. `+XXI`.
    std::string dump(bool canonical = true) const;

    /// Empty if the tableau satisfies the Pauli commutation structure,
    /// otherwise a description of the first violation.
    std::string audit() const;

    /// Tableau-level equality (same Clifford, same signs).
    bool operator==(const StabilizerState &other) const;
    bool operator!=(const StabilizerState &other) const {
        return !(*this == other);
    }

   private:
    uint64_t *xrow(size_t r) {
        return &x_[r * w_];
    }
    uint64_t *zrow(size_t r) {
        return &z_[r * w_];
    }
    const uint64_t *xrow(size_t r) const {
        return &x_[r * w_];
    }
    const uint64_t *zrow(size_t r) const {
        return &z_[r * w_];
    }
    PauliString row(size_t r) const;
    bool row_has_x(size_t r) const;
    /// Row r <- row r * row s; returns total log_i including both signs.
    uint8_t mul_row(size_t r, size_t s);
    void set_row_sign_from_log_i(size_t r, uint8_t log_i);
    void swap_rows(size_t r, size_t s);
    void multiply_into(PauliString &acc, uint8_t &log_i, size_t r) const;

    // Input-side operations used by collapse; applied to every row and to
    // the tracked observable image.
    /// CX from c onto every qubit in `targets` (c excluded), word-parallel.
    void in_cx_fanout(size_t c, const std::vector<uint64_t> &targets, PauliString &q);
    void in_h(size_t p, PauliString &q);
    void in_h_yz(size_t p, PauliString &q);
    void in_x(size_t p, PauliString &q);
    MeasurementOutcome collapse(PauliString q, Rng &rng);

    size_t n_;
    size_t w_;
    std::vector<uint64_t> x_;
    std::vector<uint64_t> z_;
    std::vector<uint8_t> sign_;
};

}  // namespace toomdtc

#endif
