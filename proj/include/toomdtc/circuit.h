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


#ifndef TOOMDTC_CIRCUIT_H
#define TOOMDTC_CIRCUIT_H

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "toomdtc/dense.h"
#include "toomdtc/lattice.h"

namespace toomdtc {

/// Gate-level opcodes. Angles are stored as multiples of pi.
/// RX/RZ: e^{-i theta P/2}. CR q a: e^{-i theta X_q Z_a / 2}.
/// CPHASE a b: e^{-i theta |11><11|}. PREP_PLUS prepares |+>, RESET |0>.
enum class Opcode : uint8_t { PrepPlus, Reset, H, X, Z, S, SDag, RX, RZ, CX, CZ, CR, CPhase, MX, MZ };

std::string_view to_string(Opcode op);
std::optional<Opcode> parse_opcode(std::string_view text);
size_t opcode_arity(Opcode op);
bool opcode_has_angle(Opcode op);
bool opcode_measures(Opcode op);

struct QubitRef {
    bool ancilla = false;
    uint32_t index = 0;
    bool operator==(const QubitRef &) const = default;
};

/// Record `record` equals `value` (+1 or -1).
struct Condition {
    uint32_t record = 0;
    int8_t value = 1;
    bool operator==(const Condition &) const = default;
};

struct Instruction {
    Opcode op = Opcode::H;
    std::vector<QubitRef> qubits;
    double angle_pi = 0;
    /// Record written by MX/MZ, -1 otherwise.
    int64_t record = -1;
    /// Conjunction; at most two terms.
    std::vector<Condition> conditions;
    bool operator==(const Instruction &) const = default;
};

class Circuit {
   public:
    Circuit() = default;
    Circuit(uint32_t num_system, uint32_t num_ancilla) : num_system_(num_system), num_ancilla_(num_ancilla) {
    }
    uint32_t num_system() const {
        return num_system_;
    }
    uint32_t num_ancilla() const {
        return num_ancilla_;
    }
    uint32_t num_records() const {
        return num_records_;
    }
    const std::vector<Instruction> &instructions() const {
        return instructions_;
    }
    /// Validates operands and conditions; measurements get the next record
    /// index, which is returned (-1 for other instructions).
    int64_t append(Opcode op, std::vector<QubitRef> qubits, double angle_pi = 0,
                   std::vector<Condition> conditions = {});
    size_t count(Opcode op) const;
    size_t count_conditional(Opcode op) const;
    bool operator==(const Circuit &) const = default;

   private:
    uint32_t num_system_ = 0;
    uint32_t num_ancilla_ = 0;
    uint32_t num_records_ = 0;
    std::vector<Instruction> instructions_;
};

inline QubitRef sys(uint32_t i) {
    return {false, i};
}
inline QubitRef anc(uint32_t i) {
    return {true, i};
}

/// First line of the text format.
inline constexpr std::string_view kCircuitHeader = "TOOMDTC-CIRCUIT v1";

/// Header, a `QUBITS <system> <ancilla>` line, then one instruction per line:
/// `CR q0 a2 0.5pi`, `MX a2 -> r7`, `Z q0 IF r7==1 AND r8==1`.
std::string emit_text(const Circuit &c);
/// Inverse of emit_text. Throws std::invalid_argument with the line number.
Circuit parse_circuit(std::string_view text);

/// System qubits and the ancillas they couple to.
class HardwareLayout {
   public:
    HardwareLayout(uint32_t num_system, uint32_t num_ancilla, std::vector<std::pair<uint32_t, uint32_t>> couplings);
    /// The ancilla-mediated layout of a square or annular lattice. Square
    /// lattices place system and ancilla qubits on the two sublattices of a
    /// rotated grid; annular ones use the third colour of a triangular grid.
    static HardwareLayout for_lattice(const Lattice &lattice);

    uint32_t num_system() const {
        return num_system_;
    }
    uint32_t num_ancilla() const {
        return num_ancilla_;
    }
    /// (system, ancilla) pairs.
    const std::vector<std::pair<uint32_t, uint32_t>> &couplings() const {
        return couplings_;
    }
    /// Ancillas coupled to both j and k, ascending.
    std::vector<uint32_t> shared_ancillas(uint32_t j, uint32_t k) const;
    bool measurable(uint32_t j, uint32_t k) const {
        return !shared_ancillas(j, k).empty();
    }
    /// Lattice the layout was built for (kind and dims), if any.
    std::optional<std::pair<LatticeKind, std::pair<uint32_t, uint32_t>>> source() const {
        return source_;
    }

   private:
    uint32_t num_system_;
    uint32_t num_ancilla_;
    std::vector<std::pair<uint32_t, uint32_t>> couplings_;
    std::vector<std::vector<uint32_t>> by_system_;
    std::optional<std::pair<LatticeKind, std::pair<uint32_t, uint32_t>>> source_;
};

enum class GateSet : uint8_t { CrossResonance, CPhase };
enum class RoundVariant : uint8_t { MeasureAndFeedback, ToffoliReset };

std::string_view to_string(GateSet g);
std::optional<GateSet> parse_gateset(std::string_view text);
std::string_view to_string(RoundVariant v);
std::optional<RoundVariant> parse_round_variant(std::string_view text);

struct GadgetOptions {
    GateSet gateset = GateSet::CrossResonance;
    /// Undo the e^{-i pi X_j/2} left on the no-wall branch of the CR gadget.
    bool correct_byproduct = true;
};

struct DwMeasurement {
    uint32_t record;
    uint32_t ancilla;
};

/// Appends a measurement of W = X_j X_k through the lowest shared ancilla
/// (or `ancilla` when given). Outcome +1 marks a domain wall (W = -1),
/// outcome -1 marks none, for both gate sets.
DwMeasurement compile_dw_measurement(Circuit &c, const HardwareLayout &layout, uint32_t j, uint32_t k,
                                     const GadgetOptions &options = {},
                                     std::optional<uint32_t> ancilla = std::nullopt);

/// One full NEC correction round with every site selected: sublattice A,
/// then B. Sites without both North and East neighbours are skipped.
Circuit compile_nec_round(const HardwareLayout &layout, const Lattice &lattice, RoundVariant variant,
                          const GadgetOptions &options = {});

/// Appends a three-qubit CZ built from CX and RZ gates.
void append_ccz(Circuit &c, QubitRef a, QubitRef b, QubitRef t);

/// One measurement branch of a simulated circuit. The state is left
/// unnormalized; `weight` is its squared norm.
struct CircuitBranch {
    double weight = 0;
    DenseState state{1};
    std::vector<int8_t> records;
};

/// Register index of a qubit: system i -> i, ancilla k -> num_system + k.
inline size_t register_index(const Circuit &c, QubitRef q) {
    return q.ancilla ? c.num_system() + q.index : q.index;
}

/// Runs the circuit on every measurement and reset branch. Branches with
/// weight below `prune` are dropped.
std::vector<CircuitBranch> simulate_branches(const Circuit &c, const DenseState &initial, double prune = 1e-14);

/// System state with ancillas appended in |0>.
DenseState embed_system(const DenseState &system, uint32_t num_ancilla);

/// Sum over branches of the system reduced density matrix.
DensityMatrix reduced_system_state(const std::vector<CircuitBranch> &branches, uint32_t num_system);

}  // namespace toomdtc

#endif
