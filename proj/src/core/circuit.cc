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


#include "toomdtc/circuit.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "toomdtc/format.h"

namespace toomdtc {

namespace {

struct OpInfo {
    Opcode op;
    std::string_view name;
    size_t arity;
    bool angle;
};

constexpr OpInfo kOps[] = {
    {Opcode::PrepPlus, "PREP_PLUS", 1, false}, {Opcode::Reset, "RESET", 1, false}, {Opcode::H, "H", 1, false},
    {Opcode::X, "X", 1, false},       {Opcode::Z, "Z", 1, false},         {Opcode::S, "S", 1, false},
    {Opcode::SDag, "S_DAG", 1, false}, {Opcode::RX, "RX", 1, true},        {Opcode::RZ, "RZ", 1, true},
    {Opcode::CX, "CX", 2, false},      {Opcode::CZ, "CZ", 2, false},       {Opcode::CR, "CR", 2, true},
    {Opcode::CPhase, "CPHASE", 2, true}, {Opcode::MX, "MX", 1, false},     {Opcode::MZ, "MZ", 1, false},
};

const OpInfo &info(Opcode op) {
    for (const auto &i : kOps) {
        if (i.op == op) {
            return i;
        }
    }
    throw std::logic_error("unknown opcode");
}

std::string qubit_text(QubitRef q) {
    return (q.ancilla ? "a" : "q") + std::to_string(q.index);
}

std::string angle_text(double a) {
    if (a == 1) {
        return "pi";
    }
    if (a == -1) {
        return "-pi";
    }
    return format_double(a) + "pi";
}

template <typename T>
bool parse_number(std::string_view s, T &out) {
    if (s.empty()) {
        return false;
    }
    auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

}  // namespace

std::string_view to_string(Opcode op) {
    return info(op).name;
}

std::optional<Opcode> parse_opcode(std::string_view text) {
    for (const auto &i : kOps) {
        if (i.name == text) {
            return i.op;
        }
    }
    return std::nullopt;
}

size_t opcode_arity(Opcode op) {
    return info(op).arity;
}

bool opcode_has_angle(Opcode op) {
    return info(op).angle;
}

bool opcode_measures(Opcode op) {
    return op == Opcode::MX || op == Opcode::MZ;
}

int64_t Circuit::append(Opcode op, std::vector<QubitRef> qubits, double angle_pi, std::vector<Condition> conditions) {
    if (qubits.size() != opcode_arity(op)) {
        throw std::invalid_argument(std::string(to_string(op)) + " takes " + std::to_string(opcode_arity(op)) +
                                    " qubit(s)");
    }
    for (auto q : qubits) {
        if (q.index >= (q.ancilla ? num_ancilla_ : num_system_)) {
            throw std::out_of_range("operand " + qubit_text(q) + " outside the declared qubits");
        }
    }
    if (qubits.size() == 2 && qubits[0] == qubits[1]) {
        throw std::invalid_argument("two-qubit gate on a single qubit");
    }
    if (!opcode_has_angle(op) && angle_pi != 0) {
        throw std::invalid_argument(std::string(to_string(op)) + " takes no angle");
    }
    if (!std::isfinite(angle_pi)) {
        throw std::invalid_argument("angle must be finite");
    }
    if (conditions.size() > 2) {
        throw std::invalid_argument("at most two condition terms are supported");
    }
    for (const auto &cond : conditions) {
        if (cond.record >= num_records_) {
            throw std::invalid_argument("condition references record r" + std::to_string(cond.record) +
                                        " before it is written");
        }
        if (cond.value != 1 && cond.value != -1) {
            throw std::invalid_argument("condition value must be +1 or -1");
        }
    }
    Instruction ins;
    ins.op = op;
    ins.qubits = std::move(qubits);
    ins.angle_pi = angle_pi;
    ins.conditions = std::move(conditions);
    if (opcode_measures(op)) {
        ins.record = num_records_++;
    }
    instructions_.push_back(std::move(ins));
    return instructions_.back().record;
}

size_t Circuit::count(Opcode op) const {
    return std::count_if(instructions_.begin(), instructions_.end(), [&](const Instruction &i) { return i.op == op; });
}

size_t Circuit::count_conditional(Opcode op) const {
    return std::count_if(instructions_.begin(), instructions_.end(),
                         [&](const Instruction &i) { return i.op == op && !i.conditions.empty(); });
}

std::string emit_text(const Circuit &c) {
    std::ostringstream out;
    out << kCircuitHeader << "\n";
    out << "QUBITS " << c.num_system() << " " << c.num_ancilla() << "\n";
    for (const auto &ins : c.instructions()) {
        out << to_string(ins.op);
        for (auto q : ins.qubits) {
            out << ' ' << qubit_text(q);
        }
        if (opcode_has_angle(ins.op)) {
            out << ' ' << angle_text(ins.angle_pi);
        }
        if (ins.record >= 0) {
            out << " -> r" << ins.record;
        }
        for (size_t k = 0; k < ins.conditions.size(); k++) {
            out << (k == 0 ? " IF r" : " AND r") << ins.conditions[k].record
                << "==" << static_cast<int>(ins.conditions[k].value);
        }
        out << "\n";
    }
    return out.str();
}

Circuit parse_circuit(std::string_view text) {
    std::vector<std::string> lines;
    {
        std::string cur;
        for (char ch : text) {
            if (ch == '\n') {
                lines.push_back(cur);
                cur.clear();
            } else if (ch != '\r') {
                cur.push_back(ch);
            }
        }
        if (!cur.empty()) {
            lines.push_back(cur);
        }
    }
    auto fail = [](size_t line, const std::string &msg) -> std::invalid_argument {
        return std::invalid_argument("circuit line " + std::to_string(line + 1) + ": " + msg);
    };
    auto tokens_of = [](const std::string &line) {
        std::vector<std::string> toks;
        std::istringstream in(line);
        std::string t;
        while (in >> t) {
            toks.push_back(t);
        }
        return toks;
    };
    size_t i = 0;
    while (i < lines.size() && tokens_of(lines[i]).empty()) {
        i++;
    }
    if (i >= lines.size() || lines[i] != kCircuitHeader) {
        throw fail(i, "expected header '" + std::string(kCircuitHeader) + "'");
    }
    i++;
    while (i < lines.size() && tokens_of(lines[i]).empty()) {
        i++;
    }
    auto decl = i < lines.size() ? tokens_of(lines[i]) : std::vector<std::string>{};
    uint32_t ns = 0, na = 0;
    if (decl.size() != 3 || decl[0] != "QUBITS" || !parse_number(decl[1], ns) || !parse_number(decl[2], na)) {
        throw fail(i, "expected 'QUBITS <system> <ancilla>'");
    }
    Circuit c(ns, na);
    for (i++; i < lines.size(); i++) {
        auto toks = tokens_of(lines[i]);
        if (toks.empty() || toks[0][0] == '#') {
            continue;
        }
        auto op = parse_opcode(toks[0]);
        if (!op) {
            throw fail(i, "unknown opcode '" + toks[0] + "'");
        }
        size_t pos = 1;
        std::vector<QubitRef> qubits;
        for (size_t k = 0; k < opcode_arity(*op); k++, pos++) {
            if (pos >= toks.size() || toks[pos].size() < 2 || (toks[pos][0] != 'q' && toks[pos][0] != 'a')) {
                throw fail(i, "expected a qubit operand (qN or aN)");
            }
            QubitRef q{toks[pos][0] == 'a', 0};
            if (!parse_number(std::string_view(toks[pos]).substr(1), q.index)) {
                throw fail(i, "bad qubit operand '" + toks[pos] + "'");
            }
            qubits.push_back(q);
        }
        double angle = 0;
        if (opcode_has_angle(*op)) {
            if (pos >= toks.size()) {
                throw fail(i, "missing angle");
            }
            std::string_view a = toks[pos++];
            if (a.size() < 2 || a.substr(a.size() - 2) != "pi") {
                throw fail(i, "angle must be written as a multiple of pi");
            }
            a.remove_suffix(2);
            if (a.empty()) {
                angle = 1;
            } else if (a == "-") {
                angle = -1;
            } else if (!parse_number(a, angle)) {
                throw fail(i, "bad angle");
            }
        }
        if (opcode_measures(*op)) {
            uint32_t r = 0;
            if (pos + 1 >= toks.size() || toks[pos] != "->" || toks[pos + 1][0] != 'r' ||
                !parse_number(std::string_view(toks[pos + 1]).substr(1), r)) {
                throw fail(i, "measurement needs '-> rN'");
            }
            if (r != c.num_records()) {
                throw fail(i, "records must be numbered in order; expected r" + std::to_string(c.num_records()));
            }
            pos += 2;
        }
        std::vector<Condition> conds;
        while (pos < toks.size()) {
            std::string_view kw = toks[pos];
            if (kw != (conds.empty() ? "IF" : "AND") || pos + 1 >= toks.size()) {
                throw fail(i, "unexpected token '" + toks[pos] + "'");
            }
            std::string_view term = toks[pos + 1];
            auto eq = term.find("==");
            Condition cond;
            int value = 0;
            if (term.empty() || term[0] != 'r' || eq == std::string_view::npos ||
                !parse_number(term.substr(1, eq - 1), cond.record)) {
                throw fail(i, "bad condition '" + std::string(term) + "'");
            }
            auto vs = term.substr(eq + 2);
            if (!vs.empty() && vs[0] == '+') {
                vs.remove_prefix(1);
            }
            if (!parse_number(vs, value) || (value != 1 && value != -1)) {
                throw fail(i, "condition value must be 1 or -1");
            }
            cond.value = static_cast<int8_t>(value);
            conds.push_back(cond);
            pos += 2;
        }
        try {
            c.append(*op, std::move(qubits), angle, std::move(conds));
        } catch (const std::exception &e) {
            throw fail(i, e.what());
        }
    }
    return c;
}

HardwareLayout::HardwareLayout(uint32_t num_system, uint32_t num_ancilla,
                               std::vector<std::pair<uint32_t, uint32_t>> couplings)
    : num_system_(num_system), num_ancilla_(num_ancilla), couplings_(std::move(couplings)) {
    by_system_.assign(num_system, {});
    for (auto [s, a] : couplings_) {
        if (s >= num_system || a >= num_ancilla) {
            throw std::out_of_range("coupling outside the declared qubits");
        }
        by_system_[s].push_back(a);
    }
    for (auto &v : by_system_) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
    }
}

std::vector<uint32_t> HardwareLayout::shared_ancillas(uint32_t j, uint32_t k) const {
    if (j >= num_system_ || k >= num_system_) {
        throw std::out_of_range("system qubit outside the layout");
    }
    std::vector<uint32_t> out;
    std::set_intersection(by_system_[j].begin(), by_system_[j].end(), by_system_[k].begin(), by_system_[k].end(),
                          std::back_inserter(out));
    return out;
}

HardwareLayout HardwareLayout::for_lattice(const Lattice &lattice) {
    auto [d0, d1] = lattice.dims();
    // Ancilla key -> coupled system sites; keys order the ancilla ids.
    std::map<std::pair<int64_t, int64_t>, std::vector<uint32_t>> anc;
    if (lattice.kind() == LatticeKind::AnnularTriangular) {
        int64_t rings = d0, len = d1;
        std::map<std::pair<int64_t, int64_t>, uint32_t> site_at;
        for (SiteId j = 0; j < lattice.num_sites(); j++) {
            auto p = lattice.annular_position(j);
            site_at[{p.ring, p.position}] = j;
        }
        const int64_t nb[6][2] = {{0, 1}, {0, -1}, {1, 0}, {-1, 0}, {1, -1}, {-1, 1}};
        for (int64_t a = 0; a < rings; a++) {
            for (int64_t b = 0; b < len; b++) {
                if ((a + 2 * b) % 3 != 0) {
                    continue;
                }
                std::vector<uint32_t> coupled;
                for (const auto &d : nb) {
                    int64_t ra = a + d[0];
                    int64_t rb = ((b + d[1]) % len + len) % len;
                    if (ra < 0 || ra >= rings) {
                        continue;
                    }
                    auto it = site_at.find({ra, rb});
                    if (it != site_at.end()) {
                        coupled.push_back(it->second);
                    }
                }
                anc[{a, b}] = coupled;
            }
        }
    } else {
        // System (r, c) sits at grid point (r + c, c - r); the ancilla keyed by
        // (r, c) sits one step along the first grid axis and couples to
        // (r, c), its North, East and North-East neighbours.
        bool periodic = lattice.kind() == LatticeKind::SquarePeriodic;
        int64_t rows = d0, cols = d1;
        int64_t lo = periodic ? 0 : -1;
        for (int64_t r = lo; r < rows; r++) {
            for (int64_t c = lo; c < cols; c++) {
                std::vector<uint32_t> coupled;
                for (auto [dr, dc] : {std::pair{0, 0}, {1, 0}, {0, 1}, {1, 1}}) {
                    int64_t rr = r + dr, cc = c + dc;
                    if (periodic) {
                        rr %= rows;
                        cc %= cols;
                    } else if (rr < 0 || cc < 0 || rr >= rows || cc >= cols) {
                        continue;
                    }
                    coupled.push_back(lattice.site_at(static_cast<uint32_t>(rr), static_cast<uint32_t>(cc)));
                }
                anc[{r, c}] = coupled;
            }
        }
    }
    std::vector<std::pair<uint32_t, uint32_t>> couplings;
    uint32_t id = 0;
    for (const auto &[key, sites] : anc) {
        if (sites.size() < 2) {
            continue;
        }
        for (uint32_t s : sites) {
            couplings.push_back({s, id});
        }
        id++;
    }
    HardwareLayout layout(lattice.num_sites(), id, std::move(couplings));
    layout.source_ = std::pair{lattice.kind(), lattice.dims()};
    for (const auto &b : lattice.bonds()) {
        if (!layout.measurable(b.owner, b.other)) {
            throw std::logic_error("layout leaves bond " + std::to_string(b.owner) + "-" + std::to_string(b.other) +
                                   " without a shared ancilla");
        }
    }
    return layout;
}

std::string_view to_string(GateSet g) {
    return g == GateSet::CrossResonance ? "cross_resonance" : "cphase";
}

std::optional<GateSet> parse_gateset(std::string_view text) {
    if (text == "cross_resonance" || text == "cr" || text == "CrossResonance") {
        return GateSet::CrossResonance;
    }
    if (text == "cphase" || text == "CPhase") {
        return GateSet::CPhase;
    }
    return std::nullopt;
}

std::string_view to_string(RoundVariant v) {
    return v == RoundVariant::MeasureAndFeedback ? "measure_and_feedback" : "toffoli_reset";
}

std::optional<RoundVariant> parse_round_variant(std::string_view text) {
    if (text == "measure_and_feedback" || text == "MeasureAndFeedback") {
        return RoundVariant::MeasureAndFeedback;
    }
    if (text == "toffoli_reset" || text == "ToffoliReset") {
        return RoundVariant::ToffoliReset;
    }
    return std::nullopt;
}

namespace {

void check_layout(const Circuit &c, const HardwareLayout &layout) {
    if (c.num_system() != layout.num_system() || c.num_ancilla() != layout.num_ancilla()) {
        throw std::invalid_argument("circuit register does not match the layout");
    }
}

uint32_t pick_ancilla(const HardwareLayout &layout, uint32_t j, uint32_t k, std::optional<uint32_t> requested,
                      std::optional<uint32_t> avoid = std::nullopt) {
    auto shared = layout.shared_ancillas(j, k);
    if (shared.empty()) {
        throw std::invalid_argument("bond " + std::to_string(j) + "-" + std::to_string(k) +
                                    " is not measurable in the layout");
    }
    if (requested) {
        if (!std::binary_search(shared.begin(), shared.end(), *requested)) {
            throw std::invalid_argument("ancilla a" + std::to_string(*requested) + " is not shared by bond " +
                                        std::to_string(j) + "-" + std::to_string(k));
        }
        return *requested;
    }
    for (uint32_t a : shared) {
        if (!avoid || a != *avoid) {
            return a;
        }
    }
    throw std::invalid_argument("bond " + std::to_string(j) + "-" + std::to_string(k) +
                                " has no second ancilla for the Toffoli variant");
}

/// Prepares the ancilla and entangles it with the bond; afterwards ancilla
/// |+> marks a wall and |-> marks none.
void append_dw_coupling(Circuit &c, uint32_t j, uint32_t k, uint32_t a, GateSet gateset) {
    c.append(Opcode::PrepPlus, {anc(a)});
    if (gateset == GateSet::CrossResonance) {
        c.append(Opcode::CR, {sys(j), anc(a)}, 0.5);
        c.append(Opcode::CR, {sys(k), anc(a)}, 0.5);
        return;
    }
    // Starting from |-> matches the CR outcome convention.
    c.append(Opcode::Z, {anc(a)});
    c.append(Opcode::H, {sys(j)});
    c.append(Opcode::H, {sys(k)});
    c.append(Opcode::CPhase, {sys(j), anc(a)}, 1.0);
    c.append(Opcode::CPhase, {sys(k), anc(a)}, 1.0);
    c.append(Opcode::H, {sys(j)});
    c.append(Opcode::H, {sys(k)});
}

}  // namespace

DwMeasurement compile_dw_measurement(Circuit &c, const HardwareLayout &layout, uint32_t j, uint32_t k,
                                     const GadgetOptions &options, std::optional<uint32_t> ancilla) {
    check_layout(c, layout);
    uint32_t a = pick_ancilla(layout, j, k, ancilla);
    append_dw_coupling(c, j, k, a, options.gateset);
    auto r = static_cast<uint32_t>(c.append(Opcode::MX, {anc(a)}));
    if (options.gateset == GateSet::CrossResonance && options.correct_byproduct) {
        c.append(Opcode::RX, {sys(j)}, -1.0, {{r, -1}});
    }
    return {r, a};
}

void append_ccz(Circuit &c, QubitRef a, QubitRef b, QubitRef t) {
    c.append(Opcode::CX, {b, t});
    c.append(Opcode::RZ, {t}, -0.25);
    c.append(Opcode::CX, {a, t});
    c.append(Opcode::RZ, {t}, 0.25);
    c.append(Opcode::CX, {b, t});
    c.append(Opcode::RZ, {t}, -0.25);
    c.append(Opcode::CX, {a, t});
    c.append(Opcode::RZ, {b}, 0.25);
    c.append(Opcode::RZ, {t}, 0.25);
    c.append(Opcode::CX, {a, b});
    c.append(Opcode::RZ, {a}, 0.25);
    c.append(Opcode::RZ, {b}, -0.25);
    c.append(Opcode::CX, {a, b});
}

Circuit compile_nec_round(const HardwareLayout &layout, const Lattice &lattice, RoundVariant variant,
                          const GadgetOptions &options) {
    auto src = layout.source();
    if (layout.num_system() != lattice.num_sites() ||
        (src && (src->first != lattice.kind() || src->second != lattice.dims()))) {
        throw std::invalid_argument("layout does not match the lattice");
    }
    Circuit c(layout.num_system(), layout.num_ancilla());
    for (Sublattice s : {Sublattice::A, Sublattice::B}) {
        for (SiteId j : lattice.sites_in(s)) {
            auto targets = lattice.nec_targets(j);
            if (!targets) {
                continue;
            }
            uint32_t n = targets->first.other;
            uint32_t e = targets->second.other;
            if (variant == RoundVariant::MeasureAndFeedback) {
                auto rn = compile_dw_measurement(c, layout, j, n, options);
                auto re = compile_dw_measurement(c, layout, j, e, options);
                c.append(Opcode::Z, {sys(j)}, 0, {{rn.record, 1}, {re.record, 1}});
                continue;
            }
            uint32_t an = pick_ancilla(layout, j, n, std::nullopt);
            uint32_t ae = pick_ancilla(layout, j, e, std::nullopt, an);
            append_dw_coupling(c, j, n, an, options.gateset);
            append_dw_coupling(c, j, e, ae, options.gateset);
            // Wall -> |0>, no wall -> |1>.
            c.append(Opcode::H, {anc(an)});
            c.append(Opcode::H, {anc(ae)});
            if (options.gateset == GateSet::CrossResonance && options.correct_byproduct) {
                // Controlled i X_j undoes the no-wall byproduct.
                for (uint32_t a : {an, ae}) {
                    c.append(Opcode::CX, {anc(a), sys(j)});
                    c.append(Opcode::S, {anc(a)});
                }
            }
            c.append(Opcode::X, {anc(an)});
            c.append(Opcode::X, {anc(ae)});
            append_ccz(c, anc(an), anc(ae), sys(j));
            c.append(Opcode::X, {anc(an)});
            c.append(Opcode::X, {anc(ae)});
            c.append(Opcode::Reset, {anc(an)});
            c.append(Opcode::Reset, {anc(ae)});
        }
    }
    return c;
}

namespace {

/// (1 + value P)/2 applied without renormalizing, P = X or Z on qubit q.
void project_unnormalized(DenseState &psi, size_t q, bool x_basis, int value) {
    auto &amps = psi.amplitudes();
    size_t m = size_t{1} << q;
    if (!x_basis) {
        for (size_t k = 0; k < amps.size(); k++) {
            bool one = k & m;
            if (one == (value == 1)) {
                amps[k] = 0;
            }
        }
        return;
    }
    for (size_t k = 0; k < amps.size(); k++) {
        if (k & m) {
            continue;
        }
        Complex a0 = amps[k], a1 = amps[k | m];
        Complex s = value == 1 ? (a0 + a1) / 2.0 : (a0 - a1) / 2.0;
        amps[k] = s;
        amps[k | m] = value == 1 ? s : -s;
    }
}

double squared_norm(const DenseState &psi) {
    double s = 0;
    for (auto a : psi.amplitudes()) {
        s += std::norm(a);
    }
    return s;
}

void apply_unitary(DenseState &psi, const Instruction &ins, const Circuit &c) {
    size_t q0 = register_index(c, ins.qubits[0]);
    double theta = ins.angle_pi * std::numbers::pi;
    switch (ins.op) {
        case Opcode::H:
            psi.h(q0);
            break;
        case Opcode::X:
            psi.x(q0);
            break;
        case Opcode::Z:
            psi.z(q0);
            break;
        case Opcode::S:
            psi.s(q0);
            break;
        case Opcode::SDag:
            psi.s_dag(q0);
            break;
        case Opcode::RX:
            psi.apply_pauli_rotation(PauliMask::x_on(q0), theta);
            break;
        case Opcode::RZ:
            psi.apply_pauli_rotation(PauliMask::z_on(q0), theta);
            break;
        case Opcode::CX:
            psi.cx(q0, register_index(c, ins.qubits[1]));
            break;
        case Opcode::CZ:
            psi.cz(q0, register_index(c, ins.qubits[1]));
            break;
        case Opcode::CR: {
            size_t q1 = register_index(c, ins.qubits[1]);
            psi.apply_pauli_rotation(PauliMask{uint64_t{1} << q0, uint64_t{1} << q1, false, 0}, theta);
            break;
        }
        case Opcode::CPhase:
            // The engine's cphase is diag(1, 1, 1, e^{i theta}).
            psi.apply_cphase(q0, register_index(c, ins.qubits[1]), -theta);
            break;
        default:
            throw std::logic_error("not a unitary opcode");
    }
}

}  // namespace

DenseState embed_system(const DenseState &system, uint32_t num_ancilla) {
    DenseState out(system.num_qubits() + num_ancilla);
    auto &amps = out.amplitudes();
    std::fill(amps.begin(), amps.end(), Complex(0));
    std::copy(system.amplitudes().begin(), system.amplitudes().end(), amps.begin());
    return out;
}

std::vector<CircuitBranch> simulate_branches(const Circuit &c, const DenseState &initial, double prune) {
    if (initial.num_qubits() != size_t{c.num_system()} + c.num_ancilla()) {
        throw std::invalid_argument("initial state size does not match the circuit register");
    }
    std::vector<CircuitBranch> branches(1);
    branches[0].state = initial;
    branches[0].weight = squared_norm(initial);
    for (const auto &ins : c.instructions()) {
        std::vector<CircuitBranch> next;
        next.reserve(branches.size());
        for (auto &br : branches) {
            bool active = std::all_of(ins.conditions.begin(), ins.conditions.end(),
                                      [&](const Condition &k) { return br.records[k.record] == k.value; });
            if (!active) {
                next.push_back(std::move(br));
                continue;
            }
            bool measures = opcode_measures(ins.op);
            bool resets = ins.op == Opcode::PrepPlus || ins.op == Opcode::Reset;
            if (!measures && !resets) {
                apply_unitary(br.state, ins, c);
                next.push_back(std::move(br));
                continue;
            }
            size_t q = register_index(c, ins.qubits[0]);
            bool x_basis = ins.op == Opcode::MX || ins.op == Opcode::PrepPlus;
            for (int value : {1, -1}) {
                CircuitBranch child;
                child.state = br.state;
                project_unnormalized(child.state, q, x_basis, value);
                child.weight = squared_norm(child.state);
                if (child.weight < prune) {
                    continue;
                }
                child.records = br.records;
                if (measures) {
                    child.records.push_back(static_cast<int8_t>(value));
                } else if (value == -1) {
                    // Rotate the -1 eigenstate onto |+> or |0>.
                    if (x_basis) {
                        child.state.z(q);
                    } else {
                        child.state.x(q);
                    }
                }
                next.push_back(std::move(child));
            }
        }
        branches = std::move(next);
    }
    return branches;
}

DensityMatrix reduced_system_state(const std::vector<CircuitBranch> &branches, uint32_t num_system) {
    DensityMatrix rho(num_system);
    size_t d = size_t{1} << num_system;
    for (size_t r = 0; r < d; r++) {
        for (size_t col = 0; col < d; col++) {
            rho.at(r, col) = 0;
        }
    }
    for (const auto &br : branches) {
        const auto &amps = br.state.amplitudes();
        size_t blocks = amps.size() / d;
        for (size_t b = 0; b < blocks; b++) {
            const Complex *v = amps.data() + b * d;
            for (size_t r = 0; r < d; r++) {
                if (v[r] == Complex(0)) {
                    continue;
                }
                for (size_t col = 0; col < d; col++) {
                    rho.at(r, col) += v[r] * std::conj(v[col]);
                }
            }
        }
    }
    return rho;
}

}  // namespace toomdtc
