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


#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "doctest.h"
#include "toomdtc/circuit.h"
#include "toomdtc/dense.h"
#include "toomdtc/lattice.h"
#include "toomdtc/protocol.h"

using namespace toomdtc;

namespace {

DenseState random_state(size_t n, std::mt19937_64 &rng) {
    std::normal_distribution<double> g;
    DenseState s(n);
    double norm = 0;
    for (auto &a : s.amplitudes()) {
        a = Complex(g(rng), g(rng));
        norm += std::norm(a);
    }
    for (auto &a : s.amplitudes()) {
        a /= std::sqrt(norm);
    }
    return s;
}

// (1 + w X_0 X_1)/2 on the first two qubits, written out directly.
DenseState bond_projection(const DenseState &psi, int w) {
    DenseState out = psi;
    auto &o = out.amplitudes();
    const auto &in = psi.amplitudes();
    for (size_t k = 0; k < in.size(); k++) {
        o[k] = (in[k] + static_cast<double>(w) * in[k ^ 3]) / 2.0;
    }
    return out;
}

// psi (x) |s>_b with the ancilla as the top qubit.
DenseState with_ancilla(const DenseState &psi, int sign) {
    DenseState out(psi.num_qubits() + 1);
    auto &o = out.amplitudes();
    size_t d = psi.dim();
    double h = 1 / std::sqrt(2.0);
    for (size_t k = 0; k < d; k++) {
        o[k] = psi.amplitudes()[k] * h;
        o[k + d] = psi.amplitudes()[k] * h * static_cast<double>(sign);
    }
    return out;
}

double max_diff(const DenseState &a, const DenseState &b) {
    double m = 0;
    for (size_t k = 0; k < a.dim(); k++) {
        m = std::max(m, std::abs(a.amplitudes()[k] - b.amplitudes()[k]));
    }
    return m;
}

const CircuitBranch *branch_with(const std::vector<CircuitBranch> &brs, int8_t record) {
    for (const auto &b : brs) {
        if (b.records.size() == 1 && b.records[0] == record) {
            return &b;
        }
    }
    return nullptr;
}

// Checks both outcome branches against the projector form.
void check_gadget(const DenseState &system, const GadgetOptions &opt) {
    HardwareLayout layout(2, 1, {{0, 0}, {1, 0}});
    Circuit c(2, 1);
    auto m = compile_dw_measurement(c, layout, 0, 1, opt);
    CHECK(m.ancilla == 0);
    auto brs = simulate_branches(c, with_ancilla(system, +1));
    double total = 0;
    for (const auto &b : brs) {
        total += b.weight;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    DenseState wall = with_ancilla(bond_projection(system, -1), +1);
    DenseState no_wall_sys = bond_projection(system, +1);
    if (opt.gateset == GateSet::CrossResonance && !opt.correct_byproduct) {
        no_wall_sys.apply_pauli_rotation(PauliMask::x_on(0), std::numbers::pi);
    }
    DenseState no_wall = with_ancilla(no_wall_sys, -1);
    for (int8_t r : {int8_t{1}, int8_t{-1}}) {
        const DenseState &expect = r == 1 ? wall : no_wall;
        double w = std::norm(expect.norm());
        const auto *b = branch_with(brs, r);
        if (w < 1e-14) {
            CHECK(b == nullptr);
            continue;
        }
        REQUIRE(b != nullptr);
        CHECK(max_diff(b->state, expect) < 1e-10);
    }
}

}  // namespace

TEST_CASE("CR gadget on X product inputs") {
    for (int s0 : {1, -1}) {
        for (int s1 : {1, -1}) {
            std::vector<int> signs{s0, s1};
            DenseState sys = DenseState::product_x(signs);
            HardwareLayout layout(2, 1, {{0, 0}, {1, 0}});
            Circuit c(2, 1);
            compile_dw_measurement(c, layout, 0, 1);
            auto brs = simulate_branches(c, with_ancilla(sys, +1));
            REQUIRE(brs.size() == 1);
            // Outcome +1 marks a wall.
            CHECK(brs[0].records[0] == (s0 == s1 ? -1 : 1));
            CHECK(max_diff(brs[0].state, with_ancilla(sys, brs[0].records[0])) < 1e-12);
            check_gadget(sys, {});
            check_gadget(sys, {GateSet::CPhase, true});
            check_gadget(sys, {GateSet::CrossResonance, false});
        }
    }
}

TEST_CASE("CR gadget keeps a coherent superposition") {
    DenseState cat = DenseState::cat(2, 1, 1);
    HardwareLayout layout(2, 1, {{0, 0}, {1, 0}});
    Circuit c(2, 1);
    compile_dw_measurement(c, layout, 0, 1);
    auto brs = simulate_branches(c, with_ancilla(cat, +1));
    REQUIRE(brs.size() == 1);
    CHECK(brs[0].records[0] == -1);
    CHECK(max_diff(brs[0].state, with_ancilla(cat, -1)) < 1e-12);

    // Without the correction the relative phase of the two components flips.
    Circuit raw(2, 1);
    compile_dw_measurement(raw, layout, 0, 1, {GateSet::CrossResonance, false});
    auto rb = simulate_branches(raw, with_ancilla(cat, +1));
    REQUIRE(rb.size() == 1);
    DenseState flipped = DenseState::cat(2, 1, -1);
    CHECK(std::abs(std::abs(rb[0].state.inner(with_ancilla(flipped, -1))) - 1) < 1e-12);
    CHECK(std::abs(rb[0].state.inner(with_ancilla(cat, -1))) < 1e-12);
}

TEST_CASE("gadget matches the projector form on random inputs") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 20; trial++) {
        DenseState s = random_state(2, rng);
        check_gadget(s, {});
        check_gadget(s, {GateSet::CPhase, true});
        check_gadget(s, {GateSet::CrossResonance, false});
    }
}

TEST_CASE("CCZ decomposition") {
    Circuit c(3, 0);
    append_ccz(c, sys(0), sys(1), sys(2));
    CHECK(c.count(Opcode::CX) == 6);
    Complex phase = 0;
    for (size_t k = 0; k < 8; k++) {
        DenseState in(3);
        in.amplitudes()[0] = 0;
        in.amplitudes()[k] = 1;
        auto brs = simulate_branches(c, in);
        REQUIRE(brs.size() == 1);
        Complex expect = k == 7 ? -1.0 : 1.0;
        for (size_t m = 0; m < 8; m++) {
            if (m != k) {
                CHECK(std::abs(brs[0].state.amplitudes()[m]) < 1e-12);
            }
        }
        Complex ratio = brs[0].state.amplitudes()[k] / expect;
        if (k == 0) {
            phase = ratio;
        }
        CHECK(std::abs(ratio - phase) < 1e-12);
    }
    CHECK(std::abs(std::abs(phase) - 1) < 1e-12);
}

TEST_CASE("square layouts") {
    auto lat = Lattice::build(LatticeKind::SquarePeriodic, 4, 4);
    auto layout = HardwareLayout::for_lattice(lat);
    CHECK(layout.num_ancilla() == 16);
    CHECK(layout.couplings().size() == 64);
    for (const auto &b : lat.bonds()) {
        CHECK(layout.shared_ancillas(b.owner, b.other).size() == 2);
    }
    // Diagonal neighbours share one ancilla, distant sites none.
    CHECK(layout.shared_ancillas(lat.site_at(0, 0), lat.site_at(1, 1)).size() == 1);
    CHECK_FALSE(layout.measurable(lat.site_at(0, 0), lat.site_at(2, 0)));

    auto open = Lattice::build(LatticeKind::SquareOpen, 2, 2);
    auto ol = HardwareLayout::for_lattice(open);
    CHECK(ol.num_ancilla() == 5);
}

TEST_CASE("annular layouts make every bond measurable") {
    for (uint32_t rings : {2u, 3u, 4u}) {
        for (uint32_t len : {6u, 9u, 12u}) {
            auto lat = Lattice::build(LatticeKind::AnnularTriangular, rings, len);
            auto layout = HardwareLayout::for_lattice(lat);
            CHECK(layout.num_ancilla() == rings * len / 3);
            for (const auto &b : lat.bonds()) {
                CHECK(layout.measurable(b.owner, b.other));
            }
            auto c = compile_nec_round(layout, lat, RoundVariant::MeasureAndFeedback);
            CHECK(c.count(Opcode::MX) == 2 * lat.num_sites());
        }
    }
}

TEST_CASE("NEC round structure on a 4x4 torus") {
    auto lat = Lattice::build(LatticeKind::SquarePeriodic, 4, 4);
    auto layout = HardwareLayout::for_lattice(lat);
    auto c = compile_nec_round(layout, lat, RoundVariant::MeasureAndFeedback);
    CHECK(c.count(Opcode::MX) == 32);
    CHECK(c.count_conditional(Opcode::Z) == 16);
    CHECK(c.count(Opcode::Z) == 16);
    CHECK(c.count_conditional(Opcode::RX) == 32);
    // Sublattice A sites are corrected first.
    const auto &first_z = *std::find_if(c.instructions().begin(), c.instructions().end(),
                                        [](const Instruction &i) { return i.op == Opcode::Z; });
    CHECK(lat.sublattice(first_z.qubits[0].index) == Sublattice::A);

    auto t = compile_nec_round(layout, lat, RoundVariant::ToffoliReset);
    CHECK(t.count(Opcode::MX) == 0);
    CHECK(t.count(Opcode::Reset) == 32);

    auto other = Lattice::build(LatticeKind::SquarePeriodic, 4, 6);
    CHECK_THROWS_AS(compile_nec_round(layout, other, RoundVariant::MeasureAndFeedback), std::invalid_argument);
}

TEST_CASE("compiled NEC round equals the abstract channel") {
    std::mt19937_64 rng(23);
    ProtocolParams p;
    p.p_nec = 1.0;
    struct Case {
        RoundVariant variant;
        GateSet gateset;
    };
    const Case cases[] = {{RoundVariant::MeasureAndFeedback, GateSet::CrossResonance},
                          {RoundVariant::MeasureAndFeedback, GateSet::CPhase},
                          {RoundVariant::ToffoliReset, GateSet::CrossResonance},
                          {RoundVariant::ToffoliReset, GateSet::CPhase}};
    for (auto [rows, cols] : {std::pair{2u, 2u}, {2u, 3u}, {3u, 2u}}) {
        auto lat = Lattice::build(LatticeKind::SquareOpen, rows, cols);
        auto layout = HardwareLayout::for_lattice(lat);
        std::vector<DenseState> inputs{DenseState::cat(lat.num_sites(), 0.6, 0.8),
                                       random_state(lat.num_sites(), rng), random_state(lat.num_sites(), rng)};
        std::vector<int> signs(lat.num_sites(), 1);
        signs[0] = -1;
        inputs.push_back(DenseState::product_x(signs));
        for (const auto &cs : cases) {
            auto c = compile_nec_round(layout, lat, cs.variant, {cs.gateset, true});
            for (const auto &in : inputs) {
                DensityMatrix expect = DensityMatrix::from_pure(in);
                oracle_correct(expect, lat, p);
                auto got = reduced_system_state(simulate_branches(c, embed_system(in, layout.num_ancilla())),
                                                lat.num_sites());
                CHECK(got.max_abs_diff(expect) < 1e-10);
            }
        }
    }
}

TEST_CASE("uncorrected byproducts leave X-basis statistics unchanged") {
    std::mt19937_64 rng(29);
    ProtocolParams p;
    p.p_nec = 1.0;
    auto lat = Lattice::build(LatticeKind::SquareOpen, 2, 3);
    auto layout = HardwareLayout::for_lattice(lat);
    for (auto variant : {RoundVariant::MeasureAndFeedback, RoundVariant::ToffoliReset}) {
        auto c = compile_nec_round(layout, lat, variant, {GateSet::CrossResonance, false});
        for (int trial = 0; trial < 3; trial++) {
            DenseState in = random_state(lat.num_sites(), rng);
            DensityMatrix expect = DensityMatrix::from_pure(in);
            oracle_correct(expect, lat, p);
            auto got =
                reduced_system_state(simulate_branches(c, embed_system(in, layout.num_ancilla())), lat.num_sites());
            for (uint32_t q = 0; q < lat.num_sites(); q++) {
                uint32_t t[] = {q};
                expect.apply(Gate::H, t);
                got.apply(Gate::H, t);
            }
            double worst = 0;
            bool differs = false;
            for (size_t k = 0; k < got.dim(); k++) {
                worst = std::max(worst, std::abs(got.at(k, k) - expect.at(k, k)));
                for (size_t m = 0; m < got.dim(); m++) {
                    differs |= std::abs(got.at(k, m) - expect.at(k, m)) > 1e-6;
                }
            }
            CHECK(worst < 1e-10);
            CHECK(differs);
        }
    }
}

TEST_CASE("text format") {
    Circuit empty;
    CHECK(emit_text(empty) == "TOOMDTC-CIRCUIT v1\nQUBITS 0 0\n");
    CHECK(parse_circuit(emit_text(empty)) == empty);

    HardwareLayout layout(2, 1, {{0, 0}, {1, 0}});
    Circuit g(2, 1);
    compile_dw_measurement(g, layout, 0, 1, {GateSet::CrossResonance, false});
    CHECK(emit_text(g) ==
          "TOOMDTC-CIRCUIT v1\nQUBITS 2 1\nPREP_PLUS a0\nCR q0 a0 0.5pi\nCR q1 a0 0.5pi\nMX a0 -> r0\n");
    Circuit gc(2, 1);
    compile_dw_measurement(gc, layout, 0, 1);
    CHECK(emit_text(gc).ends_with("MX a0 -> r0\nRX q0 -pi IF r0==-1\n"));

    auto lat = Lattice::build(LatticeKind::SquarePeriodic, 4, 4);
    auto round = compile_nec_round(HardwareLayout::for_lattice(lat), lat, RoundVariant::MeasureAndFeedback);
    CHECK(emit_text(round).find("Z q0 IF r0==1 AND r1==1\n") != std::string::npos);
    CHECK(parse_circuit(emit_text(round)) == round);
}

TEST_CASE("text round trip of random circuits") {
    std::mt19937_64 rng(31);
    const Opcode ops[] = {Opcode::PrepPlus, Opcode::Reset, Opcode::H,  Opcode::X,      Opcode::Z,
                          Opcode::S,        Opcode::SDag,  Opcode::RX, Opcode::RZ,     Opcode::CX,
                          Opcode::CZ,       Opcode::CR,    Opcode::CPhase, Opcode::MX, Opcode::MZ};
    std::uniform_real_distribution<double> angle(-4, 4);
    for (int trial = 0; trial < 100; trial++) {
        uint32_t ns = 1 + rng() % 5, na = rng() % 4;
        Circuit c(ns, na);
        uint32_t total = ns + na;
        auto pick = [&](uint32_t k) { return k < ns ? sys(k) : anc(k - ns); };
        int len = static_cast<int>(rng() % 40);
        for (int i = 0; i < len; i++) {
            Opcode op = ops[rng() % std::size(ops)];
            if (opcode_arity(op) == 2 && total < 2) {
                continue;
            }
            uint32_t a = rng() % total;
            std::vector<QubitRef> qs{pick(a)};
            if (opcode_arity(op) == 2) {
                uint32_t b = (a + 1 + rng() % (total - 1)) % total;
                qs.push_back(pick(b));
            }
            double th = 0;
            if (opcode_has_angle(op)) {
                th = rng() % 3 == 0 ? static_cast<double>(static_cast<int>(rng() % 5) - 2) : angle(rng);
            }
            std::vector<Condition> conds;
            if (c.num_records() > 0 && !opcode_measures(op)) {
                size_t terms = rng() % 3;
                for (size_t k = 0; k < terms; k++) {
                    conds.push_back({static_cast<uint32_t>(rng() % c.num_records()), rng() % 2 ? int8_t{1} : int8_t{-1}});
                }
            }
            c.append(op, qs, th, conds);
        }
        auto text = emit_text(c);
        auto back = parse_circuit(text);
        CHECK(back == c);
        CHECK(emit_text(back) == text);
    }
}

TEST_CASE("circuit validation") {
    Circuit c(2, 1);
    CHECK_THROWS(c.append(Opcode::H, {sys(2)}));
    CHECK_THROWS(c.append(Opcode::CX, {sys(0), sys(0)}));
    CHECK_THROWS(c.append(Opcode::Z, {sys(0)}, 0, {{0, 1}}));
    CHECK_THROWS(c.append(Opcode::H, {sys(0)}, 0.5));
    CHECK_THROWS(parse_circuit("QUBITS 1 0\n"));
    CHECK_THROWS(parse_circuit("TOOMDTC-CIRCUIT v1\nQUBITS 1 0\nFOO q0\n"));
    CHECK_THROWS(parse_circuit("TOOMDTC-CIRCUIT v1\nQUBITS 1 1\nZ q0 IF r0==1\nMX a0 -> r0\n"));
    CHECK_THROWS(parse_circuit("TOOMDTC-CIRCUIT v1\nQUBITS 1 1\nMX a0 -> r3\n"));
    auto ok = parse_circuit("TOOMDTC-CIRCUIT v1\nQUBITS 2 1\nMX a0 -> r0\nZ q1 IF r0==+1\nCR q0 a0 pi\n");
    CHECK(ok.instructions().size() == 3);
    CHECK(ok.instructions()[2].angle_pi == 1.0);

    HardwareLayout layout(3, 1, {{0, 0}, {1, 0}});
    Circuit d(3, 1);
    CHECK_THROWS_WITH_AS(compile_dw_measurement(d, layout, 0, 2), "bond 0-2 is not measurable in the layout",
                         std::invalid_argument);
}
