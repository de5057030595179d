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


#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "toomdtc/dense.h"
#include "toomdtc/lattice.h"
#include "toomdtc/protocol.h"
#include "toomdtc/rng.h"

using namespace toomdtc;

TEST_CASE("product states and magnetization") {
    auto plus = DenseState::all_plus(3);
    CHECK(plus.magnetization() == doctest::Approx(1.0));
    auto zero = DenseState::all_zero(3);
    CHECK(std::abs(zero.magnetization()) < 1e-15);
    std::vector<int> signs{1, -1, -1};
    auto pat = DenseState::product_x(signs);
    CHECK(pat.expect_x(0) == doctest::Approx(1.0));
    CHECK(pat.expect_x(2) == doctest::Approx(-1.0));
    CHECK(pat.magnetization() == doctest::Approx(-1.0 / 3.0));
}

TEST_CASE("capacity is enforced") {
    CHECK_THROWS_AS(DenseState(21), CapacityError);
    CHECK_THROWS_AS(DensityMatrix(10), CapacityError);
    CHECK_NOTHROW(DenseState(4, 4));
}

TEST_CASE("Z pulse keeps the -i phase") {
    DenseState psi = DenseState::all_plus(1);
    DenseState ref = psi;
    psi.zpulse(0);
    ref.z(0);
    Complex overlap = ref.inner(psi);
    CHECK(overlap.real() == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(overlap.imag() == doctest::Approx(-1.0));
}

TEST_CASE("pulse_unitary with theta = pi flips every X") {
    auto psi = DenseState::all_plus(3);
    std::vector<double> th(3, std::numbers::pi);
    psi.pulse_unitary(th);
    for (size_t q = 0; q < 3; q++) {
        CHECK(psi.expect_x(q) == doctest::Approx(-1.0));
    }
    // A small angle rotates <X> to cos(theta).
    auto chi = DenseState::all_plus(2);
    std::vector<double> small{0.3, -1.1};
    chi.pulse_unitary(small);
    CHECK(chi.expect_x(0) == doctest::Approx(std::cos(0.3)));
    CHECK(chi.expect_x(1) == doctest::Approx(std::cos(1.1)));
    CHECK(chi.norm() == doctest::Approx(1.0));
}

TEST_CASE("Pauli rotation matches explicit exponential") {
    auto psi = DenseState::all_plus(2);
    const double theta = 0.7;
    psi.apply_pauli_rotation(PauliMask::from(PauliString::from_text("ZZ")), theta);
    // <X_0> = cos(theta) for exp(-i theta ZZ / 2) on |++>.
    CHECK(psi.expect_x(0) == doctest::Approx(std::cos(theta)));
    CHECK(psi.expect(PauliMask::from(PauliString::from_text("YZ"))) == doctest::Approx(std::sin(theta)));
}

TEST_CASE("cphase phase convention") {
    DenseState psi(2);
    psi.x(0);
    psi.x(1);
    psi.apply_cphase(0, 1, 0.4);
    CHECK(std::arg(psi.amplitudes()[3]) == doctest::Approx(0.4));
}

TEST_CASE("Born-rule sampling") {
    Rng rng(9);
    const int draws = 20000;
    int plus = 0;
    for (int k = 0; k < draws; k++) {
        DenseState psi(1);
        std::vector<double> th{0.0};
        psi.h(0);
        psi.apply_1q(Mat2{std::cos(0.4), -std::sin(0.4), std::sin(0.4), std::cos(0.4)}, 0);
        double p = psi.probability(PauliMask::x_on(0), 1);
        auto out = psi.measure_x(0, rng);
        plus += out.value == 1;
        CHECK(psi.expect_x(0) == doctest::Approx(out.value));
        if (k == 0) {
            CHECK(p == doctest::Approx(std::cos(0.4) * std::cos(0.4)));
        }
    }
    double p = std::cos(0.4) * std::cos(0.4);
    CHECK(std::abs(plus / double(draws) - p) < 5 * std::sqrt(p * (1 - p) / draws));
}

TEST_CASE("density matrix follows unitary evolution of the pure state") {
    auto psi = DenseState::all_zero(3);
    psi.h(0);
    psi.cx(0, 1);
    psi.s(1);
    psi.zz_half(1, 2);
    auto rho = DensityMatrix::from_pure(DenseState::all_zero(3));
    std::vector<uint32_t> t0{0}, t01{0, 1}, t1{1}, t12{1, 2};
    rho.apply(Gate::H, t0);
    rho.apply(Gate::CX, t01);
    rho.apply(Gate::S, t1);
    rho.apply(Gate::ZZHALF, t12);
    CHECK(rho.fidelity(psi) == doctest::Approx(1.0));
    CHECK(rho.trace() == doctest::Approx(1.0));
    CHECK(rho.hermiticity_error() < 1e-12);
}

TEST_CASE("cat state coherence") {
    auto cat = DenseState::cat(3, 1.0, 1.0);
    auto c = cat_coherence(cat);
    CHECK(c.diag_plus == doctest::Approx(0.5));
    CHECK(c.diag_minus == doctest::Approx(0.5));
    CHECK(c.offdiag == doctest::Approx(0.5));
    auto rho = DensityMatrix::from_pure(cat);
    auto d = cat_coherence(rho);
    CHECK(d.offdiag == doctest::Approx(0.5));
    // A Z error moves weight out of the cat subspace; XXX dephases it.
    auto flipped = rho;
    flipped.mix_pauli(PauliMask::z_on(0), 0.5);
    CHECK(cat_coherence(flipped).offdiag == doctest::Approx(0.25));
    CHECK(cat_coherence(flipped).diag_plus == doctest::Approx(0.25));
    rho.mix_pauli(PauliMask::from(PauliString::from_text("XXX")), 0.5);
    CHECK(cat_coherence(rho).offdiag == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(cat_coherence(rho).diag_minus == doctest::Approx(0.5));
}

namespace {

// Direct expansion of one NEC site channel with p_nec and record errors:
// sum over (w_n, w_e) of the projected branch, fired with the probability
// that both records read -1.
DensityMatrix nec_site_by_hand(const DensityMatrix &rho, SiteId j, SiteId n, SiteId e, double p_nec, double p_me) {
    DensityMatrix out = rho;
    out.scale(1 - p_nec);
    for (int wn : {1, -1}) {
        for (int we : {1, -1}) {
            DensityMatrix b = rho;
            b.project(PauliMask::xx_on(j, n), wn);
            b.project(PauliMask::xx_on(j, e), we);
            double rn = wn == -1 ? 1 - p_me : p_me;
            double re = we == -1 ? 1 - p_me : p_me;
            double fire = rn * re;
            DensityMatrix z = b;
            z.conj_pauli(PauliMask::z_on(j));
            out.add_scaled(z, p_nec * fire);
            out.add_scaled(b, p_nec * (1 - fire));
        }
    }
    return out;
}

}  // namespace

TEST_CASE("exact NEC site channel on a flipped centre") {
    auto lat = Lattice::build(LatticeKind::SquarePeriodic, 3, 3);
    SiteId j = lat.site_at(1, 1);
    std::vector<int> signs(9, 1);
    signs[j] = -1;
    auto rho0 = DensityMatrix::from_pure(DenseState::product_x(signs));
    for (double p_me : {0.0, 0.1}) {
        for (double p_nec : {1.0, 0.8}) {
            ProtocolParams p;
            p.p_nec = p_nec;
            p.p_me = p_me;
            DensityMatrix rho = rho0;
            oracle_correct_site(rho, lat, j, p);
            double fire = p_nec * (1 - p_me) * (1 - p_me);
            CHECK(rho.expect_x(j) == doctest::Approx(-1 + 2 * fire).epsilon(1e-12));
            auto t = lat.nec_targets(j);
            auto hand = nec_site_by_hand(rho0, j, t->first.other, t->second.other, p_nec, p_me);
            CHECK(rho.max_abs_diff(hand) < 1e-12);
        }
    }
}

TEST_CASE("exact NEC site channel on random states") {
    auto lat = Lattice::build(LatticeKind::SquareOpen, 2, 3);
    Rng rng(12);
    for (int trial = 0; trial < 5; trial++) {
        DenseState psi(6);
        double norm = 0;
        for (auto &a : psi.amplitudes()) {
            a = Complex(uniform01(rng) - 0.5, uniform01(rng) - 0.5);
            norm += std::norm(a);
        }
        for (auto &a : psi.amplitudes()) {
            a /= std::sqrt(norm);
        }
        auto rho0 = DensityMatrix::from_pure(psi);
        ProtocolParams p;
        p.p_nec = 0.7;
        p.p_me = 0.05;
        for (SiteId j : {lat.site_at(0, 0), lat.site_at(0, 1)}) {
            DensityMatrix rho = rho0;
            oracle_correct_site(rho, lat, j, p);
            auto t = lat.nec_targets(j);
            REQUIRE(t);
            CHECK(rho.max_abs_diff(nec_site_by_hand(rho0, j, t->first.other, t->second.other, 0.7, 0.05)) < 1e-12);
            CHECK(rho.trace() == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("quarter pulse gives +Y") {
    auto psi = DenseState::all_plus(1);
    double th[] = {std::numbers::pi / 2};
    psi.pulse_unitary(th);
    CHECK(std::abs(psi.expect_x(0)) < 1e-12);
    CHECK(psi.expect(PauliMask{1, 1, false, 1}) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("decoherence-free cat under exact correction") {
    struct Shape {
        LatticeKind kind;
        uint32_t r, c;
    };
    for (auto s : {Shape{LatticeKind::SquareOpen, 2, 2}, Shape{LatticeKind::SquarePeriodic, 3, 3}}) {
        auto lat = Lattice::build(s.kind, s.r, s.c);
        auto cat = DenseState::cat(lat.num_sites(), 0.6, 0.8);
        auto rho = DensityMatrix::from_pure(cat);
        ProtocolParams p;
        p.p_nec = 1.0;
        for (int round = 0; round < 3; round++) {
            oracle_correct(rho, lat, p);
        }
        CHECK(rho.fidelity(cat) >= 1 - 1e-10);
    }
}

TEST_CASE("coherent jump events leave the cat invariant") {
    auto lat = Lattice::build(LatticeKind::SquareOpen, 2, 2);
    Rng rng(3);
    for (int traj = 0; traj < 50; traj++) {
        auto cat = DenseState::cat(4, 0.6, 0.8);
        DenseState psi = cat;
        JumpParams jp;
        jp.gamma = 2.0;
        jp.t_max = 10;
        jp.variant = JumpVariant::CoherentNEC;
        auto samples = jump_trajectory(psi, lat, jp, rng);
        CHECK(samples.size() == 21);
        CHECK(psi.fidelity(cat) >= 1 - 1e-10);
    }
}

TEST_CASE("gamma zero means free evolution") {
    auto lat = Lattice::build(LatticeKind::SquareOpen, 2, 2);
    Rng rng(4);
    std::vector<int> signs{-1, 1, 1, -1};
    DenseState psi = DenseState::product_x(signs);
    DenseState orig = psi;
    JumpParams jp;
    jp.gamma = 0;
    jp.t_max = 3;
    jp.drive_period = 1.0;
    auto s = jump_trajectory(psi, lat, jp, rng);
    // Three pi pulses flip every X sign.
    CHECK(psi.fidelity(orig) < 1e-12);
    CHECK(s.back().magnetization == doctest::Approx(-orig.magnetization()));
}

TEST_CASE("incoherent jump events dephase the cat") {
    auto lat = Lattice::build(LatticeKind::SquareOpen, 2, 2);
    // Only site 0 has both North and East neighbours, so coherence decays at
    // rate gamma; the exact channel of one event removes it completely.
    auto cat = DenseState::cat(4, 0.6, 0.8);
    {
        auto rho = DensityMatrix::from_pure(cat);
        DensityMatrix acc(4);
        acc.scale(0);
        for (int b = 0; b < 8; b++) {
            DensityMatrix br = rho;
            int xc = (b & 1) ? -1 : 1, xn = (b & 2) ? -1 : 1, xe = (b & 4) ? -1 : 1;
            br.project(PauliMask::x_on(0), xc);
            br.project(PauliMask::x_on(2), xn);
            br.project(PauliMask::x_on(1), xe);
            if (xc != xn && xc != xe) {
                br.conj_pauli(PauliMask::z_on(0));
            }
            acc.add_scaled(br, 1.0);
        }
        auto cc = cat_coherence(acc);
        CHECK(cc.offdiag < 1e-12);
        CHECK(cc.diag_plus == doctest::Approx(0.36).epsilon(1e-12));
        CHECK(cc.diag_minus == doctest::Approx(0.64).epsilon(1e-12));
    }
    Rng rng(8);
    const int trajectories = 4000;
    JumpParams jp;
    jp.gamma = 1.0;
    jp.t_max = 2.0;
    jp.sample_dt = 1.0;
    jp.variant = JumpVariant::IncoherentNEC;
    std::vector<std::vector<JumpSample>> by_time(3);
    for (int k = 0; k < trajectories; k++) {
        DenseState psi = cat;
        auto s = jump_trajectory(psi, lat, jp, rng);
        for (size_t i = 0; i < 3; i++) {
            by_time[i].push_back(s[i]);
        }
    }
    for (size_t i = 0; i < 3; i++) {
        auto cc = cat_coherence(by_time[i]);
        double expect = 0.48 * std::exp(-static_cast<double>(i));
        // Each trajectory contributes 0.48 or 0, so the binomial SE applies.
        double q = std::exp(-static_cast<double>(i));
        double se = 0.48 * std::sqrt(q * (1 - q) / trajectories);
        CHECK(std::abs(cc.offdiag - expect) <= 4 * se + 1e-12);
        CHECK(std::abs(cc.diag_plus - 0.36) < 0.04);
    }
}

TEST_CASE("fixed-step jumps follow the Lindblad derivative") {
    // Two active sites that share a bond, so the step is not linear in dt.
    auto lat = Lattice::build(LatticeKind::SquareOpen, 2, 3);
    DenseState psi(6);
    Rng seed_rng(6);
    double norm = 0;
    for (auto &a : psi.amplitudes()) {
        a = Complex(uniform01(seed_rng) - 0.5, uniform01(seed_rng) - 0.5);
        norm += std::norm(a);
    }
    for (auto &a : psi.amplitudes()) {
        a /= std::sqrt(norm);
    }
    auto rho0 = DensityMatrix::from_pure(psi);
    double gamma = 1.0;
    // Generator: gamma * sum_j (N_T,j[rho] - rho).
    DensityMatrix gen = rho0;
    gen.scale(0);
    ProtocolParams full;
    full.p_nec = 1.0;
    for (SiteId j = 0; j < 6; j++) {
        DensityMatrix r = rho0;
        oracle_correct_site(r, lat, j, full);
        gen.add_scaled(r, gamma);
        gen.add_scaled(rho0, -gamma);
    }
    std::vector<double> errors;
    for (double dt : {0.1, 0.05, 0.025}) {
        // One fixed step fires each site in turn with probability gamma dt.
        ProtocolParams step;
        step.p_nec = gamma * dt;
        DensityMatrix r = rho0;
        for (SiteId j = 0; j < 6; j++) {
            oracle_correct_site(r, lat, j, step);
        }
        r.add_scaled(rho0, -1);
        r.scale(1 / dt);
        errors.push_back(r.max_abs_diff(gen));
    }
    // First-order agreement: the error halves with dt.
    CHECK(errors[0] < 0.2);
    CHECK(errors[1] / errors[0] == doctest::Approx(0.5).epsilon(0.1));
    CHECK(errors[2] / errors[1] == doctest::Approx(0.5).epsilon(0.1));

    // The sampled fixed-step mode matches the exact one-step channel.
    double p = 0.5;
    JumpParams jp;
    jp.gamma = p;
    jp.bernoulli_dt = 1.0;
    jp.t_max = 1.0;
    jp.sample_dt = 1.0;
    std::vector<int> signs{-1, -1, 1, 1, 1, 1};
    auto start = DenseState::product_x(signs);
    ProtocolParams step;
    step.p_nec = p;
    auto exact = DensityMatrix::from_pure(start);
    for (SiteId j = 0; j < 6; j++) {
        oracle_correct_site(exact, lat, j, step);
    }
    Rng rng(10);
    double sum = 0, sum_sq = 0;
    const int reps = 4000;
    for (int k = 0; k < reps; k++) {
        DenseState s = start;
        auto out = jump_trajectory(s, lat, jp, rng);
        REQUIRE(out.size() == 2);
        sum += out[1].magnetization;
        sum_sq += out[1].magnetization * out[1].magnetization;
    }
    double mean = sum / reps;
    double se = std::sqrt((sum_sq / reps - mean * mean) / reps);
    CHECK(std::abs(mean - exact.magnetization()) < 4 * se);
}

TEST_CASE("non-Clifford model limits") {
    auto lat = Lattice::build(LatticeKind::SquareOpen, 2, 3);
    Rng rng(2);
    NonCliffordParams flip;
    flip.h = std::numbers::pi / 2;
    flip.delta_h = 0;
    flip.J = 0;
    flip.delta_J = 0;
    flip.p_nec = 0;
    flip.steps = 6;
    NonCliffordModel m(lat, flip, rng);
    auto series = m.run(rng);
    for (size_t t = 0; t < series.size(); t++) {
        CHECK(series[t] == doctest::Approx(t % 2 ? -1.0 : 1.0).epsilon(1e-12));
    }

    NonCliffordParams unitary;
    unitary.p_nec = 0;
    unitary.delta_h = 0;
    unitary.delta_J = 0;
    NonCliffordModel u(lat, unitary, rng);
    DenseState psi = DenseState::all_plus(6);
    for (int t = 0; t < 5; t++) {
        u.step(psi, rng);
        CHECK(std::abs(psi.norm() - 1) < 1e-12);
    }
    // Static couplings: identical to a second run with the same disorder.
    NonCliffordParams dis;
    Rng a(99), b(99);
    NonCliffordModel ma(lat, dis, a), mb(lat, dis, b);
    CHECK(ma.couplings() == mb.couplings());
    for (double j : ma.couplings()) {
        CHECK(j >= 0.8);
        CHECK(j <= 1.2);
    }
}
