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

#include "toomdtc/dense.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace toomdtc {

namespace {

constexpr double kSqrtHalf = 0.70710678118654752440;
constexpr Complex kI{0.0, 1.0};

const Complex kIPow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};

void check_capacity(size_t n, size_t max_qubits, const char *what) {
    if (n == 0) {
        throw std::invalid_argument(std::string(what) + " needs at least one qubit");
    }
    if (n > max_qubits) {
        throw CapacityError(std::string(what) + " limited to " + std::to_string(max_qubits) + " qubits, asked for " +
                            std::to_string(n));
    }
}

Mat2 gate_matrix(Gate g) {
    switch (g) {
        case Gate::X:
            return {0, 1, 1, 0};
        case Gate::Y:
            return {0, -kI, kI, 0};
        case Gate::Z:
            return {1, 0, 0, -1};
        case Gate::ZPULSE:
            return {-kI, 0, 0, kI};
        case Gate::H:
            return {kSqrtHalf, kSqrtHalf, kSqrtHalf, -kSqrtHalf};
        case Gate::S:
            return {1, 0, 0, kI};
        case Gate::S_DAG:
            return {1, 0, 0, -kI};
        default:
            throw std::invalid_argument("not a single-qubit gate");
    }
}

std::vector<Complex> two_qubit_diagonal(Gate g, size_t n, size_t a, size_t b) {
    size_t d = size_t{1} << n;
    std::vector<Complex> diag(d);
    Complex p_same = std::exp(Complex(0, -M_PI / 4));
    Complex p_diff = std::exp(Complex(0, M_PI / 4));
    for (size_t k = 0; k < d; k++) {
        bool ba = (k >> a) & 1;
        bool bb = (k >> b) & 1;
        if (g == Gate::CZ) {
            diag[k] = (ba && bb) ? -1.0 : 1.0;
        } else {
            diag[k] = ba == bb ? p_same : p_diff;
        }
    }
    return diag;
}

void check_targets(Gate g, std::span<const uint32_t> targets, size_t n) {
    size_t arity = gate_arity(g);
    if (targets.size() != arity) {
        throw std::invalid_argument("gate " + std::string(to_string(g)) + " takes " + std::to_string(arity) +
                                    " target(s)");
    }
    for (auto t : targets) {
        if (t >= n) {
            throw std::out_of_range("gate target out of range");
        }
    }
    if (arity == 2 && targets[0] == targets[1]) {
        throw std::invalid_argument("gate targets must be distinct");
    }
}

}  // namespace

PauliMask PauliMask::from(const PauliString &p) {
    if (p.num_qubits > 64) {
        throw CapacityError("dense Pauli operators are limited to 64 qubits");
    }
    PauliMask m;
    m.sign = p.sign;
    m.x = p.xs.empty() ? 0 : p.xs[0];
    m.z = p.zs.empty() ? 0 : p.zs[0];
    m.ys = static_cast<unsigned>(std::popcount(m.x & m.z));
    return m;
}

Complex PauliMask::coeff(uint64_t b) const {
    unsigned k = ys + 2 * (static_cast<unsigned>(std::popcount(z & b)) & 1) + 2 * sign;
    return kIPow[k & 3];
}

// ---------------------------------------------------------------------------
// DenseState

DenseState::DenseState(size_t n, size_t max_qubits) : n_(n) {
    check_capacity(n, max_qubits, "dense state");
    amps_.assign(size_t{1} << n, Complex(0));
    amps_[0] = 1;
}

DenseState DenseState::all_zero(size_t n) {
    return DenseState(n);
}

DenseState DenseState::all_plus(size_t n) {
    DenseState s(n);
    double a = std::pow(2.0, -0.5 * static_cast<double>(n));
    std::fill(s.amps_.begin(), s.amps_.end(), Complex(a));
    return s;
}

DenseState DenseState::product_x(std::span<const int> signs) {
    DenseState s = all_plus(signs.size());
    for (size_t q = 0; q < signs.size(); q++) {
        if (signs[q] == -1) {
            s.z(q);
        } else if (signs[q] != 1) {
            throw std::invalid_argument("product_x signs must be +1 or -1");
        }
    }
    return s;
}

DenseState DenseState::cat(size_t n, Complex alpha, Complex beta) {
    DenseState s(n);
    double a = std::pow(2.0, -0.5 * static_cast<double>(n));
    for (size_t k = 0; k < s.dim(); k++) {
        double parity = (std::popcount(k) & 1) ? -1.0 : 1.0;
        s.amps_[k] = a * (alpha + parity * beta);
    }
    s.normalize();
    return s;
}

void DenseState::apply(Gate g, std::span<const uint32_t> targets) {
    check_targets(g, targets, n_);
    switch (g) {
        case Gate::CX:
            cx(targets[0], targets[1]);
            return;
        case Gate::CZ:
            cz(targets[0], targets[1]);
            return;
        case Gate::ZZHALF:
            zz_half(targets[0], targets[1]);
            return;
        default:
            apply_1q(gate_matrix(g), targets[0]);
    }
}

void DenseState::apply_1q(const Mat2 &m, size_t q) {
    size_t bit = size_t{1} << q;
    for (size_t k = 0; k < amps_.size(); k++) {
        if (k & bit) {
            continue;
        }
        Complex a0 = amps_[k];
        Complex a1 = amps_[k | bit];
        amps_[k] = m.a * a0 + m.b * a1;
        amps_[k | bit] = m.c * a0 + m.d * a1;
    }
}

void DenseState::apply_pauli(const PauliMask &p) {
    if (p.x == 0) {
        for (size_t k = 0; k < amps_.size(); k++) {
            amps_[k] *= p.coeff(k);
        }
        return;
    }
    for (size_t k = 0; k < amps_.size(); k++) {
        size_t k2 = k ^ p.x;
        if (k2 < k) {
            continue;
        }
        Complex a = amps_[k];
        Complex b = amps_[k2];
        amps_[k2] = p.coeff(k) * a;
        amps_[k] = p.coeff(k2) * b;
    }
}

void DenseState::apply_pauli_rotation(const PauliMask &p, double theta) {
    std::vector<Complex> orig = amps_;
    apply_pauli(p);
    double c = std::cos(theta / 2);
    Complex s = Complex(0, -std::sin(theta / 2));
    for (size_t k = 0; k < amps_.size(); k++) {
        amps_[k] = c * orig[k] + s * amps_[k];
    }
}

void DenseState::apply_cphase(size_t a, size_t b, double theta) {
    Complex ph = std::exp(Complex(0, theta));
    size_t mask = (size_t{1} << a) | (size_t{1} << b);
    for (size_t k = 0; k < amps_.size(); k++) {
        if ((k & mask) == mask) {
            amps_[k] *= ph;
        }
    }
}

void DenseState::x(size_t q) {
    apply_pauli(PauliMask::x_on(q));
}

void DenseState::y(size_t q) {
    apply_pauli({uint64_t{1} << q, uint64_t{1} << q, false, 1});
}

void DenseState::z(size_t q) {
    apply_pauli(PauliMask::z_on(q));
}

void DenseState::zpulse(size_t q) {
    apply_1q(gate_matrix(Gate::ZPULSE), q);
}

void DenseState::h(size_t q) {
    apply_1q(gate_matrix(Gate::H), q);
}

void DenseState::s(size_t q) {
    apply_1q(gate_matrix(Gate::S), q);
}

void DenseState::s_dag(size_t q) {
    apply_1q(gate_matrix(Gate::S_DAG), q);
}

void DenseState::cx(size_t c, size_t t) {
    size_t bc = size_t{1} << c;
    size_t bt = size_t{1} << t;
    for (size_t k = 0; k < amps_.size(); k++) {
        if ((k & bc) && !(k & bt)) {
            std::swap(amps_[k], amps_[k | bt]);
        }
    }
}

void DenseState::cz(size_t a, size_t b) {
    apply_cphase(a, b, M_PI);
}

void DenseState::zz_half(size_t a, size_t b) {
    Complex p_same = std::exp(Complex(0, -M_PI / 4));
    Complex p_diff = std::exp(Complex(0, M_PI / 4));
    for (size_t k = 0; k < amps_.size(); k++) {
        bool same = ((k >> a) & 1) == ((k >> b) & 1);
        amps_[k] *= same ? p_same : p_diff;
    }
}

void DenseState::pulse_unitary(std::span<const double> thetas) {
    if (thetas.size() != n_) {
        throw std::invalid_argument("pulse_unitary needs one angle per qubit");
    }
    // Phase of basis state k is prod_j e^{-i theta_j z_j / 2}, z_j = +-1;
    // built incrementally from the state with its lowest set bit cleared.
    std::vector<Complex> phase(amps_.size());
    Complex base = 1;
    std::vector<Complex> ratio(n_);
    for (size_t j = 0; j < n_; j++) {
        base *= std::exp(Complex(0, -thetas[j] / 2));
        ratio[j] = std::exp(Complex(0, thetas[j]));
    }
    phase[0] = base;
    for (size_t k = 1; k < amps_.size(); k++) {
        phase[k] = phase[k & (k - 1)] * ratio[std::countr_zero(k)];
    }
    for (size_t k = 0; k < amps_.size(); k++) {
        amps_[k] *= phase[k];
    }
}

double DenseState::expect(const PauliMask &p) const {
    Complex acc = 0;
    for (size_t k = 0; k < amps_.size(); k++) {
        acc += std::conj(amps_[k ^ p.x]) * p.coeff(k) * amps_[k];
    }
    return acc.real();
}

double DenseState::expect_x(size_t q) const {
    size_t bit = size_t{1} << q;
    double acc = 0;
    for (size_t k = 0; k < amps_.size(); k++) {
        acc += (std::conj(amps_[k ^ bit]) * amps_[k]).real();
    }
    return acc;
}

double DenseState::magnetization() const {
    double total = 0;
    for (size_t q = 0; q < n_; q++) {
        total += expect_x(q);
    }
    return total / static_cast<double>(n_);
}

double DenseState::probability(const PauliMask &p, int value) const {
    double pr = 0.5 * (1.0 + value * expect(p));
    return std::clamp(pr, 0.0, 1.0);
}

void DenseState::project(const PauliMask &p, int value) {
    std::vector<Complex> orig = amps_;
    apply_pauli(p);
    for (size_t k = 0; k < amps_.size(); k++) {
        amps_[k] = 0.5 * (orig[k] + static_cast<double>(value) * amps_[k]);
    }
    double nrm = norm();
    if (nrm < 1e-150) {
        throw std::domain_error("projection onto a zero-probability outcome");
    }
    for (auto &a : amps_) {
        a /= nrm;
    }
}

MeasurementOutcome DenseState::measure(const PauliMask &p, Rng &rng) {
    double p_plus = probability(p, +1);
    if (p_plus > 1 - 1e-12) {
        project(p, +1);
        return {+1, true};
    }
    if (p_plus < 1e-12) {
        project(p, -1);
        return {-1, true};
    }
    int value = uniform01(rng) < p_plus ? +1 : -1;
    project(p, value);
    return {value, false};
}

void DenseState::reset_plus(size_t q, Rng &rng) {
    if (measure_x(q, rng).value == -1) {
        z(q);
    }
}

void DenseState::reset_zero(size_t q, Rng &rng) {
    if (measure_z(q, rng).value == -1) {
        x(q);
    }
}

void DenseState::depolarize(size_t q, double p, Rng &rng) {
    double u = uniform01(rng);
    if (!(u < p)) {
        return;
    }
    auto which = static_cast<int>(3.0 * u / p);
    if (which == 0) {
        x(q);
    } else if (which == 1) {
        y(q);
    } else {
        z(q);
    }
}

double DenseState::norm() const {
    double acc = 0;
    for (const auto &a : amps_) {
        acc += std::norm(a);
    }
    return std::sqrt(acc);
}

void DenseState::normalize() {
    double nrm = norm();
    if (nrm == 0) {
        throw std::domain_error("cannot normalize the zero vector");
    }
    for (auto &a : amps_) {
        a /= nrm;
    }
}

Complex DenseState::inner(const DenseState &other) const {
    if (other.n_ != n_) {
        throw std::invalid_argument("states have different qubit counts");
    }
    Complex acc = 0;
    for (size_t k = 0; k < amps_.size(); k++) {
        acc += std::conj(amps_[k]) * other.amps_[k];
    }
    return acc;
}

double DenseState::fidelity(const DenseState &other) const {
    return std::abs(inner(other));
}

// ---------------------------------------------------------------------------
// DensityMatrix

DensityMatrix::DensityMatrix(size_t n, size_t max_qubits) : n_(n), d_(0) {
    check_capacity(n, max_qubits, "density matrix");
    d_ = size_t{1} << n;
    rho_.assign(d_ * d_, Complex(0));
    rho_[0] = 1;
}

DensityMatrix DensityMatrix::from_pure(const DenseState &psi, size_t max_qubits) {
    DensityMatrix rho(psi.num_qubits(), max_qubits);
    const auto &a = psi.amplitudes();
    for (size_t r = 0; r < rho.d_; r++) {
        for (size_t c = 0; c < rho.d_; c++) {
            rho.at(r, c) = a[r] * std::conj(a[c]);
        }
    }
    return rho;
}

void DensityMatrix::apply(Gate g, std::span<const uint32_t> targets) {
    check_targets(g, targets, n_);
    switch (g) {
        case Gate::CX: {
            Mat2 h = gate_matrix(Gate::H);
            apply_1q(h, targets[1]);
            auto diag = two_qubit_diagonal(Gate::CZ, n_, targets[0], targets[1]);
            apply_diagonal(diag);
            apply_1q(h, targets[1]);
            return;
        }
        case Gate::CZ:
        case Gate::ZZHALF: {
            auto diag = two_qubit_diagonal(g, n_, targets[0], targets[1]);
            apply_diagonal(diag);
            return;
        }
        default:
            apply_1q(gate_matrix(g), targets[0]);
    }
}

void DensityMatrix::apply_1q(const Mat2 &m, size_t q) {
    size_t bit = size_t{1} << q;
    // Left multiplication by U.
    for (size_t r = 0; r < d_; r++) {
        if (r & bit) {
            continue;
        }
        Complex *row0 = &rho_[r * d_];
        Complex *row1 = &rho_[(r | bit) * d_];
        for (size_t c = 0; c < d_; c++) {
            Complex a0 = row0[c];
            Complex a1 = row1[c];
            row0[c] = m.a * a0 + m.b * a1;
            row1[c] = m.c * a0 + m.d * a1;
        }
    }
    // Right multiplication by U^dag.
    Complex ca = std::conj(m.a);
    Complex cb = std::conj(m.b);
    Complex cc = std::conj(m.c);
    Complex cd = std::conj(m.d);
    for (size_t r = 0; r < d_; r++) {
        Complex *row = &rho_[r * d_];
        for (size_t c = 0; c < d_; c++) {
            if (c & bit) {
                continue;
            }
            Complex x0 = row[c];
            Complex x1 = row[c | bit];
            row[c] = x0 * ca + x1 * cb;
            row[c | bit] = x0 * cc + x1 * cd;
        }
    }
}

void DensityMatrix::apply_diagonal(std::span<const Complex> diag) {
    if (diag.size() != d_) {
        throw std::invalid_argument("diagonal has the wrong dimension");
    }
    for (size_t r = 0; r < d_; r++) {
        for (size_t c = 0; c < d_; c++) {
            rho_[r * d_ + c] *= diag[r] * std::conj(diag[c]);
        }
    }
}

void DensityMatrix::conj_pauli(const PauliMask &p) {
    std::vector<Complex> out(rho_.size());
    std::vector<Complex> coeff(d_);
    for (size_t k = 0; k < d_; k++) {
        coeff[k] = p.coeff(k);
    }
    for (size_t r = 0; r < d_; r++) {
        for (size_t c = 0; c < d_; c++) {
            out[(r ^ p.x) * d_ + (c ^ p.x)] = coeff[r] * rho_[r * d_ + c] * std::conj(coeff[c]);
        }
    }
    rho_ = std::move(out);
}

void DensityMatrix::mix_pauli(const PauliMask &p, double prob) {
    if (prob == 0) {
        return;
    }
    DensityMatrix other = *this;
    other.conj_pauli(p);
    scale(1 - prob);
    add_scaled(other, prob);
}

void DensityMatrix::project(const PauliMask &p, int value) {
    std::vector<Complex> coeff(d_);
    for (size_t k = 0; k < d_; k++) {
        coeff[k] = p.coeff(k);
    }
    double v = value;
    // Left: (1 + v P)/2 rho, with (P rho)[r][c] = coeff(r ^ x) rho[r ^ x][c].
    std::vector<Complex> tmp(rho_.size());
    for (size_t r = 0; r < d_; r++) {
        size_t r2 = r ^ p.x;
        for (size_t c = 0; c < d_; c++) {
            tmp[r * d_ + c] = 0.5 * (rho_[r * d_ + c] + v * coeff[r2] * rho_[r2 * d_ + c]);
        }
    }
    // Right: rho (1 + v P)/2, with (rho P)[r][c] = rho[r][c ^ x] coeff(c).
    for (size_t r = 0; r < d_; r++) {
        for (size_t c = 0; c < d_; c++) {
            rho_[r * d_ + c] = 0.5 * (tmp[r * d_ + c] + v * tmp[r * d_ + (c ^ p.x)] * coeff[c]);
        }
    }
}

double DensityMatrix::probability(const PauliMask &p, int value) const {
    return std::clamp(0.5 * (trace() + value * expect(p)), 0.0, 1.0);
}

void DensityMatrix::add_scaled(const DensityMatrix &other, double w) {
    if (other.d_ != d_) {
        throw std::invalid_argument("density matrices have different dimensions");
    }
    for (size_t k = 0; k < rho_.size(); k++) {
        rho_[k] += w * other.rho_[k];
    }
}

void DensityMatrix::scale(double w) {
    for (auto &v : rho_) {
        v *= w;
    }
}

double DensityMatrix::trace() const {
    double acc = 0;
    for (size_t r = 0; r < d_; r++) {
        acc += rho_[r * d_ + r].real();
    }
    return acc;
}

double DensityMatrix::expect(const PauliMask &p) const {
    Complex acc = 0;
    for (size_t r = 0; r < d_; r++) {
        size_t r2 = r ^ p.x;
        acc += p.coeff(r2) * rho_[r2 * d_ + r];
    }
    return acc.real();
}

double DensityMatrix::magnetization() const {
    double total = 0;
    for (size_t q = 0; q < n_; q++) {
        total += expect_x(q);
    }
    return total / static_cast<double>(n_);
}

double DensityMatrix::fidelity(const DenseState &psi) const {
    const auto &a = psi.amplitudes();
    Complex acc = 0;
    for (size_t r = 0; r < d_; r++) {
        Complex row = 0;
        for (size_t c = 0; c < d_; c++) {
            row += rho_[r * d_ + c] * a[c];
        }
        acc += std::conj(a[r]) * row;
    }
    return acc.real();
}

double DensityMatrix::max_abs_diff(const DensityMatrix &other) const {
    if (other.d_ != d_) {
        throw std::invalid_argument("density matrices have different dimensions");
    }
    double m = 0;
    for (size_t k = 0; k < rho_.size(); k++) {
        m = std::max(m, std::abs(rho_[k] - other.rho_[k]));
    }
    return m;
}

double DensityMatrix::hermiticity_error() const {
    double m = 0;
    for (size_t r = 0; r < d_; r++) {
        for (size_t c = r; c < d_; c++) {
            m = std::max(m, std::abs(rho_[r * d_ + c] - std::conj(rho_[c * d_ + r])));
        }
    }
    return m;
}

// ---------------------------------------------------------------------------
// Exact channel oracle

namespace {

/// Probability that at least `threshold` of the records read -1, given the
/// true outcomes and independent inversion probability p_me.
double fire_probability(std::span<const int> truth, uint32_t threshold, double p_me) {
    std::vector<double> dist(truth.size() + 1, 0.0);
    dist[0] = 1;
    for (size_t i = 0; i < truth.size(); i++) {
        double p_minus = truth[i] == -1 ? 1 - p_me : p_me;
        for (size_t c = i + 2; c-- > 0;) {
            dist[c] = dist[c] * (1 - p_minus) + (c > 0 ? dist[c - 1] * p_minus : 0.0);
        }
    }
    double total = 0;
    for (size_t c = threshold; c < dist.size(); c++) {
        total += dist[c];
    }
    return total;
}

}  // namespace

void oracle_correct_site(DensityMatrix &rho, const Lattice &lattice, SiteId j, const ProtocolParams &params) {
    std::vector<Bond> bonds;
    uint32_t threshold;
    if (params.rule == Rule::NEC) {
        auto targets = lattice.nec_targets(j);
        if (!targets) {
            return;
        }
        bonds = {targets->first, targets->second};
        threshold = 2;
    } else {
        bonds = lattice.majority_bonds(j);
        if (bonds.empty()) {
            return;
        }
        threshold = majority_threshold(static_cast<uint32_t>(bonds.size()));
    }
    if (params.p_nec == 0) {
        return;
    }
    DensityMatrix acc = rho;
    acc.scale(1 - params.p_nec);
    size_t k = bonds.size();
    std::vector<int> truth(k);
    for (size_t pattern = 0; pattern < (size_t{1} << k); pattern++) {
        DensityMatrix branch = rho;
        for (size_t i = 0; i < k; i++) {
            truth[i] = ((pattern >> i) & 1) ? -1 : +1;
            branch.project(PauliMask::xx_on(bonds[i].owner, bonds[i].other), truth[i]);
        }
        double f = fire_probability(truth, threshold, params.p_me);
        if (f > 0) {
            DensityMatrix fired = branch;
            fired.conj_pauli(PauliMask::z_on(j));
            acc.add_scaled(fired, params.p_nec * f);
        }
        if (f < 1) {
            acc.add_scaled(branch, params.p_nec * (1 - f));
        }
    }
    rho = std::move(acc);
}

void oracle_pulse(DensityMatrix &rho, const Lattice &lattice, const ProtocolParams &params) {
    uint32_t n = lattice.num_sites();
    if (rho.num_qubits() != n) {
        throw std::invalid_argument("density matrix does not match the lattice");
    }
    for (SiteId j = 0; j < n; j++) {
        rho.mix_pauli(PauliMask::z_on(j), params.p_flip);
    }
    if (params.p_unit > 0) {
        for (SiteId j = 0; j < n; j++) {
            auto nbrs = lattice.neighbors(j);
            if (nbrs.empty()) {
                continue;
            }
            DensityMatrix acc = rho;
            acc.scale(1 - params.p_unit);
            for (SiteId k : nbrs) {
                DensityMatrix branch = rho;
                uint32_t t[2] = {j, k};
                branch.apply(Gate::ZZHALF, t);
                acc.add_scaled(branch, params.p_unit / static_cast<double>(nbrs.size()));
            }
            rho = std::move(acc);
        }
    }
    if (params.p_reset > 0) {
        for (SiteId j = 0; j < n; j++) {
            DensityMatrix plus = rho;
            plus.project(PauliMask::x_on(j), +1);
            DensityMatrix minus = rho;
            minus.project(PauliMask::x_on(j), -1);
            minus.conj_pauli(PauliMask::z_on(j));
            rho.scale(1 - params.p_reset);
            rho.add_scaled(plus, params.p_reset);
            rho.add_scaled(minus, params.p_reset);
        }
    }
    if (params.p_dep > 0) {
        for (SiteId j = 0; j < n; j++) {
            uint64_t bit = uint64_t{1} << j;
            DensityMatrix acc = rho;
            acc.scale(1 - params.p_dep);
            for (PauliMask p : {PauliMask{bit, 0, false, 0}, PauliMask{bit, bit, false, 1}, PauliMask{0, bit, false, 0}}) {
                DensityMatrix branch = rho;
                branch.conj_pauli(p);
                acc.add_scaled(branch, params.p_dep / 3);
            }
            rho = std::move(acc);
        }
    }
}

void oracle_correct(DensityMatrix &rho, const Lattice &lattice, const ProtocolParams &params) {
    if (rho.num_qubits() != lattice.num_sites()) {
        throw std::invalid_argument("density matrix does not match the lattice");
    }
    for (Sublattice s : {Sublattice::A, Sublattice::B}) {
        for (SiteId j : lattice.sites_in(s)) {
            oracle_correct_site(rho, lattice, j, params);
        }
    }
}

void oracle_apply_period(DensityMatrix &rho, const Lattice &lattice, const ProtocolParams &params) {
    oracle_pulse(rho, lattice, params);
    oracle_correct(rho, lattice, params);
}

// ---------------------------------------------------------------------------
// Non-Clifford model

NonCliffordModel::NonCliffordModel(const Lattice &lattice, const NonCliffordParams &params, Rng &rng)
    : lattice_(&lattice), params_(params), bonds_(lattice.bonds()) {
    if (params.delta_h < 0 || params.delta_J < 0) {
        throw std::invalid_argument("disorder half-widths must be non-negative");
    }
    if (!(params.p_nec >= 0 && params.p_nec <= 1)) {
        throw std::invalid_argument("p_nec must lie in [0, 1]");
    }
    couplings_.reserve(bonds_.size());
    for (size_t b = 0; b < bonds_.size(); b++) {
        couplings_.push_back(params.J + params.delta_J * (2 * uniform01(rng) - 1));
    }
}

uint32_t NonCliffordModel::step(DenseState &psi, Rng &rng) const {
    size_t n = lattice_->num_sites();
    // U^(Z)_t = exp[-i sum_j h_{j,t} Z_j] = prod_j e^{-i (2 h_j) Z_j / 2}.
    std::vector<double> thetas(n);
    for (size_t j = 0; j < n; j++) {
        thetas[j] = 2 * (params_.h + params_.delta_h * (2 * uniform01(rng) - 1));
    }
    psi.pulse_unitary(thetas);
    // U^(X) = exp[-i sum J_ij X_i X_j]; the terms commute.
    for (size_t b = 0; b < bonds_.size(); b++) {
        psi.apply_pauli_rotation(PauliMask::xx_on(bonds_[b].owner, bonds_[b].other), 2 * couplings_[b]);
    }
    uint32_t fired = 0;
    for (Sublattice s : {Sublattice::A, Sublattice::B}) {
        for (SiteId j : lattice_->sites_in(s)) {
            bool selected = uniform01(rng) < params_.p_nec;
            auto targets = lattice_->nec_targets(j);
            if (!selected || !targets) {
                continue;
            }
            int wn = psi.measure_xx(targets->first.owner, targets->first.other, rng).value;
            int we = psi.measure_xx(targets->second.owner, targets->second.other, rng).value;
            if (wn == -1 && we == -1) {
                psi.zpulse(j);
                fired++;
            }
        }
    }
    return fired;
}

std::vector<double> NonCliffordModel::run(Rng &rng) const {
    DenseState psi = DenseState::all_plus(lattice_->num_sites());
    std::vector<double> m;
    m.reserve(params_.steps + 1);
    m.push_back(psi.magnetization());
    for (uint32_t t = 0; t < params_.steps; t++) {
        step(psi, rng);
        m.push_back(psi.magnetization());
    }
    return m;
}

// ---------------------------------------------------------------------------
// Jump unraveling

std::string_view to_string(JumpVariant v) {
    switch (v) {
        case JumpVariant::CoherentNEC:
            return "CoherentNEC";
        case JumpVariant::IncoherentNEC:
            return "IncoherentNEC";
        case JumpVariant::MajorityVote5:
            return "MajorityVote5";
    }
    return "?";
}

std::optional<JumpVariant> parse_jump_variant(std::string_view text) {
    for (JumpVariant v : {JumpVariant::CoherentNEC, JumpVariant::IncoherentNEC, JumpVariant::MajorityVote5}) {
        if (to_string(v) == text) {
            return v;
        }
    }
    if (text == "coherent_nec") {
        return JumpVariant::CoherentNEC;
    }
    if (text == "incoherent_nec") {
        return JumpVariant::IncoherentNEC;
    }
    if (text == "majority_vote5") {
        return JumpVariant::MajorityVote5;
    }
    return std::nullopt;
}

void apply_jump_event(DenseState &psi, const Lattice &lattice, SiteId j, JumpVariant variant, Rng &rng) {
    switch (variant) {
        case JumpVariant::CoherentNEC: {
            auto targets = lattice.nec_targets(j);
            if (!targets) {
                return;
            }
            int wn = psi.measure_xx(targets->first.owner, targets->first.other, rng).value;
            int we = psi.measure_xx(targets->second.owner, targets->second.other, rng).value;
            if (wn == -1 && we == -1) {
                psi.zpulse(j);
            }
            return;
        }
        case JumpVariant::IncoherentNEC: {
            auto targets = lattice.nec_targets(j);
            if (!targets) {
                return;
            }
            int xc = psi.measure_x(j, rng).value;
            int xn = psi.measure_x(targets->first.other, rng).value;
            int xe = psi.measure_x(targets->second.other, rng).value;
            if (xc != xn && xc != xe) {
                psi.zpulse(j);
            }
            return;
        }
        case JumpVariant::MajorityVote5: {
            int xc = psi.measure_x(j, rng).value;
            int total = xc;
            for (SiteId k : lattice.neighbors(j)) {
                total += psi.measure_x(k, rng).value;
            }
            if (total != 0 && (total > 0 ? 1 : -1) != xc) {
                psi.zpulse(j);
            }
            return;
        }
    }
}

namespace {

JumpSample take_sample(const DenseState &psi, double t) {
    const auto &a = psi.amplitudes();
    Complex plus = 0;
    Complex minus = 0;
    for (size_t k = 0; k < a.size(); k++) {
        plus += a[k];
        minus += (std::popcount(k) & 1) ? -a[k] : a[k];
    }
    double scale = std::pow(2.0, -0.5 * static_cast<double>(psi.num_qubits()));
    return {t, psi.magnetization(), plus * scale, minus * scale};
}

}  // namespace

std::vector<JumpSample> jump_trajectory(DenseState &psi, const Lattice &lattice, const JumpParams &params, Rng &rng) {
    if (params.gamma < 0) {
        throw std::invalid_argument("jump rate gamma must be non-negative");
    }
    if (!(params.sample_dt > 0)) {
        throw std::invalid_argument("sample_dt must be positive");
    }
    if (psi.num_qubits() != lattice.num_sites()) {
        throw std::invalid_argument("state does not match the lattice");
    }
    uint32_t n = lattice.num_sites();
    std::vector<JumpSample> out;
    auto n_samples = static_cast<size_t>(std::floor(params.t_max / params.sample_dt + 1e-9)) + 1;
    std::vector<double> drive(n, params.drive_theta);
    size_t drive_count = 0;
    auto next_drive = [&]() {
        return params.drive_period > 0 ? (static_cast<double>(drive_count) + 1) * params.drive_period
                                       : std::numeric_limits<double>::infinity();
    };

    if (params.bernoulli_dt > 0) {
        double p = params.gamma * params.bernoulli_dt;
        if (p > 1) {
            throw std::invalid_argument("gamma * dt must not exceed 1 in fixed-step mode");
        }
        auto steps = static_cast<size_t>(std::llround(params.t_max / params.bernoulli_dt));
        auto per_sample = std::max<size_t>(1, static_cast<size_t>(std::llround(params.sample_dt / params.bernoulli_dt)));
        out.push_back(take_sample(psi, 0));
        for (size_t s = 1; s <= steps; s++) {
            double t = static_cast<double>(s) * params.bernoulli_dt;
            for (SiteId j = 0; j < n; j++) {
                if (uniform01(rng) < p) {
                    apply_jump_event(psi, lattice, j, params.variant, rng);
                }
            }
            while (next_drive() <= t + 1e-12) {
                psi.pulse_unitary(drive);
                drive_count++;
            }
            if (s % per_sample == 0) {
                out.push_back(take_sample(psi, t));
            }
        }
        return out;
    }

    auto waiting = [&]() {
        if (params.gamma == 0) {
            return std::numeric_limits<double>::infinity();
        }
        return -std::log1p(-uniform01(rng)) / params.gamma;
    };
    std::vector<double> next_event(n);
    for (SiteId j = 0; j < n; j++) {
        next_event[j] = waiting();
    }
    for (size_t s = 0; s < n_samples; s++) {
        double t_sample = static_cast<double>(s) * params.sample_dt;
        while (true) {
            auto it = std::min_element(next_event.begin(), next_event.end());
            double t_event = *it;
            double t_drive = next_drive();
            double t_next = std::min(t_event, t_drive);
            if (!(t_next <= t_sample)) {
                break;
            }
            if (t_drive <= t_event) {
                psi.pulse_unitary(drive);
                drive_count++;
            } else {
                auto j = static_cast<SiteId>(it - next_event.begin());
                apply_jump_event(psi, lattice, j, params.variant, rng);
                next_event[j] = t_event + waiting();
            }
        }
        out.push_back(take_sample(psi, t_sample));
    }
    return out;
}

CatCoherence cat_coherence(const DensityMatrix &rho) {
    size_t d = rho.dim();
    double scale = 1.0 / static_cast<double>(d);
    Complex pp = 0;
    Complex mm = 0;
    Complex pm = 0;
    for (size_t r = 0; r < d; r++) {
        double sr = (std::popcount(r) & 1) ? -1.0 : 1.0;
        for (size_t c = 0; c < d; c++) {
            double sc = (std::popcount(c) & 1) ? -1.0 : 1.0;
            Complex v = rho.at(r, c);
            pp += v;
            mm += sr * sc * v;
            pm += sc * v;
        }
    }
    return {pp.real() * scale, mm.real() * scale, std::abs(pm) * scale};
}

CatCoherence cat_coherence(const DenseState &psi) {
    JumpSample s = take_sample(psi, 0);
    return {std::norm(s.amp_plus), std::norm(s.amp_minus), std::abs(s.amp_plus * std::conj(s.amp_minus))};
}

CatCoherence cat_coherence(std::span<const JumpSample> samples) {
    if (samples.empty()) {
        throw std::invalid_argument("cat_coherence needs at least one sample");
    }
    double dp = 0;
    double dm = 0;
    Complex off = 0;
    for (const auto &s : samples) {
        dp += std::norm(s.amp_plus);
        dm += std::norm(s.amp_minus);
        off += s.amp_plus * std::conj(s.amp_minus);
    }
    double n = static_cast<double>(samples.size());
    return {dp / n, dm / n, std::abs(off) / n};
}

}  // namespace toomdtc
