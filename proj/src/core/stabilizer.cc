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

#include "toomdtc/stabilizer.h"

#include <algorithm>
#include <bit>
#include <cctype>
#include <sstream>
#include <stdexcept>

namespace toomdtc {

namespace {

inline bool get_bit(const uint64_t *row, size_t q) {
    return (row[q >> 6] >> (q & 63)) & 1;
}

inline void flip_bit(uint64_t *row, size_t q) {
    row[q >> 6] ^= uint64_t{1} << (q & 63);
}

// Inclusive prefix XOR within a word: bit j holds the parity of bits 0..j.
inline uint64_t prefix_xor(uint64_t v) {
    v ^= v << 1;
    v ^= v << 2;
    v ^= v << 4;
    v ^= v << 8;
    v ^= v << 16;
    v ^= v << 32;
    return v;
}

inline void put_bit(uint64_t *row, size_t q, bool v) {
    uint64_t m = uint64_t{1} << (q & 63);
    row[q >> 6] = v ? (row[q >> 6] | m) : (row[q >> 6] & ~m);
}

}  // namespace

std::string_view to_string(Gate g) {
    switch (g) {
        case Gate::X:
            return "X";
        case Gate::Y:
            return "Y";
        case Gate::Z:
            return "Z";
        case Gate::H:
            return "H";
        case Gate::S:
            return "S";
        case Gate::S_DAG:
            return "S_DAG";
        case Gate::CX:
            return "CX";
        case Gate::CZ:
            return "CZ";
        case Gate::ZPULSE:
            return "ZPULSE";
        case Gate::ZZHALF:
            return "ZZHALF";
    }
    return "?";
}

std::optional<Gate> parse_gate(std::string_view name) {
    static constexpr Gate all[] = {Gate::X,  Gate::Y,  Gate::Z,  Gate::H,      Gate::S,
                                   Gate::S_DAG, Gate::CX, Gate::CZ, Gate::ZPULSE, Gate::ZZHALF};
    // Case-insensitive, so `ZZHalf` and `s_dag` are accepted.
    auto same = [](std::string_view a, std::string_view b) {
        return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
                   return std::toupper(static_cast<unsigned char>(x)) == std::toupper(static_cast<unsigned char>(y));
               });
    };
    for (Gate g : all) {
        if (same(to_string(g), name)) {
            return g;
        }
    }
    return std::nullopt;
}

size_t gate_arity(Gate g) {
    return (g == Gate::CX || g == Gate::CZ || g == Gate::ZZHALF) ? 2 : 1;
}

StabilizerState::StabilizerState(size_t n)
    : n_(n), w_(words_for_bits(n)), x_(2 * n * w_, 0), z_(2 * n * w_, 0), sign_(2 * n, 0) {
    if (n == 0) {
        throw std::invalid_argument("stabilizer state needs at least one qubit");
    }
    for (size_t q = 0; q < n; q++) {
        flip_bit(xrow(q), q);
        flip_bit(zrow(n + q), q);
    }
}

StabilizerState StabilizerState::all_zero(size_t n) {
    return StabilizerState(n);
}

StabilizerState StabilizerState::all_plus(size_t n) {
    StabilizerState s(n);
    for (size_t q = 0; q < n; q++) {
        s.h(q);
    }
    return s;
}

StabilizerState StabilizerState::product_x(std::span<const int> signs) {
    StabilizerState s = all_plus(signs.size());
    for (size_t q = 0; q < signs.size(); q++) {
        if (signs[q] == -1) {
            s.z(q);
        } else if (signs[q] != 1) {
            throw std::invalid_argument("product_x signs must be +1 or -1");
        }
    }
    return s;
}

void StabilizerState::apply(Gate g, std::span<const uint32_t> targets) {
    size_t arity = gate_arity(g);
    if (targets.size() != arity) {
        throw std::invalid_argument("gate " + std::string(to_string(g)) + " takes " + std::to_string(arity) +
                                    " target(s)");
    }
    for (auto t : targets) {
        if (t >= n_) {
            throw std::out_of_range("gate target out of range");
        }
    }
    if (arity == 2 && targets[0] == targets[1]) {
        throw std::invalid_argument("gate targets must be distinct");
    }
    switch (g) {
        case Gate::X:
            x(targets[0]);
            break;
        case Gate::Y:
            y(targets[0]);
            break;
        case Gate::Z:
        case Gate::ZPULSE:
            z(targets[0]);
            break;
        case Gate::H:
            h(targets[0]);
            break;
        case Gate::S:
            s(targets[0]);
            break;
        case Gate::S_DAG:
            s_dag(targets[0]);
            break;
        case Gate::CX:
            cx(targets[0], targets[1]);
            break;
        case Gate::CZ:
            cz(targets[0], targets[1]);
            break;
        case Gate::ZZHALF:
            zz_half(targets[0], targets[1]);
            break;
    }
}

PauliString StabilizerState::row(size_t r) const {
    PauliString p(n_);
    std::copy_n(xrow(r), w_, p.xs.begin());
    std::copy_n(zrow(r), w_, p.zs.begin());
    p.sign = sign_[r];
    return p;
}

bool StabilizerState::row_has_x(size_t r) const {
    const uint64_t *xr = xrow(r);
    for (size_t w = 0; w < w_; w++) {
        if (xr[w]) {
            return true;
        }
    }
    return false;
}

uint8_t StabilizerState::mul_row(size_t r, size_t s) {
    uint8_t l = mul_rows_log_i(xrow(r), zrow(r), xrow(s), zrow(s), w_);
    return static_cast<uint8_t>((l + 2 * sign_[r] + 2 * sign_[s]) & 3);
}

void StabilizerState::set_row_sign_from_log_i(size_t r, uint8_t log_i) {
    if (log_i & 1) {
        throw std::logic_error("tableau row acquired an imaginary phase");
    }
    sign_[r] = (log_i >> 1) & 1;
}

void StabilizerState::swap_rows(size_t r, size_t s) {
    std::swap_ranges(xrow(r), xrow(r) + w_, xrow(s));
    std::swap_ranges(zrow(r), zrow(r) + w_, zrow(s));
    std::swap(sign_[r], sign_[s]);
}

void StabilizerState::x(size_t q) {
    sign_[n_ + q] ^= 1;
}

void StabilizerState::y(size_t q) {
    sign_[q] ^= 1;
    sign_[n_ + q] ^= 1;
}

void StabilizerState::z(size_t q) {
    sign_[q] ^= 1;
}

void StabilizerState::h(size_t q) {
    swap_rows(q, n_ + q);
}

void StabilizerState::s(size_t q) {
    // S^dag X S = -Y = -i X Z.
    set_row_sign_from_log_i(q, static_cast<uint8_t>((mul_row(q, n_ + q) + 3) & 3));
}

void StabilizerState::s_dag(size_t q) {
    // S X S^dag = Y = i X Z.
    set_row_sign_from_log_i(q, static_cast<uint8_t>((mul_row(q, n_ + q) + 1) & 3));
}

void StabilizerState::cx(size_t c, size_t t) {
    set_row_sign_from_log_i(c, mul_row(c, t));
    set_row_sign_from_log_i(n_ + t, mul_row(n_ + t, n_ + c));
}

void StabilizerState::cz(size_t a, size_t b) {
    set_row_sign_from_log_i(a, mul_row(a, n_ + b));
    set_row_sign_from_log_i(b, mul_row(b, n_ + a));
}

void StabilizerState::zz_half(size_t a, size_t b) {
    // U^dag X_a U = -i X_a Z_a Z_b and U^dag X_b U = -i X_b Z_b Z_a.
    for (auto [p, q] : {std::pair{a, b}, std::pair{b, a}}) {
        unsigned l = 3 + 2 * (sign_[p] + sign_[n_ + p] + sign_[n_ + q]);
        l += mul_rows_log_i(xrow(p), zrow(p), xrow(n_ + p), zrow(n_ + p), w_);
        l += mul_rows_log_i(xrow(p), zrow(p), xrow(n_ + q), zrow(n_ + q), w_);
        set_row_sign_from_log_i(p, static_cast<uint8_t>(l & 3));
    }
}

void StabilizerState::multiply_into(PauliString &acc, uint8_t &log_i, size_t r) const {
    log_i = static_cast<uint8_t>(
        (log_i + 2 * sign_[r] + mul_rows_log_i(acc.xs.data(), acc.zs.data(), xrow(r), zrow(r), w_)) & 3);
}

PauliString StabilizerState::image(const PauliString &p) const {
    if (p.num_qubits != n_) {
        throw std::invalid_argument("Pauli string length does not match the state");
    }
    PauliString acc(n_);
    uint8_t log_i = p.sign ? 2 : 0;
    for (size_t q = 0; q < n_; q++) {
        bool bx = p.x(q);
        bool bz = p.z(q);
        if (bx) {
            multiply_into(acc, log_i, q);
        }
        if (bz) {
            multiply_into(acc, log_i, n_ + q);
        }
        if (bx && bz) {
            // Y = i X Z.
            log_i = static_cast<uint8_t>((log_i + 1) & 3);
        }
    }
    if (log_i & 1) {
        throw std::logic_error("image of a Hermitian Pauli acquired an imaginary phase");
    }
    acc.sign = log_i & 2;
    return acc;
}

void StabilizerState::in_cx_fanout(size_t c, const std::vector<uint64_t> &targets, PauliString &q) {
    // Equivalent to one CX(c, t) per target in ascending order; step i sees
    // z_c flipped by the z bits of the earlier targets.
    auto update = [&](uint64_t *xr, uint64_t *zr, uint8_t &sign) {
        bool xc = get_bit(xr, c);
        uint64_t before = get_bit(zr, c) ? ~uint64_t{0} : 0;
        uint64_t par = 0;
        unsigned odd = 0;
        for (size_t w = 0; w < w_; w++) {
            uint64_t m = targets[w];
            if (!m) {
                continue;
            }
            uint64_t zt = zr[w] & m;
            if (xc) {
                uint64_t incl = prefix_xor(zt);
                uint64_t zc = before ^ (incl << 1) ^ (par ? ~uint64_t{0} : 0);
                odd += static_cast<unsigned>(std::popcount(zt & ~(xr[w] ^ zc)));
                xr[w] ^= m;
            }
            par ^= static_cast<uint64_t>(std::popcount(zt) & 1);
        }
        sign ^= static_cast<uint8_t>(odd & 1);
        if (par) {
            flip_bit(zr, c);
        }
    };
    for (size_t r = 0; r < 2 * n_; r++) {
        update(xrow(r), zrow(r), sign_[r]);
    }
    uint8_t qs = q.sign;
    update(q.xs.data(), q.zs.data(), qs);
    q.sign = qs;
}

void StabilizerState::in_h(size_t p, PauliString &q) {
    auto update = [&](uint64_t *xr, uint64_t *zr, uint8_t &sign) {
        bool bx = get_bit(xr, p);
        bool bz = get_bit(zr, p);
        sign ^= static_cast<uint8_t>(bx && bz);
        put_bit(xr, p, bz);
        put_bit(zr, p, bx);
    };
    for (size_t r = 0; r < 2 * n_; r++) {
        update(xrow(r), zrow(r), sign_[r]);
    }
    uint8_t qs = q.sign;
    update(q.xs.data(), q.zs.data(), qs);
    q.sign = qs;
}

void StabilizerState::in_h_yz(size_t p, PauliString &q) {
    auto update = [&](uint64_t *xr, uint64_t *zr, uint8_t &sign) {
        bool bx = get_bit(xr, p);
        bool bz = get_bit(zr, p);
        sign ^= static_cast<uint8_t>(bx && !bz);
        put_bit(xr, p, bx != bz);
    };
    for (size_t r = 0; r < 2 * n_; r++) {
        update(xrow(r), zrow(r), sign_[r]);
    }
    uint8_t qs = q.sign;
    update(q.xs.data(), q.zs.data(), qs);
    q.sign = qs;
}

void StabilizerState::in_x(size_t p, PauliString &q) {
    for (size_t r = 0; r < 2 * n_; r++) {
        sign_[r] ^= static_cast<uint8_t>(get_bit(zrow(r), p));
    }
    q.sign ^= q.z(p);
}

MeasurementOutcome StabilizerState::collapse(PauliString q, Rng &rng) {
    if (!q.has_x()) {
        return {q.sign ? -1 : +1, true};
    }
    size_t pivot = SIZE_MAX;
    for (size_t w = 0; w < w_ && pivot == SIZE_MAX; w++) {
        if (q.xs[w]) {
            pivot = (w << 6) + static_cast<size_t>(std::countr_zero(q.xs[w]));
        }
    }
    // Isolate the anti-commuting component on the pivot with CNOTs whose
    // control is |0> at the start of time, so the state is unchanged.
    std::vector<uint64_t> targets(q.xs.begin(), q.xs.end());
    targets[pivot >> 6] &= ~(uint64_t{1} << (pivot & 63));
    if (std::any_of(targets.begin(), targets.end(), [](uint64_t v) { return v != 0; })) {
        in_cx_fanout(pivot, targets, q);
    }
    if (q.z(pivot)) {
        in_h_yz(pivot, q);
    } else {
        in_h(pivot, q);
    }
    bool minus = !(uniform01(rng) < 0.5);
    if (q.sign != minus) {
        in_x(pivot, q);
    }
    return {minus ? -1 : +1, false};
}

MeasurementOutcome StabilizerState::measure(const PauliString &p, Rng &rng) {
    return collapse(image(p), rng);
}

MeasurementOutcome StabilizerState::measure_x(size_t q, Rng &rng) {
    if (!row_has_x(q)) {
        return {sign_[q] ? -1 : +1, true};
    }
    return collapse(row(q), rng);
}

MeasurementOutcome StabilizerState::measure_xx(size_t a, size_t b, Rng &rng) {
    PauliString acc = row(a);
    uint8_t log_i = acc.sign ? 2 : 0;
    acc.sign = false;
    multiply_into(acc, log_i, b);
    if (log_i & 1) {
        throw std::logic_error("image of X X acquired an imaginary phase");
    }
    acc.sign = log_i & 2;
    return collapse(std::move(acc), rng);
}

void StabilizerState::reset_plus(size_t q, Rng &rng) {
    if (measure_x(q, rng).value == -1) {
        z(q);
    }
}

void StabilizerState::depolarize(size_t q, double p, Rng &rng) {
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

int StabilizerState::expect_x(size_t q) const {
    if (row_has_x(q)) {
        return 0;
    }
    return sign_[q] ? -1 : +1;
}

int64_t StabilizerState::sum_expect_x() const {
    int64_t total = 0;
    for (size_t q = 0; q < n_; q++) {
        total += expect_x(q);
    }
    return total;
}

std::optional<int> StabilizerState::peek(const PauliString &p) const {
    PauliString q = image(p);
    if (q.has_x()) {
        return std::nullopt;
    }
    return q.sign ? -1 : +1;
}

namespace {

/// Fix the sign of a forward generator so that its image is +target.
void fix_sign(const StabilizerState &s, PauliString &f, const PauliString &target) {
    f.sign = false;
    PauliString img = s.image(f);
    PauliString unsigned_img = img;
    unsigned_img.sign = false;
    if (unsigned_img != target) {
        throw std::logic_error("tableau inversion produced an inconsistent generator");
    }
    f.sign = img.sign;
}

}  // namespace

std::vector<PauliString> StabilizerState::stabilizers(bool canonical) const {
    std::vector<PauliString> out;
    out.reserve(n_);
    for (size_t i = 0; i < n_; i++) {
        PauliString f(n_);
        for (size_t j = 0; j < n_; j++) {
            put_bit(f.xs.data(), j, get_bit(xrow(n_ + j), i));
            put_bit(f.zs.data(), j, get_bit(xrow(j), i));
        }
        fix_sign(*this, f, PauliString::single(n_, i, 'Z'));
        out.push_back(std::move(f));
    }
    if (!canonical) {
        return out;
    }
    size_t min_pivot = 0;
    for (size_t q = 0; q < n_; q++) {
        for (int kind = 0; kind < 2; kind++) {
            auto has = [&](const PauliString &p) { return kind == 0 ? p.x(q) : p.z(q); };
            size_t pivot = min_pivot;
            while (pivot < n_ && !has(out[pivot])) {
                pivot++;
            }
            if (pivot == n_) {
                continue;
            }
            for (size_t r = 0; r < n_; r++) {
                if (r != pivot && has(out[r])) {
                    if (out[r].inplace_right_mul(out[pivot])) {
                        throw std::logic_error("stabilizer generators failed to commute");
                    }
                }
            }
            if (pivot != min_pivot) {
                std::swap(out[pivot], out[min_pivot]);
            }
            min_pivot++;
        }
    }
    return out;
}

std::vector<PauliString> StabilizerState::destabilizers() const {
    std::vector<PauliString> out;
    out.reserve(n_);
    for (size_t i = 0; i < n_; i++) {
        PauliString f(n_);
        for (size_t j = 0; j < n_; j++) {
            put_bit(f.xs.data(), j, get_bit(zrow(n_ + j), i));
            put_bit(f.zs.data(), j, get_bit(zrow(j), i));
        }
        fix_sign(*this, f, PauliString::single(n_, i, 'X'));
        out.push_back(std::move(f));
    }
    return out;
}

std::string StabilizerState::dump(bool canonical) const {
    std::string out;
    for (const auto &p : stabilizers(canonical)) {
        out += p.str();
        out += '\n';
    }
    return out;
}

std::string StabilizerState::audit() const {
    std::vector<PauliString> rows;
    rows.reserve(2 * n_);
    for (size_t r = 0; r < 2 * n_; r++) {
        rows.push_back(row(r));
    }
    for (size_t r = 0; r < 2 * n_; r++) {
        for (size_t s = r + 1; s < 2 * n_; s++) {
            bool should_anticommute = s == r + n_;
            if (rows[r].commutes(rows[s]) == should_anticommute) {
                std::ostringstream msg;
                msg << "tableau rows " << r << " and " << s << (should_anticommute ? " commute" : " anti-commute");
                return msg.str();
            }
        }
    }
    return {};
}

bool StabilizerState::operator==(const StabilizerState &other) const {
    return n_ == other.n_ && x_ == other.x_ && z_ == other.z_ && sign_ == other.sign_;
}

}  // namespace toomdtc
