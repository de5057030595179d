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

#include "toomdtc/pauli.h"

#include <stdexcept>

namespace toomdtc {

PauliString PauliString::from_text(std::string_view text) {
    bool sign = false;
    if (!text.empty() && (text[0] == '+' || text[0] == '-')) {
        sign = text[0] == '-';
        text.remove_prefix(1);
    }
    if (!text.empty() && text[0] == 'i') {
        throw std::invalid_argument("Pauli observable has an imaginary phase");
    }
    PauliString p(text.size());
    p.sign = sign;
    for (size_t q = 0; q < text.size(); q++) {
        p.set(q, text[q]);
    }
    return p;
}

PauliString PauliString::single(size_t n, size_t q, char c) {
    PauliString p(n);
    p.set(q, c);
    return p;
}

PauliString PauliString::pair(size_t n, size_t a, char pa, size_t b, char pb) {
    PauliString p(n);
    p.set(a, pa);
    p.set(b, pb);
    return p;
}

void PauliString::set(size_t q, char c) {
    if (q >= num_qubits) {
        throw std::out_of_range("Pauli qubit index out of range");
    }
    bool bx;
    bool bz;
    switch (c) {
        case 'I':
        case '_':
            bx = false;
            bz = false;
            break;
        case 'X':
            bx = true;
            bz = false;
            break;
        case 'Y':
            bx = true;
            bz = true;
            break;
        case 'Z':
            bx = false;
            bz = true;
            break;
        default:
            throw std::invalid_argument(std::string("not a Pauli character: '") + c + "'");
    }
    uint64_t m = uint64_t{1} << (q & 63);
    xs[q >> 6] = bx ? (xs[q >> 6] | m) : (xs[q >> 6] & ~m);
    zs[q >> 6] = bz ? (zs[q >> 6] | m) : (zs[q >> 6] & ~m);
}

char PauliString::at(size_t q) const {
    return "IXZY"[x(q) + 2 * z(q)];
}

bool PauliString::has_x() const {
    for (auto w : xs) {
        if (w) {
            return true;
        }
    }
    return false;
}

bool PauliString::is_identity() const {
    for (size_t w = 0; w < xs.size(); w++) {
        if (xs[w] | zs[w]) {
            return false;
        }
    }
    return true;
}

bool PauliString::commutes(const PauliString &other) const {
    uint64_t acc = 0;
    for (size_t w = 0; w < xs.size(); w++) {
        acc ^= (xs[w] & other.zs[w]) ^ (zs[w] & other.xs[w]);
    }
    return (std::popcount(acc) & 1) == 0;
}

uint8_t PauliString::inplace_right_mul(const PauliString &rhs) {
    if (rhs.num_qubits != num_qubits) {
        throw std::invalid_argument("Pauli strings have different lengths");
    }
    uint8_t log_i = mul_rows_log_i(xs.data(), zs.data(), rhs.xs.data(), rhs.zs.data(), xs.size());
    log_i = static_cast<uint8_t>((log_i + 2 * sign + 2 * rhs.sign) & 3);
    sign = log_i & 2;
    return log_i & 1;
}

std::string PauliString::str() const {
    std::string out;
    out.reserve(num_qubits + 1);
    out.push_back(sign ? '-' : '+');
    for (size_t q = 0; q < num_qubits; q++) {
        out.push_back(at(q));
    }
    return out;
}

bool PauliString::operator==(const PauliString &other) const {
    return num_qubits == other.num_qubits && sign == other.sign && xs == other.xs && zs == other.zs;
}

}  // namespace toomdtc
