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

#ifndef TOOMDTC_PAULI_H
#define TOOMDTC_PAULI_H

#include <bit>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace toomdtc {

inline size_t words_for_bits(size_t n) {
    return (n + 63) >> 6;
}

/// Multiplies the Pauli row (x1, z1) by (x2, z2) in place, ignoring signs,
/// and returns the power of i picked up by the product. Rows use the
/// convention (1,0)=X, (0,1)=Z, (1,1)=Y.
///
/// Anti-commuting positions are tallied in a pair of bit-sliced mod-4
/// counters so each word costs a handful of logic ops.
inline uint8_t mul_rows_log_i(uint64_t *x1, uint64_t *z1, const uint64_t *x2, const uint64_t *z2, size_t words) {
    uint64_t cnt1 = 0;
    uint64_t cnt2 = 0;
    for (size_t w = 0; w < words; w++) {
        uint64_t old_x1 = x1[w];
        uint64_t old_z1 = z1[w];
        uint64_t nx = old_x1 ^ x2[w];
        uint64_t nz = old_z1 ^ z2[w];
        x1[w] = nx;
        z1[w] = nz;
        uint64_t x1z2 = old_x1 & z2[w];
        uint64_t anti = (x2[w] & old_z1) ^ x1z2;
        cnt2 ^= (cnt1 ^ nx ^ nz ^ x1z2) & anti;
        cnt1 ^= anti;
    }
    return static_cast<uint8_t>((std::popcount(cnt1) + 2 * std::popcount(cnt2)) & 3);
}

/// Hermitian Pauli product on n qubits with a sign bit.
struct PauliString {
    size_t num_qubits = 0;
    bool sign = false;
    std::vector<uint64_t> xs;
    std::vector<uint64_t> zs;

    PauliString() = default;
    explicit PauliString(size_t n) : num_qubits(n), xs(words_for_bits(n), 0), zs(words_for_bits(n), 0) {
    }

    /// Parses `+XYZ_I`, `-IZZ`, `XX` (underscore and I both mean identity).
    /// Imaginary prefixes (`i`, `+i`, `-i`) are rejected: they do not name
    /// an observable.
    static PauliString from_text(std::string_view text);
    /// Single non-identity factor `p` in {'X','Y','Z'} on qubit q.
    static PauliString single(size_t n, size_t q, char p);
    static PauliString pair(size_t n, size_t a, char pa, size_t b, char pb);

    bool x(size_t q) const {
        return (xs[q >> 6] >> (q & 63)) & 1;
    }
    bool z(size_t q) const {
        return (zs[q >> 6] >> (q & 63)) & 1;
    }
    void set(size_t q, char p);
    char at(size_t q) const;

    bool has_x() const;
    bool is_identity() const;
    bool commutes(const PauliString &other) const;

    /// *this = *this * rhs. Returns the log_i of the scalar left over after
    /// folding signs into the result; 0 or 2 are absorbed into the sign, odd
    /// values are returned for the caller to handle.
    uint8_t inplace_right_mul(const PauliString &rhs);

    /// `+XYZ` style text, identity written as `I`.
    std::string str() const;

    bool operator==(const PauliString &other) const;
    bool operator!=(const PauliString &other) const {
        return !(*this == other);
    }
};

}  // namespace toomdtc

#endif
