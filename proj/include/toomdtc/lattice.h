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

#ifndef TOOMDTC_LATTICE_H
#define TOOMDTC_LATTICE_H

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace toomdtc {

using SiteId = uint32_t;
inline constexpr SiteId kNoSite = UINT32_MAX;

enum class LatticeKind : uint8_t { SquarePeriodic, SquareOpen, AnnularTriangular };
enum class Direction : uint8_t { North = 0, East = 1, South = 2, West = 3 };
enum class Sublattice : uint8_t { A = 0, B = 1 };
enum class BondOrientation : uint8_t { North, East, Other };

std::string_view to_string(LatticeKind kind);
std::optional<LatticeKind> parse_lattice_kind(std::string_view text);
std::string_view to_string(BondOrientation o);

/// Unordered pair of adjacent sites. `owner` is the site whose North (or
/// East) bond this is; for `Other` bonds the endpoints are ordered low, high.
struct Bond {
    SiteId owner = kNoSite;
    SiteId other = kNoSite;
    BondOrientation orientation = BondOrientation::Other;

    bool operator==(const Bond &) const = default;
    bool touches(SiteId j) const {
        return owner == j || other == j;
    }
};

/// Position of a system qubit of the annular layout on the physical
/// triangular lattice: ring index, slot along the ring (0 <= position <
/// ring_length), and colour (1 = red half of the torus, 2 = green half).
struct AnnularPosition {
    uint32_t ring;
    uint32_t position;
    uint8_t colour;
};

/// Immutable lattice geometry.
///
/// Square kinds are indexed row-major, j = row * cols + col, with North the
/// direction of increasing row and East the direction of increasing column.
///
/// The annular kind is the two-sublattice triangular layout whose red and
/// green halves are stitched at the inner and outer rings. Dimensions are
/// (rings, ring_length); ring_length counts every physical slot of a ring
/// (system and ancilla) and must be divisible by 3. Each ring then holds
/// ring_length / 3 red and ring_length / 3 green system qubits, and site ids
/// run over (colour, ring, slot) in that nesting order. Dropping the purely
/// radial triangular bonds leaves a square lattice on a torus whose North
/// and East directions both advance along the ring.
class Lattice {
   public:
    static Lattice build(LatticeKind kind, uint32_t dim0, uint32_t dim1);
    static Lattice square_periodic(uint32_t rows, uint32_t cols) {
        return build(LatticeKind::SquarePeriodic, rows, cols);
    }
    static Lattice square_open(uint32_t rows, uint32_t cols) {
        return build(LatticeKind::SquareOpen, rows, cols);
    }
    static Lattice annular(uint32_t rings, uint32_t ring_length) {
        return build(LatticeKind::AnnularTriangular, rings, ring_length);
    }

    LatticeKind kind() const {
        return kind_;
    }
    std::pair<uint32_t, uint32_t> dims() const {
        return {dim0_, dim1_};
    }
    uint32_t num_sites() const {
        return static_cast<uint32_t>(sublattice_.size());
    }

    /// Neighbor in a direction, or kNoSite at an open boundary.
    SiteId neighbor(SiteId j, Direction d) const {
        return neighbors_[4 * j + static_cast<size_t>(d)];
    }
    /// Present neighbors in N, E, S, W order.
    std::vector<SiteId> neighbors(SiteId j) const;
    uint32_t degree(SiteId j) const;

    Sublattice sublattice(SiteId j) const {
        return sublattice_[j];
    }
    /// Sites of one sublattice in ascending index order.
    std::span<const SiteId> sites_in(Sublattice s) const {
        return s == Sublattice::A ? std::span<const SiteId>(sites_a_) : std::span<const SiteId>(sites_b_);
    }

    /// The (North, East) bonds measured by the NEC feedback at j; absent when
    /// either neighbor is missing.
    std::optional<std::pair<Bond, Bond>> nec_targets(SiteId j) const;
    /// Bonds incident to j in N, E, S, W order (present ones only).
    std::vector<Bond> majority_bonds(SiteId j) const;
    /// Every bond once, in ascending owner order, North before East.
    std::vector<Bond> bonds() const;

    /// (row, col) for square kinds.
    std::pair<uint32_t, uint32_t> coords(SiteId j) const;
    SiteId site_at(uint32_t row, uint32_t col) const;
    /// Physical placement for the annular kind.
    AnnularPosition annular_position(SiteId j) const;

    /// Structured-text description: kind, dims, site count and explicit bond
    /// list, one `bond <owner> <other> <orientation>` line per bond.
    std::string to_text() const;

   private:
    Lattice() = default;
    void finish();

    LatticeKind kind_ = LatticeKind::SquarePeriodic;
    uint32_t dim0_ = 0;
    uint32_t dim1_ = 0;
    std::vector<SiteId> neighbors_;
    std::vector<Sublattice> sublattice_;
    std::vector<SiteId> sites_a_;
    std::vector<SiteId> sites_b_;
    std::vector<AnnularPosition> annular_;
};

}  // namespace toomdtc

#endif
