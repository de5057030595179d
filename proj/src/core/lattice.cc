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

#include "toomdtc/lattice.h"

#include <deque>
#include <sstream>
#include <stdexcept>

namespace toomdtc {

std::string_view to_string(LatticeKind kind) {
    switch (kind) {
        case LatticeKind::SquarePeriodic:
            return "SquarePeriodic";
        case LatticeKind::SquareOpen:
            return "SquareOpen";
        case LatticeKind::AnnularTriangular:
            return "AnnularTriangular";
    }
    return "?";
}

std::optional<LatticeKind> parse_lattice_kind(std::string_view text) {
    if (text == "SquarePeriodic" || text == "square_periodic" || text == "periodic") {
        return LatticeKind::SquarePeriodic;
    }
    if (text == "SquareOpen" || text == "square_open" || text == "open") {
        return LatticeKind::SquareOpen;
    }
    if (text == "AnnularTriangular" || text == "annular_triangular" || text == "annular") {
        return LatticeKind::AnnularTriangular;
    }
    return std::nullopt;
}

std::string_view to_string(BondOrientation o) {
    switch (o) {
        case BondOrientation::North:
            return "North";
        case BondOrientation::East:
            return "East";
        case BondOrientation::Other:
            return "Other";
    }
    return "?";
}

namespace {

uint32_t mod(int64_t v, uint32_t m) {
    auto r = v % static_cast<int64_t>(m);
    return static_cast<uint32_t>(r < 0 ? r + m : r);
}

/// Slot offset (mod 3) of colour c in ring a: the positions b with
/// (a + 2b) % 3 == c.
uint32_t colour_offset(uint32_t ring, uint32_t colour) {
    return mod(2 * (static_cast<int64_t>(colour) - static_cast<int64_t>(ring % 3)), 3);
}

}  // namespace

Lattice Lattice::build(LatticeKind kind, uint32_t dim0, uint32_t dim1) {
    Lattice lat;
    lat.kind_ = kind;
    lat.dim0_ = dim0;
    lat.dim1_ = dim1;
    if (dim0 == 0 || dim1 == 0) {
        throw std::invalid_argument("lattice dimensions must be positive");
    }

    if (kind == LatticeKind::SquarePeriodic || kind == LatticeKind::SquareOpen) {
        bool periodic = kind == LatticeKind::SquarePeriodic;
        if (periodic && (dim0 < 3 || dim1 < 3)) {
            throw std::invalid_argument("periodic square lattices need both dimensions >= 3");
        }
        uint32_t rows = dim0;
        uint32_t cols = dim1;
        uint32_t n = rows * cols;
        lat.neighbors_.assign(4 * size_t{n}, kNoSite);
        lat.sublattice_.resize(n);
        for (uint32_t r = 0; r < rows; r++) {
            for (uint32_t c = 0; c < cols; c++) {
                SiteId j = r * cols + c;
                auto link = [&](Direction d, int64_t dr, int64_t dc) {
                    int64_t rr = r + dr;
                    int64_t cc = c + dc;
                    if (periodic) {
                        rr = mod(rr, rows);
                        cc = mod(cc, cols);
                    } else if (rr < 0 || cc < 0 || rr >= rows || cc >= cols) {
                        return;
                    }
                    lat.neighbors_[4 * j + static_cast<size_t>(d)] = static_cast<SiteId>(rr * cols + cc);
                };
                link(Direction::North, 1, 0);
                link(Direction::East, 0, 1);
                link(Direction::South, -1, 0);
                link(Direction::West, 0, -1);
                lat.sublattice_[j] = ((r + c) & 1) ? Sublattice::B : Sublattice::A;
            }
        }
        lat.finish();
        return lat;
    }

    // Annular triangular layout.
    uint32_t rings = dim0;
    uint32_t ring_length = dim1;
    if (ring_length % 3 != 0) {
        throw std::invalid_argument("annular ring_length must be divisible by 3 for the three-colouring to close");
    }
    uint32_t per_ring = ring_length / 3;
    if (rings < 2 || per_ring < 2) {
        throw std::invalid_argument("annular lattice needs >= 2 rings and ring_length >= 6");
    }
    uint32_t n = 2 * rings * per_ring;
    lat.neighbors_.assign(4 * size_t{n}, kNoSite);
    lat.annular_.resize(n);

    auto id_of = [&](uint32_t colour, uint32_t ring, int64_t position) -> SiteId {
        uint32_t b = mod(position, ring_length);
        uint32_t off = colour_offset(ring, colour);
        if (mod(static_cast<int64_t>(b) - off, 3) != 0) {
            throw std::logic_error("annular stitching landed on a slot of the wrong colour");
        }
        uint32_t slot = mod(static_cast<int64_t>(b) - off, ring_length) / 3;
        return ((colour - 1) * rings + ring) * per_ring + slot;
    };

    for (uint32_t colour = 1; colour <= 2; colour++) {
        for (uint32_t a = 0; a < rings; a++) {
            for (uint32_t q = 0; q < per_ring; q++) {
                uint32_t b = colour_offset(a, colour) + 3 * q;
                SiteId j = ((colour - 1) * rings + a) * per_ring + q;
                lat.annular_[j] = AnnularPosition{a, b, static_cast<uint8_t>(colour)};
                SiteId north;
                SiteId east;
                if (colour == 1) {
                    north = a + 1 < rings ? id_of(1, a + 1, b + 1) : id_of(2, rings - 1, b + 2);
                    east = a >= 1 ? id_of(1, a - 1, b + 2) : id_of(2, 0, b + 2);
                } else {
                    north = a >= 1 ? id_of(2, a - 1, b + 2) : id_of(1, 0, b + 1);
                    east = a + 1 < rings ? id_of(2, a + 1, b + 1) : id_of(1, rings - 1, b + 1);
                }
                lat.neighbors_[4 * j + 0] = north;
                lat.neighbors_[4 * j + 1] = east;
            }
        }
    }
    for (SiteId j = 0; j < n; j++) {
        for (int d = 0; d < 2; d++) {
            SiteId k = lat.neighbors_[4 * j + d];
            size_t back = 4 * size_t{k} + 2 + d;
            if (lat.neighbors_[back] != kNoSite) {
                throw std::logic_error("annular stitching is not a bijection");
            }
            lat.neighbors_[back] = j;
        }
    }

    // Two-colour the stitched square lattice by breadth-first search.
    lat.sublattice_.assign(n, Sublattice::A);
    std::vector<bool> seen(n, false);
    for (SiteId root = 0; root < n; root++) {
        if (seen[root]) {
            continue;
        }
        seen[root] = true;
        std::deque<SiteId> queue{root};
        while (!queue.empty()) {
            SiteId j = queue.front();
            queue.pop_front();
            for (int d = 0; d < 4; d++) {
                SiteId k = lat.neighbors_[4 * j + d];
                Sublattice want = lat.sublattice_[j] == Sublattice::A ? Sublattice::B : Sublattice::A;
                if (!seen[k]) {
                    seen[k] = true;
                    lat.sublattice_[k] = want;
                    queue.push_back(k);
                } else if (lat.sublattice_[k] != want) {
                    throw std::logic_error("annular square lattice is not bipartite");
                }
            }
        }
    }
    lat.finish();
    return lat;
}

void Lattice::finish() {
    sites_a_.clear();
    sites_b_.clear();
    for (SiteId j = 0; j < num_sites(); j++) {
        (sublattice_[j] == Sublattice::A ? sites_a_ : sites_b_).push_back(j);
    }
}

std::vector<SiteId> Lattice::neighbors(SiteId j) const {
    std::vector<SiteId> out;
    for (int d = 0; d < 4; d++) {
        SiteId k = neighbors_[4 * j + d];
        if (k != kNoSite) {
            out.push_back(k);
        }
    }
    return out;
}

uint32_t Lattice::degree(SiteId j) const {
    uint32_t k = 0;
    for (int d = 0; d < 4; d++) {
        k += neighbors_[4 * j + d] != kNoSite;
    }
    return k;
}

std::optional<std::pair<Bond, Bond>> Lattice::nec_targets(SiteId j) const {
    SiteId n = neighbor(j, Direction::North);
    SiteId e = neighbor(j, Direction::East);
    if (n == kNoSite || e == kNoSite) {
        return std::nullopt;
    }
    return std::pair{Bond{j, n, BondOrientation::North}, Bond{j, e, BondOrientation::East}};
}

std::vector<Bond> Lattice::majority_bonds(SiteId j) const {
    std::vector<Bond> out;
    if (SiteId k = neighbor(j, Direction::North); k != kNoSite) {
        out.push_back({j, k, BondOrientation::North});
    }
    if (SiteId k = neighbor(j, Direction::East); k != kNoSite) {
        out.push_back({j, k, BondOrientation::East});
    }
    if (SiteId k = neighbor(j, Direction::South); k != kNoSite) {
        out.push_back({k, j, BondOrientation::North});
    }
    if (SiteId k = neighbor(j, Direction::West); k != kNoSite) {
        out.push_back({k, j, BondOrientation::East});
    }
    return out;
}

std::vector<Bond> Lattice::bonds() const {
    std::vector<Bond> out;
    for (SiteId j = 0; j < num_sites(); j++) {
        if (SiteId k = neighbor(j, Direction::North); k != kNoSite) {
            out.push_back({j, k, BondOrientation::North});
        }
        if (SiteId k = neighbor(j, Direction::East); k != kNoSite) {
            out.push_back({j, k, BondOrientation::East});
        }
    }
    return out;
}

std::pair<uint32_t, uint32_t> Lattice::coords(SiteId j) const {
    if (kind_ == LatticeKind::AnnularTriangular) {
        uint32_t per_ring = dim1_ / 3;
        return {j / per_ring, j % per_ring};
    }
    return {j / dim1_, j % dim1_};
}

SiteId Lattice::site_at(uint32_t row, uint32_t col) const {
    if (kind_ == LatticeKind::AnnularTriangular) {
        throw std::invalid_argument("site_at is defined for square lattices only");
    }
    if (row >= dim0_ || col >= dim1_) {
        throw std::out_of_range("site coordinates outside the lattice");
    }
    return row * dim1_ + col;
}

AnnularPosition Lattice::annular_position(SiteId j) const {
    if (kind_ != LatticeKind::AnnularTriangular) {
        throw std::invalid_argument("annular_position requires an annular lattice");
    }
    return annular_.at(j);
}

std::string Lattice::to_text() const {
    std::ostringstream out;
    out << "kind " << to_string(kind_) << "\n";
    out << "dims " << dim0_ << " " << dim1_ << "\n";
    out << "sites " << num_sites() << "\n";
    for (const auto &b : bonds()) {
        out << "bond " << b.owner << " " << b.other << " " << to_string(b.orientation) << "\n";
    }
    return out.str();
}

}  // namespace toomdtc
