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


#ifndef TOOMDTC_TESTS_TORUS_ORACLE_H
#define TOOMDTC_TESTS_TORUS_ORACLE_H

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <utility>
#include <vector>

#include "toomdtc/lattice.h"

namespace toomdtc::testing {

// Independent relabelling of a 4-regular N/E/S/W graph onto Z^2 / Lambda.
// Sites are reached from site 0 by unit moves; every site collects the Z^2
// points that land on it, and the differences generate Lambda. The lattice
// is a square torus iff the induced map Z^2/Lambda -> sites is a bijection
// that carries unit moves to neighbor links.
struct TorusLabel {
    // Reduced basis of Lambda in Hermite form: (a, 0), (b, c) with 0 <= b < a.
    int64_t a = 0, b = 0, c = 0;
    std::vector<std::pair<int64_t, int64_t>> point;  // one representative per site
};

inline int64_t floor_mod(int64_t v, int64_t m) {
    int64_t r = v % m;
    return r < 0 ? r + m : r;
}

inline std::optional<TorusLabel> relabel_torus(const Lattice &lat) {
    const int64_t dx[4] = {1, 0, -1, 0};  // North, East, South, West in (row, col)
    const int64_t dy[4] = {0, 1, 0, -1};
    uint32_t n = lat.num_sites();
    TorusLabel out;
    out.point.assign(n, {0, 0});
    std::vector<bool> seen(n, false);
    std::vector<std::pair<int64_t, int64_t>> periods;
    std::vector<SiteId> stack{0};
    seen[0] = true;
    while (!stack.empty()) {
        SiteId j = stack.back();
        stack.pop_back();
        for (int d = 0; d < 4; d++) {
            SiteId k = lat.neighbor(j, static_cast<Direction>(d));
            if (k == kNoSite) {
                return std::nullopt;
            }
            std::pair<int64_t, int64_t> p{out.point[j].first + dx[d], out.point[j].second + dy[d]};
            if (!seen[k]) {
                seen[k] = true;
                out.point[k] = p;
                stack.push_back(k);
            } else if (p != out.point[k]) {
                periods.emplace_back(p.first - out.point[k].first, p.second - out.point[k].second);
            }
        }
    }
    if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
        return std::nullopt;
    }
    // Hermite normal form of the period lattice by integer row reduction.
    // Column 1 first: gcd-reduce second coordinates.
    std::vector<std::pair<int64_t, int64_t>> rows = periods;
    std::pair<int64_t, int64_t> piv{0, 0};
    for (auto v : rows) {
        while (v.second != 0) {
            if (piv.second == 0) {
                std::swap(piv, v);
                continue;
            }
            int64_t q = v.second / piv.second;
            v.first -= q * piv.first;
            v.second -= q * piv.second;
            if (v.second != 0) {
                std::swap(piv, v);
            }
        }
        // v now has zero second coordinate: fold into a.
        out.a = std::gcd(out.a, v.first);
    }
    if (piv.second < 0) {
        piv = {-piv.first, -piv.second};
    }
    out.c = piv.second;
    if (out.a == 0 || out.c == 0) {
        return std::nullopt;
    }
    out.b = floor_mod(piv.first, out.a);
    return out;
}

// Canonical residue of (x, y) modulo Lambda.
inline std::pair<int64_t, int64_t> reduce(const TorusLabel &t, int64_t x, int64_t y) {
    int64_t k = (y - floor_mod(y, t.c)) / t.c;
    x -= k * t.b;
    y -= k * t.c;
    return {floor_mod(x, t.a), y};
}

inline bool is_square_torus(const Lattice &lat, TorusLabel *label_out = nullptr) {
    auto label = relabel_torus(lat);
    if (!label) {
        return false;
    }
    if (label->a * label->c != static_cast<int64_t>(lat.num_sites())) {
        return false;
    }
    std::map<std::pair<int64_t, int64_t>, SiteId> inverse;
    for (SiteId j = 0; j < lat.num_sites(); j++) {
        auto key = reduce(*label, label->point[j].first, label->point[j].second);
        if (!inverse.emplace(key, j).second) {
            return false;
        }
    }
    if (label_out) {
        *label_out = *label;
    }
    return true;
}

}  // namespace toomdtc::testing

#endif
