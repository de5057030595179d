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


#ifndef TOOMDTC_SVG_H
#define TOOMDTC_SVG_H

#include <optional>
#include <string>
#include <vector>

#include "toomdtc/analysis.h"

namespace toomdtc {

struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    /// Optional symmetric error bars.
    std::vector<double> err;
    bool markers = false;
};

struct PlotSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_y = false;
    std::vector<PlotSeries> series;
    /// Dashed vertical marker (e.g. a Binder crossing).
    std::optional<double> marker_x;
};

/// Self-contained SVG line plot. Non-finite and (with log_y) non-positive
/// points are skipped.
std::string line_plot_svg(const PlotSpec &spec);

std::string histogram_svg(const Histogram &h, const std::string &title, const std::string &x_label = "M");

}  // namespace toomdtc

#endif
