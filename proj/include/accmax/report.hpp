#pragma once

// Plain SVG rendering of frontiers and policy profiles.

#include <iosfwd>
#include <string>
#include <vector>

#include "accmax/frontier.hpp"

namespace accmax {

struct SvgSeries {
    std::string label;
    std::vector<std::pair<double, double>> points;  // (risk, mean)
    bool markers_only = false;
};

/// Risk on the horizontal axis, mean on the vertical axis.
void write_svg(const std::vector<SvgSeries>& series, const std::string& title, std::ostream& out);

/// One polyline per frontier plus one marker series per policy.
std::vector<SvgSeries> frontier_series(const FrontierSequence& seq, const std::vector<PolicyProfile>& profiles = {});

}  // namespace accmax
