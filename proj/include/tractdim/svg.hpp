#pragma once

#include <string>
#include <vector>

#include "tractdim/common.hpp"

namespace tractdim::svg {

struct Series {
    std::string label;
    std::vector<double> x, y;
};

/// Closed or open polylines in equal-aspect coordinates.
std::string curves(const std::vector<Polyline>& paths, const std::vector<bool>& closed, const std::string& title);

/// Line plot with a linear x axis. Non-finite points are skipped.
std::string plot(const std::vector<Series>& series, const std::string& title, const std::string& x_label,
                 const std::string& y_label, bool log_y = false);

}  // namespace tractdim::svg
