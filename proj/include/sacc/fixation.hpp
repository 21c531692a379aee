#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace sacc {

struct FixationPoint {
    double x = 0.0; // column, 0 at left
    double y = 0.0; // row, 0 at top
    int index = 0;  // ordinal within trial
    std::optional<double> duration_ms;
};

struct FixationSequence {
    std::string observer_id;
    std::string image_id;
    std::string group_id;
    std::vector<FixationPoint> fixations;
    int width = 0;
    int height = 0;
};

/// A saccade between two consecutive fixations: amplitude in degrees of
/// visual angle, orientation in [0, 360) measured counterclockwise from
/// rightward with screen-up at 90 degrees.
struct SaccadeSample {
    double amplitude_deg = 0.0;
    double orientation_deg = 0.0;
};

/// Fraction of fixations falling inside each of 10 concentric crowns
/// around the image center, innermost first.
struct CrownHistogram {
    std::array<double, 10> shares{};
};

} // namespace sacc
