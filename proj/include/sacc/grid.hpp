#pragma once

#include <cstddef>
#include <vector>

#include "sacc/errors.hpp"

namespace sacc {

enum class GridNorm { Raw, SumToOne, MaxOne, ZScored };

/// W x H scalar field, row-major. The common currency for bottom-up
/// saliency, human fixation maps and model outputs.
class SaliencyGrid {
public:
    SaliencyGrid() = default;
    SaliencyGrid(int width, int height, double fill = 0.0)
        : width_(width), height_(height),
          values_(static_cast<std::size_t>(width) * height, fill) {
        if (width <= 0 || height <= 0)
            throw ValidationError("SaliencyGrid: dimensions must be positive");
    }

    int width() const { return width_; }
    int height() const { return height_; }
    std::size_t size() const { return values_.size(); }
    GridNorm normalization() const { return norm_; }

    double& at(int x, int y) { return values_[static_cast<std::size_t>(y) * width_ + x]; }
    double at(int x, int y) const { return values_[static_cast<std::size_t>(y) * width_ + x]; }
    double& operator[](std::size_t i) { return values_[i]; }
    double operator[](std::size_t i) const { return values_[i]; }

    std::vector<double>& values() { return values_; }
    const std::vector<double>& values() const { return values_; }

    bool in_bounds(double x, double y) const {
        return x >= 0.0 && x < width_ && y >= 0.0 && y < height_;
    }

    double sum() const;
    double max_value() const;

    /// Rescales in place so the values sum to one. Throws on all-zero input.
    void normalize_sum_to_one();
    void set_normalization(GridNorm n) { norm_ = n; }

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<double> values_;
    GridNorm norm_ = GridNorm::Raw;
};

} // namespace sacc
