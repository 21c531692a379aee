#include "sacc/grid.hpp"

#include <algorithm>
#include <numeric>

namespace sacc {

double SaliencyGrid::sum() const {
    return std::accumulate(values_.begin(), values_.end(), 0.0);
}

double SaliencyGrid::max_value() const {
    return values_.empty() ? 0.0 : *std::max_element(values_.begin(), values_.end());
}

void SaliencyGrid::normalize_sum_to_one() {
    const double s = sum();
    if (s <= 0.0)
        throw ValidationError("SaliencyGrid: cannot normalize an all-zero grid");
    for (double& v : values_)
        v /= s;
    norm_ = GridNorm::SumToOne;
}

} // namespace sacc
