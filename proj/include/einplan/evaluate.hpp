#pragma once

#include <vector>

#include "einplan/einsum.hpp"
#include "einplan/tensor.hpp"

namespace einplan {

/// Reference evaluation: the output is zero-initialized and accumulated over
/// the full Cartesian iteration space of all index symbols. This is the
/// ground-truth oracle used by every other component.
DenseTensor naive_evaluate(const EinsumSpec& spec,
                           const std::vector<DenseTensor>& operands);

}  // namespace einplan
