#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "einplan/einsum.hpp"
#include "einplan/tensor.hpp"

namespace einplan {

enum class OpClass { KRP, TTM, TDOT, GEMM, OUTER, ELEMENTWISE };

const char* to_string(OpClass c);

/// One binary (or, for single-operand kernels, unary) contraction. Operand
/// ids refer to inputs (0..n_inputs-1) or earlier step results
/// (n_inputs + step index); rhs is -1 for unary steps.
struct ContractionStep {
  int lhs = -1;
  int rhs = -1;
  std::string lhs_indices;
  std::string rhs_indices;
  std::string result_indices;
  std::int64_t flops = 0;
  OpClass op_class = OpClass::TDOT;
};

struct ContractionTree {
  int n_inputs = 0;
  std::vector<ContractionStep> steps;
  std::int64_t total_flops = 0;

  int result_id(int step) const { return n_inputs + step; }
  /// "in3" for inputs, "t1" for intermediates, "out" for the final result.
  std::string tensor_name(int id) const;
  const std::string& indices_of(int id, const EinsumSpec& spec) const;
};

/// Iteration count of the step is the product of extents over the union of
/// lhs and rhs indices; each point costs 2 flops when the step sums away at
/// least one index, and 1 otherwise.
std::int64_t step_flops(const std::string& lhs_indices, const std::string& rhs_indices,
                        const std::string& result_indices,
                        const std::map<char, std::int64_t>& extents);

OpClass classify(const std::string& lhs_indices, const std::string& rhs_indices,
                 const std::string& result_indices);

/// Exhaustive subset dynamic program over all binary trees; globally
/// FLOP-minimal under the step cost model. Ties prefer smaller total
/// intermediate element count, then the lexicographically smallest step
/// sequence. At most 8 operands.
ContractionTree optimal_path(const EinsumSpec& spec);

/// Evaluate the tree step by step with the naive oracle.
DenseTensor evaluate_tree(const ContractionTree& tree, const EinsumSpec& spec,
                          const std::vector<DenseTensor>& operands);

}  // namespace einplan
