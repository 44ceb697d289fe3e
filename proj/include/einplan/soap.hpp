#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "einplan/planner.hpp"

namespace einplan {

struct SdgVertex {
  enum class Role { input, intermediate, output };
  std::string name;
  Role role = Role::input;
  std::string indices;
  int step = -1;  // producing step, -1 for inputs
};

/// Data-flow graph of the contraction tree: one vertex per tensor, edges
/// from producers to consumers.
struct Sdg {
  std::vector<SdgVertex> vertices;              // id == tree operand id
  std::vector<std::pair<int, int>> edges;       // producer -> consumer vertex
  std::vector<int> non_input_ids() const;
  std::vector<int> consumers_of(int id) const;
};

Sdg build_sdg(const ContractionTree& tree, const EinsumSpec& spec);

/// All set partitions of the non-input vertices whose blocks are connected
/// subgraphs. At most 10 non-input vertices.
std::vector<std::vector<std::vector<int>>> enumerate_partitions(const Sdg& sdg);

struct AccessArray {
  std::string tensor;
  std::string indices;
};

/// One fused statement: the loop nest covering a connected block of
/// non-input vertices, with the arrays crossing the block boundary.
struct FusedStatement {
  std::vector<char> iteration;
  std::map<char, std::int64_t> extents;
  std::vector<AccessArray> arrays;  // external inputs, outputs, cross intermediates
  std::string output;               // the block's externally visible result
  std::vector<int> step_ids;
  double volume = 0.0;              // product of iteration extents
};

FusedStatement fuse(const std::vector<int>& block, const Sdg& sdg,
                    const ContractionTree& tree, const EinsumSpec& spec);

/// Maximize the tile volume prod_d t_d subject to
///   sum_arrays prod_{d in array} t_d <= budget,  1 <= t_d <= extent_d.
/// Solved in logarithmic variables to relative tolerance 1e-9.
std::map<char, double> max_tiles(const FusedStatement& stmt, double budget);

struct IoBound {
  double rho = 0.0;      // computational intensity; +inf when the statement
                         // fits in fast memory entirely
  double x0 = 0.0;       // critical computation size
  double q_bound = 0.0;  // minimum loads, volume / rho
  std::map<char, double> tiles;
  bool fits_fast_memory = false;
};

/// Minimize rho(X) = tile_volume(X) / (X - S) over X in (S, X_max] by a
/// one-dimensional search in log X; returns the intensity, the critical
/// size x0, the tiles at x0 and the load bound volume / rho.
IoBound intensity(const FusedStatement& stmt, double fast_mem);

struct PartitionResult {
  std::vector<std::vector<int>> blocks;
  std::vector<FusedStatement> statements;
  std::vector<IoBound> bounds;
  double total_q = 0.0;
  int partitions_considered = 0;
};

/// Evaluate every connected partition and return the one with the smallest
/// total load bound; ties prefer fewer blocks.
PartitionResult best_partition(const Sdg& sdg, const ContractionTree& tree,
                               const EinsumSpec& spec, double fast_mem);

}  // namespace einplan
