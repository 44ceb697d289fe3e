#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "einplan/soap.hpp"
#include "einplan/tensor.hpp"

namespace einplan {

/// Cartesian process grid over named dimensions. Ranks are row-major with
/// the last dimension fastest.
struct ProcessGrid {
  std::vector<char> order;
  std::vector<std::int64_t> dims;

  std::int64_t total() const;
  std::int64_t rank_of(const std::vector<std::int64_t>& coords) const;
  std::vector<std::int64_t> coords_of(std::int64_t rank) const;
  int axis_of(char sym) const;  // -1 when absent
  std::int64_t dim_of(char sym) const;
};

/// Block distribution of an index space over a grid of the same order:
/// B_d = ceil(N_d / P_d). Every grid row owns at least one element
/// ((P_d - 1) * B_d < N_d); the last block per dimension may be ragged.
struct BlockDistribution {
  ProcessGrid grid;
  std::vector<std::int64_t> extents;
  std::vector<std::int64_t> blocks;

  std::vector<std::int64_t> base_of(const std::vector<std::int64_t>& coords) const;
  std::vector<std::int64_t> shape_of(const std::vector<std::int64_t>& coords) const;
};

BlockDistribution make_block_distribution(const ProcessGrid& grid,
                                          const std::vector<std::int64_t>& extents);

/// Distribution from explicit block sizes; the grid gets ceil(N_d / B_d)
/// rows per dimension, so the last block is ragged and never empty.
BlockDistribution block_distribution_from_blocks(
    const std::vector<char>& order, const std::vector<std::int64_t>& extents,
    const std::vector<std::int64_t>& blocks);

struct OwnerInfo {
  std::vector<std::int64_t> coords;   // p_d = floor(i_d / B_d)
  std::vector<std::int64_t> offsets;  // o_d = i_d mod B_d
  std::vector<std::int64_t> bases;    // b_d = B_d * p_d
};

OwnerInfo owner_of(const std::vector<std::int64_t>& index,
                   const BlockDistribution& dist);

/// Where one tensor lives on a term's grid: block-distributed over the grid
/// dimensions it is indexed by, replicated over the rest.
struct TensorPlacement {
  std::string tensor;
  std::string indices;
  ProcessGrid term_grid;
  std::vector<int> axes;    // term-grid axis per tensor dimension
  BlockDistribution dist;   // restricted to the tensor's dimensions

  std::int64_t replication() const;  // replicas per block
  std::vector<std::int64_t> block_coords_of(std::int64_t rank) const;
  std::vector<std::int64_t> replica_ranks(const std::vector<std::int64_t>& block) const;
  std::int64_t canonical_rank(const std::vector<std::int64_t>& block) const;
  bool is_canonical(std::int64_t rank) const;
};

TensorPlacement placement(const std::string& tensor, const std::string& indices,
                          const ProcessGrid& term_grid,
                          const std::map<char, std::int64_t>& extents);

/// Placement with an explicit restricted distribution (arbitrary block
/// sizes); the term grid must match its owner counts per tensor dimension.
TensorPlacement placement_with_dist(const std::string& tensor,
                                    const std::string& indices,
                                    const ProcessGrid& term_grid,
                                    const BlockDistribution& dist);

struct ReductionGroup {
  std::vector<char> dims;  // grid dimensions not indexing the output
  std::int64_t depth = 1;
};

ReductionGroup reduction_group(const std::string& output_indices,
                               const ProcessGrid& grid);

/// All factorizations of P over the statement's dimensions that leave no
/// empty owner row, scored by replicated input volume plus reduction volume;
/// ties prefer blocks close to the optimal tile ratios, then the
/// lexicographically smallest dims.
ProcessGrid choose_grid(const FusedStatement& stmt,
                        const std::map<char, double>& tiles, std::int64_t procs);

}  // namespace einplan
