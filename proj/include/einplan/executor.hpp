#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "einplan/evaluate.hpp"
#include "einplan/schedule.hpp"

namespace einplan {

struct CommEvent {
  std::string kind;  // "allreduce" | "redistribute"
  int term = 0;
  std::string tensor;
  std::int64_t elements = 0;
};

struct CommStats {
  std::vector<CommEvent> events;
  std::int64_t allreduce_volume = 0;
  std::int64_t redistribute_volume = 0;
  std::vector<std::int64_t> per_rank_sent;  // elements each rank sends

  std::int64_t total() const { return allreduce_volume + redistribute_volume; }
  std::int64_t max_rank_sent() const;
};

struct SimulationReport {
  DenseTensor output;
  CommStats comm;
  bool verified = false;
  double max_error = 0.0;
  double tolerance = 0.0;
  bool pass = true;
  std::uint64_t seed = 0;
};

/// Distribute one global tensor: every rank receives the block matching its
/// grid coordinates (replicas included).
BlockMap scatter(const DenseTensor& global, const TensorPlacement& place);

/// Reassemble the global tensor from the canonical replica of each block.
DenseTensor gather(const BlockMap& blocks, const TensorPlacement& place);

/// Sum same-shaped partial blocks over each reduction sub-grid, in ascending
/// rank order; every member ends up with the sum. Returns the accounted
/// volume: block elements times (group size - 1), summed over groups.
std::int64_t allreduce(const TensorPlacement& place, const ReductionGroup& group,
                       BlockMap& blocks, std::vector<std::int64_t>& per_rank_sent);

/// Evaluate one tree step on a rank's local blocks over its local index
/// ranges. Operands are looked up by tensor name; the result is a fresh
/// zero-initialized block shaped by the rank's ranges of the result indices.
LocalBlock local_contract(const TermPlan& term, const EinsumSpec& spec,
                          const ContractionTree& tree, int step_id,
                          std::int64_t rank,
                          const std::map<std::string, const LocalBlock*>& operands);

struct RunOptions {
  bool verify = true;
  double tolerance = 1e-10;
  std::uint64_t seed = 0;
  bool corrupt_output = false;  // test hook: flips one output element
};

/// Execute the schedule over virtual ranks: scatter inputs, run local
/// contractions, reduce, redistribute, gather, and (optionally) compare
/// against the naive oracle.
SimulationReport run(const Schedule& schedule, const EinsumSpec& spec,
                     const ContractionTree& tree,
                     const std::vector<DenseTensor>& inputs, const RunOptions& opts);

}  // namespace einplan
