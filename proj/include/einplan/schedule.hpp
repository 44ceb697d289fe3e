#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "einplan/distribution.hpp"
#include "einplan/redistribute.hpp"
#include "einplan/soap.hpp"

namespace einplan {

/// One fused statement mapped onto a process grid: placements for everything
/// it touches, the local steps each rank executes, and the reduction group
/// of the partial output.
struct TermPlan {
  int index = 0;
  FusedStatement statement;
  IoBound bound;
  ProcessGrid grid;
  std::map<char, std::int64_t> blocks;
  std::vector<TensorPlacement> placements;  // every array incl. the output
  std::vector<int> step_ids;
  ReductionGroup reduction;

  const TensorPlacement& placement_of(const std::string& tensor) const;
};

struct RedistRecord {
  std::string tensor;
  int from_term = 0;
  int to_term = 0;
  RedistributionPlan plan;
};

struct Schedule {
  std::int64_t procs = 1;
  std::vector<TermPlan> terms;
  std::vector<RedistRecord> redistributions;
};

/// Map each partition block onto a grid, place every tensor, and record the
/// redistribution of intermediates whose placements change between terms.
Schedule build_schedule(const ContractionTree& tree, const PartitionResult& partition,
                        const EinsumSpec& spec, std::int64_t procs);

/// The whole planning pipeline for one bound kernel.
struct Pipeline {
  EinsumSpec spec;
  ContractionTree tree;
  Sdg sdg;
  PartitionResult partition;
  Schedule schedule;
};

Pipeline make_pipeline(const EinsumSpec& spec, std::int64_t procs, double fast_mem);

}  // namespace einplan
