#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "einplan/distribution.hpp"
#include "einplan/tensor.hpp"

namespace einplan {

/// One contiguous piece of a source block that lands in a single
/// destination block: offsets o_y in [oy_lo, oy_hi) of source block p_y map
/// to offsets o_x in [ox_lo, ox_hi) of destination block p_x.
struct DimSegment {
  std::int64_t p_x = 0;
  std::int64_t oy_lo = 0, oy_hi = 0;
  std::int64_t ox_lo = 0, ox_hi = 0;
};

struct DimPartition {
  std::int64_t xi = 0;      // floor(p_y * B_y / B_x)
  std::int64_t lambda = 0;  // (p_y * B_y) mod B_x
  std::vector<DimSegment> segments;
};

/// Split source block p_y (blocks of B_y over extent N) into the segments
/// owned by consecutive destination blocks of size B_x. The final segment is
/// clamped to the ragged block end.
DimPartition dim_partition(std::int64_t block_y, std::int64_t p_y,
                           std::int64_t block_x, std::int64_t extent);

/// Half-open interval of source blocks p_y that overlap destination block
/// p_x (message matching).
std::pair<std::int64_t, std::int64_t> matching_ranks(std::int64_t p_x,
                                                     std::int64_t block_x,
                                                     std::int64_t block_y);

struct Message {
  std::int64_t src_rank = 0;
  std::int64_t dst_rank = 0;
  std::vector<std::int64_t> src_block, dst_block;  // per-dim block coords
  std::vector<std::int64_t> oy_lo, oy_hi, ox_lo, ox_hi;
  std::int64_t elements = 0;
  bool self = false;
};

struct RedistributionPlan {
  std::string tensor;
  TensorPlacement source;
  TensorPlacement destination;
  std::vector<Message> messages;
  std::int64_t transmitted_volume = 0;  // all non-self messages
  std::int64_t logical_volume = 0;      // non-self messages to the canonical replica
  std::int64_t self_messages = 0;
};

/// Exact message plan between two placements of the same tensor on grids
/// sharing one global rank numbering. The canonical source replica sends;
/// destination replicas that already hold the source block receive a
/// zero-cost self message.
RedistributionPlan plan_redistribution(const std::string& tensor,
                                       const TensorPlacement& source,
                                       const TensorPlacement& destination);

/// Local blocks of one tensor, indexed by global rank.
struct LocalBlock {
  DenseTensor data;
  std::vector<std::int64_t> base;
};
using BlockMap = std::vector<LocalBlock>;

/// Materialize destination blocks (one per rank) by executing the plan
/// against source blocks.
BlockMap apply_plan(const RedistributionPlan& plan, const BlockMap& source_blocks);

}  // namespace einplan
