#include "einplan/redistribute.hpp"

#include <algorithm>

#include "einplan/error.hpp"

namespace einplan {

DimPartition dim_partition(std::int64_t block_y, std::int64_t p_y,
                           std::int64_t block_x, std::int64_t extent) {
  if (block_x < 1 || block_y < 1)
    fail(errc::invalid_argument, "dim_partition: block sizes must be positive");
  const std::int64_t base = p_y * block_y;
  if (base < 0 || base >= extent)
    fail(errc::invalid_argument, "dim_partition: source block outside the extent");
  const std::int64_t local = std::min(block_y, extent - base);

  DimPartition part;
  part.xi = base / block_x;
  part.lambda = base % block_x;

  std::int64_t start = 0;
  std::int64_t step = 0;
  while (start < local) {
    std::int64_t len = (step == 0) ? std::min(block_x - part.lambda, local)
                                   : std::min(block_x, local - start);
    DimSegment seg;
    seg.p_x = part.xi + step;
    seg.oy_lo = start;
    seg.oy_hi = start + len;
    seg.ox_lo = (step == 0) ? part.lambda : 0;
    seg.ox_hi = seg.ox_lo + len;
    part.segments.push_back(seg);
    start += len;
    ++step;
  }
  return part;
}

std::pair<std::int64_t, std::int64_t> matching_ranks(std::int64_t p_x,
                                                     std::int64_t block_x,
                                                     std::int64_t block_y) {
  if (block_x < 1 || block_y < 1)
    fail(errc::invalid_argument, "matching_ranks: block sizes must be positive");
  auto ceil_div = [](std::int64_t a, std::int64_t b) { return (a + b - 1) / b; };
  std::int64_t lo = ceil_div(p_x * block_x + 1, block_y) - 1;
  std::int64_t hi = ceil_div((p_x + 1) * block_x, block_y);
  return {lo, hi};
}

RedistributionPlan plan_redistribution(const std::string& tensor,
                                       const TensorPlacement& source,
                                       const TensorPlacement& destination) {
  if (source.dist.extents != destination.dist.extents)
    fail(errc::invalid_argument,
         "plan: source and destination cover different index spaces for \"" + tensor +
             "\"");

  // Both grids draw ranks from one shared pool; a smaller grid simply uses a
  // prefix of it.
  const std::int64_t src_total = source.term_grid.total();

  RedistributionPlan plan;
  plan.tensor = tensor;
  plan.source = source;
  plan.destination = destination;

  const std::size_t nd = source.dist.extents.size();
  const auto& src = source.dist;
  const auto& dst = destination.dist;

  // Walk every source block; per dimension compute its destination segments,
  // then emit the Cartesian product of segments, fanned out over all
  // destination replicas.
  std::vector<std::int64_t> p_y(nd, 0);
  auto emit_block = [&]() {
    std::vector<DimPartition> parts;
    parts.reserve(nd);
    for (std::size_t d = 0; d < nd; ++d)
      parts.push_back(
          dim_partition(src.blocks[d], p_y[d], dst.blocks[d], src.extents[d]));

    std::vector<std::size_t> pick(nd, 0);
    for (;;) {
      std::vector<std::int64_t> p_x(nd);
      std::int64_t elements = 1;
      Message proto;
      for (std::size_t d = 0; d < nd; ++d) {
        const DimSegment& seg = parts[d].segments[pick[d]];
        p_x[d] = seg.p_x;
        proto.oy_lo.push_back(seg.oy_lo);
        proto.oy_hi.push_back(seg.oy_hi);
        proto.ox_lo.push_back(seg.ox_lo);
        proto.ox_hi.push_back(seg.ox_hi);
        elements *= seg.oy_hi - seg.oy_lo;
      }
      proto.src_block = p_y;
      proto.dst_block = p_x;
      proto.elements = elements;

      const std::int64_t canonical_src = source.canonical_rank(p_y);
      for (std::int64_t dst_rank : destination.replica_ranks(p_x)) {
        Message m = proto;
        m.dst_rank = dst_rank;
        // A destination rank that already holds the source block keeps the
        // data local.
        m.self = dst_rank < src_total && source.block_coords_of(dst_rank) == p_y;
        m.src_rank = m.self ? dst_rank : canonical_src;
        if (m.self) {
          ++plan.self_messages;
        } else {
          plan.transmitted_volume += m.elements;
          if (destination.is_canonical(dst_rank)) plan.logical_volume += m.elements;
        }
        plan.messages.push_back(std::move(m));
      }

      std::size_t d = nd;
      while (d > 0) {
        --d;
        if (++pick[d] < parts[d].segments.size()) break;
        pick[d] = 0;
        if (d == 0) return;
      }
      if (nd == 0) return;
    }
  };

  std::vector<std::int64_t> limit(nd);
  for (std::size_t d = 0; d < nd; ++d) limit[d] = src.grid.dims[d];
  std::vector<std::int64_t> it(nd, 0);
  for (;;) {
    p_y = it;
    emit_block();
    std::size_t d = nd;
    bool done = true;
    while (d > 0) {
      --d;
      if (++it[d] < limit[d]) {
        done = false;
        break;
      }
      it[d] = 0;
    }
    if (done || nd == 0) break;
  }
  return plan;
}

namespace {

void copy_ranges(const Message& m, const LocalBlock& src, LocalBlock& dst) {
  const std::size_t nd = m.oy_lo.size();
  auto src_strides = src.data.strides();
  auto dst_strides = dst.data.strides();
  std::vector<std::int64_t> oy(m.oy_lo), ox(m.ox_lo);
  for (;;) {
    std::int64_t so = 0, dof = 0;
    for (std::size_t d = 0; d < nd; ++d) {
      so += oy[d] * src_strides[d];
      dof += ox[d] * dst_strides[d];
    }
    dst.data.data[static_cast<std::size_t>(dof)] =
        src.data.data[static_cast<std::size_t>(so)];

    std::size_t d = nd;
    bool done = true;
    while (d > 0) {
      --d;
      ++oy[d];
      ++ox[d];
      if (oy[d] < m.oy_hi[d]) {
        done = false;
        break;
      }
      oy[d] = m.oy_lo[d];
      ox[d] = m.ox_lo[d];
    }
    if (done) break;
  }
}

}  // namespace

BlockMap apply_plan(const RedistributionPlan& plan, const BlockMap& source_blocks) {
  if (static_cast<std::int64_t>(source_blocks.size()) <
      plan.source.term_grid.total())
    fail(errc::invalid_argument, "apply_plan: source block map rank count mismatch");

  const std::int64_t procs = plan.destination.term_grid.total();
  BlockMap out(static_cast<std::size_t>(procs));
  for (std::int64_t r = 0; r < procs; ++r) {
    auto block = plan.destination.block_coords_of(r);
    out[static_cast<std::size_t>(r)].data =
        DenseTensor(plan.destination.dist.shape_of(block));
    out[static_cast<std::size_t>(r)].base = plan.destination.dist.base_of(block);
  }
  for (const auto& m : plan.messages) {
    const auto& src = source_blocks[static_cast<std::size_t>(m.src_rank)];
    if (src.data.data.empty() && m.elements > 0)
      fail(errc::invalid_argument, "apply_plan: missing source block on rank " +
                                       std::to_string(m.src_rank));
    copy_ranges(m, src, out[static_cast<std::size_t>(m.dst_rank)]);
  }
  return out;
}

}  // namespace einplan
