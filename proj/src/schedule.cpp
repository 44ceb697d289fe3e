#include "einplan/schedule.hpp"

#include <algorithm>

#include "einplan/error.hpp"

namespace einplan {

const TensorPlacement& TermPlan::placement_of(const std::string& tensor) const {
  for (const auto& p : placements)
    if (p.tensor == tensor) return p;
  fail(errc::invalid_argument, "term " + std::to_string(index) + " does not place \"" +
                                   tensor + "\"");
}

Schedule build_schedule(const ContractionTree& tree, const PartitionResult& partition,
                        const EinsumSpec& spec, std::int64_t procs) {
  for (const auto& stmt : partition.statements)
    for (int sid : stmt.step_ids)
      if (sid < 0 || sid >= static_cast<int>(tree.steps.size()))
        fail(errc::invalid_argument, "build_schedule: partition does not match the tree");

  Schedule sched;
  sched.procs = procs;

  for (std::size_t b = 0; b < partition.blocks.size(); ++b) {
    TermPlan term;
    term.index = static_cast<int>(b);
    term.statement = partition.statements[b];
    term.bound = partition.bounds[b];
    term.step_ids = term.statement.step_ids;
    term.grid = choose_grid(term.statement, term.bound.tiles, procs);
    for (std::size_t d = 0; d < term.grid.order.size(); ++d) {
      std::int64_t n = term.statement.extents.at(term.grid.order[d]);
      term.blocks[term.grid.order[d]] = (n + term.grid.dims[d] - 1) / term.grid.dims[d];
    }
    for (const auto& a : term.statement.arrays)
      term.placements.push_back(placement(a.tensor, a.indices, term.grid, spec.extents));
    const auto& out = term.placement_of(term.statement.output);
    term.reduction = reduction_group(out.indices, term.grid);
    sched.terms.push_back(std::move(term));
  }

  // Intermediates consumed by a later term move unless both the restricted
  // distribution and the replica rank sets carry over unchanged.
  for (std::size_t b = 0; b < sched.terms.size(); ++b) {
    for (const auto& a : sched.terms[b].statement.arrays) {
      if (a.tensor == sched.terms[b].statement.output) continue;
      int from = -1;
      for (std::size_t p = 0; p < b; ++p)
        if (sched.terms[p].statement.output == a.tensor) from = static_cast<int>(p);
      if (from < 0) continue;  // original input, staged by the executor

      const auto& src = sched.terms[static_cast<std::size_t>(from)].placement_of(a.tensor);
      const auto& dst = sched.terms[b].placement_of(a.tensor);
      bool same = src.dist.grid.dims == dst.dist.grid.dims &&
                  src.term_grid.order == dst.term_grid.order &&
                  src.term_grid.dims == dst.term_grid.dims;
      if (same) continue;

      RedistRecord rec;
      rec.tensor = a.tensor;
      rec.from_term = from;
      rec.to_term = static_cast<int>(b);
      rec.plan = plan_redistribution(a.tensor, src, dst);
      sched.redistributions.push_back(std::move(rec));
    }
  }
  return sched;
}

Pipeline make_pipeline(const EinsumSpec& spec, std::int64_t procs, double fast_mem) {
  Pipeline p;
  p.spec = spec;
  p.tree = optimal_path(spec);
  p.sdg = build_sdg(p.tree, spec);
  p.partition = best_partition(p.sdg, p.tree, spec, fast_mem);
  p.schedule = build_schedule(p.tree, p.partition, spec, procs);
  return p;
}

}  // namespace einplan
