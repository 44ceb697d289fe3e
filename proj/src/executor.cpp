#include "einplan/executor.hpp"

#include <algorithm>

#include "einplan/error.hpp"

namespace einplan {

std::int64_t CommStats::max_rank_sent() const {
  std::int64_t m = 0;
  for (auto v : per_rank_sent) m = std::max(m, v);
  return m;
}

namespace {

template <typename Fn>
void for_block_offsets(const DenseTensor& global, const std::vector<std::int64_t>& base,
                       const DenseTensor& block, Fn&& fn) {
  const std::size_t nd = block.shape.size();
  auto gstrides = global.strides();
  auto bstrides = block.strides();
  std::vector<std::int64_t> idx(nd, 0);
  for (;;) {
    std::int64_t goff = 0, boff = 0;
    for (std::size_t d = 0; d < nd; ++d) {
      goff += (base[d] + idx[d]) * gstrides[d];
      boff += idx[d] * bstrides[d];
    }
    fn(static_cast<std::size_t>(goff), static_cast<std::size_t>(boff));

    std::size_t d = nd;
    bool done = true;
    while (d > 0) {
      --d;
      if (++idx[d] < block.shape[d]) {
        done = false;
        break;
      }
      idx[d] = 0;
    }
    if (done) break;
  }
}

}  // namespace

BlockMap scatter(const DenseTensor& global, const TensorPlacement& place) {
  if (global.shape != place.dist.extents)
    fail(errc::invalid_argument,
         "scatter: tensor shape does not match the placement for \"" + place.tensor +
             "\"");
  const std::int64_t procs = place.term_grid.total();
  BlockMap blocks(static_cast<std::size_t>(procs));
  for (std::int64_t r = 0; r < procs; ++r) {
    auto bc = place.block_coords_of(r);
    LocalBlock& lb = blocks[static_cast<std::size_t>(r)];
    lb.base = place.dist.base_of(bc);
    lb.data = DenseTensor(place.dist.shape_of(bc));
    for_block_offsets(global, lb.base, lb.data, [&](std::size_t g, std::size_t b) {
      lb.data.data[b] = global.data[g];
    });
  }
  return blocks;
}

DenseTensor gather(const BlockMap& blocks, const TensorPlacement& place) {
  DenseTensor global(place.dist.extents);
  const std::int64_t procs = place.term_grid.total();
  for (std::int64_t r = 0; r < procs; ++r) {
    if (!place.is_canonical(r)) continue;
    const LocalBlock& lb = blocks[static_cast<std::size_t>(r)];
    for_block_offsets(global, lb.base, lb.data, [&](std::size_t g, std::size_t b) {
      global.data[g] = lb.data.data[b];
    });
  }
  return global;
}

std::int64_t allreduce(const TensorPlacement& place, const ReductionGroup& group,
                       BlockMap& blocks, std::vector<std::int64_t>& per_rank_sent) {
  if (group.depth <= 1) return 0;
  const std::int64_t procs = place.term_grid.total();
  std::map<std::vector<std::int64_t>, std::vector<std::int64_t>> groups;
  for (std::int64_t r = 0; r < procs; ++r)
    groups[place.block_coords_of(r)].push_back(r);

  std::int64_t volume = 0;
  for (auto& [block, members] : groups) {
    const auto& first = blocks[static_cast<std::size_t>(members.front())].data;
    std::vector<double> acc(first.data.size(), 0.0);
    for (std::int64_t r : members) {
      const auto& b = blocks[static_cast<std::size_t>(r)].data;
      if (b.shape != first.shape)
        fail(errc::invalid_argument, "allreduce: shape divergence within a group of \"" +
                                         place.tensor + "\"");
      for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += b.data[i];
    }
    const std::int64_t elems = static_cast<std::int64_t>(acc.size());
    for (std::int64_t r : members) {
      std::copy(acc.begin(), acc.end(),
                blocks[static_cast<std::size_t>(r)].data.data.begin());
      per_rank_sent[static_cast<std::size_t>(r)] += elems;
    }
    volume += elems * (static_cast<std::int64_t>(members.size()) - 1);
  }
  return volume;
}

namespace {

std::int64_t local_lo(const TermPlan& term, char sym, std::int64_t rank) {
  int axis = term.grid.axis_of(sym);
  auto coords = term.grid.coords_of(rank);
  return coords[static_cast<std::size_t>(axis)] * term.blocks.at(sym);
}

std::int64_t local_len(const TermPlan& term, const EinsumSpec& spec, char sym,
                       std::int64_t rank) {
  std::int64_t lo = local_lo(term, sym, rank);
  return std::min(term.blocks.at(sym), spec.extent(sym) - lo);
}

}  // namespace

LocalBlock local_contract(const TermPlan& term, const EinsumSpec& spec,
                          const ContractionTree& tree, int step_id,
                          std::int64_t rank,
                          const std::map<std::string, const LocalBlock*>& operands) {
  const auto& step = tree.steps[static_cast<std::size_t>(step_id)];
  auto operand_of = [&](int id) -> const LocalBlock* {
    auto it = operands.find(tree.tensor_name(id));
    if (it == operands.end() || it->second == nullptr)
      fail(errc::invalid_argument,
           "local_contract: missing operand block \"" + tree.tensor_name(id) + "\"");
    return it->second;
  };
  EinsumSpec sub;
  sub.inputs.push_back(step.lhs_indices);
  std::vector<DenseTensor> ops;
  ops.push_back(operand_of(step.lhs)->data);
  if (step.rhs >= 0) {
    sub.inputs.push_back(step.rhs_indices);
    ops.push_back(operand_of(step.rhs)->data);
  }
  sub.output = step.result_indices;
  for (char c : step.lhs_indices) sub.extents[c] = local_len(term, spec, c, rank);
  for (char c : step.rhs_indices) sub.extents[c] = local_len(term, spec, c, rank);

  LocalBlock out;
  out.data = naive_evaluate(sub, ops);
  for (char c : step.result_indices) out.base.push_back(local_lo(term, c, rank));
  return out;
}

SimulationReport run(const Schedule& schedule, const EinsumSpec& spec,
                     const ContractionTree& tree,
                     const std::vector<DenseTensor>& inputs, const RunOptions& opts) {
  if (inputs.size() != static_cast<std::size_t>(tree.n_inputs))
    fail(errc::invalid_argument, "run: operand count mismatch");
  for (std::size_t k = 0; k < inputs.size(); ++k)
    if (inputs[k].shape != spec.shape_of(spec.inputs[k]))
      fail(errc::invalid_argument, "run: operand " + std::to_string(k) +
                                       " does not match \"" + spec.inputs[k] + "\"");

  SimulationReport report;
  report.seed = opts.seed;
  report.comm.per_rank_sent.assign(static_cast<std::size_t>(schedule.procs), 0);

  // Blocks of every placed tensor, keyed by (term, tensor name).
  std::map<std::pair<int, std::string>, BlockMap> store;

  auto find_redist = [&](int to_term, const std::string& tensor) -> const RedistRecord* {
    for (const auto& r : schedule.redistributions)
      if (r.to_term == to_term && r.tensor == tensor) return &r;
    return nullptr;
  };

  for (const auto& term : schedule.terms) {
    // Stage every non-output array: inputs are scattered, intermediates are
    // redistributed or reused from the producing term.
    for (const auto& a : term.statement.arrays) {
      if (a.tensor == term.statement.output) continue;
      const auto& place = term.placement_of(a.tensor);
      if (a.tensor.rfind("in", 0) == 0) {
        int idx = std::stoi(a.tensor.substr(2));
        store[{term.index, a.tensor}] = scatter(inputs[static_cast<std::size_t>(idx)], place);
        continue;
      }
      if (const RedistRecord* rec = find_redist(term.index, a.tensor)) {
        const auto& src = store.at({rec->from_term, a.tensor});
        store[{term.index, a.tensor}] = apply_plan(rec->plan, src);
        report.comm.events.push_back({"redistribute", term.index, a.tensor,
                                      rec->plan.transmitted_volume});
        report.comm.redistribute_volume += rec->plan.transmitted_volume;
        for (const auto& m : rec->plan.messages)
          if (!m.self)
            report.comm.per_rank_sent[static_cast<std::size_t>(m.src_rank)] += m.elements;
        continue;
      }
      int from = -1;
      for (const auto& prev : schedule.terms)
        if (prev.index < term.index && prev.statement.output == a.tensor)
          from = prev.index;
      if (from < 0)
        fail(errc::invalid_argument, "run: no producer for \"" + a.tensor + "\"");
      store[{term.index, a.tensor}] = store.at({from, a.tensor});
    }

    // Local contractions, rank by rank in ascending order.
    const auto& out_place = term.placement_of(term.statement.output);
    BlockMap out_blocks(static_cast<std::size_t>(schedule.procs));
    for (std::int64_t rank = 0; rank < schedule.procs; ++rank) {
      std::map<std::string, LocalBlock> scratch;
      std::map<std::string, const LocalBlock*> at_hand;
      for (const auto& a : term.statement.arrays)
        if (a.tensor != term.statement.output)
          at_hand[a.tensor] =
              &store.at({term.index, a.tensor})[static_cast<std::size_t>(rank)];
      for (int sid : term.step_ids) {
        LocalBlock result;
        try {
          result = local_contract(term, spec, tree, sid, rank, at_hand);
        } catch (const Error& e) {
          fail(e.code(), "step " + std::to_string(sid) + " on rank " +
                             std::to_string(rank) + ": " + e.what());
        }
        std::string name = tree.tensor_name(tree.result_id(sid));
        if (name == term.statement.output) {
          out_blocks[static_cast<std::size_t>(rank)] = std::move(result);
        } else {
          scratch[name] = std::move(result);
          at_hand[name] = &scratch[name];
        }
      }
    }

    std::int64_t v = allreduce(out_place, term.reduction, out_blocks,
                               report.comm.per_rank_sent);
    if (term.reduction.depth > 1) {
      report.comm.events.push_back(
          {"allreduce", term.index, term.statement.output, v});
      report.comm.allreduce_volume += v;
    }
    store[{term.index, term.statement.output}] = std::move(out_blocks);
  }

  const auto& last = schedule.terms.back();
  report.output = gather(store.at({last.index, last.statement.output}),
                         last.placement_of(last.statement.output));

  if (opts.corrupt_output && !report.output.data.empty())
    report.output.data[0] += 1.0;

  if (opts.verify) {
    report.verified = true;
    report.tolerance = opts.tolerance;
    DenseTensor want = naive_evaluate(spec, inputs);
    report.max_error = max_rel_error(report.output, want);
    report.pass = report.max_error <= opts.tolerance;
  }
  return report;
}

}  // namespace einplan
