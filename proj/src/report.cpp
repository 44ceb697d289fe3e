#include "einplan/report.hpp"

#include <cmath>

namespace einplan {

namespace {

ojson extents_json(const std::map<char, std::int64_t>& extents) {
  ojson j = ojson::object();
  for (const auto& [sym, ext] : extents) j[std::string(1, sym)] = ext;
  return j;
}

ojson tiles_json(const std::map<char, double>& tiles) {
  ojson j = ojson::object();
  for (const auto& [sym, t] : tiles) j[std::string(1, sym)] = t;
  return j;
}

double finite_or_null(double v, ojson& target, const char* key) {
  if (std::isfinite(v))
    target[key] = v;
  else
    target[key] = nullptr;
  return v;
}

}  // namespace

ojson tree_to_json(const ContractionTree& tree) {
  ojson steps = ojson::array();
  for (std::size_t s = 0; s < tree.steps.size(); ++s) {
    const auto& st = tree.steps[s];
    ojson j;
    j["result"] = tree.tensor_name(tree.n_inputs + static_cast<int>(s));
    j["lhs"] = tree.tensor_name(st.lhs);
    if (st.rhs >= 0) j["rhs"] = tree.tensor_name(st.rhs);
    j["expr"] = st.rhs >= 0 ? st.lhs_indices + "," + st.rhs_indices + "->" + st.result_indices
                            : st.lhs_indices + "->" + st.result_indices;
    j["op_class"] = to_string(st.op_class);
    j["flops"] = st.flops;
    steps.push_back(std::move(j));
  }
  ojson j;
  j["steps"] = std::move(steps);
  j["total_flops"] = tree.total_flops;
  return j;
}

ojson bound_to_json(const IoBound& bound) {
  ojson j;
  finite_or_null(bound.rho, j, "rho");
  j["x0"] = bound.x0;
  j["q_bound"] = bound.q_bound;
  j["tiles"] = tiles_json(bound.tiles);
  j["fits_in_fast_memory"] = bound.fits_fast_memory;
  return j;
}

ojson partition_to_json(const PartitionResult& part, const Sdg& sdg) {
  ojson blocks = ojson::array();
  for (const auto& block : part.blocks) {
    ojson names = ojson::array();
    for (int v : block) names.push_back(sdg.vertices[static_cast<std::size_t>(v)].name);
    blocks.push_back(std::move(names));
  }
  ojson terms = ojson::array();
  for (std::size_t i = 0; i < part.statements.size(); ++i) {
    const auto& stmt = part.statements[i];
    ojson t;
    t["output"] = stmt.output;
    std::string iter;
    for (char c : stmt.iteration) iter += c;
    t["iteration"] = iter;
    t["volume"] = stmt.volume;
    ojson arrays = ojson::array();
    for (const auto& a : stmt.arrays) {
      ojson aj;
      aj["tensor"] = a.tensor;
      aj["indices"] = a.indices;
      arrays.push_back(std::move(aj));
    }
    t["arrays"] = std::move(arrays);
    t["bound"] = bound_to_json(part.bounds[i]);
    terms.push_back(std::move(t));
  }
  ojson j;
  j["blocks"] = std::move(blocks);
  j["terms"] = std::move(terms);
  j["total_q"] = part.total_q;
  j["partitions_considered"] = part.partitions_considered;
  return j;
}

ojson plan_to_json(const RedistributionPlan& plan, bool include_messages) {
  ojson j;
  j["tensor"] = plan.tensor;
  j["message_count"] = plan.messages.size();
  j["self_messages"] = plan.self_messages;
  j["logical_volume"] = plan.logical_volume;
  j["transmitted_volume"] = plan.transmitted_volume;
  if (include_messages) {
    ojson ms = ojson::array();
    for (const auto& m : plan.messages) {
      ojson mj;
      mj["src_rank"] = m.src_rank;
      mj["dst_rank"] = m.dst_rank;
      mj["src_block"] = m.src_block;
      mj["dst_block"] = m.dst_block;
      ojson ranges = ojson::array();
      for (std::size_t d = 0; d < m.oy_lo.size(); ++d) {
        ojson r;
        r["src"] = {m.oy_lo[d], m.oy_hi[d]};
        r["dst"] = {m.ox_lo[d], m.ox_hi[d]};
        ranges.push_back(std::move(r));
      }
      mj["ranges"] = std::move(ranges);
      mj["elements"] = m.elements;
      mj["self"] = m.self;
      ms.push_back(std::move(mj));
    }
    j["messages"] = std::move(ms);
  }
  return j;
}

ojson schedule_to_json(const Schedule& sched, bool include_messages) {
  ojson terms = ojson::array();
  for (const auto& term : sched.terms) {
    ojson t;
    t["index"] = term.index;
    t["output"] = term.statement.output;
    ojson grid;
    for (std::size_t d = 0; d < term.grid.order.size(); ++d)
      grid[std::string(1, term.grid.order[d])] = term.grid.dims[d];
    t["grid"] = std::move(grid);
    ojson blocks;
    for (char c : term.grid.order) blocks[std::string(1, c)] = term.blocks.at(c);
    t["blocks"] = std::move(blocks);
    ojson places = ojson::array();
    for (const auto& p : term.placements) {
      ojson pj;
      pj["tensor"] = p.tensor;
      pj["indices"] = p.indices;
      pj["owners"] = p.dist.grid.total();
      pj["replicas"] = p.replication();
      places.push_back(std::move(pj));
    }
    t["placements"] = std::move(places);
    std::string rdims;
    for (char c : term.reduction.dims) rdims += c;
    t["reduction"] = {{"dims", rdims}, {"depth", term.reduction.depth}};
    terms.push_back(std::move(t));
  }
  ojson redists = ojson::array();
  for (const auto& r : sched.redistributions) {
    ojson rj;
    rj["tensor"] = r.tensor;
    rj["from_term"] = r.from_term;
    rj["to_term"] = r.to_term;
    rj["plan"] = plan_to_json(r.plan, include_messages);
    redists.push_back(std::move(rj));
  }
  ojson j;
  j["procs"] = sched.procs;
  j["terms"] = std::move(terms);
  j["redistributions"] = std::move(redists);
  return j;
}

namespace {

ojson report_header(const char* command, const Pipeline& pipe, double fast_mem) {
  ojson j;
  j["format"] = "einplan/v1";
  j["command"] = command;
  j["einsum"] = pipe.spec.text();
  j["extents"] = extents_json(pipe.spec.extents);
  j["fast_mem"] = fast_mem;
  return j;
}

}  // namespace

ojson bound_report(const Pipeline& pipe, double fast_mem) {
  ojson j = report_header("bound", pipe, fast_mem);
  j["naive_flops"] = flop_count_naive(pipe.spec);
  j["tree"] = tree_to_json(pipe.tree);
  j["partition"] = partition_to_json(pipe.partition, pipe.sdg);
  return j;
}

ojson plan_report(const Pipeline& pipe, double fast_mem, bool include_messages) {
  ojson j = bound_report(pipe, fast_mem);
  j["command"] = "plan";
  j["schedule"] = schedule_to_json(pipe.schedule, include_messages);
  return j;
}

ojson run_report(const Pipeline& pipe, double fast_mem, const SimulationReport& sim) {
  ojson j = plan_report(pipe, fast_mem, false);
  j["command"] = "run";
  j["seed"] = sim.seed;
  ojson comm;
  ojson events = ojson::array();
  for (const auto& e : sim.comm.events) {
    ojson ej;
    ej["kind"] = e.kind;
    ej["term"] = e.term;
    ej["tensor"] = e.tensor;
    ej["elements"] = e.elements;
    events.push_back(std::move(ej));
  }
  comm["events"] = std::move(events);
  comm["allreduce_volume"] = sim.comm.allreduce_volume;
  comm["redistribute_volume"] = sim.comm.redistribute_volume;
  comm["total_volume"] = sim.comm.total();
  comm["max_rank_sent"] = sim.comm.max_rank_sent();
  j["comm"] = std::move(comm);
  ojson ver;
  ver["enabled"] = sim.verified;
  if (sim.verified) {
    ver["max_rel_error"] = sim.max_error;
    ver["tolerance"] = sim.tolerance;
    ver["pass"] = sim.pass;
  }
  j["verification"] = std::move(ver);
  ojson out;
  out["shape"] = sim.output.shape;
  double checksum = 0.0;
  for (double v : sim.output.data) checksum += v;
  out["sum"] = checksum;
  j["output"] = std::move(out);
  return j;
}

}  // namespace einplan
