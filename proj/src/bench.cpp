#include "einplan/bench.hpp"

#include <algorithm>
#include <cmath>

#include "einplan/error.hpp"

namespace einplan {

namespace {

std::map<char, std::int64_t> scaled(std::map<char, std::int64_t> extents, double s) {
  for (auto& [sym, ext] : extents)
    ext = std::max<std::int64_t>(2, std::llround(static_cast<double>(ext) * s));
  return extents;
}

}  // namespace

std::vector<BenchFixture> bench_fixtures(double scale) {
  if (scale <= 0.0) fail(errc::invalid_argument, "bench: scale must be positive");
  std::vector<BenchFixture> out;
  auto add = [&](const std::string& name, const std::string& einsum,
                 std::map<char, std::int64_t> extents) {
    out.push_back({name, einsum, scaled(std::move(extents), scale)});
  };
  add("1MM", "ij,jk->ik", {{'i', 4096}, {'j', 4096}, {'k', 4096}});
  add("2MM", "ij,jk,kl->il", {{'i', 4096}, {'j', 4096}, {'k', 4096}, {'l', 4096}});
  add("3MM", "ij,jk,kl,lm->im",
      {{'i', 4096}, {'j', 4096}, {'k', 4096}, {'l', 4096}, {'m', 4096}});
  add("MTTKRP-O3-M0", "ijk,ja,ka->ia",
      {{'i', 1024}, {'j', 1024}, {'k', 1024}, {'a', 24}});
  add("MTTKRP-O3-M1", "ijk,ia,ka->ja",
      {{'i', 1024}, {'j', 1024}, {'k', 1024}, {'a', 24}});
  add("MTTKRP-O3-M2", "ijk,ia,ja->ka",
      {{'i', 1024}, {'j', 1024}, {'k', 1024}, {'a', 24}});
  add("MTTKRP-O5-M0", "ijklm,ja,ka,la,ma->ia",
      {{'i', 1024}, {'j', 1024}, {'k', 1024}, {'l', 1024}, {'m', 1024}, {'a', 24}});
  add("MTTKRP-O5-M2", "ijklm,ia,ja,la,ma->ka",
      {{'i', 1024}, {'j', 1024}, {'k', 1024}, {'l', 1024}, {'m', 1024}, {'a', 24}});
  add("MTTKRP-O5-M4", "ijklm,ia,ja,ka,la->ma",
      {{'i', 1024}, {'j', 1024}, {'k', 1024}, {'l', 1024}, {'m', 1024}, {'a', 24}});
  add("TTMc-O5-M0", "ijklm,jb,kc,ld,me->ibcde",
      {{'i', 60}, {'j', 60}, {'k', 60}, {'l', 60}, {'m', 60},
       {'b', 24}, {'c', 24}, {'d', 24}, {'e', 24}});
  return out;
}

ojson run_bench(const BenchOptions& opts, bool& all_pass) {
  all_pass = true;
  ojson kernels = ojson::array();
  for (const auto& fx : bench_fixtures(opts.scale)) {
    ojson k;
    k["name"] = fx.name;
    k["einsum"] = fx.einsum;
    ojson ext = ojson::object();
    for (const auto& [sym, e] : fx.extents) ext[std::string(1, sym)] = e;
    k["extents"] = std::move(ext);
    try {
      EinsumSpec spec = bind_extents(parse(fx.einsum), fx.extents);
      std::int64_t points = 1;
      for (char c : spec.symbols()) points *= spec.extent(c);
      if (points > opts.max_points)
        fail(errc::resource, fx.name + ": iteration space exceeds the configured cap");

      Pipeline pipe = make_pipeline(spec, opts.procs, opts.fast_mem);
      std::vector<DenseTensor> inputs;
      for (std::size_t i = 0; i < spec.inputs.size(); ++i)
        inputs.push_back(random_tensor(spec.shape_of(spec.inputs[i]),
                                       opts.seed + static_cast<std::uint64_t>(i)));
      RunOptions ro;
      ro.verify = true;
      ro.tolerance = opts.tolerance;
      ro.seed = opts.seed;
      SimulationReport sim = run(pipe.schedule, spec, pipe.tree, inputs, ro);

      k["pass"] = sim.pass;
      k["max_rel_error"] = sim.max_error;
      k["volume_total"] = sim.comm.total();
      k["allreduce_volume"] = sim.comm.allreduce_volume;
      k["redistribute_volume"] = sim.comm.redistribute_volume;
      k["q_bound_total"] = pipe.partition.total_q;
      if (pipe.partition.total_q > 0.0)
        k["volume_to_bound_ratio"] =
            static_cast<double>(sim.comm.total()) / pipe.partition.total_q;
      else
        k["volume_to_bound_ratio"] = nullptr;
      if (!sim.pass) all_pass = false;
    } catch (const std::exception& e) {
      k["pass"] = false;
      k["error"] = e.what();
      all_pass = false;
    }
    kernels.push_back(std::move(k));
  }

  ojson j;
  j["format"] = "einplan/v1";
  j["command"] = "bench";
  j["suite"] = "table3";
  j["scale"] = opts.scale;
  j["procs"] = opts.procs;
  j["fast_mem"] = opts.fast_mem;
  j["seed"] = opts.seed;
  j["kernels"] = std::move(kernels);
  j["all_pass"] = all_pass;
  return j;
}

}  // namespace einplan
