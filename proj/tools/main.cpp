// einplan command line: bound / plan / run / bench, all backed by the
// shared-library C API. Reports are JSON on stdout; --text prints a short
// human summary instead.

#include <cstdint>
#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "einplan/einplan.h"

namespace {

using nlohmann::json;

int exit_code(einplan_status s) { return static_cast<int>(s); }

void print_error(einplan_status s) {
  std::cerr << "einplan: " << einplan_status_name(s) << ": " << einplan_last_error()
            << "\n";
}

void text_bound(const json& j) {
  std::cout << "kernel " << j["einsum"].get<std::string>() << "\n";
  std::cout << "  flops optimized " << j["tree"]["total_flops"] << "  naive "
            << j["naive_flops"] << "\n";
  for (const auto& term : j["partition"]["terms"]) {
    const auto& b = term["bound"];
    std::cout << "  term " << term["output"].get<std::string>() << " over "
              << term["iteration"].get<std::string>() << ": rho=";
    if (b["rho"].is_null())
      std::cout << "inf (fits in fast memory)";
    else
      std::cout << b["rho"].get<double>();
    std::cout << " x0=" << b["x0"].get<double>() << " q>=" << b["q_bound"].get<double>()
              << "\n";
  }
  std::cout << "  total q >= " << j["partition"]["total_q"].get<double>() << "\n";
}

void text_plan(const json& j) {
  text_bound(j);
  for (const auto& term : j["schedule"]["terms"]) {
    std::cout << "  term " << term["index"] << " grid";
    for (const auto& [sym, p] : term["grid"].items())
      std::cout << " " << sym << "=" << p.get<std::int64_t>();
    std::cout << " reduce depth " << term["reduction"]["depth"] << "\n";
  }
  for (const auto& r : j["schedule"]["redistributions"])
    std::cout << "  redistribute " << r["tensor"].get<std::string>() << " term "
              << r["from_term"] << " -> " << r["to_term"] << " ("
              << r["plan"]["transmitted_volume"] << " elements)\n";
}

void text_run(const json& j) {
  text_plan(j);
  std::cout << "  comm total " << j["comm"]["total_volume"]
            << " (allreduce " << j["comm"]["allreduce_volume"] << ", redistribute "
            << j["comm"]["redistribute_volume"] << ")\n";
  if (j["verification"]["enabled"].get<bool>())
    std::cout << "  verify " << (j["verification"]["pass"].get<bool>() ? "PASS" : "FAIL")
              << " max rel error " << j["verification"]["max_rel_error"].get<double>()
              << "\n";
}

void text_bench(const json& j) {
  for (const auto& k : j["kernels"]) {
    std::cout << (k["pass"].get<bool>() ? "PASS " : "FAIL ")
              << k["name"].get<std::string>() << "  " << k["einsum"].get<std::string>();
    if (k.contains("error"))
      std::cout << "  (" << k["error"].get<std::string>() << ")";
    else if (!k["volume_to_bound_ratio"].is_null())
      std::cout << "  volume/bound " << k["volume_to_bound_ratio"].get<double>();
    std::cout << "\n";
  }
  std::cout << (j["all_pass"].get<bool>() ? "bench: all kernels verified"
                                          : "bench: FAILURES present")
            << "\n";
}

int emit(einplan_status s, char* out, bool text,
         void (*text_fn)(const json&)) {
  if (out) {
    if (text)
      text_fn(json::parse(out));
    else
      std::cout << out << "\n";
    einplan_free(out);
  }
  if (s != EINPLAN_OK) print_error(s);
  return exit_code(s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"planner and virtual executor for dense einsum kernels"};
  app.require_subcommand(1);

  std::string einsum, dims, inputs, dump;
  double fast_mem = 1024.0;
  std::int64_t procs = 1;
  std::uint64_t seed = 0;
  bool verify = false, text = false, messages = false;
  double scale = 1.0;
  std::string suite = "table3";

  auto add_kernel_flags = [&](CLI::App* cmd) {
    cmd->add_option("--einsum", einsum, "einsum string, e.g. \"ij,jk->ik\"")
        ->required();
    cmd->add_option("--dims", dims, "extents as symbol=N pairs, e.g. i=64,j=64")
        ->required();
    cmd->add_flag("--text", text, "human-readable summary instead of JSON");
  };

  CLI::App* bound = app.add_subcommand("bound", "I/O lower bounds and optimal tiles");
  add_kernel_flags(bound);
  bound->add_option("--fast-mem", fast_mem, "fast memory size in elements");

  CLI::App* plan = app.add_subcommand("plan", "distributed schedule report");
  add_kernel_flags(plan);
  plan->add_option("--fast-mem", fast_mem, "fast memory size in elements");
  plan->add_option("--procs", procs, "number of virtual processes")->required();
  plan->add_flag("--messages", messages, "include per-message redistribution detail");

  CLI::App* runc = app.add_subcommand("run", "simulate the schedule over virtual ranks");
  add_kernel_flags(runc);
  runc->add_option("--fast-mem", fast_mem, "fast memory size in elements");
  runc->add_option("--procs", procs, "number of virtual processes")->required();
  runc->add_option("--seed", seed, "seed for generated inputs");
  runc->add_flag("--verify", verify, "compare against the reference evaluation");
  runc->add_option("--inputs", inputs, "comma-separated tensor files (else random)");
  runc->add_option("--dump-output", dump, "write the gathered output tensor here");

  CLI::App* bench = app.add_subcommand("bench", "run the bundled kernel suite");
  bench->add_option("--suite", suite, "fixture suite (table3)");
  bench->add_option("--scale", scale, "extent scale factor, e.g. 0.015625");
  bench->add_option("--procs", procs, "number of virtual processes");
  bench->add_option("--fast-mem", fast_mem, "fast memory size in elements");
  bench->add_option("--seed", seed, "seed for generated inputs");
  bench->add_flag("--text", text, "human-readable summary instead of JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : EINPLAN_E_PARSE;
  }

  if (bound->parsed() || plan->parsed() || runc->parsed()) {
    einplan_session* session = nullptr;
    einplan_status s = einplan_session_create(einsum.c_str(), dims.c_str(), &session);
    if (s != EINPLAN_OK) {
      print_error(s);
      return exit_code(s);
    }
    char* out = nullptr;
    int rc = 0;
    if (bound->parsed()) {
      s = einplan_bound_json(session, fast_mem, &out);
      rc = emit(s, out, text, text_bound);
    } else if (plan->parsed()) {
      s = einplan_plan_json(session, procs, fast_mem, messages ? 1 : 0, &out);
      rc = emit(s, out, text, text_plan);
    } else {
      s = einplan_run_json(session, procs, fast_mem, seed, verify ? 1 : 0,
                           inputs.empty() ? nullptr : inputs.c_str(),
                           dump.empty() ? nullptr : dump.c_str(), &out);
      rc = emit(s, out, text, text_run);
    }
    einplan_session_destroy(session);
    return rc;
  }

  // bench
  if (suite != "table3") {
    std::cerr << "einplan: unknown suite \"" << suite << "\"\n";
    return EINPLAN_E_PARSE;
  }
  if (bench->count("--procs") == 0) procs = 8;
  char* out = nullptr;
  einplan_status s = einplan_bench_json(scale, procs, fast_mem, seed, &out);
  return emit(s, out, text, text_bench);
}
