#include "einplan/einplan.h"

#include <cstdlib>
#include <cstring>
#include <sstream>

#include "einplan/bench.hpp"
#include "einplan/error.hpp"
#include "einplan/report.hpp"

using namespace einplan;

struct einplan_session {
  EinsumSpec spec;
};

namespace {

thread_local std::string g_last_error;

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

einplan_status status_of(const Error& e) {
  switch (e.code()) {
    case errc::parse: return EINPLAN_E_PARSE;
    case errc::infeasible: return EINPLAN_E_INFEASIBLE;
    case errc::grid: return EINPLAN_E_GRID;
    case errc::resource: return EINPLAN_E_RESOURCE;
    case errc::invalid_argument: return EINPLAN_E_INVALID;
  }
  return EINPLAN_E_INTERNAL;
}

template <typename Fn>
einplan_status guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    g_last_error = e.what();
    return status_of(e);
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return EINPLAN_E_INTERNAL;
  }
}

std::map<char, std::int64_t> parse_dims(const char* dims) {
  std::map<char, std::int64_t> out;
  if (!dims) return out;
  std::stringstream ss(dims);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    auto eq = item.find('=');
    if (eq == std::string::npos || eq != 1)
      fail(errc::parse, "dims: expected symbol=extent, got \"" + item + "\"");
    char* end = nullptr;
    long long v = std::strtoll(item.c_str() + 2, &end, 10);
    if (!end || *end != '\0' || v < 1)
      fail(errc::parse, "dims: bad extent in \"" + item + "\"");
    out[item[0]] = v;
  }
  return out;
}

std::vector<std::string> split_paths(const char* csv) {
  std::vector<std::string> out;
  if (!csv) return out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::int64_t run_point_cap() {
  if (const char* env = std::getenv("EINPLAN_MAX_POINTS")) {
    char* end = nullptr;
    long long v = std::strtoll(env, &end, 10);
    if (end && *end == '\0' && v > 0) return v;
  }
  return 100'000'000;
}

}  // namespace

extern "C" {

const char* einplan_version(void) { return "1.0.0"; }

const char* einplan_status_name(einplan_status status) {
  switch (status) {
    case EINPLAN_OK: return "ok";
    case EINPLAN_E_VERIFY: return "verification failed";
    case EINPLAN_E_PARSE: return "parse error";
    case EINPLAN_E_INFEASIBLE: return "infeasible fast memory";
    case EINPLAN_E_GRID: return "invalid process grid";
    case EINPLAN_E_RESOURCE: return "resource cap exceeded";
    case EINPLAN_E_INVALID: return "invalid argument";
    case EINPLAN_E_INTERNAL: return "internal error";
  }
  return "unknown";
}

const char* einplan_last_error(void) { return g_last_error.c_str(); }

void einplan_free(char* str) { std::free(str); }

einplan_status einplan_session_create(const char* einsum, const char* dims,
                                      einplan_session** out) {
  if (!einsum || !out) {
    g_last_error = "einplan_session_create: null argument";
    return EINPLAN_E_INVALID;
  }
  *out = nullptr;
  return guarded([&]() {
    EinsumSpec parsed = parse(einsum);
    auto given = parse_dims(dims);
    EinsumSpec spec = bind_extents(parsed, given);
    for (const auto& [sym, ext] : given) {
      (void)ext;
      if (spec.extents.find(sym) == spec.extents.end())
        fail(errc::parse,
             std::string("dims: symbol '") + sym + "' does not appear in the einsum");
    }
    *out = new einplan_session{std::move(spec)};
    return EINPLAN_OK;
  });
}

void einplan_session_destroy(einplan_session* session) { delete session; }

einplan_status einplan_bound_json(einplan_session* session, double fast_mem,
                                  char** json_out) {
  if (!session || !json_out) {
    g_last_error = "einplan_bound_json: null argument";
    return EINPLAN_E_INVALID;
  }
  return guarded([&]() {
    Pipeline pipe;
    pipe.spec = session->spec;
    pipe.tree = optimal_path(pipe.spec);
    pipe.sdg = build_sdg(pipe.tree, pipe.spec);
    pipe.partition = best_partition(pipe.sdg, pipe.tree, pipe.spec, fast_mem);
    *json_out = dup_string(bound_report(pipe, fast_mem).dump(2));
    return EINPLAN_OK;
  });
}

einplan_status einplan_plan_json(einplan_session* session, int64_t procs,
                                 double fast_mem, int include_messages,
                                 char** json_out) {
  if (!session || !json_out) {
    g_last_error = "einplan_plan_json: null argument";
    return EINPLAN_E_INVALID;
  }
  return guarded([&]() {
    Pipeline pipe = make_pipeline(session->spec, procs, fast_mem);
    *json_out =
        dup_string(plan_report(pipe, fast_mem, include_messages != 0).dump(2));
    return EINPLAN_OK;
  });
}

einplan_status einplan_run_json(einplan_session* session, int64_t procs,
                                double fast_mem, uint64_t seed, int verify,
                                const char* input_paths, const char* dump_output,
                                char** json_out) {
  if (!session || !json_out) {
    g_last_error = "einplan_run_json: null argument";
    return EINPLAN_E_INVALID;
  }
  return guarded([&]() {
    const EinsumSpec& spec = session->spec;
    std::int64_t points = 1;
    for (char c : spec.symbols()) points *= spec.extent(c);
    if (points > run_point_cap())
      fail(errc::resource, "run: iteration space of " + std::to_string(points) +
                               " points exceeds the cap (" +
                               std::to_string(run_point_cap()) +
                               "; override with EINPLAN_MAX_POINTS)");

    Pipeline pipe = make_pipeline(spec, procs, fast_mem);

    std::vector<DenseTensor> inputs;
    auto paths = split_paths(input_paths);
    if (!paths.empty()) {
      if (paths.size() != spec.inputs.size())
        fail(errc::invalid_argument, "run: expected " +
                                         std::to_string(spec.inputs.size()) +
                                         " input tensors, got " +
                                         std::to_string(paths.size()));
      for (std::size_t i = 0; i < paths.size(); ++i) {
        DenseTensor t = read_tensor(paths[i]);
        if (t.shape != spec.shape_of(spec.inputs[i]))
          fail(errc::invalid_argument,
               "run: tensor \"" + paths[i] + "\" does not match \"" + spec.inputs[i] +
                   "\"");
        inputs.push_back(std::move(t));
      }
    } else {
      for (std::size_t i = 0; i < spec.inputs.size(); ++i)
        inputs.push_back(random_tensor(spec.shape_of(spec.inputs[i]),
                                       seed + static_cast<std::uint64_t>(i)));
    }

    RunOptions ro;
    ro.verify = verify != 0;
    ro.seed = seed;
    if (std::getenv("EINPLAN_TEST_CORRUPT")) ro.corrupt_output = true;
    SimulationReport sim = run(pipe.schedule, spec, pipe.tree, inputs, ro);

    if (dump_output) write_tensor(dump_output, sim.output);
    *json_out = dup_string(run_report(pipe, fast_mem, sim).dump(2));
    if (sim.verified && !sim.pass) {
      g_last_error = "verification failed: max relative error " +
                     std::to_string(sim.max_error);
      return EINPLAN_E_VERIFY;
    }
    return EINPLAN_OK;
  });
}

einplan_status einplan_bench_json(double scale, int64_t procs, double fast_mem,
                                  uint64_t seed, char** json_out) {
  if (!json_out) {
    g_last_error = "einplan_bench_json: null argument";
    return EINPLAN_E_INVALID;
  }
  return guarded([&]() {
    BenchOptions opts;
    opts.scale = scale;
    opts.procs = procs;
    opts.fast_mem = fast_mem;
    opts.seed = seed;
    if (const char* env = std::getenv("EINPLAN_MAX_POINTS")) {
      char* end = nullptr;
      long long v = std::strtoll(env, &end, 10);
      if (end && *end == '\0' && v > 0) opts.max_points = v;
    }
    bool all_pass = false;
    ojson j = run_bench(opts, all_pass);
    *json_out = dup_string(j.dump(2));
    if (!all_pass) {
      g_last_error = "bench: at least one kernel failed";
      return EINPLAN_E_VERIFY;
    }
    return EINPLAN_OK;
  });
}

}  // extern "C"
