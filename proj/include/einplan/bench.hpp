#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "einplan/report.hpp"

namespace einplan {

struct BenchFixture {
  std::string name;
  std::string einsum;
  std::map<char, std::int64_t> extents;
};

/// The ten standard kernels (three matrix chains, six MTTKRP variants, one
/// TTMc) at their reference problem sizes, every extent multiplied by
/// `scale` with a floor of 2.
std::vector<BenchFixture> bench_fixtures(double scale);

struct BenchOptions {
  double scale = 1.0;
  std::int64_t procs = 8;
  double fast_mem = 1024.0;
  std::uint64_t seed = 1;
  double tolerance = 1e-10;
  std::int64_t max_points = 4'000'000'000;
};

/// Run every fixture through plan + simulate + verify; returns the aggregate
/// report and sets `all_pass`.
ojson run_bench(const BenchOptions& opts, bool& all_pass);

}  // namespace einplan
