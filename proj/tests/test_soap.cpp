#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "einplan/error.hpp"
#include "einplan/soap.hpp"

using namespace einplan;

namespace {

EinsumSpec mttkrp_spec(std::int64_t n, std::int64_t r) {
  return bind_extents(parse("ijk,ja,ka->ia"),
                      std::map<char, std::int64_t>{{'i', n}, {'j', n}, {'k', n}, {'a', r}});
}

FusedStatement fused_mttkrp(const EinsumSpec& spec, const ContractionTree& tree,
                            const Sdg& sdg) {
  return fuse(sdg.non_input_ids(), sdg, tree, spec);
}

double constraint_sum(const FusedStatement& stmt, const std::map<char, double>& tiles) {
  double g = 0.0;
  for (const auto& a : stmt.arrays) {
    double t = 1.0;
    for (char c : a.indices) t *= tiles.at(c);
    g += t;
  }
  return g;
}

bool has_array(const FusedStatement& stmt, const std::string& tensor,
               const std::string& indices) {
  for (const auto& a : stmt.arrays)
    if (a.tensor == tensor && a.indices == indices) return true;
  return false;
}

}  // namespace

TEST_CASE("sdg of the mttkrp tree") {
  auto spec = mttkrp_spec(8, 4);
  auto tree = optimal_path(spec);
  auto sdg = build_sdg(tree, spec);

  REQUIRE(sdg.vertices.size() == 5);  // 3 inputs, 1 intermediate, 1 output
  int inputs = 0, inter = 0, outputs = 0;
  for (const auto& v : sdg.vertices) {
    if (v.role == SdgVertex::Role::input) ++inputs;
    if (v.role == SdgVertex::Role::intermediate) ++inter;
    if (v.role == SdgVertex::Role::output) ++outputs;
  }
  CHECK(inputs == 3);
  CHECK(inter == 1);
  CHECK(outputs == 1);
  CHECK(sdg.edges.size() == 4);
}

TEST_CASE("sdg of a single gemm has no intermediates") {
  auto spec = bind_extents(parse("ij,jk->ik"),
                           std::map<char, std::int64_t>{{'i', 4}, {'j', 4}, {'k', 4}});
  auto sdg = build_sdg(optimal_path(spec), spec);
  CHECK(sdg.vertices.size() == 3);
  CHECK(sdg.non_input_ids().size() == 1);
}

TEST_CASE("partition enumeration") {
  auto spec = mttkrp_spec(8, 4);
  auto tree = optimal_path(spec);
  auto sdg = build_sdg(tree, spec);
  auto parts = enumerate_partitions(sdg);
  CHECK(parts.size() == 2);  // {{x},{u}} and {{x,u}}

  auto gemm = bind_extents(parse("ij,jk->ik"),
                           std::map<char, std::int64_t>{{'i', 4}, {'j', 4}, {'k', 4}});
  CHECK(enumerate_partitions(build_sdg(optimal_path(gemm), gemm)).size() == 1);

  // three intermediates in a path: 2MM tree has t0 -> out; use 3MM for a
  // 3-vertex path, which admits 4 connected partitions
  auto mmm = bind_extents(parse("ij,jk,kl->il"),
                          std::map<char, std::int64_t>{
                              {'i', 8}, {'j', 4}, {'k', 4}, {'l', 8}});
  auto sdg2 = build_sdg(optimal_path(mmm), mmm);
  CHECK(sdg2.non_input_ids().size() == 2);
  CHECK(enumerate_partitions(sdg2).size() == 2);

  auto chain = bind_extents(parse("ij,jk,kl,lm->im"),
                            std::map<char, std::int64_t>{
                                {'i', 4}, {'j', 4}, {'k', 4}, {'l', 4}, {'m', 4}});
  auto sdg3 = build_sdg(optimal_path(chain), chain);
  REQUIRE(sdg3.non_input_ids().size() == 3);
  CHECK(enumerate_partitions(sdg3).size() == 4);
}

TEST_CASE("fused statement access arrays") {
  auto spec = mttkrp_spec(8, 4);
  auto tree = optimal_path(spec);
  auto sdg = build_sdg(tree, spec);

  auto fused = fused_mttkrp(spec, tree, sdg);
  std::string iter(fused.iteration.begin(), fused.iteration.end());
  CHECK(iter == "ijka");
  REQUIRE(fused.arrays.size() == 4);
  CHECK(has_array(fused, "in0", "ijk"));
  CHECK(has_array(fused, "in1", "ja"));
  CHECK(has_array(fused, "in2", "ka"));
  CHECK(has_array(fused, "out", "ia"));
  CHECK(fused.output == "out");
  CHECK(fused.volume == doctest::Approx(8.0 * 8 * 8 * 4));

  // first step alone: the krp block exposes its result
  auto krp_only = fuse({3}, sdg, tree, spec);
  CHECK(has_array(krp_only, "in1", "ja"));
  CHECK(has_array(krp_only, "in2", "ka"));
  CHECK(has_array(krp_only, "t0", "jka"));
  CHECK(krp_only.arrays.size() == 3);

  // second step alone consumes the foreign intermediate
  auto tdot_only = fuse({4}, sdg, tree, spec);
  CHECK(has_array(tdot_only, "in0", "ijk"));
  CHECK(has_array(tdot_only, "t0", "jka"));
  CHECK(has_array(tdot_only, "out", "ia"));
  CHECK(tdot_only.arrays.size() == 3);
}

TEST_CASE("max_tiles closed forms") {
  // gemm: three arrays ik,kj,ij; unconstrained optimum t = sqrt(X/3)
  auto spec = bind_extents(parse("ik,kj->ij"),
                           std::map<char, std::int64_t>{
                               {'i', 1 << 20}, {'j', 1 << 20}, {'k', 1 << 20}});
  auto tree = optimal_path(spec);
  auto sdg = build_sdg(tree, spec);
  auto stmt = fuse(sdg.non_input_ids(), sdg, tree, spec);
  double X = 3072.0;
  auto tiles = max_tiles(stmt, X);
  for (char c : {'i', 'j', 'k'})
    CHECK(tiles.at(c) == doctest::Approx(std::sqrt(X / 3.0)).epsilon(1e-6));
  CHECK(constraint_sum(stmt, tiles) <= X * (1.0 + 1e-6));

  // mttkrp: I=J=K=(2X/5)^(1/3), L=X^(2/3)/(2^(1/3) 5^(2/3))
  auto m = mttkrp_spec(1 << 20, 1 << 20);
  auto mtree = optimal_path(m);
  auto msdg = build_sdg(mtree, m);
  auto mst = fused_mttkrp(m, mtree, msdg);
  auto mt = max_tiles(mst, X);
  double expected_ijk = std::cbrt(2.0 * X / 5.0);
  double expected_l = std::pow(X, 2.0 / 3.0) / (std::cbrt(2.0) * std::pow(5.0, 2.0 / 3.0));
  for (char c : {'i', 'j', 'k'})
    CHECK(mt.at(c) == doctest::Approx(expected_ijk).epsilon(1e-6));
  CHECK(mt.at('a') == doctest::Approx(expected_l).epsilon(1e-6));

  // a single array: the extent bounds bind and the constraint goes slack
  auto one = bind_extents(parse("ij->ji"),
                          std::map<char, std::int64_t>{{'i', 6}, {'j', 7}});
  auto otree = optimal_path(one);
  auto osdg = build_sdg(otree, one);
  auto ostmt = fuse(osdg.non_input_ids(), osdg, otree, one);
  auto ot = max_tiles(ostmt, 2.0 * 6 * 7);
  CHECK(ot.at('i') == doctest::Approx(6.0));
  CHECK(ot.at('j') == doctest::Approx(7.0));

  CHECK_THROWS_AS(max_tiles(mst, 3.0), Error);  // below the array count
}

TEST_CASE("intensity closed forms for gemm and mttkrp") {
  auto spec = bind_extents(parse("ij,jk->ik"),
                           std::map<char, std::int64_t>{
                               {'i', 1 << 20}, {'j', 1 << 20}, {'k', 1 << 20}});
  auto tree = optimal_path(spec);
  auto sdg = build_sdg(tree, spec);
  auto stmt = fuse(sdg.non_input_ids(), sdg, tree, spec);
  for (double S : {256.0, 1024.0, 4096.0}) {
    auto b = intensity(stmt, S);
    CHECK(b.rho == doctest::Approx(std::sqrt(S) / 2.0).epsilon(0.005));
    CHECK(b.x0 == doctest::Approx(3.0 * S).epsilon(0.01));
    CHECK(b.q_bound == doctest::Approx(stmt.volume / b.rho));
    // bound scaling: q(S) * sqrt(S) / (2 V) stays at 1
    CHECK(b.q_bound * std::sqrt(S) / (2.0 * stmt.volume) ==
          doctest::Approx(1.0).epsilon(0.005));
  }

  auto m = mttkrp_spec(1 << 17, 1 << 17);
  auto mtree = optimal_path(m);
  auto msdg = build_sdg(mtree, m);
  auto mst = fused_mttkrp(m, mtree, msdg);
  for (double S : {512.0, 1024.0, 8192.0}) {
    auto b = intensity(mst, S);
    CHECK(b.rho == doctest::Approx(std::pow(S, 2.0 / 3.0) / 3.0).epsilon(0.01));
    CHECK(b.x0 == doctest::Approx(2.5 * S).epsilon(0.01));
    for (char c : {'i', 'j', 'k'})
      CHECK(b.tiles.at(c) == doctest::Approx(std::cbrt(S)).epsilon(0.01));
    CHECK(b.tiles.at('a') ==
          doctest::Approx(std::pow(S, 2.0 / 3.0) / 2.0).epsilon(0.01));
    double used = constraint_sum(mst, b.tiles);
    CHECK(used <= b.x0 * (1.0 + 1e-6));
  }
}

TEST_CASE("intensity handles statements that fit in fast memory") {
  auto spec = bind_extents(parse("ij->ji"),
                           std::map<char, std::int64_t>{{'i', 4}, {'j', 4}});
  auto tree = optimal_path(spec);
  auto sdg = build_sdg(tree, spec);
  auto stmt = fuse(sdg.non_input_ids(), sdg, tree, spec);
  auto b = intensity(stmt, 1024.0);
  CHECK(b.fits_fast_memory);
  CHECK(b.q_bound == 0.0);

  // small but not resident: the bound degenerates to footprint minus S
  auto tight = intensity(stmt, 20.0);
  CHECK(!tight.fits_fast_memory);
  CHECK(tight.q_bound == doctest::Approx(32.0 - 20.0).epsilon(0.01));

  CHECK_THROWS_AS(intensity(stmt, 2.0), Error);
}

TEST_CASE("rho grows and q shrinks with fast memory") {
  auto m = mttkrp_spec(1 << 17, 1 << 17);
  auto mtree = optimal_path(m);
  auto msdg = build_sdg(mtree, m);
  auto mst = fused_mttkrp(m, mtree, msdg);
  double prev_rho = 0.0, prev_q = 1e300;
  for (double S : {128.0, 512.0, 2048.0, 8192.0, 32768.0}) {
    auto b = intensity(mst, S);
    CHECK(b.rho >= prev_rho);
    CHECK(b.q_bound <= prev_q);
    prev_rho = b.rho;
    prev_q = b.q_bound;
  }
}

TEST_CASE("best partition fuses mttkrp") {
  auto spec = mttkrp_spec(64, 24);
  auto tree = optimal_path(spec);
  auto sdg = build_sdg(tree, spec);
  auto part = best_partition(sdg, tree, spec, 1024.0);

  CHECK(part.partitions_considered == 2);
  REQUIRE(part.blocks.size() == 1);  // the fused partition wins
  CHECK(part.blocks[0].size() == 2);

  // the fused intensity beats the unfused pair across fast-memory sizes
  for (double S : {512.0, 1024.0, 8192.0}) {
    auto fused_bound = intensity(fused_mttkrp(spec, tree, sdg), S);
    auto b_x = intensity(fuse({3}, sdg, tree, spec), S);
    auto b_u = intensity(fuse({4}, sdg, tree, spec), S);
    CHECK(fused_bound.q_bound < b_x.q_bound + b_u.q_bound);
    if (S == 1024.0) CHECK(part.total_q == doctest::Approx(fused_bound.q_bound));
  }
}

TEST_CASE("best partition splits a two-gemm chain") {
  auto spec = bind_extents(parse("ij,jk,kl->il"),
                           std::map<char, std::int64_t>{
                               {'i', 256}, {'j', 256}, {'k', 256}, {'l', 256}});
  auto tree = optimal_path(spec);
  auto sdg = build_sdg(tree, spec);
  auto part = best_partition(sdg, tree, spec, 1024.0);
  CHECK(part.blocks.size() == 2);

  // hand totals: fusing inflates the iteration space to four dimensions
  auto fused = fuse(sdg.non_input_ids(), sdg, tree, spec);
  auto split0 = fuse({3}, sdg, tree, spec);
  auto split1 = fuse({4}, sdg, tree, spec);
  double fused_q = intensity(fused, 1024.0).q_bound;
  double split_q = intensity(split0, 1024.0).q_bound + intensity(split1, 1024.0).q_bound;
  CHECK(split_q < fused_q);
  CHECK(part.total_q == doctest::Approx(split_q));
}
