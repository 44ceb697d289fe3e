#include "einplan/soap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "einplan/error.hpp"

namespace einplan {

std::vector<int> Sdg::non_input_ids() const {
  std::vector<int> out;
  for (std::size_t i = 0; i < vertices.size(); ++i)
    if (vertices[i].role != SdgVertex::Role::input) out.push_back(static_cast<int>(i));
  return out;
}

std::vector<int> Sdg::consumers_of(int id) const {
  std::vector<int> out;
  for (const auto& [from, to] : edges)
    if (from == id) out.push_back(to);
  return out;
}

Sdg build_sdg(const ContractionTree& tree, const EinsumSpec& spec) {
  Sdg g;
  for (int k = 0; k < tree.n_inputs; ++k)
    g.vertices.push_back({tree.tensor_name(k), SdgVertex::Role::input,
                          spec.inputs[static_cast<std::size_t>(k)], -1});
  for (std::size_t s = 0; s < tree.steps.size(); ++s) {
    bool last = (s + 1 == tree.steps.size());
    int id = tree.n_inputs + static_cast<int>(s);
    g.vertices.push_back({tree.tensor_name(id),
                          last ? SdgVertex::Role::output : SdgVertex::Role::intermediate,
                          tree.steps[s].result_indices, static_cast<int>(s)});
    g.edges.emplace_back(tree.steps[s].lhs, id);
    if (tree.steps[s].rhs >= 0) g.edges.emplace_back(tree.steps[s].rhs, id);
  }
  return g;
}

namespace {

bool block_connected(const std::vector<int>& block, const Sdg& sdg) {
  if (block.size() <= 1) return true;
  std::vector<int> reached = {block[0]};
  std::vector<bool> in_block(sdg.vertices.size(), false);
  for (int v : block) in_block[static_cast<std::size_t>(v)] = true;
  std::vector<bool> seen(sdg.vertices.size(), false);
  seen[static_cast<std::size_t>(block[0])] = true;
  for (std::size_t i = 0; i < reached.size(); ++i) {
    int v = reached[i];
    for (const auto& [a, b] : sdg.edges) {
      int other = -1;
      if (a == v) other = b;
      if (b == v) other = a;
      if (other < 0) continue;
      if (!in_block[static_cast<std::size_t>(other)] ||
          seen[static_cast<std::size_t>(other)])
        continue;
      seen[static_cast<std::size_t>(other)] = true;
      reached.push_back(other);
    }
  }
  return reached.size() == block.size();
}

}  // namespace

std::vector<std::vector<std::vector<int>>> enumerate_partitions(const Sdg& sdg) {
  const auto ids = sdg.non_input_ids();
  if (ids.size() > 10)
    fail(errc::invalid_argument, "enumerate_partitions: more than 10 non-input vertices");

  std::vector<std::vector<std::vector<int>>> out;
  std::vector<std::vector<int>> blocks;
  auto recurse = [&](auto&& self, std::size_t i) -> void {
    if (i == ids.size()) {
      for (const auto& b : blocks)
        if (!block_connected(b, sdg)) return;
      out.push_back(blocks);
      return;
    }
    for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
      blocks[bi].push_back(ids[i]);
      self(self, i + 1);
      blocks[bi].pop_back();
    }
    blocks.push_back({ids[i]});
    self(self, i + 1);
    blocks.pop_back();
  };
  recurse(recurse, 0);
  return out;
}

FusedStatement fuse(const std::vector<int>& block, const Sdg& sdg,
                    const ContractionTree& tree, const EinsumSpec& spec) {
  FusedStatement stmt;
  std::vector<bool> in_block(sdg.vertices.size(), false);
  for (int v : block) in_block[static_cast<std::size_t>(v)] = true;

  std::vector<int> steps;
  for (int v : block) {
    int s = sdg.vertices[static_cast<std::size_t>(v)].step;
    if (s < 0) fail(errc::invalid_argument, "fuse: block contains an input vertex");
    steps.push_back(s);
  }
  std::sort(steps.begin(), steps.end());
  stmt.step_ids = steps;

  auto add_sym = [&](char c) {
    if (std::find(stmt.iteration.begin(), stmt.iteration.end(), c) ==
        stmt.iteration.end()) {
      stmt.iteration.push_back(c);
      stmt.extents[c] = spec.extent(c);
    }
  };
  std::vector<int> external;  // vertex ids crossing the block boundary
  auto add_external = [&](int id) {
    if (std::find(external.begin(), external.end(), id) == external.end())
      external.push_back(id);
  };

  for (int s : steps) {
    const auto& st = tree.steps[static_cast<std::size_t>(s)];
    for (char c : st.lhs_indices) add_sym(c);
    for (char c : st.rhs_indices) add_sym(c);
    if (!in_block[static_cast<std::size_t>(st.lhs)]) add_external(st.lhs);
    if (st.rhs >= 0 && !in_block[static_cast<std::size_t>(st.rhs)]) add_external(st.rhs);
  }
  // Keep the iteration dimensions in the kernel's own symbol order.
  const auto canon = spec.symbols();
  std::sort(stmt.iteration.begin(), stmt.iteration.end(), [&](char a, char b) {
    return std::find(canon.begin(), canon.end(), a) <
           std::find(canon.begin(), canon.end(), b);
  });
  for (int v : block) {
    const auto& vert = sdg.vertices[static_cast<std::size_t>(v)];
    bool escapes = vert.role == SdgVertex::Role::output;
    for (int c : sdg.consumers_of(v))
      if (!in_block[static_cast<std::size_t>(c)]) escapes = true;
    if (escapes) {
      add_external(v);
      if (!stmt.output.empty())
        fail(errc::invalid_argument, "fuse: block has more than one visible result");
      stmt.output = vert.name;
    }
  }

  for (int id : external)
    stmt.arrays.push_back({sdg.vertices[static_cast<std::size_t>(id)].name,
                           sdg.vertices[static_cast<std::size_t>(id)].indices});

  stmt.volume = 1.0;
  for (char c : stmt.iteration) stmt.volume *= static_cast<double>(stmt.extents[c]);
  return stmt;
}

namespace {

// One additive term of the access-set constraint: weight * exp(sum of the
// log-tiles selected by mask).
struct ExpTerm {
  std::uint32_t mask = 0;
  double weight = 1.0;
};

struct TileProblem {
  std::vector<char> dims;
  std::vector<double> cap;  // log extent per dim
  std::vector<ExpTerm> terms;
};

TileProblem make_problem(const FusedStatement& stmt) {
  TileProblem p;
  p.dims = stmt.iteration;
  if (p.dims.size() > 32)
    fail(errc::invalid_argument, "max_tiles: more than 32 iteration dimensions");
  for (char c : p.dims) p.cap.push_back(std::log(static_cast<double>(stmt.extents.at(c))));
  for (const auto& a : stmt.arrays) {
    ExpTerm t;
    for (char c : a.indices) {
      auto it = std::find(p.dims.begin(), p.dims.end(), c);
      if (it == p.dims.end())
        fail(errc::invalid_argument, "max_tiles: array \"" + a.tensor +
                                         "\" uses an index outside the iteration space");
      t.mask |= 1u << (it - p.dims.begin());
    }
    p.terms.push_back(t);
  }
  return p;
}

double eval_g(const TileProblem& p, const std::vector<double>& y) {
  double g = 0.0;
  for (const auto& t : p.terms) {
    double e = 0.0;
    for (std::size_t d = 0; d < p.dims.size(); ++d)
      if (t.mask & (1u << d)) e += y[d];
    g += t.weight * std::exp(e);
  }
  return g;
}

// Coordinate ascent on sum(y) - mu * g(y) over the box [0, cap]; each
// coordinate update is the exact one-dimensional maximizer.
void ascend(const TileProblem& p, double mu, std::vector<double>& y) {
  const int ndim = static_cast<int>(p.dims.size());
  for (int sweep = 0; sweep < 400; ++sweep) {
    double delta = 0.0;
    for (int d = 0; d < ndim; ++d) {
      double cd = 0.0;
      for (const auto& t : p.terms) {
        if (!(t.mask & (1u << d))) continue;
        double e = 0.0;
        for (int o = 0; o < ndim; ++o)
          if (o != d && (t.mask & (1u << o))) e += y[o];
        cd += t.weight * std::exp(e);
      }
      double nd = (cd > 0.0) ? -std::log(mu * cd) : p.cap[d];
      nd = std::clamp(nd, 0.0, p.cap[d]);
      delta = std::max(delta, std::abs(nd - y[d]));
      y[d] = nd;
    }
    if (delta < 5e-15) break;
  }
}

std::vector<double> solve_tiles(const TileProblem& p, double budget,
                                double* mu_hint = nullptr) {
  const int ndim = static_cast<int>(p.dims.size());
  double at_one = 0.0;
  for (const auto& t : p.terms) at_one += t.weight;
  if (budget < at_one * (1.0 - 1e-12))
    fail(errc::infeasible, "max_tiles: budget below the number of access arrays");

  std::vector<double> y(ndim, 0.0);
  double gmax = eval_g(p, p.cap);
  if (gmax <= budget) return p.cap;

  // g(y(mu)) decreases monotonically in mu; bisect log(mu) until the
  // constraint is active. A hint from a nearby solve shrinks the bracket.
  double lo = std::log(1e-30), hi = std::log(1e30);
  auto g_at = [&](double log_mu) {
    ascend(p, std::exp(log_mu), y);
    return eval_g(p, y);
  };
  if (mu_hint && std::isfinite(*mu_hint)) {
    double width = 2.0;
    while (width < 80.0) {
      double a = *mu_hint - width, b = *mu_hint + width;
      if (g_at(a) > budget && g_at(b) < budget) {
        lo = a;
        hi = b;
        break;
      }
      width *= 4.0;
    }
  }
  for (int it = 0; it < 120; ++it) {
    double mid = 0.5 * (lo + hi);
    double g = g_at(mid);
    if (g > budget)
      lo = mid;
    else
      hi = mid;
    if (std::abs(g - budget) <= 1e-13 * budget || hi - lo < 1e-13) break;
  }
  g_at(hi);  // end on the feasible side
  if (mu_hint) *mu_hint = hi;
  return y;
}

}  // namespace

std::map<char, double> max_tiles(const FusedStatement& stmt, double budget) {
  TileProblem p = make_problem(stmt);
  auto y = solve_tiles(p, budget);
  std::map<char, double> tiles;
  for (std::size_t d = 0; d < p.dims.size(); ++d) tiles[p.dims[d]] = std::exp(y[d]);
  return tiles;
}

IoBound intensity(const FusedStatement& stmt, double fast_mem) {
  TileProblem p = make_problem(stmt);
  if (fast_mem < static_cast<double>(p.terms.size()) + 1.0)
    fail(errc::infeasible, "intensity: fast memory must exceed the number of access arrays");

  double gmax = eval_g(p, p.cap);
  IoBound out;
  if (gmax <= fast_mem * (1.0 + 1e-6)) {
    // The whole footprint is resident; the adversarial argument yields no
    // positive bound.
    out.fits_fast_memory = true;
    out.rho = std::numeric_limits<double>::infinity();
    out.x0 = gmax;
    out.q_bound = 0.0;
    for (std::size_t d = 0; d < p.dims.size(); ++d)
      out.tiles[p.dims[d]] = std::exp(p.cap[d]);
    return out;
  }

  double mu_hint = std::numeric_limits<double>::quiet_NaN();
  auto log_rho = [&](double log_x) {
    double x = std::exp(log_x);
    auto y = solve_tiles(p, x, &mu_hint);
    double v = 0.0;
    for (double t : y) v += t;
    return v - std::log(x - fast_mem);
  };

  const double lo = std::log(fast_mem * (1.0 + 1e-6));
  const double hi = std::log(gmax);

  // Coarse scan, then golden-section refinement inside the bracketing pair.
  const int kScan = 96;
  int best_i = 0;
  double best_f = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= kScan; ++i) {
    double u = lo + (hi - lo) * i / kScan;
    double f = log_rho(u);
    if (f < best_f) {
      best_f = f;
      best_i = i;
    }
  }
  double a = lo + (hi - lo) * std::max(0, best_i - 1) / kScan;
  double b = lo + (hi - lo) * std::min(kScan, best_i + 1) / kScan;
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - invphi * (b - a), d = a + invphi * (b - a);
  double fc = log_rho(c), fd = log_rho(d);
  while (b - a > 1e-8) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = log_rho(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = log_rho(d);
    }
  }
  double log_x0 = 0.5 * (a + b);
  out.x0 = std::exp(log_x0);
  auto y = solve_tiles(p, out.x0, &mu_hint);
  double v = 0.0;
  for (double t : y) v += t;
  out.rho = std::exp(v) / (out.x0 - fast_mem);
  for (std::size_t i = 0; i < p.dims.size(); ++i) out.tiles[p.dims[i]] = std::exp(y[i]);
  out.q_bound = stmt.volume / out.rho;
  return out;
}

PartitionResult best_partition(const Sdg& sdg, const ContractionTree& tree,
                               const EinsumSpec& spec, double fast_mem) {
  auto partitions = enumerate_partitions(sdg);
  if (partitions.empty()) fail(errc::invalid_argument, "best_partition: empty graph");

  struct Entry {
    FusedStatement stmt;
    IoBound bound;
  };
  std::map<std::vector<int>, Entry> cache;
  auto entry_for = [&](std::vector<int> block) -> const Entry& {
    std::sort(block.begin(), block.end());
    auto it = cache.find(block);
    if (it == cache.end()) {
      Entry e;
      e.stmt = fuse(block, sdg, tree, spec);
      e.bound = intensity(e.stmt, fast_mem);
      it = cache.emplace(block, std::move(e)).first;
    }
    return it->second;
  };

  PartitionResult best;
  bool have = false;
  for (const auto& part : partitions) {
    double total = 0.0;
    for (const auto& block : part) total += entry_for(block).bound.q_bound;
    bool take = !have;
    if (have) {
      double scale = std::max({1.0, total, best.total_q});
      if (total < best.total_q - 1e-9 * scale)
        take = true;
      else if (std::abs(total - best.total_q) <= 1e-9 * scale &&
               part.size() < best.blocks.size())
        take = true;
    }
    if (take) {
      best.blocks = part;
      best.total_q = total;
      best.statements.clear();
      best.bounds.clear();
      for (const auto& block : part) {
        const Entry& e = entry_for(block);
        best.statements.push_back(e.stmt);
        best.bounds.push_back(e.bound);
      }
      have = true;
    }
  }
  best.partitions_considered = static_cast<int>(partitions.size());

  // Emit blocks in dependency order (by the last step each block produces).
  std::vector<std::size_t> order(best.blocks.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return best.statements[a].step_ids.back() < best.statements[b].step_ids.back();
  });
  PartitionResult sorted;
  sorted.total_q = best.total_q;
  sorted.partitions_considered = best.partitions_considered;
  for (std::size_t i : order) {
    sorted.blocks.push_back(best.blocks[i]);
    sorted.statements.push_back(best.statements[i]);
    sorted.bounds.push_back(best.bounds[i]);
  }
  return sorted;
}

}  // namespace einplan
