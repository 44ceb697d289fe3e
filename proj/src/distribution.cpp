#include "einplan/distribution.hpp"

#include <algorithm>
#include <cmath>

#include "einplan/error.hpp"

namespace einplan {

std::int64_t ProcessGrid::total() const {
  std::int64_t p = 1;
  for (auto d : dims) p *= d;
  return p;
}

std::int64_t ProcessGrid::rank_of(const std::vector<std::int64_t>& coords) const {
  if (coords.size() != dims.size())
    fail(errc::invalid_argument, "grid: coordinate rank mismatch");
  std::int64_t rank = 0;
  for (std::size_t d = 0; d < dims.size(); ++d) {
    if (coords[d] < 0 || coords[d] >= dims[d])
      fail(errc::invalid_argument, "grid: coordinate out of range");
    rank = rank * dims[d] + coords[d];
  }
  return rank;
}

std::vector<std::int64_t> ProcessGrid::coords_of(std::int64_t rank) const {
  if (rank < 0 || rank >= total()) fail(errc::invalid_argument, "grid: rank out of range");
  std::vector<std::int64_t> coords(dims.size(), 0);
  for (int d = static_cast<int>(dims.size()) - 1; d >= 0; --d) {
    coords[d] = rank % dims[d];
    rank /= dims[d];
  }
  return coords;
}

int ProcessGrid::axis_of(char sym) const {
  for (std::size_t d = 0; d < order.size(); ++d)
    if (order[d] == sym) return static_cast<int>(d);
  return -1;
}

std::int64_t ProcessGrid::dim_of(char sym) const {
  int a = axis_of(sym);
  return a < 0 ? 1 : dims[static_cast<std::size_t>(a)];
}

namespace {

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return (a + b - 1) / b; }

bool valid_split(std::int64_t extent, std::int64_t parts) {
  if (parts < 1 || parts > extent) return false;
  return (parts - 1) * ceil_div(extent, parts) < extent;
}

}  // namespace

BlockDistribution make_block_distribution(const ProcessGrid& grid,
                                          const std::vector<std::int64_t>& extents) {
  if (extents.size() != grid.dims.size())
    fail(errc::invalid_argument, "block distribution: extent rank mismatch");
  BlockDistribution d;
  d.grid = grid;
  d.extents = extents;
  for (std::size_t i = 0; i < extents.size(); ++i) {
    if (!valid_split(extents[i], grid.dims[i]))
      fail(errc::grid, std::string("block distribution: ") +
                           std::to_string(grid.dims[i]) + " blocks over extent " +
                           std::to_string(extents[i]) + " leave an empty owner");
    d.blocks.push_back(ceil_div(extents[i], grid.dims[i]));
  }
  return d;
}

BlockDistribution block_distribution_from_blocks(
    const std::vector<char>& order, const std::vector<std::int64_t>& extents,
    const std::vector<std::int64_t>& blocks) {
  if (order.size() != extents.size() || order.size() != blocks.size())
    fail(errc::invalid_argument, "block distribution: rank mismatch");
  BlockDistribution d;
  d.grid.order = order;
  d.extents = extents;
  d.blocks = blocks;
  for (std::size_t i = 0; i < extents.size(); ++i) {
    if (blocks[i] < 1 || extents[i] < 1)
      fail(errc::invalid_argument, "block distribution: sizes must be positive");
    d.grid.dims.push_back(ceil_div(extents[i], blocks[i]));
  }
  return d;
}

std::vector<std::int64_t> BlockDistribution::base_of(
    const std::vector<std::int64_t>& coords) const {
  std::vector<std::int64_t> base(coords.size());
  for (std::size_t d = 0; d < coords.size(); ++d) base[d] = coords[d] * blocks[d];
  return base;
}

std::vector<std::int64_t> BlockDistribution::shape_of(
    const std::vector<std::int64_t>& coords) const {
  std::vector<std::int64_t> shape(coords.size());
  for (std::size_t d = 0; d < coords.size(); ++d)
    shape[d] = std::min(blocks[d], extents[d] - coords[d] * blocks[d]);
  return shape;
}

OwnerInfo owner_of(const std::vector<std::int64_t>& index,
                   const BlockDistribution& dist) {
  if (index.size() != dist.extents.size())
    fail(errc::invalid_argument, "owner_of: index rank mismatch");
  OwnerInfo info;
  for (std::size_t d = 0; d < index.size(); ++d) {
    if (index[d] < 0 || index[d] >= dist.extents[d])
      fail(errc::invalid_argument, "owner_of: index out of range");
    info.coords.push_back(index[d] / dist.blocks[d]);
    info.offsets.push_back(index[d] % dist.blocks[d]);
    info.bases.push_back(dist.blocks[d] * info.coords.back());
  }
  return info;
}

std::int64_t TensorPlacement::replication() const {
  std::int64_t r = 1;
  std::vector<bool> used(term_grid.dims.size(), false);
  for (int a : axes) used[static_cast<std::size_t>(a)] = true;
  for (std::size_t d = 0; d < term_grid.dims.size(); ++d)
    if (!used[d]) r *= term_grid.dims[d];
  return r;
}

std::vector<std::int64_t> TensorPlacement::block_coords_of(std::int64_t rank) const {
  auto coords = term_grid.coords_of(rank);
  std::vector<std::int64_t> block;
  block.reserve(axes.size());
  for (int a : axes) block.push_back(coords[static_cast<std::size_t>(a)]);
  return block;
}

std::vector<std::int64_t> TensorPlacement::replica_ranks(
    const std::vector<std::int64_t>& block) const {
  std::vector<std::int64_t> out;
  std::vector<bool> fixed(term_grid.dims.size(), false);
  std::vector<std::int64_t> coords(term_grid.dims.size(), 0);
  for (std::size_t i = 0; i < axes.size(); ++i) {
    fixed[static_cast<std::size_t>(axes[i])] = true;
    coords[static_cast<std::size_t>(axes[i])] = block[i];
  }
  auto recurse = [&](auto&& self, std::size_t d) -> void {
    if (d == coords.size()) {
      out.push_back(term_grid.rank_of(coords));
      return;
    }
    if (fixed[d]) {
      self(self, d + 1);
      return;
    }
    for (std::int64_t c = 0; c < term_grid.dims[d]; ++c) {
      coords[d] = c;
      self(self, d + 1);
    }
    coords[d] = 0;
  };
  recurse(recurse, 0);
  std::sort(out.begin(), out.end());
  return out;
}

std::int64_t TensorPlacement::canonical_rank(
    const std::vector<std::int64_t>& block) const {
  std::vector<std::int64_t> coords(term_grid.dims.size(), 0);
  for (std::size_t i = 0; i < axes.size(); ++i)
    coords[static_cast<std::size_t>(axes[i])] = block[i];
  return term_grid.rank_of(coords);
}

bool TensorPlacement::is_canonical(std::int64_t rank) const {
  auto coords = term_grid.coords_of(rank);
  std::vector<bool> used(term_grid.dims.size(), false);
  for (int a : axes) used[static_cast<std::size_t>(a)] = true;
  for (std::size_t d = 0; d < coords.size(); ++d)
    if (!used[d] && coords[d] != 0) return false;
  return true;
}

TensorPlacement placement(const std::string& tensor, const std::string& indices,
                          const ProcessGrid& term_grid,
                          const std::map<char, std::int64_t>& extents) {
  TensorPlacement p;
  p.tensor = tensor;
  p.indices = indices;
  p.term_grid = term_grid;

  ProcessGrid restricted;
  std::vector<std::int64_t> ext;
  for (char c : indices) {
    int a = term_grid.axis_of(c);
    if (a < 0)
      fail(errc::invalid_argument, std::string("placement: tensor index '") + c +
                                       "' is not a grid dimension");
    p.axes.push_back(a);
    restricted.order.push_back(c);
    restricted.dims.push_back(term_grid.dims[static_cast<std::size_t>(a)]);
    auto it = extents.find(c);
    if (it == extents.end())
      fail(errc::invalid_argument, std::string("placement: unbound symbol '") + c + "'");
    ext.push_back(it->second);
  }
  p.dist = make_block_distribution(restricted, ext);
  return p;
}

TensorPlacement placement_with_dist(const std::string& tensor,
                                    const std::string& indices,
                                    const ProcessGrid& term_grid,
                                    const BlockDistribution& dist) {
  TensorPlacement p;
  p.tensor = tensor;
  p.indices = indices;
  p.term_grid = term_grid;
  if (indices.size() != dist.extents.size())
    fail(errc::invalid_argument, "placement: distribution rank mismatch");
  for (std::size_t i = 0; i < indices.size(); ++i) {
    int a = term_grid.axis_of(indices[i]);
    if (a < 0 || term_grid.dims[static_cast<std::size_t>(a)] != dist.grid.dims[i])
      fail(errc::invalid_argument,
           std::string("placement: term grid does not match the distribution on '") +
               indices[i] + "'");
    p.axes.push_back(a);
  }
  p.dist = dist;
  return p;
}

ReductionGroup reduction_group(const std::string& output_indices,
                               const ProcessGrid& grid) {
  ReductionGroup g;
  for (std::size_t d = 0; d < grid.order.size(); ++d) {
    if (output_indices.find(grid.order[d]) == std::string::npos) {
      g.dims.push_back(grid.order[d]);
      g.depth *= grid.dims[d];
    }
  }
  return g;
}

namespace {

void factorizations(std::int64_t p, const std::vector<std::int64_t>& extents,
                    std::size_t d, std::vector<std::int64_t>& cur,
                    std::vector<std::vector<std::int64_t>>& out) {
  if (d + 1 == cur.size()) {
    if (valid_split(extents[d], p)) {
      cur[d] = p;
      out.push_back(cur);
    }
    return;
  }
  for (std::int64_t f = 1; f <= p; ++f) {
    if (p % f) continue;
    if (!valid_split(extents[d], f)) continue;
    cur[d] = f;
    factorizations(p / f, extents, d + 1, cur, out);
  }
}

}  // namespace

ProcessGrid choose_grid(const FusedStatement& stmt,
                        const std::map<char, double>& tiles, std::int64_t procs) {
  if (procs < 1) fail(errc::invalid_argument, "choose_grid: procs must be positive");
  const auto& dims = stmt.iteration;
  std::vector<std::int64_t> extents;
  for (char c : dims) extents.push_back(stmt.extents.at(c));

  std::vector<std::vector<std::int64_t>> options;
  std::vector<std::int64_t> cur(dims.size(), 1);
  if (dims.empty()) {
    if (procs == 1) options.push_back({});
  } else {
    factorizations(procs, extents, 0, cur, options);
  }
  if (options.empty())
    fail(errc::grid, "choose_grid: " + std::to_string(procs) +
                         " processes cannot be laid out over the iteration space");

  auto complement = [&](const std::vector<std::int64_t>& p, const std::string& indices) {
    std::int64_t r = 1;
    for (std::size_t d = 0; d < dims.size(); ++d)
      if (indices.find(dims[d]) == std::string::npos) r *= p[d];
    return r;
  };

  // Replicated copies of every input plus reduction traffic for the output;
  // both are (tensor size) * (complement grid size - 1).
  auto score = [&](const std::vector<std::int64_t>& p) {
    double s = 0.0;
    for (const auto& a : stmt.arrays) {
      double size = 1.0;
      for (char c : a.indices) size *= static_cast<double>(stmt.extents.at(c));
      s += size * static_cast<double>(complement(p, a.indices) - 1);
    }
    return s;
  };

  auto tile_dev = [&](const std::vector<std::int64_t>& p) {
    double dev = 0.0;
    for (std::size_t d = 0; d < dims.size(); ++d) {
      double block = static_cast<double>(extents[d]) / static_cast<double>(p[d]);
      double t = 1.0;
      auto it = tiles.find(dims[d]);
      if (it != tiles.end() && std::isfinite(it->second))
        t = std::clamp(it->second, 1.0, static_cast<double>(extents[d]));
      double r = std::log(block) - std::log(t);
      dev += r * r;
    }
    return dev;
  };

  std::size_t best = 0;
  double best_score = score(options[0]);
  double best_dev = tile_dev(options[0]);
  for (std::size_t i = 1; i < options.size(); ++i) {
    double s = score(options[i]);
    double scale = std::max({1.0, s, best_score});
    if (s < best_score - 1e-9 * scale) {
      best = i;
      best_score = s;
      best_dev = tile_dev(options[i]);
      continue;
    }
    if (s > best_score + 1e-9 * scale) continue;
    double dev = tile_dev(options[i]);
    if (dev < best_dev - 1e-12) {
      best = i;
      best_score = s;
      best_dev = dev;
    } else if (std::abs(dev - best_dev) <= 1e-12 &&
               options[i] < options[best]) {
      best = i;
      best_score = s;
      best_dev = dev;
    }
  }

  ProcessGrid g;
  g.order = dims;
  g.dims = options[best];
  return g;
}

}  // namespace einplan
