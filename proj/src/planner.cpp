#include "einplan/planner.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <tuple>

#include "einplan/error.hpp"
#include "einplan/evaluate.hpp"

namespace einplan {

const char* to_string(OpClass c) {
  switch (c) {
    case OpClass::KRP: return "KRP";
    case OpClass::TTM: return "TTM";
    case OpClass::TDOT: return "TDOT";
    case OpClass::GEMM: return "GEMM";
    case OpClass::OUTER: return "OUTER";
    case OpClass::ELEMENTWISE: return "ELEMENTWISE";
  }
  return "?";
}

std::string ContractionTree::tensor_name(int id) const {
  if (id < n_inputs) return "in" + std::to_string(id);
  int step = id - n_inputs;
  if (step + 1 == static_cast<int>(steps.size())) return "out";
  return "t" + std::to_string(step);
}

const std::string& ContractionTree::indices_of(int id, const EinsumSpec& spec) const {
  if (id < n_inputs) return spec.inputs[static_cast<std::size_t>(id)];
  return steps[static_cast<std::size_t>(id - n_inputs)].result_indices;
}

namespace {

bool contains(const std::string& s, char c) { return s.find(c) != std::string::npos; }

std::string union_of(const std::string& a, const std::string& b) {
  std::string u = a;
  for (char c : b)
    if (!contains(u, c)) u += c;
  return u;
}

// Result index order: lhs-only indices in lhs order, rhs-only indices in rhs
// order, shared surviving indices last in lhs order.
std::string order_result(const std::string& lhs, const std::string& rhs,
                         const std::string& keep) {
  std::string out;
  for (char c : lhs)
    if (contains(keep, c) && !contains(rhs, c)) out += c;
  for (char c : rhs)
    if (contains(keep, c) && !contains(lhs, c)) out += c;
  for (char c : lhs)
    if (contains(keep, c) && contains(rhs, c)) out += c;
  return out;
}

}  // namespace

// Costs are accumulated in 128 bits so gigantic symbolic extents stay
// ordered; the public interface saturates at int64 max.
using cost_t = __int128;

namespace {

std::int64_t saturate(cost_t v) {
  const cost_t cap = std::numeric_limits<std::int64_t>::max();
  return static_cast<std::int64_t>(v > cap ? cap : v);
}

cost_t step_cost(const std::string& lhs_indices, const std::string& rhs_indices,
                 const std::string& result_indices,
                 const std::map<char, std::int64_t>& extents) {
  std::string u = union_of(lhs_indices, rhs_indices);
  cost_t iterations = 1;
  for (char c : u) {
    auto it = extents.find(c);
    if (it == extents.end())
      fail(errc::invalid_argument, std::string("step_flops: unbound symbol '") + c + "'");
    iterations *= it->second;
  }
  bool contracts = false;
  for (char c : u)
    if (!contains(result_indices, c)) contracts = true;
  return contracts ? 2 * iterations : iterations;
}

}  // namespace

std::int64_t step_flops(const std::string& lhs_indices, const std::string& rhs_indices,
                        const std::string& result_indices,
                        const std::map<char, std::int64_t>& extents) {
  return saturate(step_cost(lhs_indices, rhs_indices, result_indices, extents));
}

OpClass classify(const std::string& lhs_indices, const std::string& rhs_indices,
                 const std::string& result_indices) {
  if (rhs_indices.empty()) return OpClass::ELEMENTWISE;

  std::string shared;
  for (char c : lhs_indices)
    if (contains(rhs_indices, c)) shared += c;
  if (shared.empty()) return OpClass::OUTER;

  std::string u = union_of(lhs_indices, rhs_indices);
  std::string contracted;
  for (char c : u)
    if (!contains(result_indices, c)) contracted += c;

  if (contracted.empty()) {
    // The Khatri-Rao pattern: the single shared index trails both operands
    // and survives into the result.
    if (shared.size() == 1 && lhs_indices.back() == shared[0] &&
        rhs_indices.back() == shared[0])
      return OpClass::KRP;
    return OpClass::ELEMENTWISE;
  }
  if (lhs_indices.size() == 2 && rhs_indices.size() == 2 && shared.size() == 1 &&
      contracted == shared)
    return OpClass::GEMM;
  if (shared.size() == 1 && contracted == shared &&
      ((lhs_indices.size() >= 3 && rhs_indices.size() == 2) ||
       (lhs_indices.size() == 2 && rhs_indices.size() >= 3)))
    return OpClass::TTM;
  return OpClass::TDOT;
}

namespace {

struct Candidate {
  cost_t flops = 0;
  cost_t elems = 0;
  std::vector<ContractionStep> steps;
  std::string result;
  bool valid = false;
};

using StepKey = std::tuple<int, int, std::string>;

bool seq_less(const std::vector<ContractionStep>& a,
              const std::vector<ContractionStep>& b) {
  auto key = [](const ContractionStep& s) {
    return StepKey{s.lhs, s.rhs, s.result_indices};
  };
  for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) {
    if (key(a[i]) != key(b[i])) return key(a[i]) < key(b[i]);
  }
  return a.size() < b.size();
}

bool better(const Candidate& a, const Candidate& b) {
  if (a.flops != b.flops) return a.flops < b.flops;
  if (a.elems != b.elems) return a.elems < b.elems;
  return seq_less(a.steps, b.steps);
}

}  // namespace

ContractionTree optimal_path(const EinsumSpec& spec) {
  if (!spec.bound()) fail(errc::invalid_argument, "optimal_path: extents unbound");
  const int n = static_cast<int>(spec.inputs.size());
  if (n > 8)
    fail(errc::invalid_argument,
         "optimal_path: " + std::to_string(n) + " operands exceed the enumeration limit of 8");

  ContractionTree tree;
  tree.n_inputs = n;

  if (n == 1) {
    ContractionStep s;
    s.lhs = 0;
    s.lhs_indices = spec.inputs[0];
    s.result_indices = spec.output;
    s.flops = step_flops(s.lhs_indices, "", s.result_indices, spec.extents);
    s.op_class = classify(s.lhs_indices, "", s.result_indices);
    tree.steps = {s};
    tree.total_flops = s.flops;
    return tree;
  }

  const unsigned full = (1u << n) - 1u;

  // Indices a subset's result must keep: those used by the output or by any
  // operand outside the subset (sum-early policy).
  auto needed = [&](unsigned mask) {
    std::string keep = spec.output;
    for (int k = 0; k < n; ++k)
      if (!(mask & (1u << k))) keep = union_of(keep, spec.inputs[k]);
    return keep;
  };

  std::vector<Candidate> best(full + 1);
  for (int k = 0; k < n; ++k) {
    Candidate& c = best[1u << k];
    c.valid = true;
    c.result = spec.inputs[k];
  }

  auto operand_ref = [&](unsigned mask, const Candidate& c, int shift) {
    if (std::popcount(mask) == 1) return std::countr_zero(mask);
    return n + shift + static_cast<int>(c.steps.size()) - 1;
  };

  for (unsigned mask = 1; mask <= full; ++mask) {
    if (std::popcount(mask) < 2) continue;
    const std::string keep = needed(mask);
    const unsigned low = mask & (~mask + 1u);  // lhs side holds the lowest operand
    Candidate chosen;
    for (unsigned sub = (mask - 1u) & mask; sub; sub = (sub - 1u) & mask) {
      if (!(sub & low)) continue;
      const unsigned rest = mask ^ sub;
      const Candidate& a = best[sub];
      const Candidate& b = best[rest];
      if (!a.valid || !b.valid) continue;

      Candidate c;
      c.valid = true;
      c.steps = a.steps;
      for (const auto& s : b.steps) {
        ContractionStep t = s;
        if (t.lhs >= n) t.lhs += static_cast<int>(a.steps.size());
        if (t.rhs >= n) t.rhs += static_cast<int>(a.steps.size());
        c.steps.push_back(t);
      }

      ContractionStep root;
      root.lhs = operand_ref(sub, a, 0);
      root.rhs = operand_ref(rest, b, static_cast<int>(a.steps.size()));
      root.lhs_indices = a.result;
      root.rhs_indices = b.result;
      root.result_indices =
          (mask == full) ? spec.output : order_result(a.result, b.result, keep);
      cost_t root_cost = step_cost(root.lhs_indices, root.rhs_indices,
                                   root.result_indices, spec.extents);
      root.flops = saturate(root_cost);
      root.op_class = classify(root.lhs_indices, root.rhs_indices, root.result_indices);
      c.steps.push_back(root);

      c.result = root.result_indices;
      c.flops = a.flops + b.flops + root_cost;
      cost_t result_elems = 1;
      for (char ch : root.result_indices) result_elems *= spec.extent(ch);
      c.elems = a.elems + b.elems + result_elems;

      if (!chosen.valid || better(c, chosen)) chosen = std::move(c);
    }
    best[mask] = std::move(chosen);
  }

  tree.steps = best[full].steps;
  tree.total_flops = saturate(best[full].flops);
  return tree;
}

DenseTensor evaluate_tree(const ContractionTree& tree, const EinsumSpec& spec,
                          const std::vector<DenseTensor>& operands) {
  if (operands.size() != static_cast<std::size_t>(tree.n_inputs))
    fail(errc::invalid_argument, "evaluate_tree: operand count mismatch");
  std::vector<DenseTensor> results;
  results.reserve(tree.steps.size());
  auto tensor_of = [&](int id) -> const DenseTensor& {
    return id < tree.n_inputs ? operands[static_cast<std::size_t>(id)]
                              : results[static_cast<std::size_t>(id - tree.n_inputs)];
  };
  for (const auto& s : tree.steps) {
    EinsumSpec sub;
    sub.inputs = {s.lhs_indices};
    std::vector<DenseTensor> ops = {tensor_of(s.lhs)};
    if (s.rhs >= 0) {
      sub.inputs.push_back(s.rhs_indices);
      ops.push_back(tensor_of(s.rhs));
    }
    sub.output = s.result_indices;
    for (char c : union_of(s.lhs_indices, s.rhs_indices))
      sub.extents[c] = spec.extent(c);
    results.push_back(naive_evaluate(sub, ops));
  }
  return results.back();
}

}  // namespace einplan
