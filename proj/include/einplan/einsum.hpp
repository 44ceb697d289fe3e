#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace einplan {

/// Parsed Einstein-notation kernel: one index string per operand, an output
/// index string, and (once bound) the extent of every index symbol.
/// Symbols may not repeat within a single operand; every output symbol must
/// appear in at least one input.
struct EinsumSpec {
  std::vector<std::string> inputs;
  std::string output;
  std::map<char, std::int64_t> extents;  // empty until bound

  bool bound() const;
  /// All symbols in first-appearance order (inputs scanned left to right,
  /// then the output).
  std::vector<char> symbols() const;
  std::int64_t extent(char sym) const;
  std::vector<std::int64_t> shape_of(const std::string& indices) const;
  std::string text() const;  // "ij,jk->ik"
};

/// Parse "ij,jk->ik". Whitespace is ignored. Rejects repeated symbols inside
/// one operand (diagonal access) and output symbols absent from all inputs.
EinsumSpec parse(const std::string& text);

/// Attach extents from one shape per operand; extents of a symbol must agree
/// across all of its occurrences.
EinsumSpec bind_extents(const EinsumSpec& spec,
                        const std::vector<std::vector<std::int64_t>>& shapes);

/// Attach extents directly; every symbol of the spec must be present.
EinsumSpec bind_extents(const EinsumSpec& spec,
                        const std::map<char, std::int64_t>& extents);

/// Cost of the unoptimized loop nest: one multiply-add chain of length
/// n_operands at every point of the full Cartesian iteration space.
std::int64_t flop_count_naive(const EinsumSpec& spec);

// Standard kernels as einsum strings. Tensor modes use letters i,j,k,...
// and rank dimensions use a,b,c,...; order is limited to 8.
EinsumSpec make_matricization(int order, int mode);  // transposition part only
EinsumSpec make_ttm(int order, int mode);
EinsumSpec make_krp();
EinsumSpec make_ttmc(int order, int mode);
EinsumSpec make_mttkrp(int order, int mode);

}  // namespace einplan
