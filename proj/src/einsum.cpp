#include "einplan/einsum.hpp"

#include <algorithm>
#include <cctype>
#include <limits>

#include "einplan/error.hpp"

namespace einplan {

namespace {

void check_operand(const std::string& ops, const std::string& where) {
  bool seen[256] = {false};
  for (char c : ops) {
    if (!std::isalpha(static_cast<unsigned char>(c)))
      fail(errc::parse, "einsum: index symbols must be alphabetic, got '" +
                            std::string(1, c) + "' in " + where);
    auto u = static_cast<unsigned char>(c);
    if (seen[u])
      fail(errc::parse, "einsum: symbol '" + std::string(1, c) +
                            "' repeats within operand \"" + ops + "\"");
    seen[u] = true;
  }
}

}  // namespace

bool EinsumSpec::bound() const {
  for (char c : symbols())
    if (extents.find(c) == extents.end()) return false;
  return true;
}

std::vector<char> EinsumSpec::symbols() const {
  std::vector<char> out;
  bool seen[256] = {false};
  auto add = [&](const std::string& s) {
    for (char c : s) {
      auto u = static_cast<unsigned char>(c);
      if (!seen[u]) {
        seen[u] = true;
        out.push_back(c);
      }
    }
  };
  for (const auto& in : inputs) add(in);
  add(output);
  return out;
}

std::int64_t EinsumSpec::extent(char sym) const {
  auto it = extents.find(sym);
  if (it == extents.end())
    fail(errc::invalid_argument,
         std::string("einsum: no extent bound for symbol '") + sym + "'");
  return it->second;
}

std::vector<std::int64_t> EinsumSpec::shape_of(const std::string& indices) const {
  std::vector<std::int64_t> shape;
  shape.reserve(indices.size());
  for (char c : indices) shape.push_back(extent(c));
  return shape;
}

std::string EinsumSpec::text() const {
  std::string s;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (i) s += ',';
    s += inputs[i];
  }
  s += "->";
  s += output;
  return s;
}

EinsumSpec parse(const std::string& text) {
  std::string s;
  s.reserve(text.size());
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);

  auto arrow = s.find("->");
  if (arrow == std::string::npos)
    fail(errc::parse, "einsum: missing \"->\" in \"" + text + "\"");
  if (s.find("->", arrow + 2) != std::string::npos)
    fail(errc::parse, "einsum: more than one \"->\" in \"" + text + "\"");

  EinsumSpec spec;
  spec.output = s.substr(arrow + 2);

  std::string lhs = s.substr(0, arrow);
  std::size_t pos = 0;
  while (true) {
    auto comma = lhs.find(',', pos);
    std::string part = lhs.substr(pos, comma == std::string::npos ? std::string::npos
                                                                  : comma - pos);
    if (part.empty()) fail(errc::parse, "einsum: empty operand in \"" + text + "\"");
    spec.inputs.push_back(part);
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }

  for (const auto& in : spec.inputs) check_operand(in, "\"" + in + "\"");
  check_operand(spec.output, "output \"" + spec.output + "\"");

  for (char c : spec.output) {
    bool found = false;
    for (const auto& in : spec.inputs)
      if (in.find(c) != std::string::npos) {
        found = true;
        break;
      }
    if (!found)
      fail(errc::parse, "einsum: output symbol '" + std::string(1, c) +
                            "' does not appear in any input");
  }
  return spec;
}

EinsumSpec bind_extents(const EinsumSpec& spec,
                        const std::vector<std::vector<std::int64_t>>& shapes) {
  if (shapes.size() != spec.inputs.size())
    fail(errc::invalid_argument, "bind_extents: expected " +
                                     std::to_string(spec.inputs.size()) +
                                     " shapes, got " + std::to_string(shapes.size()));
  EinsumSpec out = spec;
  out.extents.clear();
  for (std::size_t k = 0; k < shapes.size(); ++k) {
    const auto& indices = spec.inputs[k];
    const auto& shape = shapes[k];
    if (shape.size() != indices.size())
      fail(errc::invalid_argument, "bind_extents: operand " + std::to_string(k) +
                                       " (\"" + indices + "\") has rank " +
                                       std::to_string(indices.size()) + ", shape has " +
                                       std::to_string(shape.size()) + " dims");
    for (std::size_t d = 0; d < indices.size(); ++d) {
      if (shape[d] < 1)
        fail(errc::invalid_argument, "bind_extents: extents must be positive");
      auto [it, inserted] = out.extents.emplace(indices[d], shape[d]);
      if (!inserted && it->second != shape[d])
        fail(errc::invalid_argument,
             std::string("bind_extents: conflicting extents for symbol '") +
                 indices[d] + "': " + std::to_string(it->second) + " vs " +
                 std::to_string(shape[d]));
    }
  }
  return out;
}

EinsumSpec bind_extents(const EinsumSpec& spec,
                        const std::map<char, std::int64_t>& extents) {
  EinsumSpec out = spec;
  out.extents.clear();
  for (char c : spec.symbols()) {
    auto it = extents.find(c);
    if (it == extents.end())
      fail(errc::parse, std::string("bind_extents: no extent given for symbol '") +
                            c + "'");
    if (it->second < 1)
      fail(errc::invalid_argument, "bind_extents: extents must be positive");
    out.extents[c] = it->second;
  }
  return out;
}

std::int64_t flop_count_naive(const EinsumSpec& spec) {
  if (!spec.bound()) fail(errc::invalid_argument, "flop_count_naive: extents unbound");
  __int128 points = 1;
  for (char c : spec.symbols()) points *= spec.extent(c);
  points *= static_cast<__int128>(spec.inputs.size());
  const __int128 cap = std::numeric_limits<std::int64_t>::max();
  return static_cast<std::int64_t>(points > cap ? cap : points);
}

namespace {

constexpr int kMaxOrder = 8;

void check_order_mode(int order, int mode, const char* what) {
  if (order < 2 || order > kMaxOrder)
    fail(errc::invalid_argument,
         std::string(what) + ": order must be in [2, 8], got " + std::to_string(order));
  if (mode < 0 || mode >= order)
    fail(errc::invalid_argument,
         std::string(what) + ": mode " + std::to_string(mode) +
             " out of range for order " + std::to_string(order));
}

char mode_letter(int j) { return static_cast<char>('i' + j); }
char rank_letter(int j) { return static_cast<char>('a' + j); }

std::string all_modes(int order) {
  std::string s;
  for (int j = 0; j < order; ++j) s += mode_letter(j);
  return s;
}

}  // namespace

EinsumSpec make_matricization(int order, int mode) {
  check_order_mode(order, mode, "make_matricization");
  std::string in = all_modes(order);
  std::string out;
  for (int j = 0; j < order; ++j)
    if (j != mode) out += mode_letter(j);
  out += mode_letter(mode);
  return parse(in + "->" + out);
}

EinsumSpec make_ttm(int order, int mode) {
  check_order_mode(order, mode, "make_ttm");
  std::string in = all_modes(order);
  std::string mat = std::string(1, mode_letter(mode)) + "a";
  std::string out;
  for (int j = 0; j < order; ++j) out += (j == mode) ? 'a' : mode_letter(j);
  return parse(in + "," + mat + "->" + out);
}

EinsumSpec make_krp() { return parse("ir,jr->ij"); }

EinsumSpec make_ttmc(int order, int mode) {
  check_order_mode(order, mode, "make_ttmc");
  std::string text = all_modes(order);
  for (int j = 0; j < order; ++j) {
    if (j == mode) continue;
    text += ',';
    text += mode_letter(j);
    text += rank_letter(j);
  }
  text += "->";
  for (int j = 0; j < order; ++j)
    text += (j == mode) ? mode_letter(j) : rank_letter(j);
  return parse(text);
}

EinsumSpec make_mttkrp(int order, int mode) {
  check_order_mode(order, mode, "make_mttkrp");
  std::string text = all_modes(order);
  for (int j = 0; j < order; ++j) {
    if (j == mode) continue;
    text += ',';
    text += mode_letter(j);
    text += 'a';
  }
  text += "->";
  text += mode_letter(mode);
  text += 'a';
  return parse(text);
}

}  // namespace einplan
