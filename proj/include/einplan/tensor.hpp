#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace einplan {

/// Dense row-major tensor of 64-bit reals. An empty shape is a scalar with
/// one element.
struct DenseTensor {
  std::vector<std::int64_t> shape;
  std::vector<double> data;

  DenseTensor() = default;
  explicit DenseTensor(std::vector<std::int64_t> s);

  std::int64_t size() const;
  std::vector<std::int64_t> strides() const;  // row-major, last dim fastest
  std::int64_t offset_of(const std::vector<std::int64_t>& idx) const;
  double& at(const std::vector<std::int64_t>& idx);
  double at(const std::vector<std::int64_t>& idx) const;
};

std::int64_t shape_product(const std::vector<std::int64_t>& shape);

/// Seeded values uniform in [-1, 1). Fixed generator (mt19937_64, 53-bit
/// mantissa scaling) so outputs are identical across platforms.
DenseTensor random_tensor(const std::vector<std::int64_t>& shape, std::uint64_t seed);

/// Elementwise |got - want| / max(1, |want|), maximized over all elements.
double max_rel_error(const DenseTensor& got, const DenseTensor& want);

// Tensor files: first line a JSON object {"shape":[...]} followed by one
// value per line.
void write_tensor(const std::string& path, const DenseTensor& t);
DenseTensor read_tensor(const std::string& path);

}  // namespace einplan
