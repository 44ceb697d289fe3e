#include "einplan/tensor.hpp"

#include <cmath>
#include <fstream>
#include <random>

#include <nlohmann/json.hpp>

#include "einplan/error.hpp"

namespace einplan {

std::int64_t shape_product(const std::vector<std::int64_t>& shape) {
  std::int64_t p = 1;
  for (auto d : shape) p *= d;
  return p;
}

DenseTensor::DenseTensor(std::vector<std::int64_t> s) : shape(std::move(s)) {
  for (auto d : shape)
    if (d < 1) fail(errc::invalid_argument, "tensor: dimensions must be positive");
  data.assign(static_cast<std::size_t>(shape_product(shape)), 0.0);
}

std::int64_t DenseTensor::size() const { return static_cast<std::int64_t>(data.size()); }

std::vector<std::int64_t> DenseTensor::strides() const {
  std::vector<std::int64_t> s(shape.size(), 1);
  for (int d = static_cast<int>(shape.size()) - 2; d >= 0; --d)
    s[d] = s[d + 1] * shape[d + 1];
  return s;
}

std::int64_t DenseTensor::offset_of(const std::vector<std::int64_t>& idx) const {
  if (idx.size() != shape.size())
    fail(errc::invalid_argument, "tensor: index rank mismatch");
  std::int64_t off = 0, stride = 1;
  for (int d = static_cast<int>(shape.size()) - 1; d >= 0; --d) {
    if (idx[d] < 0 || idx[d] >= shape[d])
      fail(errc::invalid_argument, "tensor: index out of range");
    off += idx[d] * stride;
    stride *= shape[d];
  }
  return off;
}

double& DenseTensor::at(const std::vector<std::int64_t>& idx) {
  return data[static_cast<std::size_t>(offset_of(idx))];
}

double DenseTensor::at(const std::vector<std::int64_t>& idx) const {
  return data[static_cast<std::size_t>(offset_of(idx))];
}

DenseTensor random_tensor(const std::vector<std::int64_t>& shape, std::uint64_t seed) {
  DenseTensor t(shape);
  std::mt19937_64 rng(seed);
  for (auto& v : t.data) {
    double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;  // [0, 1)
    v = 2.0 * u - 1.0;
  }
  return t;
}

double max_rel_error(const DenseTensor& got, const DenseTensor& want) {
  if (got.shape != want.shape)
    fail(errc::invalid_argument, "max_rel_error: shape mismatch");
  double worst = 0.0;
  for (std::size_t i = 0; i < want.data.size(); ++i) {
    double denom = std::max(1.0, std::abs(want.data[i]));
    worst = std::max(worst, std::abs(got.data[i] - want.data[i]) / denom);
  }
  return worst;
}

void write_tensor(const std::string& path, const DenseTensor& t) {
  std::ofstream out(path);
  if (!out) fail(errc::invalid_argument, "cannot open \"" + path + "\" for writing");
  nlohmann::json header;
  header["shape"] = t.shape;
  out << header.dump() << "\n";
  for (double v : t.data) out << nlohmann::json(v).dump() << "\n";
  if (!out) fail(errc::invalid_argument, "failed writing \"" + path + "\"");
}

DenseTensor read_tensor(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(errc::invalid_argument, "cannot open \"" + path + "\"");
  std::string line;
  if (!std::getline(in, line)) fail(errc::parse, "tensor file \"" + path + "\" is empty");
  nlohmann::json header = nlohmann::json::parse(line, nullptr, false);
  if (header.is_discarded() || !header.contains("shape"))
    fail(errc::parse, "tensor file \"" + path + "\": bad shape header");
  DenseTensor t(header["shape"].get<std::vector<std::int64_t>>());
  for (auto& v : t.data) {
    if (!std::getline(in, line))
      fail(errc::parse, "tensor file \"" + path + "\": truncated data");
    v = std::stod(line);
    if (!std::isfinite(v))
      fail(errc::parse, "tensor file \"" + path + "\": values must be finite");
  }
  return t;
}

}  // namespace einplan
