#include "einplan/evaluate.hpp"

#include "einplan/error.hpp"

namespace einplan {

DenseTensor naive_evaluate(const EinsumSpec& spec,
                           const std::vector<DenseTensor>& operands) {
  if (!spec.bound()) fail(errc::invalid_argument, "naive_evaluate: extents unbound");
  if (operands.size() != spec.inputs.size())
    fail(errc::invalid_argument, "naive_evaluate: expected " +
                                     std::to_string(spec.inputs.size()) +
                                     " operands, got " + std::to_string(operands.size()));
  for (std::size_t k = 0; k < operands.size(); ++k)
    if (operands[k].shape != spec.shape_of(spec.inputs[k]))
      fail(errc::invalid_argument,
           "naive_evaluate: operand " + std::to_string(k) + " shape mismatch for \"" +
               spec.inputs[k] + "\"");

  DenseTensor out(spec.shape_of(spec.output));
  const auto syms = spec.symbols();
  const int ndim = static_cast<int>(syms.size());
  const int nops = static_cast<int>(operands.size());

  std::vector<std::int64_t> ext(ndim);
  for (int d = 0; d < ndim; ++d) ext[d] = spec.extent(syms[d]);

  // Per tensor, the flat-offset stride contributed by each loop symbol
  // (0 when the symbol does not index the tensor). Offsets are maintained
  // incrementally while the odometer advances.
  const int ntens = nops + 1;
  std::vector<std::vector<std::int64_t>> stride(ntens,
                                                std::vector<std::int64_t>(ndim, 0));
  auto fill = [&](int t, const std::string& indices, const DenseTensor& tensor) {
    auto ts = tensor.strides();
    for (std::size_t d = 0; d < indices.size(); ++d) {
      for (int s = 0; s < ndim; ++s)
        if (syms[s] == indices[d]) stride[t][s] = ts[d];
    }
  };
  for (int k = 0; k < nops; ++k) fill(k, spec.inputs[k], operands[k]);
  fill(nops, spec.output, out);

  std::vector<std::int64_t> idx(ndim, 0);
  std::vector<std::int64_t> off(ntens, 0);
  for (;;) {
    double v = operands[0].data[off[0]];
    for (int k = 1; k < nops; ++k) v *= operands[k].data[off[k]];
    out.data[off[nops]] += v;

    int d = ndim - 1;
    while (d >= 0) {
      ++idx[d];
      for (int t = 0; t < ntens; ++t) off[t] += stride[t][d];
      if (idx[d] < ext[d]) break;
      for (int t = 0; t < ntens; ++t) off[t] -= ext[d] * stride[t][d];
      idx[d] = 0;
      --d;
    }
    if (d < 0) break;
  }
  return out;
}

}  // namespace einplan
