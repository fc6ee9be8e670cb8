#pragma once

#include <cstdint>
#include <vector>

namespace rtucker {

// One sampled entry of a tensor: observed value at a multi-index.
struct Observation {
  std::vector<int> index;
  double value = 0.0;
};

// Trace-regression sample, split into fold_count contiguous folds of
// fold_size entries each. Fold 0 is reserved for initialization; the solver
// consumes one fold per iteration. Indices may repeat (sampling with
// replacement).
struct ObservationSet {
  std::vector<int> dims;
  std::vector<Observation> entries;
  std::int64_t fold_size = 0;
  int fold_count = 0;

  void validate() const;  // throws std::invalid_argument

  const Observation* fold_begin(int f) const { return entries.data() + static_cast<std::size_t>(f) * fold_size; }
  const Observation* fold_end(int f) const { return fold_begin(f) + fold_size; }
};

}  // namespace rtucker
