#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rtucker/observations.hpp"
#include "rtucker/solver.hpp"
#include "rtucker/tensor.hpp"

namespace rtucker {

// Raised on unreadable, truncated or malformed input files; the message names
// the offending path.
struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Round-trip-safe decimal rendering (17 significant digits).
std::string format_double(double v);

// Binary tensor file: magic "TNSR", u32 LE order m, m x u32 LE dims, then
// d* float64 LE values in row-major order (last index fastest).
void write_tensor_binary(const std::string& path, const DenseTensor& t);
DenseTensor read_tensor_binary(const std::string& path);

// A matrix stored as an order-2 tensor.
void write_matrix_binary(const std::string& path, const Matrix& m);
Matrix read_matrix_binary(const std::string& path);

// Text triplet format: header "i1,...,im,value", one 0-based entry per line;
// unspecified entries are zero. Dims are inferred as max index + 1 per mode
// unless given.
void write_tensor_triplet(const std::string& path, const DenseTensor& t);
DenseTensor read_tensor_triplet(const std::string& path,
                                const std::optional<std::vector<int>>& dims = std::nullopt);

// Observations in the triplet format, split into contiguous folds. Entries
// beyond the last whole fold are dropped; *dropped reports how many.
ObservationSet read_observations_triplet(const std::string& path, const std::vector<int>& dims,
                                         int fold_count, std::int64_t* dropped = nullptr);
void write_observations_triplet(const std::string& path, const ObservationSet& obs);

// Detects the binary magic and falls back to triplet parsing.
DenseTensor read_tensor_any(const std::string& path,
                            const std::optional<std::vector<int>>& dims = std::nullopt);

// CSV with header iter,phase,eta,loss,pgrad_fro and, when the trace carries
// ground truth, err_fro,err_sup,mu.
void write_trace_csv(const std::string& path, const IterateTrace& trace);

}  // namespace rtucker
