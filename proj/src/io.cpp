#include "rtucker/io.hpp"

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace rtucker {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

constexpr char kMagic[4] = {'T', 'N', 'S', 'R'};

void put_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& is, const std::string& path) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4)) throw io_error("truncated tensor file: " + path);
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void put_f64(std::ostream& os, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

double get_f64(std::istream& is, const std::string& path) {
  unsigned char b[8];
  if (!is.read(reinterpret_cast<char*>(b), 8)) throw io_error("truncated tensor file: " + path);
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

}  // namespace

void write_tensor_binary(const std::string& path, const DenseTensor& t) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw io_error("cannot open for writing: " + path);
  os.write(kMagic, 4);
  put_u32(os, static_cast<std::uint32_t>(t.order()));
  for (int d : t.dims) put_u32(os, static_cast<std::uint32_t>(d));
  for (double v : t.values) put_f64(os, v);
  if (!os) throw io_error("write failed: " + path);
}

DenseTensor read_tensor_binary(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw io_error("cannot open: " + path);
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
    throw io_error("not a tensor file (bad magic): " + path);
  const std::uint32_t m = get_u32(is, path);
  if (m < 2 || m > 16) throw io_error("unreasonable tensor order in " + path);
  std::vector<int> dims(m);
  std::int64_t total = 1;
  for (std::uint32_t k = 0; k < m; ++k) {
    dims[k] = static_cast<int>(get_u32(is, path));
    if (dims[k] < 1) throw io_error("non-positive dimension in " + path);
    total *= dims[k];
  }
  std::vector<double> values(static_cast<std::size_t>(total));
  for (std::int64_t i = 0; i < total; ++i) values[static_cast<std::size_t>(i)] = get_f64(is, path);
  return DenseTensor(std::move(dims), std::move(values));
}

void write_matrix_binary(const std::string& path, const Matrix& m) {
  DenseTensor t({static_cast<int>(m.rows()), static_cast<int>(m.cols())}, 0.0);
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      t.values[static_cast<std::size_t>(i * m.cols() + j)] = m(i, j);
  write_tensor_binary(path, t);
}

Matrix read_matrix_binary(const std::string& path) {
  DenseTensor t = read_tensor_binary(path);
  if (t.order() != 2) throw io_error("expected an order-2 tensor in " + path);
  Matrix m(t.dims[0], t.dims[1]);
  for (int i = 0; i < t.dims[0]; ++i)
    for (int j = 0; j < t.dims[1]; ++j) m(i, j) = t.values[static_cast<std::size_t>(i) * t.dims[1] + j];
  return m;
}

namespace {

std::string triplet_header(int order) {
  std::string h;
  for (int k = 0; k < order; ++k) h += "i" + std::to_string(k + 1) + ",";
  return h + "value";
}

struct TripletFile {
  int order = 0;
  std::vector<std::vector<int>> indices;
  std::vector<double> values;
};

TripletFile parse_triplets(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw io_error("cannot open: " + path);
  std::string line;
  if (!std::getline(is, line)) throw io_error("empty triplet file: " + path);
  while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
  int order = 0;
  {
    std::stringstream ss(line);
    std::string tok;
    std::vector<std::string> cols;
    while (std::getline(ss, tok, ',')) cols.push_back(tok);
    if (cols.size() < 3 || cols.back() != "value")
      throw io_error("bad triplet header in " + path + " (want i1,...,im,value)");
    order = static_cast<int>(cols.size()) - 1;
    for (int k = 0; k < order; ++k)
      if (cols[k] != "i" + std::to_string(k + 1))
        throw io_error("bad triplet header in " + path + " (want i1,...,im,value)");
  }

  TripletFile out;
  out.order = order;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string tok;
    std::vector<int> idx(order);
    for (int k = 0; k < order; ++k) {
      if (!std::getline(ss, tok, ','))
        throw io_error("short line " + std::to_string(lineno) + " in " + path);
      try {
        idx[k] = std::stoi(tok);
      } catch (const std::exception&) {
        throw io_error("bad index on line " + std::to_string(lineno) + " in " + path);
      }
      if (idx[k] < 0) throw io_error("negative index on line " + std::to_string(lineno) + " in " + path);
    }
    if (!std::getline(ss, tok, ','))
      throw io_error("missing value on line " + std::to_string(lineno) + " in " + path);
    double v;
    try {
      v = std::stod(tok);
    } catch (const std::exception&) {
      throw io_error("bad value on line " + std::to_string(lineno) + " in " + path);
    }
    out.indices.push_back(std::move(idx));
    out.values.push_back(v);
  }
  return out;
}

}  // namespace

void write_tensor_triplet(const std::string& path, const DenseTensor& t) {
  std::ofstream os(path);
  if (!os) throw io_error("cannot open for writing: " + path);
  os << triplet_header(t.order()) << "\n";
  std::vector<int> idx(t.order(), 0);
  for (std::int64_t lin = 0; lin < t.size(); ++lin) {
    if (t.values[static_cast<std::size_t>(lin)] != 0.0) {
      for (int k = 0; k < t.order(); ++k) os << idx[k] << ",";
      os << format_double(t.values[static_cast<std::size_t>(lin)]) << "\n";
    }
    for (int k = t.order() - 1; k >= 0; --k) {
      if (++idx[k] < t.dims[k]) break;
      idx[k] = 0;
    }
  }
  if (!os) throw io_error("write failed: " + path);
}

DenseTensor read_tensor_triplet(const std::string& path,
                                const std::optional<std::vector<int>>& dims) {
  TripletFile f = parse_triplets(path);
  std::vector<int> d;
  if (dims) {
    if (static_cast<int>(dims->size()) != f.order)
      throw io_error("dims order does not match triplet header in " + path);
    d = *dims;
  } else {
    d.assign(f.order, 1);
    for (const auto& idx : f.indices)
      for (int k = 0; k < f.order; ++k) d[k] = std::max(d[k], idx[k] + 1);
  }
  DenseTensor t(d, 0.0);
  for (std::size_t i = 0; i < f.indices.size(); ++i) {
    for (int k = 0; k < f.order; ++k)
      if (f.indices[i][k] >= d[k]) throw io_error("index out of range in " + path);
    t.values[static_cast<std::size_t>(t.linear_index(f.indices[i]))] = f.values[i];
  }
  return t;
}

ObservationSet read_observations_triplet(const std::string& path, const std::vector<int>& dims,
                                         int fold_count, std::int64_t* dropped) {
  if (fold_count < 1) throw io_error("fold count must be positive");
  TripletFile f = parse_triplets(path);
  if (static_cast<int>(dims.size()) != f.order)
    throw io_error("dims order does not match triplet header in " + path);

  ObservationSet obs;
  obs.dims = dims;
  obs.fold_count = fold_count;
  obs.fold_size = static_cast<std::int64_t>(f.indices.size()) / fold_count;
  if (dropped)
    *dropped = static_cast<std::int64_t>(f.indices.size()) - obs.fold_size * fold_count;
  obs.entries.resize(static_cast<std::size_t>(obs.fold_size * fold_count));
  for (std::size_t i = 0; i < obs.entries.size(); ++i) {
    obs.entries[i].index = f.indices[i];
    obs.entries[i].value = f.values[i];
  }
  obs.validate();
  return obs;
}

void write_observations_triplet(const std::string& path, const ObservationSet& obs) {
  std::ofstream os(path);
  if (!os) throw io_error("cannot open for writing: " + path);
  os << triplet_header(static_cast<int>(obs.dims.size())) << "\n";
  for (const Observation& e : obs.entries) {
    for (int i : e.index) os << i << ",";
    os << format_double(e.value) << "\n";
  }
  if (!os) throw io_error("write failed: " + path);
}

DenseTensor read_tensor_any(const std::string& path,
                            const std::optional<std::vector<int>>& dims) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw io_error("cannot open: " + path);
  char magic[4] = {0, 0, 0, 0};
  is.read(magic, 4);
  is.close();
  if (std::memcmp(magic, kMagic, 4) == 0) return read_tensor_binary(path);
  return read_tensor_triplet(path, dims);
}

void write_trace_csv(const std::string& path, const IterateTrace& trace) {
  std::ofstream os(path);
  if (!os) throw io_error("cannot open for writing: " + path);
  os << "iter,phase,eta,loss,pgrad_fro";
  if (trace.has_truth) os << ",err_fro,err_sup,mu";
  os << "\n";
  for (const IterateRecord& r : trace.records) {
    os << r.iter << "," << r.phase << "," << format_double(r.eta) << "," << format_double(r.loss)
       << "," << format_double(r.pgrad_fro);
    if (trace.has_truth)
      os << "," << format_double(r.err_fro) << "," << format_double(r.err_sup) << ","
         << format_double(r.mu);
    os << "\n";
  }
  if (!os) throw io_error("write failed: " + path);
}

}  // namespace rtucker
