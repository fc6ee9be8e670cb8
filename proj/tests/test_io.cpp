#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "oracles.hpp"
#include "rtucker/io.hpp"

using namespace rtucker;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("rtucker_test_" + std::to_string(::getpid()) + "_" +
                                        std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

}  // namespace

TEST_CASE("binary tensor round trip is bit exact") {
  TempDir dir;
  Rng rng(91);
  DenseTensor t = oracles::random_tensor({3, 5, 2}, rng);
  t.values[4] = -0.0;
  t.values[7] = 1e-307;
  write_tensor_binary(dir.file("t.tnsr"), t);
  DenseTensor back = read_tensor_binary(dir.file("t.tnsr"));
  CHECK(back.dims == t.dims);
  CHECK(std::memcmp(back.values.data(), t.values.data(), t.values.size() * 8) == 0);
}

TEST_CASE("binary reader reports malformed files by path") {
  TempDir dir;
  CHECK_THROWS_WITH_AS(read_tensor_binary(dir.file("nope.tnsr")),
                       doctest::Contains("nope.tnsr"), io_error);
  {
    std::ofstream os(dir.file("bad.tnsr"), std::ios::binary);
    os << "JUNKJUNK";
  }
  CHECK_THROWS_AS(read_tensor_binary(dir.file("bad.tnsr")), io_error);
  {
    std::ofstream os(dir.file("short.tnsr"), std::ios::binary);
    os << "TNSR";  // truncated after the magic
  }
  CHECK_THROWS_AS(read_tensor_binary(dir.file("short.tnsr")), io_error);
}

TEST_CASE("triplet format round trip with inferred and explicit dims") {
  TempDir dir;
  Rng rng(92);
  DenseTensor t = oracles::random_tensor({4, 4, 4}, rng);
  t.values[10] = 0.0;  // zeros are omitted from the file
  write_tensor_triplet(dir.file("t.csv"), t);

  DenseTensor inferred = read_tensor_triplet(dir.file("t.csv"));
  CHECK(inferred.dims == t.dims);
  CHECK(inferred.values == t.values);

  DenseTensor padded = read_tensor_triplet(dir.file("t.csv"), std::vector<int>{5, 4, 4});
  CHECK(padded.dims == std::vector<int>{5, 4, 4});

  DenseTensor any = read_tensor_any(dir.file("t.csv"));
  CHECK(any.values == t.values);
  write_tensor_binary(dir.file("t.tnsr"), t);
  CHECK(read_tensor_any(dir.file("t.tnsr")).values == t.values);
}

TEST_CASE("triplet parser rejects malformed content") {
  TempDir dir;
  {
    std::ofstream os(dir.file("bad_header.csv"));
    os << "a,b,value\n0,0,1.0\n";
  }
  CHECK_THROWS_AS(read_tensor_triplet(dir.file("bad_header.csv")), io_error);
  {
    std::ofstream os(dir.file("bad_line.csv"));
    os << "i1,i2,value\n0,zero,1.0\n";
  }
  CHECK_THROWS_AS(read_tensor_triplet(dir.file("bad_line.csv")), io_error);
}

TEST_CASE("observation files split into folds and drop the remainder") {
  TempDir dir;
  ObservationSet obs;
  obs.dims = {3, 3};
  obs.fold_size = 4;
  obs.fold_count = 2;
  Rng rng(93);
  for (int i = 0; i < 8; ++i) {
    Observation e;
    e.index = {static_cast<int>(rng.uniform_index(3)), static_cast<int>(rng.uniform_index(3))};
    e.value = rng.normal();
    obs.entries.push_back(e);
  }
  write_observations_triplet(dir.file("obs.csv"), obs);

  std::int64_t dropped = -1;
  ObservationSet back = read_observations_triplet(dir.file("obs.csv"), {3, 3}, 3, &dropped);
  CHECK(back.fold_size == 2);  // 8 / 3 folds
  CHECK(dropped == 2);
  CHECK(back.entries[0].value == obs.entries[0].value);

  ObservationSet exact = read_observations_triplet(dir.file("obs.csv"), {3, 3}, 2, &dropped);
  CHECK(exact.fold_size == 4);
  CHECK(dropped == 0);
}

TEST_CASE("format_double round trips doubles exactly") {
  Rng rng(94);
  for (int i = 0; i < 200; ++i) {
    const double v = std::ldexp(rng.normal(), static_cast<int>(rng.uniform_index(80)) - 40);
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(0.0) == "0");
}

TEST_CASE("trace csv carries the truth columns only when present") {
  TempDir dir;
  IterateTrace tr;
  IterateRecord r;
  r.iter = 0;
  r.loss = 1.5;
  tr.records.push_back(r);
  write_trace_csv(dir.file("a.csv"), tr);
  std::ifstream a(dir.file("a.csv"));
  std::string header;
  std::getline(a, header);
  CHECK(header == "iter,phase,eta,loss,pgrad_fro");

  tr.has_truth = true;
  write_trace_csv(dir.file("b.csv"), tr);
  std::ifstream b(dir.file("b.csv"));
  std::getline(b, header);
  CHECK(header == "iter,phase,eta,loss,pgrad_fro,err_fro,err_sup,mu");
}
