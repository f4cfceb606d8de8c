#pragma once

// On-disk formats: CSV tables, binary field snapshots and the result manifest.
//
// Snapshot layout (little endian):
//   char[8] "EMRXSNAP", u32 version (1), u32 dtype (1 = f64), u32 ndim,
//   u32 ncomp, u64 dims[ndim], f64 time, f64 epsilon, then ncomp blocks of
//   prod(dims) f64 samples in row-major order.
// For a SimState the components are rho, u1..3, e1..3, b1..3 in physical space.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "emrelax/solver.hpp"

namespace emrelax {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);

/// Shortest decimal text that reads back to the same double.
std::string format_double(double v);

class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);
  void row(const std::vector<double>& values);
  void row(const std::vector<std::string>& cells);
  std::string str() const { return text_; }

 private:
  std::size_t columns_;
  std::string text_;
};

struct Snapshot {
  std::uint32_t version = 1;
  std::vector<std::uint64_t> dims;
  std::uint32_t ncomp = 0;
  double time = 0.0;
  double epsilon = 0.0;
  std::vector<double> data;
};

Snapshot snapshot_of(const SimState& s);
std::string encode_snapshot(const Snapshot& s);
/// Throws IoError on bad magic, unsupported version or dtype, or truncation.
Snapshot decode_snapshot(const std::string& bytes);

std::string read_file(const std::filesystem::path& path);

/// Records every file written by one command, in write order.
class Manifest {
 public:
  Manifest(std::filesystem::path dir, std::string command, std::string config_hash, std::uint64_t seed);

  /// Writes bytes to dir/name (creating dir) and records the checksum.
  void write(const std::string& name, const std::string& bytes);
  /// Writes dir/manifest.json.
  void finish(int exit_code);

  const std::filesystem::path& dir() const { return dir_; }
  const std::vector<std::pair<std::string, std::string>>& files() const { return files_; }

 private:
  std::filesystem::path dir_;
  std::string command_;
  std::string config_hash_;
  std::uint64_t seed_;
  std::vector<std::pair<std::string, std::string>> files_;
};

inline constexpr const char* kToolVersion = "1.0.0";

}  // namespace emrelax
