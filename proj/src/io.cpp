#include "emrelax/io.hpp"

#include <openssl/evp.h>

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace emrelax {

namespace {

static_assert(std::endian::native == std::endian::little, "snapshot encoding assumes a little-endian host");

constexpr char kMagic[8] = {'E', 'M', 'R', 'X', 'S', 'N', 'A', 'P'};

template <class T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

template <class T>
T take(const std::string& in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size()) throw IoError("snapshot: truncated data");
  T v;
  std::memcpy(&v, in.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

}  // namespace

std::string sha256_hex(const std::string& bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw IoError("sha256 digest failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 15]);
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string sha256_file(const std::filesystem::path& path) { return sha256_hex(read_file(path)); }

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(std::vector<std::string> header) : columns_(header.size()) { row(header); }

void CsvWriter::row(const std::vector<std::string>& cells) {
  if (cells.size() != columns_) throw ArgumentError("CsvWriter: row width differs from the header");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) text_.push_back(',');
    text_ += cells[i];
  }
  text_.push_back('\n');
}

void CsvWriter::row(const std::vector<double>& values) {
  std::vector<std::string> cells;
  cells.reserve(values.size());
  for (double v : values) cells.push_back(format_double(v));
  row(cells);
}

Snapshot snapshot_of(const SimState& s) {
  Fft fft(s.grid);
  const PeriodicGrid& g = *s.grid;
  Snapshot snap;
  for (int a = 0; a < g.dim(); ++a) snap.dims.push_back(static_cast<std::uint64_t>(g.n_points()[a]));
  snap.ncomp = 10;
  snap.time = s.time;
  snap.epsilon = s.params.epsilon();
  snap.data.reserve(10 * g.real_size());
  for (const SpectralField* f : {&s.rho, &s.u, &s.e, &s.b}) {
    const RealField r = fft.backward(*f);
    snap.data.insert(snap.data.end(), r.data.begin(), r.data.end());
  }
  return snap;
}

std::string encode_snapshot(const Snapshot& s) {
  std::uint64_t points = 1;
  for (auto d : s.dims) points *= d;
  if (s.data.size() != points * s.ncomp) throw ArgumentError("snapshot: data size does not match dims and ncomp");
  std::string out(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, s.version);
  put<std::uint32_t>(out, 1);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s.dims.size()));
  put<std::uint32_t>(out, s.ncomp);
  for (auto d : s.dims) put<std::uint64_t>(out, d);
  put<double>(out, s.time);
  put<double>(out, s.epsilon);
  const std::size_t offset = out.size();
  out.resize(offset + s.data.size() * sizeof(double));
  std::memcpy(out.data() + offset, s.data.data(), s.data.size() * sizeof(double));
  return out;
}

Snapshot decode_snapshot(const std::string& bytes) {
  if (bytes.size() < sizeof(kMagic) || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw IoError("snapshot: bad magic");
  }
  std::size_t pos = sizeof(kMagic);
  Snapshot s;
  s.version = take<std::uint32_t>(bytes, pos);
  if (s.version != 1) throw IoError("snapshot: unsupported version " + std::to_string(s.version));
  const auto dtype = take<std::uint32_t>(bytes, pos);
  if (dtype != 1) throw IoError("snapshot: unsupported dtype " + std::to_string(dtype));
  const auto ndim = take<std::uint32_t>(bytes, pos);
  if (ndim < 1 || ndim > 3) throw IoError("snapshot: bad dimension count");
  s.ncomp = take<std::uint32_t>(bytes, pos);
  std::uint64_t points = 1;
  for (std::uint32_t a = 0; a < ndim; ++a) {
    s.dims.push_back(take<std::uint64_t>(bytes, pos));
    points *= s.dims.back();
  }
  s.time = take<double>(bytes, pos);
  s.epsilon = take<double>(bytes, pos);
  const std::uint64_t count = points * s.ncomp;
  if (bytes.size() - pos != count * sizeof(double)) throw IoError("snapshot: payload size mismatch");
  s.data.resize(count);
  std::memcpy(s.data.data(), bytes.data() + pos, count * sizeof(double));
  return s;
}

Manifest::Manifest(std::filesystem::path dir, std::string command, std::string config_hash, std::uint64_t seed)
    : dir_(std::move(dir)), command_(std::move(command)), config_hash_(std::move(config_hash)), seed_(seed) {}

void Manifest::write(const std::string& name, const std::string& bytes) {
  std::filesystem::create_directories(dir_);
  const std::filesystem::path p = dir_ / name;
  {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + p.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed for " + p.string());
  }
  files_.emplace_back(name, sha256_hex(bytes));
}

void Manifest::finish(int exit_code) {
  nlohmann::ordered_json j;
  j["tool_version"] = kToolVersion;
  j["command"] = command_;
  j["config_hash"] = config_hash_;
  j["seed"] = seed_;
  j["exit_code"] = exit_code;
  j["files"] = nlohmann::ordered_json::array();
  for (const auto& [name, sum] : files_) j["files"].push_back({{"name", name}, {"sha256", sum}});
  std::filesystem::create_directories(dir_);
  std::ofstream out(dir_ / "manifest.json", std::ios::trunc);
  if (!out) throw IoError("cannot write manifest in " + dir_.string());
  out << j.dump(2) << "\n";
}

}  // namespace emrelax
