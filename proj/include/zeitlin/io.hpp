#pragma once

// Binary and CSV file formats. All binary formats are little-endian.
//
//   basis cache  "ZEB1" u32 version, u32 N, then v_lm as f64 for m ascending,
//                l ascending within m
//   checkpoint   "ZCK1" u32 version, u32 N, u64 step, f64 time, u64 seed,
//                u64 blob length + rng state bytes, then N^2 complex entries
//                column-major as interleaved f64 (re, im)
//   grid         "ZGD1" u32 n_lat, u32 n_lon, f64 time, then row-major f64

#include "zeitlin/basis.hpp"
#include "zeitlin/diagnostics.hpp"
#include "zeitlin/matrix.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

namespace zeitlin::io {

inline constexpr std::uint32_t kBasisVersion = 1;
inline constexpr std::uint32_t kCheckpointVersion = 1;

namespace detail {

template <typename T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
    std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
  }
}

class Writer {
 public:
  explicit Writer(const std::filesystem::path& path)
      : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw IoError("cannot open " + path.string() + " for writing");
  }

  void magic(std::string_view m) { bytes(m.data(), m.size()); }

  template <typename T>
  void put(T v) {
    static_assert(std::is_arithmetic_v<T>);
    const T le = to_little(v);
    bytes(&le, sizeof(T));
  }

  void bytes(const void* data, std::size_t n) {
    out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
    if (!out_) throw IoError("write failed: " + path_.string());
  }

  void close() {
    out_.close();
    if (!out_) throw IoError("close failed: " + path_.string());
  }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

class Reader {
 public:
  explicit Reader(const std::filesystem::path& path) : path_(path), in_(path, std::ios::binary) {
    if (!in_) throw IoError("cannot open " + path.string());
  }

  void expect_magic(std::string_view m) {
    std::string got(m.size(), '\0');
    bytes(got.data(), got.size());
    if (got != m) throw IoError(path_.string() + ": bad magic, expected " + std::string(m));
  }

  template <typename T>
  T get() {
    T v;
    bytes(&v, sizeof(T));
    return to_little(v);
  }

  void bytes(void* data, std::size_t n) {
    in_.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
    if (!in_) throw IoError(path_.string() + ": truncated file");
  }

  void expect_end() {
    if (in_.peek() != std::char_traits<char>::eof()) {
      throw IoError(path_.string() + ": trailing bytes");
    }
  }

 private:
  std::filesystem::path path_;
  std::ifstream in_;
};

}  // namespace detail

// ---------------------------------------------------------------------------
// Basis cache

inline void write_basis(const std::filesystem::path& path, const QuantizedBasis& basis) {
  detail::Writer w(path);
  w.magic("ZEB1");
  w.put<std::uint32_t>(kBasisVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(basis.n()));
  for (int m = 0; m < basis.n(); ++m) {
    const Eigen::MatrixXd& block = basis.diagonal_block(m);
    for (Eigen::Index c = 0; c < block.cols(); ++c) {
      for (Eigen::Index i = 0; i < block.rows(); ++i) w.put<double>(block(i, c));
    }
  }
  w.close();
}

inline QuantizedBasis read_basis(const std::filesystem::path& path) {
  detail::Reader r(path);
  r.expect_magic("ZEB1");
  const auto version = r.get<std::uint32_t>();
  if (version != kBasisVersion) {
    throw IoError(path.string() + ": unsupported basis version " + std::to_string(version));
  }
  const auto n = static_cast<int>(r.get<std::uint32_t>());
  if (n < 2) throw IoError(path.string() + ": invalid N");
  std::vector<Eigen::MatrixXd> diagonals(n);
  for (int m = 0; m < n; ++m) {
    Eigen::MatrixXd block(n - m, n - QuantizedBasis::first_degree(m));
    for (Eigen::Index c = 0; c < block.cols(); ++c) {
      for (Eigen::Index i = 0; i < block.rows(); ++i) block(i, c) = r.get<double>();
    }
    diagonals[m] = std::move(block);
  }
  r.expect_end();
  const PhaseConvention phase =
      n <= kOracleLimit ? PhaseConvention::oracle_aligned : PhaseConvention::sign_rule;
  return QuantizedBasis(n, std::move(diagonals), phase);
}

// ---------------------------------------------------------------------------
// Checkpoint

struct Checkpoint {
  std::uint64_t step = 0;
  double time = 0.0;
  std::uint64_t seed = 0;
  std::string rng_state;
  Matrix w;
};

inline void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ck) {
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    detail::Writer w(tmp);
    w.magic("ZCK1");
    w.put<std::uint32_t>(kCheckpointVersion);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(ck.w.rows()));
    w.put<std::uint64_t>(ck.step);
    w.put<double>(ck.time);
    w.put<std::uint64_t>(ck.seed);
    w.put<std::uint64_t>(ck.rng_state.size());
    w.bytes(ck.rng_state.data(), ck.rng_state.size());
    for (Eigen::Index c = 0; c < ck.w.cols(); ++c) {
      for (Eigen::Index r = 0; r < ck.w.rows(); ++r) {
        w.put<double>(ck.w(r, c).real());
        w.put<double>(ck.w(r, c).imag());
      }
    }
    w.close();
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move checkpoint into place: " + path.string());
}

inline Checkpoint read_checkpoint(const std::filesystem::path& path) {
  detail::Reader r(path);
  r.expect_magic("ZCK1");
  const auto version = r.get<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw IoError(path.string() + ": unsupported checkpoint version " + std::to_string(version));
  }
  Checkpoint ck;
  const auto n = static_cast<Eigen::Index>(r.get<std::uint32_t>());
  ck.step = r.get<std::uint64_t>();
  ck.time = r.get<double>();
  ck.seed = r.get<std::uint64_t>();
  const auto blob = r.get<std::uint64_t>();
  if (blob > (std::uint64_t{1} << 24)) throw IoError(path.string() + ": implausible rng blob");
  ck.rng_state.resize(blob);
  r.bytes(ck.rng_state.data(), blob);
  ck.w.resize(n, n);
  for (Eigen::Index c = 0; c < n; ++c) {
    for (Eigen::Index row = 0; row < n; ++row) {
      const double re = r.get<double>();
      const double im = r.get<double>();
      ck.w(row, c) = Complex(re, im);
    }
  }
  r.expect_end();
  return ck;
}

// ---------------------------------------------------------------------------
// Grid

inline void write_grid(const std::filesystem::path& path, const GridField& g) {
  detail::Writer w(path);
  w.magic("ZGD1");
  w.put<std::uint32_t>(static_cast<std::uint32_t>(g.n_lat));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(g.n_lon));
  w.put<double>(g.time);
  for (double v : g.values) w.put<double>(v);
  w.close();
}

inline GridField read_grid(const std::filesystem::path& path) {
  detail::Reader r(path);
  r.expect_magic("ZGD1");
  GridField g;
  g.n_lat = static_cast<int>(r.get<std::uint32_t>());
  g.n_lon = static_cast<int>(r.get<std::uint32_t>());
  g.time = r.get<double>();
  g.values.resize(static_cast<std::size_t>(g.n_lat) * g.n_lon);
  for (double& v : g.values) v = r.get<double>();
  r.expect_end();
  return g;
}

// ---------------------------------------------------------------------------
// CSV

inline std::string diagnostics_header(int k_max) {
  std::string h = "time,H,K";
  for (int k = 2; k <= k_max; ++k) h += ",C" + std::to_string(k) + "_rel";
  return h;
}

inline std::string diagnostics_row(const DiagnosticsRecord& rec) {
  std::ostringstream os;
  os << std::setprecision(17) << rec.time << ',' << rec.hamiltonian << ',' << rec.mean_energy;
  for (double e : rec.casimir_rel_err) os << ',' << e;
  return os.str();
}

inline void write_spectrum_csv(const std::filesystem::path& path, const EnergySpectrum& s) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "l,E_l\n" << std::setprecision(17);
  for (int l = 1; l <= s.max_degree(); ++l) out << l << ',' << s[l] << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace zeitlin::io
