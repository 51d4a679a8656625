#ifndef MCAE_BLOB_IO_HPP
#define MCAE_BLOB_IO_HPP

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>

#include "mcae/linalg.hpp"

namespace mcae {

class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// All binary artifacts are little-endian IEEE-754. Matrices serialize as a
// 16-byte header (8-byte magic + u32 rows + u32 cols) followed by row-major
// doubles.

namespace blob {

inline void put_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 4);
}

inline void put_u64(std::ostream& os, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

inline void put_f64(std::ostream& os, double d) {
  std::uint64_t v;
  std::memcpy(&v, &d, 8);
  put_u64(os, v);
}

inline std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  if (!is) throw IoError("blob: truncated read (u32)");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t(b[i]) << (8 * i);
  return v;
}

inline std::uint64_t get_u64(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  if (!is) throw IoError("blob: truncated read (u64)");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t(b[i]) << (8 * i);
  return v;
}

inline double get_f64(std::istream& is) {
  std::uint64_t v = get_u64(is);
  double d;
  std::memcpy(&d, &v, 8);
  return d;
}

inline void put_magic(std::ostream& os, const char magic[8]) {
  os.write(magic, 8);
}

inline void check_magic(std::istream& is, const char magic[8],
                        const std::string& what) {
  char got[8];
  is.read(got, 8);
  if (!is || std::memcmp(got, magic, 8) != 0) {
    throw IoError(what + ": bad magic header");
  }
}

}  // namespace blob

inline void write_matrix(std::ostream& os, const Mat& m) {
  blob::put_magic(os, "MCAEMAT1");
  blob::put_u32(os, static_cast<std::uint32_t>(m.rows()));
  blob::put_u32(os, static_cast<std::uint32_t>(m.cols()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) blob::put_f64(os, m(r, c));
  }
}

inline Mat read_matrix(std::istream& is) {
  blob::check_magic(is, "MCAEMAT1", "read_matrix");
  const std::uint32_t rows = blob::get_u32(is);
  const std::uint32_t cols = blob::get_u32(is);
  Mat m(rows, cols);
  for (std::uint32_t r = 0; r < rows; ++r) {
    for (std::uint32_t c = 0; c < cols; ++c) m(r, c) = blob::get_f64(is);
  }
  return m;
}

inline void write_matrix_file(const std::string& path, const Mat& m) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open for writing: " + path);
  write_matrix(os, m);
  if (!os) throw IoError("write failed: " + path);
}

inline Mat read_matrix_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open for reading: " + path);
  return read_matrix(is);
}

}  // namespace mcae

#endif
