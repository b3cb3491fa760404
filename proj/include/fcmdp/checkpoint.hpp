#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <string>

#include "fcmdp/mlp.hpp"

namespace fcmdp {

/// Little-endian binary checkpoint primitives. Round-trips are bit-exact.
struct BinWriter {
  std::ostream& os;
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void i32(std::int32_t v);
  void f64(double v);
  void str(const std::string& s);
  void vec(const Eigen::VectorXd& v);
  void mat(const Eigen::MatrixXd& m);
};

struct BinReader {
  std::istream& is;
  std::uint32_t u32();
  std::uint64_t u64();
  std::int32_t i32();
  double f64();
  std::string str();
  Eigen::VectorXd vec();
  Eigen::MatrixXd mat();
};

/// Header: magic + format version + object kind tag.
void write_header(BinWriter& w, const std::string& kind);
/// Throws std::runtime_error on magic/version mismatch; returns the kind tag.
std::string read_header(BinReader& r);

void write_mlp(BinWriter& w, const Mlp& net);
Mlp read_mlp(BinReader& r);

/// FNV-1a content hash of a file, hex-encoded; used by run manifests.
std::string file_hash_hex(const std::string& path);

}  // namespace fcmdp
