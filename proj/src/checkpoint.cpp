#include "fcmdp/checkpoint.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace fcmdp {

namespace {
constexpr std::uint32_t kMagic = 0x46434b50;  // "FCKP"
constexpr std::uint32_t kVersion = 1;
}  // namespace

void BinWriter::u32(std::uint32_t v) { os.write(reinterpret_cast<const char*>(&v), 4); }
void BinWriter::u64(std::uint64_t v) { os.write(reinterpret_cast<const char*>(&v), 8); }
void BinWriter::i32(std::int32_t v) { os.write(reinterpret_cast<const char*>(&v), 4); }
void BinWriter::f64(double v) { os.write(reinterpret_cast<const char*>(&v), 8); }

void BinWriter::str(const std::string& s) {
  u32(static_cast<std::uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

void BinWriter::vec(const Eigen::VectorXd& v) {
  u64(static_cast<std::uint64_t>(v.size()));
  os.write(reinterpret_cast<const char*>(v.data()),
           static_cast<std::streamsize>(v.size() * sizeof(double)));
}

void BinWriter::mat(const Eigen::MatrixXd& m) {
  u64(static_cast<std::uint64_t>(m.rows()));
  u64(static_cast<std::uint64_t>(m.cols()));
  os.write(reinterpret_cast<const char*>(m.data()),
           static_cast<std::streamsize>(m.size() * sizeof(double)));
}

namespace {
void check(std::istream& is) {
  if (!is) throw std::runtime_error("checkpoint: truncated or unreadable stream");
}
}  // namespace

std::uint32_t BinReader::u32() {
  std::uint32_t v = 0;
  is.read(reinterpret_cast<char*>(&v), 4);
  check(is);
  return v;
}

std::uint64_t BinReader::u64() {
  std::uint64_t v = 0;
  is.read(reinterpret_cast<char*>(&v), 8);
  check(is);
  return v;
}

std::int32_t BinReader::i32() {
  std::int32_t v = 0;
  is.read(reinterpret_cast<char*>(&v), 4);
  check(is);
  return v;
}

double BinReader::f64() {
  double v = 0;
  is.read(reinterpret_cast<char*>(&v), 8);
  check(is);
  return v;
}

std::string BinReader::str() {
  std::uint32_t n = u32();
  std::string s(n, '\0');
  is.read(s.data(), n);
  check(is);
  return s;
}

Eigen::VectorXd BinReader::vec() {
  auto n = static_cast<Eigen::Index>(u64());
  Eigen::VectorXd v(n);
  is.read(reinterpret_cast<char*>(v.data()),
          static_cast<std::streamsize>(n * sizeof(double)));
  check(is);
  return v;
}

Eigen::MatrixXd BinReader::mat() {
  auto r = static_cast<Eigen::Index>(u64());
  auto c = static_cast<Eigen::Index>(u64());
  Eigen::MatrixXd m(r, c);
  is.read(reinterpret_cast<char*>(m.data()),
          static_cast<std::streamsize>(m.size() * sizeof(double)));
  check(is);
  return m;
}

void write_header(BinWriter& w, const std::string& kind) {
  w.u32(kMagic);
  w.u32(kVersion);
  w.str(kind);
}

std::string read_header(BinReader& r) {
  if (r.u32() != kMagic) throw std::runtime_error("checkpoint: bad magic");
  if (r.u32() != kVersion) throw std::runtime_error("checkpoint: unsupported version");
  return r.str();
}

void write_mlp(BinWriter& w, const Mlp& net) {
  w.i32(net.spec.input_dim);
  w.u32(static_cast<std::uint32_t>(net.spec.hidden_dims.size()));
  for (int h : net.spec.hidden_dims) w.i32(h);
  w.i32(net.spec.output_dim);
  w.u32(net.spec.activation == Activation::kTanh ? 0 : 1);
  // layout segments are derivable but stored for forward compatibility
  auto layout = mlp_layout(net.spec);
  w.u32(static_cast<std::uint32_t>(layout.size()));
  for (const auto& seg : layout) {
    w.str(seg.name);
    w.i32(seg.rows);
    w.i32(seg.cols);
    w.i32(seg.offset);
  }
  w.vec(net.params);
}

Mlp read_mlp(BinReader& r) {
  MlpSpec spec;
  spec.input_dim = r.i32();
  std::uint32_t nh = r.u32();
  spec.hidden_dims.resize(nh);
  for (auto& h : spec.hidden_dims) h = r.i32();
  spec.output_dim = r.i32();
  spec.activation = r.u32() == 0 ? Activation::kTanh : Activation::kRelu;
  std::uint32_t nseg = r.u32();
  for (std::uint32_t i = 0; i < nseg; ++i) {
    r.str();
    r.i32();
    r.i32();
    r.i32();
  }
  Mlp net{spec, r.vec()};
  if (net.params.size() != spec.param_count())
    throw std::runtime_error("checkpoint: parameter count does not match layout");
  return net;
}

std::string file_hash_hex(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("file_hash_hex: cannot open " + path);
  std::uint64_t h = 0xcbf29ce484222325ull;
  char buf[4096];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ull;
    }
    if (!in) break;
  }
  char out[17];
  std::snprintf(out, sizeof(out), "%016llx", static_cast<unsigned long long>(h));
  return out;
}

}  // namespace fcmdp
