#include "gadiff/checkpoint.hpp"

#include <cstring>
#include <fstream>

namespace gadiff {

namespace {

constexpr char kMagic[8] = {'G', 'A', 'D', 'C', 'K', 'P', '0', '1'};

void put_u64(std::ostream& out, std::uint64_t x) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((x >> (8 * i)) & 0xff);
  out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t get_u64(std::istream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t x = 0;
  for (int i = 0; i < 8; ++i) x |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return x;
}

void put_f64(std::ostream& out, double d) {
  std::uint64_t bits;
  std::memcpy(&bits, &d, 8);
  put_u64(out, bits);
}

double get_f64(std::istream& in) {
  const std::uint64_t bits = get_u64(in);
  double d;
  std::memcpy(&d, &bits, 8);
  return d;
}

void put_str(std::ostream& out, const std::string& s) {
  put_u64(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_str(std::istream& in) {
  const std::uint64_t n = get_u64(in);
  std::string s(n, '\0');
  in.read(s.data(), static_cast<std::streamsize>(n));
  return s;
}

void put_tensor(std::ostream& out, const Tensor& t) {
  put_u64(out, t.shape.size());
  for (auto d : t.shape) put_u64(out, d);
  for (double v : t.v) put_f64(out, v);
}

Tensor get_tensor(std::istream& in) {
  const std::uint64_t nd = get_u64(in);
  std::vector<std::size_t> shape(nd);
  for (auto& d : shape) d = static_cast<std::size_t>(get_u64(in));
  Tensor t(shape);
  for (double& v : t.v) v = get_f64(in);
  return t;
}

}  // namespace

void save_checkpoint(const std::string& path, const ParamStore& params,
                     const std::map<std::string, std::string>& hparams) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  out.write(kMagic, 8);
  put_u64(out, params.seed);
  put_u64(out, hparams.size());
  for (const auto& [k, v] : hparams) {
    put_str(out, k);
    put_str(out, v);
  }
  put_u64(out, params.count());
  for (std::size_t i = 0; i < params.count(); ++i) {
    put_str(out, params.names()[i]);
    out.put(0);  // dtype 0 = f64
    put_tensor(out, params.at(i));
    put_tensor(out, params.adam_m(i));
    put_tensor(out, params.adam_v(i));
    put_u64(out, params.adam_step(i));
  }
  if (!out) throw std::runtime_error("checkpoint write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read checkpoint: " + path);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kMagic, 8) != 0)
    throw std::runtime_error("bad checkpoint magic: " + path);
  Checkpoint ck;
  ck.params.seed = get_u64(in);
  const std::uint64_t nh = get_u64(in);
  for (std::uint64_t i = 0; i < nh; ++i) {
    std::string k = get_str(in);
    ck.hparams[k] = get_str(in);
  }
  const std::uint64_t nt = get_u64(in);
  for (std::uint64_t i = 0; i < nt; ++i) {
    const std::string name = get_str(in);
    const int dtype = in.get();
    if (dtype != 0) throw std::runtime_error("unsupported tensor dtype in " + path);
    Tensor w = get_tensor(in);
    const std::size_t idx = ck.params.add(name, w.shape);
    ck.params.at(idx) = std::move(w);
    ck.params.adam_m(idx) = get_tensor(in);
    ck.params.adam_v(idx) = get_tensor(in);
    ck.params.adam_step(idx) = get_u64(in);
  }
  if (!in) throw std::runtime_error("truncated checkpoint: " + path);
  return ck;
}

}  // namespace gadiff
