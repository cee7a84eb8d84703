#include "fbe/instance.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include <json.hpp>

namespace fbe {

namespace {

constexpr char kMagic[8] = {'F', 'B', 'E', 'I', 'N', 'S', 'T', '\0'};
constexpr uint32_t kFormatVersion = 1;

void put_u32(std::string& out, uint32_t v) {
  for (int k = 0; k < 4; ++k) out.push_back(static_cast<char>((v >> (8 * k)) & 0xff));
}

void put_u64(std::string& out, uint64_t v) {
  for (int k = 0; k < 8; ++k) out.push_back(static_cast<char>((v >> (8 * k)) & 0xff));
}

void put_f64(std::string& out, double v) { put_u64(out, std::bit_cast<uint64_t>(v)); }

class byte_reader {
 public:
  explicit byte_reader(const std::string& data) : data_(data) {}

  uint32_t u32() {
    uint32_t v = 0;
    for (int k = 0; k < 4; ++k) v |= static_cast<uint32_t>(byte()) << (8 * k);
    return v;
  }
  uint64_t u64() {
    uint64_t v = 0;
    for (int k = 0; k < 8; ++k) v |= static_cast<uint64_t>(byte()) << (8 * k);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }

  void raw(char* dst, size_t count) {
    if (pos_ + count > data_.size()) throw invalid_input("instance file truncated");
    std::memcpy(dst, data_.data() + pos_, count);
    pos_ += count;
  }

 private:
  uint8_t byte() {
    if (pos_ >= data_.size()) throw invalid_input("instance file truncated");
    return static_cast<uint8_t>(data_[pos_++]);
  }
  const std::string& data_;
  size_t pos_ = 0;
};

std::string family_name(instance_family f) {
  switch (f) {
    case instance_family::gaussian_unit_columns: return "gaussian_unit_columns";
    case instance_family::oversampled_dct: return "oversampled_dct";
  }
  return "unknown";
}

std::string sidecar_path(const std::string& path) {
  std::string base = path;
  if (base.size() > 4 && base.substr(base.size() - 4) == ".bin") {
    base = base.substr(0, base.size() - 4);
  }
  return base + ".json";
}

// support of size s uniform without replacement, ascending
std::vector<uint64_t> draw_support(rng_stream& rng, Eigen::Index n, Eigen::Index s) {
  std::vector<uint64_t> idx(static_cast<size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  for (Eigen::Index i = 0; i < s; ++i) {
    const uint64_t j = static_cast<uint64_t>(i) + rng.below(static_cast<uint64_t>(n - i));
    std::swap(idx[static_cast<size_t>(i)], idx[static_cast<size_t>(j)]);
  }
  idx.resize(static_cast<size_t>(s));
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace

void instance_spec::validate() const {
  if (m <= 0 || n <= 0) throw invalid_input("instance spec: dimensions must be positive");
  if (s <= 0 || s > n) throw invalid_input("instance spec: requires 0 < s <= n");
  if (!(sigma >= 0.0)) throw invalid_input("instance spec: negative noise level");
  if (family == instance_family::oversampled_dct && oversampling < 1) {
    throw invalid_input("instance spec: DCT oversampling must be at least 1");
  }
}

std::string regime_warning(const instance_spec& spec) {
  if (spec.m > spec.n) {
    return "m > n: outside the compressed-sensing regime (proceeding anyway)";
  }
  return {};
}

matrix dct_matrix(Eigen::Index m, Eigen::Index n, long oversampling, const vector& w) {
  if (w.size() != m) throw invalid_input("dct_matrix: frequency vector length != m");
  if (oversampling < 1) throw invalid_input("dct_matrix: oversampling must be at least 1");
  const double scale = 1.0 / std::sqrt(static_cast<double>(m));
  const double two_pi = 2.0 * 3.14159265358979323846;
  matrix A(m, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double freq = two_pi * static_cast<double>(j + 1) / static_cast<double>(oversampling);
    for (Eigen::Index i = 0; i < m; ++i) {
      A(i, j) = scale * std::cos(freq * w[i]);
    }
  }
  return A;
}

instance generate(const instance_spec& spec) {
  spec.validate();
  rng_stream rng(spec.seed);

  instance inst;
  inst.spec = spec;

  if (spec.family == instance_family::gaussian_unit_columns) {
    inst.A.resize(spec.m, spec.n);
    for (Eigen::Index j = 0; j < spec.n; ++j) {
      for (Eigen::Index i = 0; i < spec.m; ++i) inst.A(i, j) = rng.normal();
      inst.A.col(j) /= inst.A.col(j).norm();
    }
  } else {
    vector w(spec.m);
    for (Eigen::Index i = 0; i < spec.m; ++i) w[i] = rng.uniform01();
    inst.A = dct_matrix(spec.m, spec.n, spec.oversampling, w);
    inst.dct_frequencies = std::move(w);
  }

  inst.support = draw_support(rng, spec.n, spec.s);
  inst.coefficients.resize(spec.s);
  for (Eigen::Index i = 0; i < spec.s; ++i) inst.coefficients[i] = rng.normal();

  vector signal = vector::Zero(spec.n);
  for (Eigen::Index i = 0; i < spec.s; ++i) {
    signal[static_cast<Eigen::Index>(inst.support[static_cast<size_t>(i)])] =
        inst.coefficients[i];
  }

  inst.b = inst.A * signal;
  if (spec.sigma > 0.0) {
    for (Eigen::Index i = 0; i < spec.m; ++i) inst.b[i] += spec.sigma * rng.normal();
  }
  return inst;
}

std::string serialize_instance(const instance& inst) {
  const instance_spec& sp = inst.spec;
  std::string out;
  out.reserve(64 + static_cast<size_t>(sp.m) * static_cast<size_t>(sp.n) * 8);

  out.append(kMagic, sizeof(kMagic));
  put_u32(out, kFormatVersion);
  put_u32(out, static_cast<uint32_t>(sp.family));
  put_u64(out, static_cast<uint64_t>(sp.m));
  put_u64(out, static_cast<uint64_t>(sp.n));
  put_u64(out, static_cast<uint64_t>(sp.s));
  put_f64(out, sp.sigma);
  put_u64(out, static_cast<uint64_t>(sp.oversampling));
  put_u64(out, sp.seed);

  for (Eigen::Index i = 0; i < sp.m; ++i) {
    for (Eigen::Index j = 0; j < sp.n; ++j) put_f64(out, inst.A(i, j));
  }
  for (Eigen::Index i = 0; i < sp.m; ++i) put_f64(out, inst.b[i]);
  for (Eigen::Index i = 0; i < sp.s; ++i) put_u64(out, inst.support[static_cast<size_t>(i)]);
  for (Eigen::Index i = 0; i < sp.s; ++i) put_f64(out, inst.coefficients[i]);
  return out;
}

instance deserialize_instance(const std::string& bytes) {
  byte_reader in(bytes);

  char magic[8];
  in.raw(magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw invalid_input("not an instance file (bad magic)");
  }
  const uint32_t version = in.u32();
  if (version != kFormatVersion) {
    throw invalid_input("unsupported instance format version " + std::to_string(version));
  }

  instance inst;
  inst.spec.family = static_cast<instance_family>(in.u32());
  inst.spec.m = static_cast<Eigen::Index>(in.u64());
  inst.spec.n = static_cast<Eigen::Index>(in.u64());
  inst.spec.s = static_cast<Eigen::Index>(in.u64());
  inst.spec.sigma = in.f64();
  inst.spec.oversampling = static_cast<long>(in.u64());
  inst.spec.seed = in.u64();
  inst.spec.validate();

  inst.A.resize(inst.spec.m, inst.spec.n);
  for (Eigen::Index i = 0; i < inst.spec.m; ++i) {
    for (Eigen::Index j = 0; j < inst.spec.n; ++j) inst.A(i, j) = in.f64();
  }
  inst.b.resize(inst.spec.m);
  for (Eigen::Index i = 0; i < inst.spec.m; ++i) inst.b[i] = in.f64();
  inst.support.resize(static_cast<size_t>(inst.spec.s));
  for (auto& idx : inst.support) idx = in.u64();
  inst.coefficients.resize(inst.spec.s);
  for (Eigen::Index i = 0; i < inst.spec.s; ++i) inst.coefficients[i] = in.f64();
  return inst;
}

void save_instance(const instance& inst, const std::string& path) {
  {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw invalid_input("cannot open " + path + " for writing");
    const std::string bytes = serialize_instance(inst);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw error("write failed: " + path);
  }

  nlohmann::json sidecar{
      {"format_version", kFormatVersion},
      {"family", family_name(inst.spec.family)},
      {"m", inst.spec.m},
      {"n", inst.spec.n},
      {"s", inst.spec.s},
      {"sigma", inst.spec.sigma},
      {"oversampling", inst.spec.oversampling},
      {"seed", inst.spec.seed},
  };
  std::ofstream side(sidecar_path(path));
  if (!side) throw error("cannot open sidecar " + sidecar_path(path));
  side << sidecar.dump(2) << "\n";
}

instance load_instance(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw invalid_input("cannot open " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_instance(bytes);
}

dc_least_squares as_dc_problem(const instance& inst, double mu1, double mu2) {
  return dc_least_squares(inst.A, inst.b, mu1, mu2);
}

}  // namespace fbe
