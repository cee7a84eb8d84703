#ifndef FBE_INSTANCE_HPP
#define FBE_INSTANCE_HPP

#include <Eigen/Core>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "fbe/dc.hpp"

namespace fbe {

/**
 * Deterministic random stream used by the instance generators. Built on
 * std::mt19937_64 (a fixed, published algorithm) with self-contained
 * uniform, Gaussian (Box-Muller) and bounded-integer (rejection) helpers,
 * so a seed reproduces the exact same stream on any platform or language.
 */
class rng_stream {
 public:
  explicit rng_stream(uint64_t seed) : gen_(seed) {}

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  /// Standard normal via the Box-Muller pair, second value cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log1p(-u1));  // u1 in [0,1), 1-u1 in (0,1]
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  /// Unbiased uniform integer in [0, bound) by rejection.
  uint64_t below(uint64_t bound) {
    const uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    uint64_t x;
    do {
      x = gen_();
    } while (x >= limit);
    return x % bound;
  }

 private:
  std::mt19937_64 gen_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

enum class instance_family : uint32_t {
  gaussian_unit_columns = 0,
  oversampled_dct = 1,
};

/// Parameters of one synthetic sensing instance.
struct instance_spec {
  instance_family family = instance_family::gaussian_unit_columns;
  Eigen::Index m = 0;
  Eigen::Index n = 0;
  Eigen::Index s = 0;      // ground-truth sparsity
  double sigma = 0.0;      // noise level
  long oversampling = 20;  // DCT frequency divisor F
  uint64_t seed = 1;

  void validate() const;
};

/// Non-fatal advisory about an unusual regime; empty when nothing to say.
std::string regime_warning(const instance_spec& spec);

struct instance {
  instance_spec spec;
  matrix A;
  vector b;
  std::vector<uint64_t> support;  // ascending ground-truth support
  vector coefficients;            // signal values on the support
  /// DCT family only: the frequency draw w, kept for recomputation checks.
  /// Not serialized; regenerate from the seed to recover it.
  vector dct_frequencies;
};

instance generate(const instance_spec& spec);

/// Column j (1-indexed) is cos(2 pi j w / F) / sqrt(m) elementwise.
matrix dct_matrix(Eigen::Index m, Eigen::Index n, long oversampling, const vector& w);

// Binary container, little-endian, bit-exact round trip: header (magic,
// version, family, m, n, s, sigma, F, seed), then row-major A, b, and the
// ground-truth support and values.
std::string serialize_instance(const instance& inst);
instance deserialize_instance(const std::string& bytes);

/// Writes the container to `path` plus a JSON sidecar of the spec next to it.
void save_instance(const instance& inst, const std::string& path);
instance load_instance(const std::string& path);

/// The dc_least_squares problem this instance poses at the given weights.
dc_least_squares as_dc_problem(const instance& inst, double mu1, double mu2);

}  // namespace fbe

#endif
