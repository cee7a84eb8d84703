#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "fbe/instance.hpp"

using fbe::vector;

namespace {

fbe::instance_spec gaussian_spec(Eigen::Index m, Eigen::Index n, Eigen::Index s,
                                 double sigma, uint64_t seed) {
  fbe::instance_spec spec;
  spec.family = fbe::instance_family::gaussian_unit_columns;
  spec.m = m;
  spec.n = n;
  spec.s = s;
  spec.sigma = sigma;
  spec.seed = seed;
  return spec;
}

double adjacent_column_correlation(const fbe::matrix& A) {
  double acc = 0.0;
  for (Eigen::Index j = 0; j + 1 < A.cols(); ++j) {
    const auto a = A.col(j);
    const auto b = A.col(j + 1);
    const auto ac = (a.array() - a.mean()).matrix();
    const auto bc = (b.array() - b.mean()).matrix();
    acc += std::abs(ac.dot(bc) / (ac.norm() * bc.norm()));
  }
  return acc / static_cast<double>(A.cols() - 1);
}

}  // namespace

TEST_CASE("gaussian family construction invariants") {
  const fbe::instance inst = fbe::generate(gaussian_spec(30, 80, 7, 0.01, 42));
  for (Eigen::Index j = 0; j < 80; ++j) {
    CHECK(inst.A.col(j).norm() == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK(inst.support.size() == 7);
  for (size_t i = 1; i < inst.support.size(); ++i) {
    CHECK(inst.support[i] > inst.support[i - 1]);
  }
  CHECK(inst.b.size() == 30);
}

TEST_CASE("noiseless dense instance reproduces the clean measurements") {
  const fbe::instance inst = fbe::generate(gaussian_spec(12, 12, 12, 0.0, 9));
  vector x = vector::Zero(12);
  for (Eigen::Index i = 0; i < 12; ++i) {
    x[static_cast<Eigen::Index>(inst.support[static_cast<size_t>(i)])] =
        inst.coefficients[i];
  }
  CHECK((inst.b - inst.A * x).norm() == 0.0);
}

TEST_CASE("generation is deterministic in the seed") {
  const auto spec = gaussian_spec(25, 60, 6, 0.01, 1234);
  const std::string bytes_a = fbe::serialize_instance(fbe::generate(spec));
  const std::string bytes_b = fbe::serialize_instance(fbe::generate(spec));
  CHECK(bytes_a == bytes_b);

  auto other = spec;
  other.seed = 1235;
  CHECK(fbe::serialize_instance(fbe::generate(other)) != bytes_a);
}

TEST_CASE("binary round trip is bit exact") {
  auto spec = gaussian_spec(20, 45, 5, 0.01, 77);
  const fbe::instance inst = fbe::generate(spec);
  const fbe::instance back = fbe::deserialize_instance(fbe::serialize_instance(inst));

  CHECK(back.spec.m == inst.spec.m);
  CHECK(back.spec.n == inst.spec.n);
  CHECK(back.spec.s == inst.spec.s);
  CHECK(back.spec.seed == inst.spec.seed);
  CHECK(back.spec.sigma == inst.spec.sigma);
  CHECK((back.A - inst.A).norm() == 0.0);
  CHECK((back.b - inst.b).norm() == 0.0);
  CHECK(back.support == inst.support);
  CHECK((back.coefficients - inst.coefficients).norm() == 0.0);

  // file round trip including the sidecar
  const auto dir = std::filesystem::temp_directory_path() / "fbe_instance_test";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "inst.bin").string();
  fbe::save_instance(inst, path);
  CHECK(std::filesystem::exists(dir / "inst.json"));
  const fbe::instance loaded = fbe::load_instance(path);
  CHECK((loaded.A - inst.A).norm() == 0.0);
  CHECK((loaded.b - inst.b).norm() == 0.0);
  std::filesystem::remove_all(dir);

  CHECK_THROWS_AS(fbe::deserialize_instance(std::string("garbage")), fbe::invalid_input);
}

TEST_CASE("dct family closed form and range") {
  fbe::instance_spec spec;
  spec.family = fbe::instance_family::oversampled_dct;
  spec.m = 40;
  spec.n = 200;
  spec.s = 8;
  spec.sigma = 0.01;
  spec.oversampling = 20;
  spec.seed = 3;
  const fbe::instance inst = fbe::generate(spec);

  // entries live in [-1/sqrt(m), 1/sqrt(m)]
  const double bound = 1.0 / std::sqrt(40.0) + 1e-15;
  CHECK(inst.A.maxCoeff() <= bound);
  CHECK(inst.A.minCoeff() >= -bound);

  // the matrix is recomputable from the stored frequencies
  CHECK(inst.dct_frequencies.size() == 40);
  const fbe::matrix rebuilt = fbe::dct_matrix(40, 200, 20, inst.dct_frequencies);
  CHECK((rebuilt - inst.A).norm() == 0.0);

  // zero frequencies collapse every column to 1/sqrt(m)
  const fbe::matrix flat = fbe::dct_matrix(5, 7, 20, vector::Zero(5));
  CHECK((flat.array() - 1.0 / std::sqrt(5.0)).abs().maxCoeff() <= 1e-15);
}

TEST_CASE("dct columns are far more correlated than gaussian columns") {
  fbe::instance_spec dct;
  dct.family = fbe::instance_family::oversampled_dct;
  dct.m = 100;
  dct.n = 1500;
  dct.s = 20;
  dct.sigma = 0.01;
  dct.oversampling = 20;
  dct.seed = 5;
  const double dct_corr = adjacent_column_correlation(fbe::generate(dct).A);
  const double gauss_corr =
      adjacent_column_correlation(fbe::generate(gaussian_spec(100, 1500, 20, 0.01, 5)).A);

  CHECK(dct_corr > 5.0 * gauss_corr);
  CHECK(dct_corr > 0.5);
}

TEST_CASE("spec validation and regime advisory") {
  auto spec = gaussian_spec(10, 5, 6, 0.01, 1);
  CHECK_THROWS_AS(spec.validate(), fbe::invalid_input);  // s > n
  spec.s = 0;
  CHECK_THROWS_AS(spec.validate(), fbe::invalid_input);
  spec.s = 2;
  CHECK_NOTHROW(spec.validate());  // m > n is allowed
  CHECK(!fbe::regime_warning(spec).empty());
  CHECK(fbe::regime_warning(gaussian_spec(5, 10, 2, 0.01, 1)).empty());
  CHECK_NOTHROW(fbe::generate(spec));

  fbe::instance_spec dct;
  dct.family = fbe::instance_family::oversampled_dct;
  dct.m = 10;
  dct.n = 20;
  dct.s = 2;
  dct.oversampling = 0;
  CHECK_THROWS_AS(dct.validate(), fbe::invalid_input);
}
