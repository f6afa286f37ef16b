#pragma once

#include "dshrink/rng.hpp"
#include "dshrink/types.hpp"

#include <filesystem>
#include <fstream>
#include <string>

namespace dshrink::testing {

// Gaussian design with y = X beta + noise_sd * eps, all draws seeded.
inline Dataset make_dataset(int n, int p, const Eigen::VectorXd& beta,
                            double noise_sd, std::uint64_t seed) {
  CounterRng rng(seed, derive_stream(0x74657374ull));
  Dataset data;
  data.X.resize(n, p);
  for (int j = 0; j < p; ++j)
    for (int i = 0; i < n; ++i) data.X(i, j) = rng.normal();
  data.y = data.X * beta;
  for (int i = 0; i < n; ++i) data.y[i] += noise_sd * rng.normal();
  return data;
}

inline Eigen::VectorXd sparse_beta(int p, std::initializer_list<double> head) {
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  int k = 0;
  for (const double v : head) beta[k++] = v;
  return beta;
}

// Writes content to a scratch file under the current working directory and
// returns its path; tests own cleanup implicitly via unique names.
inline std::string write_scratch(const std::string& name,
                                 const std::string& content) {
  const std::string path = (std::filesystem::temp_directory_path() /
                            ("dshrink_test_" + name))
                               .string();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
  return path;
}

}  // namespace dshrink::testing
