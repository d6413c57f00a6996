#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <fstream>
#include <string>

#include "swreg/measure.hpp"
#include "swreg/rng.hpp"

namespace test_util {

// Fresh scratch directory under the system temp root.
inline std::filesystem::path temp_dir(const std::string& tag) {
  auto dir = std::filesystem::temp_directory_path() / "swreg_tests" / tag;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline void write_file(const std::filesystem::path& path,
                       const std::string& content) {
  std::ofstream f(path);
  f << content;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(f),
                     std::istreambuf_iterator<char>());
}

// Uniform measure on n Gaussian points, deterministic in (seed, stream).
inline swreg::DiscreteMeasure random_measure(int n, int d, std::uint64_t seed,
                                             std::uint64_t stream,
                                             double spread = 1.0,
                                             double shift = 0.0) {
  swreg::Rng rng(swreg::SeedSpec{seed, stream});
  Eigen::MatrixXd supports(n, d);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < d; ++k)
      supports(i, k) = shift + spread * rng.normal();
  return swreg::DiscreteMeasure::uniform(std::move(supports));
}

// Random weights bounded away from zero, normalized.
inline swreg::DiscreteMeasure random_weighted_measure(int n, int d,
                                                      std::uint64_t seed,
                                                      std::uint64_t stream) {
  swreg::Rng rng(swreg::SeedSpec{seed, stream});
  Eigen::MatrixXd supports(n, d);
  Eigen::VectorXd masses(n);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < d; ++k) supports(i, k) = rng.normal();
    masses[i] = 0.1 + rng.uniform();
  }
  return swreg::DiscreteMeasure::from_masses(std::move(supports),
                                             std::move(masses));
}

}  // namespace test_util
