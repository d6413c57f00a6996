#include "swreg/rng.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "swreg/common.hpp"

namespace swreg {

namespace {

// splitmix64 finalizer (Vigna). Full-period mix, good avalanche.
std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

SeedSpec SeedSpec::derive(std::uint64_t sub_stream) const {
  return SeedSpec{master_seed, mix_streams(stream_id, sub_stream)};
}

std::uint64_t mix_streams(std::uint64_t a, std::uint64_t b) {
  std::uint64_t state = a;
  std::uint64_t mixed = splitmix64(state);
  state = mixed ^ b;
  return splitmix64(state);
}

std::uint64_t pair_stream(std::uint64_t i, std::uint64_t j) {
  return i <= j ? mix_streams(i, j) : mix_streams(j, i);
}

Rng::Rng(SeedSpec seed)
    : engine_(mix_streams(seed.master_seed, seed.stream_id)) {}

std::uint64_t Rng::next_u64() { return engine_(); }

double Rng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
  return lo + (hi - lo) * uniform();
}

double Rng::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  // (0,1] for the radius draw so log() stays finite.
  double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  double u2 = uniform();
  double r = std::sqrt(-2.0 * std::log(u1));
  double angle = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(angle);
  have_spare_ = true;
  return r * std::cos(angle);
}

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) throw DataError("Rng::below: n must be positive");
  // Rejection sampling over the largest multiple of n, so no modulo bias.
  std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                        std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x;
  do {
    x = next_u64();
  } while (x >= limit);
  return x % n;
}

Direction sample_direction(int dim, Rng& rng) {
  if (dim <= 0) throw DataError("sample_direction: dim must be positive");
  Direction v(dim);
  double norm2 = 0.0;
  do {
    for (int k = 0; k < dim; ++k) v[k] = rng.normal();
    norm2 = v.squaredNorm();
  } while (norm2 == 0.0);
  return v / std::sqrt(norm2);
}

std::vector<Direction> sample_directions(int dim, int count, SeedSpec seed) {
  if (count < 0) throw DataError("sample_directions: count must be >= 0");
  Rng rng(seed);
  std::vector<Direction> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int l = 0; l < count; ++l) out.push_back(sample_direction(dim, rng));
  return out;
}

}  // namespace swreg
