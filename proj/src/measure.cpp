#include "swreg/measure.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <unordered_set>

#include "swreg/common.hpp"
#include "swreg/csv.hpp"

namespace swreg {

DiscreteMeasure::DiscreteMeasure(Eigen::MatrixXd supports,
                                 Eigen::VectorXd weights)
    : supports_(std::move(supports)), weights_(std::move(weights)) {
  if (supports_.rows() < 1 || supports_.cols() < 1)
    throw DataError("measure needs n >= 1 points in d >= 1 dimensions");
  if (weights_.size() != supports_.rows())
    throw DataError("weight count does not match point count");
  if (!supports_.allFinite() || !weights_.allFinite())
    throw DataError("non-finite value in measure");
  if ((weights_.array() < 0.0).any())
    throw DataError("negative weight in measure");
  double sum = weights_.sum();
  if (std::abs(sum - 1.0) > 1e-6)
    throw DataError("weights sum to " + csv::format_double(sum) +
                    ", expected 1 within 1e-6");
  weights_ /= sum;
}

DiscreteMeasure DiscreteMeasure::uniform(Eigen::MatrixXd supports) {
  Eigen::Index n = supports.rows();
  if (n < 1) throw DataError("measure needs n >= 1 points");
  return DiscreteMeasure(std::move(supports),
                         Eigen::VectorXd::Constant(n, 1.0 / double(n)));
}

DiscreteMeasure DiscreteMeasure::from_masses(Eigen::MatrixXd supports,
                                             Eigen::VectorXd masses) {
  if (!masses.allFinite() || (masses.array() < 0.0).any())
    throw DataError("masses must be finite and nonnegative");
  double sum = masses.sum();
  if (!(sum > 0.0)) throw DataError("masses must sum to a positive value");
  return DiscreteMeasure(std::move(supports), masses / sum);
}

MeasureDataset load_dataset(const std::string& manifest_path) {
  std::vector<std::string> lines = csv::read_lines(manifest_path);
  if (lines.empty()) throw DataError("empty manifest: " + manifest_path);
  std::vector<std::string> header = csv::split_fields(lines[0]);
  if (header.empty() || header[0] != "path")
    throw DataError("manifest must start with a `path,label` header row");

  std::filesystem::path base =
      std::filesystem::path(manifest_path).parent_path();
  MeasureDataset ds;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    std::vector<std::string> fields = csv::split_fields(lines[r]);
    if (fields.empty() || fields[0].empty())
      throw DataError("manifest row " + std::to_string(r) + " has no path");
    std::filesystem::path cloud = base / fields[0];
    Eigen::MatrixXd points = csv::read_numeric_matrix(cloud.string());
    if (!ds.measures.empty() && points.cols() != ds.dim())
      throw DataError("dimension mismatch in " + cloud.string() + ": got " +
                      std::to_string(points.cols()) + ", expected " +
                      std::to_string(ds.dim()));

    std::filesystem::path wfile = cloud;
    wfile += ".w";
    if (std::filesystem::exists(wfile)) {
      Eigen::MatrixXd w = csv::read_numeric_matrix(wfile.string());
      if (w.cols() != 1 || w.rows() != points.rows())
        throw DataError("weights file " + wfile.string() +
                        " must be one column of " +
                        std::to_string(points.rows()) + " reals");
      ds.measures.push_back(
          DiscreteMeasure::from_masses(std::move(points), w.col(0)));
    } else {
      ds.measures.push_back(DiscreteMeasure::uniform(std::move(points)));
    }
    ds.labels.push_back(fields.size() > 1 ? fields[1] : "");
  }
  if (ds.measures.empty()) throw DataError("manifest lists no measures");
  return ds;
}

std::vector<PairIndex> sample_pairs(std::size_t n_measures, std::size_t count,
                                    SeedSpec seed, PairMode mode) {
  if (n_measures < 1) throw DataError("sample_pairs: empty dataset");
  if (count < 1) throw DataError("sample_pairs: count must be >= 1");
  Rng rng(seed);

  if (mode == PairMode::kAllUnordered) {
    // `count` is the number of measures drawn; all pairs among them returned.
    if (count > n_measures)
      throw DataError("sample_pairs: requested more measures than available");
    std::vector<std::uint32_t> idx(n_measures);
    for (std::size_t i = 0; i < n_measures; ++i)
      idx[i] = static_cast<std::uint32_t>(i);
    for (std::size_t i = 0; i + 1 < n_measures; ++i) {
      std::size_t j = i + rng.below(n_measures - i);
      std::swap(idx[i], idx[j]);
    }
    idx.resize(count);
    std::sort(idx.begin(), idx.end());
    std::vector<PairIndex> pairs;
    pairs.reserve(count * (count - 1) / 2);
    for (std::size_t a = 0; a < count; ++a)
      for (std::size_t b = a + 1; b < count; ++b)
        pairs.push_back(PairIndex{idx[a], idx[b]});
    return pairs;
  }

  // Uniform sampling of `count` distinct unordered pairs.
  std::size_t total = n_measures * (n_measures - 1) / 2;
  if (count > total)
    throw DataError("sample_pairs: requested more pairs than exist");
  if (total <= 4 * count) {
    // Dense regime: partial Fisher-Yates over the enumerated pair set.
    std::vector<PairIndex> all;
    all.reserve(total);
    for (std::uint32_t i = 0; i + 1 < n_measures; ++i)
      for (std::uint32_t j = i + 1; j < n_measures; ++j)
        all.push_back(PairIndex{i, j});
    for (std::size_t i = 0; i < count; ++i) {
      std::size_t j = i + rng.below(total - i);
      std::swap(all[i], all[j]);
    }
    all.resize(count);
    return all;
  }
  // Sparse regime: rejection sampling, deterministic in draw order.
  std::unordered_set<std::uint64_t> seen;
  std::vector<PairIndex> pairs;
  pairs.reserve(count);
  while (pairs.size() < count) {
    auto i = static_cast<std::uint32_t>(rng.below(n_measures));
    auto j = static_cast<std::uint32_t>(rng.below(n_measures));
    if (i == j) continue;
    if (i > j) std::swap(i, j);
    std::uint64_t key = (std::uint64_t(i) << 32) | j;
    if (seen.insert(key).second) pairs.push_back(PairIndex{i, j});
  }
  return pairs;
}

}  // namespace swreg
