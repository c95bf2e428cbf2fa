#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "firelog/log_model.hpp"

namespace firelog {

enum class EncodingMethod { zscore, frequency };

struct ColumnEncoding {
  std::string column;
  EncodingMethod method = EncodingMethod::zscore;
  double mean = 0.0;    // zscore only
  double stddev = 0.0;  // zscore only, population
};

struct FeatureMatrix {
  Eigen::MatrixXd points;             // n x d
  std::vector<std::size_t> row_map;   // matrix row -> table row
  std::vector<ColumnEncoding> encoding;

  std::size_t rows() const noexcept { return static_cast<std::size_t>(points.rows()); }
  std::size_t dims() const noexcept { return static_cast<std::size_t>(points.cols()); }
};

// Numeric and timestamp columns are z-scored (population sigma; constant
// columns become 0, nulls take the column mean). Categorical, ip and text
// columns map each value to its relative frequency; null maps to 0.
FeatureMatrix encode_features(const LogTable& table, std::span<const std::string> attributes);

// Every ordinal-numeric and categorical column outside the four log roles.
std::vector<std::string> default_feature_attributes(const LogTable& table);

inline constexpr std::size_t kDefaultLofK = 20;
inline constexpr double kDefaultAnomalyThreshold = 1.5;

struct LofParams {
  std::size_t k = kDefaultLofK;
};

struct LofScores {
  std::vector<double> scores;
  friend bool operator==(const LofScores&, const LofScores&) = default;
};

// min(k, n - 1), at least 1.
std::size_t clip_k(std::size_t k, std::size_t n) noexcept;

// Local Outlier Factor with Euclidean distance. The k-neighbourhood keeps
// every point tied at the k-distance. Points whose whole neighbourhood
// coincides with them have infinite reachability density and score 1; when
// such a point appears in another point's neighbourhood its density is
// taken as the largest finite density in the data set, so every score is
// finite. Requires 1 <= k < n (k_out_of_range).
LofScores lof(const Eigen::MatrixXd& points, const LofParams& params);
LofScores lof(const FeatureMatrix& m, const LofParams& params);

struct Projection2D {
  Eigen::MatrixXd coords;       // n x 2
  Eigen::MatrixXd components;   // 2 x d, orthonormal rows
  std::array<double, 2> explained_variance{};  // descending

  friend bool operator==(const Projection2D& a, const Projection2D& b) {
    return a.coords == b.coords && a.components == b.components &&
           a.explained_variance == b.explained_variance;
  }
};

// Covariance (n - 1 normalized) eigendecomposition; the largest-magnitude
// entry of each component is made positive.
Projection2D pca_2d(const Eigen::MatrixXd& points);
Projection2D pca_2d(const FeatureMatrix& m);

// Rows with score > threshold, in original order.
LogTable threshold_extract(const LogTable& table, const LofScores& scores, double threshold,
                           const std::string& provenance = "threshold-extract");

}  // namespace firelog
