#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "saic/imageproc.hpp"

namespace saic::dataio {
struct Dataset;
}

namespace saic::evalkit {

struct GaussianSummary {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
  std::int64_t count = 0;
};

/// Sample mean and unbiased (n - 1) covariance.
GaussianSummary summarize(const std::vector<std::vector<double>>& embeddings);

inline constexpr double kEigenClamp = 1e-10;

/// |mu_a - mu_b|^2 + tr(Sa + Sb - 2 (Sa Sb)^(1/2)); the square-root trace is
/// taken from the eigenvalues of Sa^(1/2) Sb Sa^(1/2), clamping those below
/// 1e-10 * max to zero.
double frechet_distance(const GaussianSummary& a, const GaussianSummary& b);

/// 100 x mean cosine similarity over (synthetic, source) pairs.
double fidelity_score(const std::vector<std::pair<std::vector<double>, std::vector<double>>>& pairs);

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

/// Projection onto the top two principal components. Each component's
/// largest-magnitude loading is made positive.
std::vector<Point2> style_projection(const std::vector<std::vector<double>>& descriptors);
std::vector<Point2> style_projection(const std::vector<imageproc::StyleDescriptor>& descriptors);

struct CategoryStat {
  std::int64_t count = 0;
  bool is_tail = false;
  bool operator==(const CategoryStat&) const = default;
};

/// is_tail iff count < threshold.
std::map<std::string, CategoryStat> tail_stats(const dataio::Dataset& dataset, int threshold);

}  // namespace saic::evalkit
