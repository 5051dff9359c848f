#include "saic/evalkit.hpp"

#include <cmath>

#include "saic/cellbank.hpp"
#include "saic/dataio.hpp"

namespace saic::evalkit {

namespace {

Eigen::MatrixXd to_matrix(const std::vector<std::vector<double>>& rows) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto d = static_cast<Eigen::Index>(rows.front().size());
  Eigen::MatrixXd m(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = rows[static_cast<std::size_t>(i)];
    if (static_cast<Eigen::Index>(r.size()) != d) throw Error(Errc::LengthMismatch, "embedding lengths differ");
    for (Eigen::Index j = 0; j < d; ++j) m(i, j) = r[static_cast<std::size_t>(j)];
  }
  return m;
}

Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eigen_of(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
  if (solver.info() != Eigen::Success) throw Error(Errc::NumericalFailure, "eigendecomposition did not converge");
  return solver;
}

}  // namespace

GaussianSummary summarize(const std::vector<std::vector<double>>& embeddings) {
  if (embeddings.size() < 2) throw Error(Errc::TooFewSamples, "at least two embeddings are required");
  const Eigen::MatrixXd x = to_matrix(embeddings);
  GaussianSummary s;
  s.count = x.rows();
  s.mean = x.colwise().mean().transpose();
  const Eigen::MatrixXd centered = x.rowwise() - s.mean.transpose();
  s.covariance = (centered.transpose() * centered) / static_cast<double>(x.rows() - 1);
  return s;
}

double frechet_distance(const GaussianSummary& a, const GaussianSummary& b) {
  if (a.mean.size() != b.mean.size() || a.covariance.rows() != b.covariance.rows()) {
    throw Error(Errc::DimensionMismatch, "summaries have different dimensions");
  }
  const auto ea = eigen_of(a.covariance);
  const Eigen::VectorXd root_vals = ea.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Eigen::MatrixXd sqrt_a = ea.eigenvectors() * root_vals.asDiagonal() * ea.eigenvectors().transpose();
  Eigen::MatrixXd m = sqrt_a * b.covariance * sqrt_a;
  m = 0.5 * (m + m.transpose());
  const Eigen::VectorXd lambda = eigen_of(m).eigenvalues();
  const double cutoff = kEigenClamp * std::max(0.0, lambda.maxCoeff());
  double trace_sqrt = 0.0;
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    if (lambda(i) > cutoff) trace_sqrt += std::sqrt(lambda(i));
  }
  return (a.mean - b.mean).squaredNorm() + a.covariance.trace() + b.covariance.trace() - 2.0 * trace_sqrt;
}

double fidelity_score(const std::vector<std::pair<std::vector<double>, std::vector<double>>>& pairs) {
  if (pairs.empty()) throw Error(Errc::EmptyInput, "fidelity score needs at least one pair");
  double sum = 0.0;
  for (const auto& [synth, source] : pairs) sum += cellbank::cosine_similarity(synth, source);
  return 100.0 * sum / static_cast<double>(pairs.size());
}

std::vector<Point2> style_projection(const std::vector<std::vector<double>>& descriptors) {
  if (descriptors.size() < 3) throw Error(Errc::TooFewSamples, "projection needs at least three descriptors");
  const Eigen::MatrixXd x = to_matrix(descriptors);
  const Eigen::RowVectorXd mean = x.colwise().mean();
  const Eigen::MatrixXd centered = x.rowwise() - mean;
  const auto solver = eigen_of(centered.transpose() * centered);
  const Eigen::Index d = x.cols();
  std::vector<Eigen::VectorXd> axes;
  for (Eigen::Index k = d - 1; k >= std::max<Eigen::Index>(0, d - 2); --k) {
    Eigen::VectorXd v = solver.eigenvectors().col(k);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0) v = -v;
    axes.push_back(v);
  }
  std::vector<Point2> points(descriptors.size());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    auto& p = points[static_cast<std::size_t>(i)];
    p.x = centered.row(i).dot(axes[0]);
    if (axes.size() > 1) p.y = centered.row(i).dot(axes[1]);
  }
  return points;
}

std::vector<Point2> style_projection(const std::vector<imageproc::StyleDescriptor>& descriptors) {
  std::vector<std::vector<double>> rows;
  rows.reserve(descriptors.size());
  for (const auto& d : descriptors) rows.push_back(d.values);
  return style_projection(rows);
}

std::map<std::string, CategoryStat> tail_stats(const dataio::Dataset& dataset, int threshold) {
  std::map<std::string, CategoryStat> stats;
  for (const auto& a : dataset.annotations) ++stats[a.category].count;
  for (auto& [category, s] : stats) s.is_tail = s.count < threshold;
  return stats;
}

}  // namespace saic::evalkit
