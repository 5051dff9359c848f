#include <doctest.h>

#include <chrono>
#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "saic/dataio.hpp"
#include "saic/evalkit.hpp"
#include "support.hpp"

using namespace saic;
using namespace saic::evalkit;

namespace {

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return Errc::InvalidArgument;
}

GaussianSummary make_summary(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov) {
  return {mean, cov, 100};
}

Eigen::MatrixXd random_spd(Rng& rng, int d) {
  Eigen::MatrixXd a(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) a(i, j) = testing::uniform(rng, -1.0, 1.0);
  }
  return a * a.transpose() + 0.1 * Eigen::MatrixXd::Identity(d, d);
}

// Independent route: trace of (Sa Sb)^(1/2) from the eigenvalues of the
// non-symmetric product, which are real and non-negative for SPD inputs.
double fid_oracle(const GaussianSummary& a, const GaussianSummary& b) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(a.covariance * b.covariance);
  double tr_sqrt = 0.0;
  for (int i = 0; i < es.eigenvalues().size(); ++i) tr_sqrt += std::sqrt(std::max(0.0, es.eigenvalues()[i].real()));
  return (a.mean - b.mean).squaredNorm() + a.covariance.trace() + b.covariance.trace() - 2.0 * tr_sqrt;
}

std::vector<std::vector<double>> to_rows(const Eigen::MatrixXd& m) {
  std::vector<std::vector<double>> rows(static_cast<std::size_t>(m.rows()));
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) rows[static_cast<std::size_t>(i)].push_back(m(i, j));
  }
  return rows;
}

dataio::Dataset counts_dataset(const std::map<std::string, int>& counts) {
  dataio::Dataset ds;
  ds.images.push_back({"i", "i.png", 10, 10});
  for (const auto& [c, n] : counts) {
    ds.categories.push_back(c);
    for (int k = 0; k < n; ++k) ds.annotations.push_back({"i", {0, 0, 2, 2}, c, CellType::single_cell, {}, 4});
  }
  return ds;
}

}  // namespace

TEST_SUITE("evalkit") {
  TEST_CASE("summary of two vectors") {
    const auto s = summarize({{0.0, 0.0}, {2.0, 0.0}});
    CHECK(s.count == 2);
    CHECK(s.mean(0) == 1.0);
    CHECK(s.mean(1) == 0.0);
    CHECK(s.covariance(0, 0) == 2.0);
    CHECK(s.covariance(0, 1) == 0.0);
    CHECK(s.covariance(1, 1) == 0.0);
    const auto same = summarize({{1.0, 2.0, 3.0}, {1.0, 2.0, 3.0}, {1.0, 2.0, 3.0}});
    CHECK(same.covariance.isZero(0.0));
    CHECK(code_of([] { summarize({{1.0}}); }) == Errc::TooFewSamples);
    CHECK(code_of([] { summarize({{1.0}, {1.0, 2.0}}); }) == Errc::LengthMismatch);
  }

  TEST_CASE("closed-form distances") {
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(3, 3);
    Eigen::VectorXd mu_b(3);
    mu_b << 1.0, 2.0, 2.0;  // norm 3
    CHECK(std::abs(frechet_distance(make_summary(Eigen::VectorXd::Zero(3), id), make_summary(mu_b, id)) - 9.0) <= 1e-9);
    const Eigen::MatrixXd one = Eigen::MatrixXd::Constant(1, 1, 1.0);
    const Eigen::MatrixXd four = Eigen::MatrixXd::Constant(1, 1, 4.0);
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(1);
    CHECK(frechet_distance(make_summary(zero, one), make_summary(zero, four)) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(code_of([&] { frechet_distance(make_summary(zero, one), make_summary(mu_b, id)); }) == Errc::DimensionMismatch);
  }

  TEST_CASE("distance agrees with the product-eigenvalue route") {
    Rng rng(1);
    for (int t = 0; t < 50; ++t) {
      const int d = 2 + static_cast<int>(uniform_below(rng, 10));
      Eigen::VectorXd ma(d), mb(d);
      for (int i = 0; i < d; ++i) {
        ma(i) = testing::uniform(rng, -2, 2);
        mb(i) = testing::uniform(rng, -2, 2);
      }
      const auto a = make_summary(ma, random_spd(rng, d));
      const auto b = make_summary(mb, random_spd(rng, d));
      const double f = frechet_distance(a, b);
      REQUIRE(f == doctest::Approx(fid_oracle(a, b)).epsilon(1e-8));
      REQUIRE(std::abs(f - frechet_distance(b, a)) <= 1e-6);
      REQUIRE(std::abs(frechet_distance(a, a)) <= 1e-6);
      REQUIRE(f >= -1e-6);
    }
  }

  TEST_CASE("rank-deficient covariances stay finite") {
    Rng rng(2);
    std::vector<std::vector<double>> xs, ys;
    for (int i = 0; i < 5; ++i) {
      xs.push_back(testing::random_unit(rng, 16));
      ys.push_back(testing::random_unit(rng, 16));
    }
    const double f = frechet_distance(summarize(xs), summarize(ys));
    CHECK(std::isfinite(f));
    CHECK(std::abs(frechet_distance(summarize(xs), summarize(xs))) <= 1e-6);
  }

  TEST_CASE("monte carlo estimate approaches the closed form") {
    const auto start = std::chrono::steady_clock::now();
    constexpr int kD = 8;
    constexpr int kN = 10000;
    std::mt19937_64 gen(1234);
    std::normal_distribution<double> z;
    Rng rng(3);
    // b = mu + Q diag(sqrt(l)) z; tr(Sb^(1/2)) = sum sqrt(l)
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(random_spd(rng, kD));
    const Eigen::MatrixXd q = qr.householderQ();
    Eigen::VectorXd l(kD), mu(kD);
    for (int i = 0; i < kD; ++i) {
      l(i) = 0.25 + 0.5 * i;
      mu(i) = 0.3 * (i % 3);
    }
    const Eigen::MatrixXd shape = q * l.cwiseSqrt().asDiagonal();
    std::vector<std::vector<double>> xs(kN), ys(kN);
    for (int n = 0; n < kN; ++n) {
      Eigen::VectorXd za(kD), zb(kD);
      for (int i = 0; i < kD; ++i) za(i) = z(gen);
      for (int i = 0; i < kD; ++i) zb(i) = z(gen);
      const Eigen::VectorXd yb = mu + shape * zb;
      xs[static_cast<std::size_t>(n)].assign(za.data(), za.data() + kD);
      ys[static_cast<std::size_t>(n)].assign(yb.data(), yb.data() + kD);
    }
    const double closed = mu.squaredNorm() + kD + l.sum() - 2.0 * l.cwiseSqrt().sum();
    const double est = frechet_distance(summarize(xs), summarize(ys));
    CHECK(std::abs(est - closed) <= 0.02 * closed + 0.05);
    CHECK(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() < 30.0);
  }

  TEST_CASE("fidelity score") {
    CHECK(fidelity_score({{{1.0, 0.0}, {1.0, 0.0}}, {{0.0, 2.0}, {0.0, 3.0}}}) == doctest::Approx(100.0));
    CHECK(fidelity_score({{{1.0, 0.0}, {0.0, 1.0}}}) == doctest::Approx(0.0));
    CHECK(fidelity_score({{{1.0, 0.0}, {-1.0, 0.0}}}) == doctest::Approx(-100.0));
    Rng rng(4);
    std::vector<std::pair<std::vector<double>, std::vector<double>>> pairs, scaled;
    for (int i = 0; i < 20; ++i) {
      auto a = testing::random_unit(rng, 6);
      auto b = testing::random_unit(rng, 6);
      pairs.emplace_back(a, b);
      const double s = testing::uniform(rng, 0.1, 10.0);
      for (double& v : a) v *= s;
      scaled.emplace_back(a, b);
    }
    CHECK(fidelity_score(scaled) == doctest::Approx(fidelity_score(pairs)).epsilon(1e-12));
    CHECK(code_of([] { fidelity_score({}); }) == Errc::EmptyInput);
  }

  TEST_CASE("projection preserves planar geometry") {
    Rng rng(5);
    for (int t = 0; t < 20; ++t) {
      const int d = 3 + static_cast<int>(uniform_below(rng, 20));
      const int n = 3 + static_cast<int>(uniform_below(rng, 30));
      Eigen::MatrixXd basis = Eigen::MatrixXd::Random(d, 2);
      Eigen::HouseholderQR<Eigen::MatrixXd> qr(basis);
      const Eigen::MatrixXd q = Eigen::MatrixXd(qr.householderQ()).leftCols(2);
      Eigen::VectorXd offset(d);
      for (int i = 0; i < d; ++i) offset(i) = testing::uniform(rng, -5, 5);
      Eigen::MatrixXd pts(n, d);
      for (int i = 0; i < n; ++i) {
        Eigen::Vector2d p(testing::uniform(rng, -3, 3), testing::uniform(rng, -1, 1));
        pts.row(i) = (offset + q * p).transpose();
      }
      const auto proj = style_projection(to_rows(pts));
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          const double orig = (pts.row(i) - pts.row(j)).norm();
          const double got = std::hypot(proj[static_cast<std::size_t>(i)].x - proj[static_cast<std::size_t>(j)].x,
                                        proj[static_cast<std::size_t>(i)].y - proj[static_cast<std::size_t>(j)].y);
          REQUIRE(std::abs(orig - got) <= 1e-9);
        }
      }
    }
  }

  TEST_CASE("rank-one and duplicate descriptors") {
    std::vector<std::vector<double>> line;
    for (int i = 0; i < 10; ++i) line.push_back({1.0 + i, 2.0 - 0.5 * i, 3.0 + 2.0 * i});
    for (const auto& p : style_projection(line)) CHECK(std::abs(p.y) <= 1e-9);
    const auto dup = style_projection({{1.0, 2.0}, {1.0, 2.0}, {4.0, 0.0}});
    CHECK(dup[0].x == doctest::Approx(dup[1].x));
    CHECK(dup[0].y == doctest::Approx(dup[1].y));
    CHECK(code_of([] { style_projection(std::vector<std::vector<double>>{{1.0}, {2.0}}); }) == Errc::TooFewSamples);
  }

  TEST_CASE("projection is invariant to input order") {
    Rng rng(6);
    std::vector<std::vector<double>> pts;
    for (int i = 0; i < 25; ++i) {
      std::vector<double> v(6);
      for (int k = 0; k < 6; ++k) v[static_cast<std::size_t>(k)] = testing::uniform(rng, -1, 1) * (6 - k);
      pts.push_back(v);
    }
    std::vector<std::size_t> perm(pts.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    deterministic_shuffle(perm, rng);
    std::vector<std::vector<double>> shuffled;
    for (auto i : perm) shuffled.push_back(pts[i]);
    const auto a = style_projection(pts);
    const auto b = style_projection(shuffled);
    for (std::size_t k = 0; k < perm.size(); ++k) {
      REQUIRE(b[k].x == doctest::Approx(a[perm[k]].x).epsilon(1e-9));
      REQUIRE(b[k].y == doctest::Approx(a[perm[k]].y).epsilon(1e-9));
    }
  }

  TEST_CASE("tail rule boundary") {
    const auto stats = tail_stats(counts_dataset({{"a", 499}, {"b", 500}}), 500);
    CHECK(stats.at("a") == CategoryStat{499, true});
    CHECK(stats.at("b") == CategoryStat{500, false});
    CHECK(tail_stats(dataio::Dataset{}, 500).empty());
  }
}
