#include "doctest.h"
#include "oracles.hpp"

#include "fastmix/projection.hpp"

#include <cmath>
#include <random>

using namespace fastmix;

namespace {

Parameters random_theta(const IsingModel& m, double radius, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-radius, radius);
  Parameters p(m.num_stats());
  for (Eigen::Index i = 0; i < p.size(); ++i) p[i] = u(rng);
  return p;
}

IsingModel random_small_model(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> side(2, 3);
  const int rows = side(rng);
  const int cols = side(rng);
  return IsingModel{GraphTopology::grid(rows, cols), std::bernoulli_distribution(0.5)(rng)};
}

}  // namespace

TEST_CASE("box projection clips couplings only") {
  const IsingModel m{GraphTopology::chain(3), true};
  Parameters theta(5);
  theta << 0.5, -0.7, 3.0, -4.0, 0.1;
  const Parameters p = project_box(m, theta, 0.2);
  CHECK(p[0] == 0.2);
  CHECK(p[1] == -0.2);
  CHECK(p.tail(3) == theta.tail(3));
  CHECK(project_box(m, p, 0.2) == p);
  CHECK(project(m, theta, BoxSet{0.2}) == p);
  CHECK(is_feasible(m, p, BoxSet{0.2}));
  CHECK_FALSE(is_feasible(m, theta, BoxSet{0.2}));
  CHECK_THROWS_AS(project_box(m, theta, 0.0), InvalidInput);
  CHECK_THROWS_AS(project(m, theta, BoxSet{-1.0}), InvalidInput);
}

TEST_CASE("box projection equals the brute-force QP projection") {
  const IsingModel m{GraphTopology(6, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}}), false};
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Parameters theta = random_theta(m, 0.8, seed);
    const Parameters qp = oracle::box_projection_qp(theta, m.num_edges(), 0.3);
    CHECK((project_box(m, theta, 0.3) - qp).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("coupling matrix") {
  const IsingModel edge{GraphTopology(2, {{0, 1}}), false};
  Parameters w(1);
  w << -0.3;
  const Eigen::MatrixXd r = coupling_matrix(edge, w);
  CHECK(r(0, 1) == 0.3);
  CHECK(r(1, 0) == 0.3);
  CHECK(r(0, 0) == 0.0);
  CHECK(spectral_norm(r) == doctest::Approx(0.3).epsilon(1e-14));

  const IsingModel grid{GraphTopology::grid(4, 4), false};
  CHECK(spectral_norm(coupling_matrix(grid, Parameters::Zero(24))) == 0.0);
  const Eigen::MatrixXd u = coupling_matrix(grid, Parameters::Constant(24, -0.2));
  CHECK(u.isApprox(u.transpose()));
  CHECK(u.diagonal().isZero());
  CHECK(u.sum() == doctest::Approx(0.2 * 48));
  const double norm = spectral_norm(u);
  CHECK(norm <= 0.8);
  // grid = path ⊕ path, and the 4-node path has top eigenvalue 2 cos(π/5)
  CHECK(norm == doctest::Approx(0.2 * 4.0 * std::cos(M_PI / 5.0)).epsilon(1e-12));
}

TEST_CASE("spectral projection basics") {
  const IsingModel edge{GraphTopology(2, {{0, 1}}), true};
  Parameters theta(3);
  theta << -0.9, 2.0, -1.0;
  const Parameters p = project_spectral(edge, theta, SpectralSet{0.5});
  CHECK(p[0] == doctest::Approx(-0.5).epsilon(1e-9));
  CHECK(p.tail(2) == theta.tail(2));

  const IsingModel m{GraphTopology::grid(3, 3), false};
  const Parameters feasible = random_theta(m, 0.05, 1);
  CHECK(project_spectral(m, feasible, SpectralSet{0.4}) == feasible);
  CHECK(project(m, feasible, SpectralSet{0.4}) == feasible);

  const Parameters big = random_theta(m, 1.0, 2);
  const Parameters q = project_spectral(m, big, SpectralSet{0.4});
  CHECK(project(m, big, SpectralSet{0.4}) == q);
  CHECK(spectral_norm(coupling_matrix(m, q)) <= 0.4 + 1e-12);
  for (Eigen::Index i = 0; i < q.size(); ++i) {
    CHECK(q[i] * big[i] >= 0.0);
    CHECK(std::abs(q[i]) <= std::abs(big[i]) + 1e-12);
  }
  CHECK_THROWS_AS(project_spectral(m, big, SpectralSet{1.0}), InvalidInput);
  CHECK_THROWS_AS(project_spectral(m, big, SpectralSet{0.4, 0.0}), InvalidInput);
  CHECK_THROWS_AS(project_spectral(m, big, SpectralSet{0.4, 1e-14, 2}), ConvergenceError);
}

TEST_CASE("spectral projection is feasible, idempotent and beats naive rescaling") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 30; ++trial) {
    const IsingModel m = random_small_model(rng);
    const Parameters theta = random_theta(m, 1.2, 100 + std::uint64_t(trial));
    const SpectralSet set{0.3 + 0.05 * (trial % 10)};
    const Parameters p = project_spectral(m, theta, set);
    CHECK(spectral_norm(coupling_matrix(m, p)) <= set.c + 1e-6);
    CHECK(is_feasible(m, p, set, 1e-6));
    CHECK((project_spectral(m, p, set) - p).norm() < 1e-6);
    const double norm = spectral_norm(coupling_matrix(m, theta));
    Parameters scaled = theta;
    scaled.head(m.num_edges()) *= set.c / norm;
    CHECK((p - theta).norm() <= (scaled - theta).norm() + 1e-9);
  }
}

TEST_CASE("spectral projection agrees with an interior-point oracle") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const IsingModel m = random_small_model(rng);
    const Parameters theta = random_theta(m, 1.0, 500 + std::uint64_t(trial));
    const double c = 0.4;
    const Parameters p = project_spectral(m, theta, SpectralSet{c, 1e-10});
    const Eigen::VectorXd w = theta.head(m.num_edges()).cwiseAbs();
    const auto ref = oracle::spectral_projection_barrier(m, w, c);
    const double mine = 0.5 * (p.head(m.num_edges()).cwiseAbs() - w).squaredNorm();
    CHECK(mine <= ref.objective * (1.0 + 1e-6) + 1e-12);
    CHECK(mine >= ref.objective * (1.0 - 1e-4));
    CHECK((p.head(m.num_edges()).cwiseAbs() - ref.magnitudes).norm() < 1e-3);
  }
}

TEST_CASE("spectral projection distance is no worse than the subgradient oracle") {
  const IsingModel m{GraphTopology::grid(3, 3), false};
  for (std::uint64_t seed : {7u, 8u}) {
    const Parameters theta = random_theta(m, 1.0, seed);
    const Parameters p = project_spectral(m, theta, SpectralSet{0.4});
    const auto ref = oracle::spectral_projection_subgradient(m, theta.cwiseAbs(), 0.4, 50000);
    CHECK((p - theta).norm() <= std::sqrt(2.0 * ref.objective) + 1e-6 + 1e-4);
  }
}
