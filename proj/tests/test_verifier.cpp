#include "doctest.h"
#include "oracles.hpp"

#include "fastmix/verifier.hpp"

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

Eigen::MatrixXd stat_covariance(const IsingModel& m, const Parameters& theta) {
  const Eigen::VectorXd p = exact_distribution(m, theta);
  const Eigen::Index d = m.num_stats();
  Eigen::MatrixXd second = Eigen::MatrixXd::Zero(d, d);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
  for (Eigen::Index s = 0; s < p.size(); ++s) {
    const Eigen::VectorXd t = sufficient_stats(m, configuration_of_state(std::uint64_t(s), m.num_nodes()));
    mean += p[s] * t;
    second.selfadjointView<Eigen::Lower>().rankUpdate(t, p[s]);
  }
  second = second.selfadjointView<Eigen::Lower>();
  return second - mean * mean.transpose();
}

}  // namespace

TEST_CASE("total variation distance") {
  Eigen::VectorXd p = Eigen::VectorXd::Constant(4, 0.25);
  Eigen::VectorXd q = Eigen::VectorXd::Zero(4);
  q[0] = 1.0;
  CHECK(tv_distance(p, p) == 0.0);
  CHECK(tv_distance(p, q) == doctest::Approx(0.75));
  Eigen::VectorXd r = Eigen::VectorXd::Zero(4);
  r[3] = 1.0;
  CHECK(tv_distance(q, r) == 1.0);
  CHECK_THROWS_AS(tv_distance(p, Eigen::VectorXd::Constant(2, 0.5)), InvalidInput);
  CHECK_THROWS_AS(tv_distance(p, Eigen::VectorXd::Constant(4, 0.5)), InvalidInput);
}

TEST_CASE("allowed failures") {
  CHECK(allowed_failures(100, 0.2) == 32);
  CHECK(allowed_failures(300, 0.1) == 45);
  CHECK(allowed_failures(10, 0.0) == 0);
  CHECK(allowed_failures(10, 1.0) == 10);
}

TEST_CASE("exact optimum closed forms") {
  const IsingModel edge{GraphTopology(2, {{0, 1}}), false};
  StatVector tbar(1);
  tbar << std::tanh(0.3);
  const Parameters fit = exact_optimum(edge, tbar, BoxSet{1.0}, 0.0, 1e-12);
  CHECK(fit[0] == doctest::Approx(0.3).epsilon(1e-6));
  CHECK(std::abs(fit[0] - 0.3) < 1e-6);

  const Parameters ridge = exact_optimum(edge, tbar, BoxSet{1.0}, 1e6, 1e-14);
  CHECK(std::abs(ridge[0]) < 1e-6);
  CHECK(ridge[0] == doctest::Approx(std::tanh(0.3) / (1e6 + 1.0)).epsilon(1e-6));

  tbar << 1.0;
  const Parameters binding = exact_optimum(edge, tbar, BoxSet{0.2}, 0.0, 1e-12);
  CHECK(binding[0] == 0.2);
  // the gradient tanh(θ) - 1 is negative on the whole box, so the corner is optimal
  for (double t = -0.2; t <= 0.2; t += 0.05) CHECK(oracle::enumerate(edge, Parameters::Constant(1, t)).mean[0] - 1.0 < 0.0);

  CHECK_THROWS_AS(exact_optimum(edge, tbar, BoxSet{0.2}, -1.0, 1e-8), InvalidInput);
  CHECK_THROWS_AS(exact_optimum(edge, tbar, BoxSet{0.2}, 0.0, 0.0), InvalidInput);
  const IsingModel grid{GraphTopology::grid(3, 3), false};
  const Dataset data(grid, random_configurations(9, 4, 2));
  CHECK_THROWS_AS(exact_optimum(grid, data, BoxSet{2.0}, 0.0, 1e-14, OptimumOptions{.max_iterations = 3}),
                  ConvergenceError);
}

TEST_CASE("exact optimum on the worked example satisfies the optimality conditions") {
  const IsingModel m{GraphTopology::grid(4, 4), false};
  const Dataset data(m, random_configurations(16, 5, 6));
  const double lambda = 1.0;
  const Parameters opt = exact_optimum(m, data, BoxSet{0.2}, lambda, 1e-10, OptimumOptions{.lipschitz = 10.0});
  const StatVector g = exact_gradient(m, opt, data.empirical_mean(), lambda);
  // box KKT: interior coordinates have zero gradient, clipped ones push outward
  for (Eigen::Index i = 0; i < opt.size(); ++i) {
    if (std::abs(opt[i]) < 0.2 - 1e-9) CHECK(std::abs(g[i]) < 1e-8);
    else CHECK(g[i] * opt[i] <= 1e-8);
  }
  // objective is no larger than at nearby feasible points
  const double f_opt = negative_log_likelihood(m, opt, data.empirical_mean(), lambda);
  for (std::uint64_t s = 0; s < 5; ++s) {
    const Parameters other = project_box(m, opt + random_theta(m, 0.05, s), 0.2);
    CHECK(negative_log_likelihood(m, other, data.empirical_mean(), lambda) >= f_opt - 1e-12);
  }
  const auto report = check_optimum_fixed_point(m, data.empirical_mean(), BoxSet{0.2}, lambda, 10.0, 1e-8);
  CHECK(report.passed());
  CHECK(report.violations == 0);
}

TEST_CASE("a step constant of 10 dominates the curvature on the 4x4 box of radius 0.2") {
  const IsingModel m{GraphTopology::grid(4, 4), false};
  std::vector<Parameters> points{Parameters::Constant(24, 0.2), Parameters::Constant(24, -0.2),
                                 Parameters::Zero(24)};
  for (std::uint64_t s = 0; s < 4; ++s) points.push_back(random_theta(m, 1.0, s).cwiseSign() * 0.2);
  for (const auto& theta : points) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(stat_covariance(m, theta), Eigen::EigenvaluesOnly);
    CHECK(eig.eigenvalues().maxCoeff() + 1.0 < 10.0);
  }
}

TEST_CASE("hoeffding radius") {
  CHECK(hoeffding_radius(4.0, 100, 1.0) == doctest::Approx(std::sqrt(4.0 / 400.0)));
  CHECK(hoeffding_radius(4.0, 400, 0.1) == doctest::Approx(0.5 * hoeffding_radius(4.0, 100, 0.1)));
  CHECK(hoeffding_radius(2.0, 10, 0.05) ==
        doctest::Approx(std::sqrt(2.0 / 40.0) * (1.0 + std::sqrt(2.0 * std::log(20.0)))));
  CHECK_THROWS_AS(hoeffding_radius(0.0, 10, 0.1), InvalidInput);
  CHECK_THROWS_AS(hoeffding_radius(1.0, 0, 0.1), InvalidInput);
  CHECK_THROWS_AS(hoeffding_radius(1.0, 10, 0.0), InvalidInput);

  const IsingModel m{GraphTopology::grid(2, 2), false};
  const Parameters theta = random_theta(m, 0.2, 3);
  const auto cov = check_hoeffding_coverage(m, theta, 2.0 * stat_norm_bound(m).r2, 100, 0.1, 300, 5);
  CHECK(cov.instances == 300);
  CHECK(cov.passed());
}

TEST_CASE("exact sampler matches the enumerated law") {
  const IsingModel m{GraphTopology::grid(2, 2), true};
  const Parameters theta = random_theta(m, 0.5, 9);
  ExactSampler sampler(m, theta);
  const auto en = oracle::enumerate(m, theta);
  CHECK((sampler.mean() - en.mean).norm() < 1e-12);
  std::mt19937_64 rng(1);
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(16);
  const int n = 40000;
  for (int i = 0; i < n; ++i) counts[Eigen::Index(state_of_configuration(sampler.draw(rng)))] += 1.0;
  CHECK(tv_distance(counts / double(n), oracle::probabilities(en)) < 0.02);
}

TEST_CASE("analytic bounds hold") {
  const IsingModel m{GraphTopology::grid(3, 3), false};
  const auto r = check_analytic_bounds(m, 40, 0.5, 11);
  CHECK(r.instances == 160);
  CHECK(r.violations == 0);
  CHECK(r.max_slack >= 0.0);
  const auto far = check_analytic_bounds(m, 10, 5.0, 12);
  CHECK(far.violations == 0);
  for (const auto& d : far.details)
    if (d.label.rfind("tv-vs-parameter", 0) == 0) {
      CHECK(d.observed <= 1.0);
      CHECK(d.bound > 1.0);
    }
  const IsingModel fields{GraphTopology::grid(2, 3), true};
  CHECK(check_analytic_bounds(fields, 30, 1.0, 13, 0.7).violations == 0);
}

TEST_CASE("bound report bookkeeping") {
  BoundReport r;
  r.record("a", 1.0, 2.0);
  r.record("b", 2.0, 1.5);
  r.record("c", 1.0 + 1e-12, 1.0, 1e-10);
  CHECK(r.instances == 3);
  CHECK(r.violations == 1);
  CHECK(r.max_slack == doctest::Approx(-0.5));
  CHECK_FALSE(r.passed());
  r.allowed_violations = 1;
  CHECK(r.passed());
}

TEST_CASE("mixing profile and certificate") {
  const IsingModel m{GraphTopology::grid(2, 2), false};
  const Parameters theta = Parameters::Constant(4, 0.2);
  const auto d = mixing_profile(m, theta, 200);
  REQUIRE(d.size() == 201);
  CHECK(d[0] == doctest::Approx(1.0 - oracle::probabilities(oracle::enumerate(m, theta)).minCoeff()));
  for (std::size_t v = 1; v < d.size(); ++v) CHECK(d[v] <= d[v - 1] + 1e-15);
  const auto cert = gibbs_certificate(4, 2, 0.2);
  const auto report = check_mixing_certificate(m, theta, cert, 5000);
  CHECK(report.instances == 5001);
  CHECK(report.violations == 0);
  CHECK(report.note.find("nonincreasing") != std::string::npos);

  // a certificate that is far too optimistic is caught
  const auto bad = check_mixing_certificate(m, theta, MixingCertificate(1.0, 0.5), 100);
  CHECK(bad.violations > 0);
  CHECK_THROWS_AS(mixing_profile(IsingModel{GraphTopology::grid(3, 4), false}, Parameters::Zero(17), 5),
                  CapacityError);
}

TEST_CASE("estimation moments") {
  const IsingModel m{GraphTopology::grid(2, 2), false};
  const Parameters theta = random_theta(m, 0.2, 4);
  const auto r = check_estimation_moments(m, theta, 100, 2000, 3);
  CHECK(r.passed());
  CHECK(r.violations == 0);
  const auto one = check_estimation_moments(m, theta, 1, 500, 3);
  CHECK(one.passed());

  // quadrupling M roughly halves the mean deviation
  ExactSampler sampler(m, theta);
  std::mt19937_64 rng(77);
  auto mean_dev = [&](int big_m) {
    double total = 0.0;
    for (int t = 0; t < 1000; ++t) {
      StatVector s = StatVector::Zero(4);
      for (int i = 0; i < big_m; ++i) s += sufficient_stats(m, sampler.draw(rng)).cast<double>();
      total += (s / double(big_m) - sampler.mean()).norm();
    }
    return total / 1000.0;
  };
  const double ratio = mean_dev(25) / mean_dev(100);
  CHECK(ratio == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("sum of chain errors") {
  const IsingModel m{GraphTopology::grid(2, 2), false};
  const Dataset data(m, random_configurations(4, 5, 8));
  const Schedule s = explicit_schedule(10, 200, 10);
  TrainOptions opts;
  opts.lipschitz = 10.0;
  opts.chain_oracle = true;
  opts.instrument = false;
  std::vector<TrainingTrace> runs;
  for (std::uint64_t r = 0; r < 100; ++r) runs.push_back(train(m, data, BoxSet{0.2}, s, 1.0, 500 + r, opts));
  const auto report = check_sum_error_bound(m, runs, 0.2);
  CHECK(report.instances == 100);
  CHECK(report.passed());
  const auto loose = check_sum_error_bound(m, runs, 1.0);
  CHECK(loose.violations == 0);
  CHECK(loose.details[0].bound == doctest::Approx(2.0 * 2.0 * 10.0 / std::sqrt(200.0)));

  const std::vector<TrainingTrace> single{train(m, data, BoxSet{0.2}, explicit_schedule(1, 50, 10), 1.0, 3, opts)};
  CHECK(check_sum_error_bound(m, single, 0.5).instances == 1);

  std::vector<TrainingTrace> starved{train(m, data, BoxSet{0.2}, explicit_schedule(10, 5, 10), 1.0, 3, opts)};
  CHECK_THROWS_AS(check_sum_error_bound(m, starved, 0.2), ConfigError);
  opts.chain_oracle = false;
  std::vector<TrainingTrace> bare{train(m, data, BoxSet{0.2}, s, 1.0, 3, opts)};
  CHECK_THROWS_AS(check_sum_error_bound(m, bare, 0.2), InvalidInput);
}

TEST_CASE("convergence envelopes") {
  ProblemConstants k;
  k.r2 = 2.0;
  k.lipschitz = 10.0;
  k.lambda = 1.0;
  k.big_c = 4.0;
  k.alpha = 0.9;
  k.big_d = 1.0;
  const double base = convergence_envelope(Mode::strongly_convex, k, 20, 100, 50, 0.1);
  const double far = convergence_envelope(Mode::strongly_convex, k, 2000, 100000000, 5000, 0.1);
  CHECK(far < 0.01 * base);
  CHECK(base == doctest::Approx(std::pow(0.9, 20) +
                                10.0 * (std::sqrt(2.0 / 200.0) * (1.0 + std::sqrt(2.0 * std::log(200.0))) +
                                        4.0 * 4.0 * std::pow(0.9, 50))));

  k.lambda = 0.0;
  const double cvx = convergence_envelope(Mode::convex, k, 20, 100, 50, 0.1);
  const double inner = 10.0 / 8.0 + std::log(10.0) + 2.0 + 20.0 * 4.0 * std::pow(0.9, 50);
  CHECK(cvx == doctest::Approx(8.0 * 4.0 / 200.0 * inner * inner));
  CHECK(convergence_envelope(Mode::convex, k, 20, 400, 50, 0.1) < cvx);
  CHECK(convergence_envelope(Mode::convex, k, 20, 100, 80, 0.1) < cvx);
  CHECK_THROWS_AS(convergence_envelope(Mode::strongly_convex, k, 20, 100, 50, 0.1), ModeError);

  CHECK(inexact_envelope_convex(10.0, 5, 1.0, 2.0) == doctest::Approx(1.0 * 1.4 * 1.4));
  CHECK(inexact_envelope_strongly_convex(10.0, 1.0, 2, 1.0, 0.1) == doctest::Approx(0.81 + 1.0));
}

TEST_CASE("envelope coverage on small rigs") {
  const EnvelopeRig strong = make_envelope_rig(RigSpec{.rows = 2, .cols = 2, .epsilon = 1.0});
  CHECK(strong.schedule.mode == Mode::strongly_convex);
  CHECK(strong.optimum.size() == 4);
  const auto a = check_envelope_coverage(strong, 5, 1);
  CHECK(a.envelope.instances == 5);
  CHECK(a.envelope.passed());
  CHECK(a.inexact.violations == 0);

  const EnvelopeRig convex = make_envelope_rig(
      RigSpec{.rows = 2, .cols = 2, .mode = Mode::convex, .epsilon = 1.0, .betas = {0.66, 0.33, 0.01}});
  CHECK(convex.lambda == 0.0);
  const auto b = check_envelope_coverage(convex, 5, 2);
  CHECK(b.envelope.passed());
  CHECK(b.inexact.violations == 0);
}

TEST_CASE("default suite") {
  CHECK(suite_names().size() == 6);
  CHECK_THROWS_AS(run_suite(SuiteOptions{.selector = "nope"}), InvalidInput);
  const auto reports = run_suite(SuiteOptions{.selector = "mixing"});
  REQUIRE(reports.size() == 1);
  CHECK(reports[0].passed());
  const auto broken = run_suite(SuiteOptions{.selector = "mixing", .certificate = std::pair{1.0, 0.5}});
  REQUIRE(broken.size() == 1);
  CHECK_FALSE(broken[0].passed());
  CHECK_THROWS_AS(run_suite(SuiteOptions{.selector = "mixing", .certificate = std::pair{1.0, 1.5}}),
                  InvalidInput);
}
