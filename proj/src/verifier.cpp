#include "fastmix/verifier.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

namespace fastmix {

void BoundReport::record(std::string label, double observed, double bound, double tolerance) {
  const bool bad = !(observed <= bound + tolerance);
  ++instances;
  if (bad) ++violations;
  max_slack = std::min(max_slack, bound - observed);
  details.push_back({std::move(label), observed, bound, bad});
}

std::int64_t allowed_failures(std::int64_t runs, double delta) {
  if (runs < 1) return 0;
  if (!(delta >= 0.0 && delta <= 1.0)) throw InvalidInput("delta must lie in [0,1]");
  const double n = double(runs);
  const double frac = delta + 3.0 * std::sqrt(delta * (1.0 - delta) / n);
  return static_cast<std::int64_t>(std::floor(n * frac + 1e-9));
}

double tv_distance(const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
  if (p.size() != q.size()) throw InvalidInput("distributions have different support sizes");
  if (std::abs(p.sum() - 1.0) > 1e-9 || std::abs(q.sum() - 1.0) > 1e-9)
    throw InvalidInput("distributions must sum to 1");
  return 0.5 * (p - q).cwiseAbs().sum();
}

Parameters exact_optimum(const IsingModel& model, const StatVector& tbar, const ConstraintSet& set,
                         double lambda, double tol, const OptimumOptions& options) {
  detail::check_enumerable(model, kEnumerationLimit, "exact_optimum");
  if (!(lambda >= 0.0)) throw InvalidInput("lambda must be nonnegative");
  if (!(tol > 0.0)) throw InvalidInput("tolerance must be positive");
  const double lipschitz =
      options.lipschitz.value_or(lipschitz_constant(stat_norm_bound(model), lambda));

  Parameters theta = Parameters::Zero(model.num_stats());
  double step = 0.0;
  for (std::int64_t it = 0; it < options.max_iterations; ++it) {
    const Parameters next =
        pgd_step(model, theta, exact_gradient(model, theta, tbar, lambda), lipschitz, set);
    step = (next - theta).norm();
    theta = next;
    if (step < tol) return theta;
  }
  throw ConvergenceError("exact optimum did not converge in " +
                             std::to_string(options.max_iterations) + " iterations",
                         step);
}

Parameters exact_optimum(const IsingModel& model, const Dataset& data, const ConstraintSet& set,
                         double lambda, double tol, const OptimumOptions& options) {
  return exact_optimum(model, data.empirical_mean(), set, lambda, tol, options);
}

double hoeffding_radius(double c, std::int64_t num_samples, double delta) {
  if (!(c > 0.0)) throw InvalidInput("c must be positive");
  if (num_samples < 1) throw InvalidInput("M must be at least 1");
  if (!(delta > 0.0 && delta <= 1.0)) throw InvalidInput("delta must lie in (0,1]");
  return std::sqrt(c / (4.0 * double(num_samples))) *
         (1.0 + std::sqrt(2.0 * std::log(1.0 / delta)));
}

ExactSampler::ExactSampler(const IsingModel& model, const Parameters& theta)
    : num_nodes_(model.num_nodes()) {
  const Eigen::VectorXd p = exact_distribution(model, theta);
  dist_ = std::discrete_distribution<std::uint64_t>(p.data(), p.data() + p.size());
  mean_ = exact_mean_stats(model, theta);
}

SpinConfiguration ExactSampler::draw(std::mt19937_64& rng) {
  return configuration_of_state(dist_(rng), num_nodes_);
}

BoundReport check_analytic_bounds(const IsingModel& model, int sample_count, double radius,
                                  std::uint64_t seed, double lambda, double tolerance) {
  detail::check_enumerable(model, kEnumerationLimit, "check_analytic_bounds");
  if (sample_count < 1 || !(radius > 0.0)) throw InvalidInput("need sample_count >= 1 and radius > 0");
  const double r2 = stat_norm_bound(model).r2;
  const double lipschitz = lipschitz_constant(stat_norm_bound(model), lambda);
  const StatVector zero = StatVector::Zero(model.num_stats());

  BoundReport report;
  report.name = "analytic";
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-radius, radius);
  auto draw = [&] {
    Parameters p(model.num_stats());
    for (Eigen::Index i = 0; i < p.size(); ++i) p[i] = unif(rng);
    return p;
  };
  for (int s = 0; s < sample_count; ++s) {
    const Parameters theta = draw();
    const Parameters phi = draw();
    const double dist = (theta - phi).norm();
    const double tv = tv_distance(exact_distribution(model, theta), exact_distribution(model, phi));
    const std::string tag = "#" + std::to_string(s);
    report.record("lipschitz" + tag,
                  (exact_gradient(model, theta, zero, lambda) - exact_gradient(model, phi, zero, lambda)).norm(),
                  lipschitz * dist, tolerance);
    report.record("mean-vs-tv" + tag,
                  (exact_mean_stats(model, theta) - exact_mean_stats(model, phi)).norm(),
                  2.0 * r2 * tv, tolerance);
    report.record("log-partition" + tag,
                  std::abs(exact_log_partition(model, theta) - exact_log_partition(model, phi)),
                  r2 * dist, tolerance);
    report.record("tv-vs-parameter" + tag, tv, 2.0 * r2 * dist, tolerance);
  }
  return report;
}

std::vector<double> mixing_profile(const IsingModel& model, const Parameters& theta,
                                   std::int64_t v_max, double floor) {
  if (model.num_nodes() > kMixingCheckLimit)
    throw CapacityError("mixing check needs at most " + std::to_string(kMixingCheckLimit) + " nodes");
  if (v_max < 0) throw InvalidInput("v_max must be nonnegative");
  const Eigen::MatrixXd kernel = exact_transition_matrix(model, theta);
  const Eigen::RowVectorXd pi = exact_distribution(model, theta).transpose();
  Eigen::MatrixXd rows = Eigen::MatrixXd::Identity(kernel.rows(), kernel.cols());

  std::vector<double> d;
  d.reserve(static_cast<std::size_t>(v_max + 1));
  for (std::int64_t v = 0; v <= v_max; ++v) {
    const double worst = 0.5 * (rows.rowwise() - pi).cwiseAbs().rowwise().sum().maxCoeff();
    d.push_back(worst);
    if (worst < floor) {
      d.resize(static_cast<std::size_t>(v_max + 1), worst);
      break;
    }
    rows = rows * kernel;
  }
  return d;
}

BoundReport check_mixing_certificate(const IsingModel& model, const Parameters& theta,
                                     const MixingCertificate& cert, std::int64_t v_max,
                                     double tolerance) {
  BoundReport report;
  report.name = "mixing";
  const auto d = mixing_profile(model, theta, v_max);
  for (std::size_t v = 0; v < d.size(); ++v)
    report.record("v=" + std::to_string(v), d[v], cert.bound(std::int64_t(v)), tolerance);
  bool monotone = true;
  for (std::size_t v = 1; v < d.size(); ++v) monotone = monotone && d[v] <= d[v - 1] + tolerance;
  std::ostringstream os;
  os << "C=" << cert.big_c() << " alpha=" << cert.alpha() << " d(v) "
     << (monotone ? "nonincreasing" : "NOT nonincreasing");
  report.note = os.str();
  return report;
}

namespace {

double batch_deviation(const IsingModel& model, ExactSampler& sampler, std::int64_t num_samples,
                       std::mt19937_64& rng) {
  StatVector sum = StatVector::Zero(model.num_stats());
  for (std::int64_t i = 0; i < num_samples; ++i) sum += sufficient_stats(model, sampler.draw(rng));
  return (sum / double(num_samples) - sampler.mean()).norm();
}

}  // namespace

BoundReport check_estimation_moments(const IsingModel& model, const Parameters& theta,
                                     std::int64_t num_samples, int trials, std::uint64_t seed) {
  if (num_samples < 1 || trials < 2) throw InvalidInput("need M >= 1 and at least 2 trials");
  const double r2 = stat_norm_bound(model).r2;
  ExactSampler sampler(model, theta);
  std::mt19937_64 rng(seed);
  std::vector<double> z(static_cast<std::size_t>(trials));
  for (auto& zi : z) zi = batch_deviation(model, sampler, num_samples, rng);

  const double n = double(trials);
  double mean = 0.0;
  for (double zi : z) mean += zi;
  mean /= n;
  double var = 0.0;
  for (double zi : z) var += (zi - mean) * (zi - mean);
  var /= (n - 1.0);
  double spread = 0.0;  // variance of the squared deviations, for the variance estimate's error
  for (double zi : z) spread += std::pow((zi - mean) * (zi - mean) - var, 2);
  spread /= (n - 1.0);

  const double se_mean = std::sqrt(var / n);
  const double se_var = std::sqrt(spread / n);
  BoundReport report;
  report.name = "estimation-moments";
  report.record("mean", mean - 3.0 * se_mean, 2.0 * r2 / std::sqrt(double(num_samples)));
  report.record("variance", var - 3.0 * se_var, 2.0 * r2 * r2 / double(num_samples));
  std::ostringstream os;
  os << "M=" << num_samples << " trials=" << trials << " E=" << mean << " Var=" << var;
  report.note = os.str();
  return report;
}

BoundReport check_hoeffding_coverage(const IsingModel& model, const Parameters& theta, double c,
                                     std::int64_t num_samples, double delta, int trials,
                                     std::uint64_t seed) {
  if (trials < 1) throw InvalidInput("need at least one trial");
  const double radius = hoeffding_radius(c, num_samples, delta);
  ExactSampler sampler(model, theta);
  std::mt19937_64 rng(seed);
  BoundReport report;
  report.name = "hoeffding-coverage";
  for (int t = 0; t < trials; ++t)
    report.record("trial " + std::to_string(t), batch_deviation(model, sampler, num_samples, rng),
                  radius);
  report.allowed_violations = allowed_failures(trials, delta);
  std::ostringstream os;
  os << "radius=" << radius << " failures=" << report.violations << " allowed="
     << report.allowed_violations;
  report.note = os.str();
  return report;
}

BoundReport check_sum_error_bound(const IsingModel& model, const std::vector<TrainingTrace>& runs,
                                  double delta) {
  if (!(delta > 0.0 && delta <= 1.0)) throw InvalidInput("delta must lie in (0,1]");
  const double r2 = stat_norm_bound(model).r2;
  const double log_term = std::log(1.0 / delta);
  BoundReport report;
  report.name = "sum-error";
  for (std::size_t r = 0; r < runs.size(); ++r) {
    const auto& trace = runs[r];
    const double big_k = double(trace.schedule.big_k);
    const double big_m = double(trace.schedule.big_m);
    if (delta < 1.0 && big_m < 3.0 * big_k / log_term)
      throw ConfigError("sum-error bound needs M >= 3K/ln(1/delta)");
    double sum = 0.0;
    for (const auto& rec : trace.records) {
      if (!rec.chain_error) throw InvalidInput("trace lacks chain-oracle errors");
      sum += *rec.chain_error;
    }
    report.record("run " + std::to_string(r), sum,
                  2.0 * r2 * (big_k / std::sqrt(big_m) + log_term));
  }
  report.allowed_violations = allowed_failures(std::int64_t(runs.size()), delta);
  return report;
}

double convergence_envelope(Mode mode, const ProblemConstants& consts, std::int64_t big_k,
                            std::int64_t big_m, std::int64_t v, double delta) {
  if (big_k < 1 || big_m < 1 || v < 0) throw InvalidInput("need K, M >= 1 and v >= 0");
  if (!(delta > 0.0 && delta <= 1.0)) throw InvalidInput("delta must lie in (0,1]");
  const double r2 = consts.r2;
  const double lip = consts.lipschitz;
  const double mix = consts.big_c * std::pow(consts.alpha, double(v));
  const double k = double(big_k);
  const double m = double(big_m);
  if (mode == Mode::convex) {
    const double inner = lip * consts.big_d / (4.0 * r2) + std::log(1.0 / delta) + k / std::sqrt(m) + k * mix;
    return 8.0 * r2 * r2 / (k * lip) * inner * inner;
  }
  if (!(consts.lambda > 0.0)) throw ModeError("strongly convex envelope needs lambda > 0");
  const double contraction = std::pow(1.0 - consts.lambda / lip, k) * consts.big_d;
  const double sampling = std::sqrt(r2 / (2.0 * m)) * (1.0 + std::sqrt(2.0 * std::log(k / delta)));
  return contraction + lip / consts.lambda * (sampling + 2.0 * r2 * mix);
}

double inexact_envelope_convex(double lipschitz, std::int64_t big_k, double initial_distance,
                               double error_sum) {
  const double inner = initial_distance + 2.0 * error_sum / lipschitz;
  return lipschitz / (2.0 * double(big_k)) * inner * inner;
}

double inexact_envelope_strongly_convex(double lipschitz, double lambda, std::int64_t big_k,
                                        double initial_distance, double max_error) {
  return std::pow(1.0 - lambda / lipschitz, double(big_k)) * initial_distance +
         max_error * lipschitz / lambda;
}

EnvelopeRig make_envelope_rig(const RigSpec& spec) {
  EnvelopeRig rig{.model = IsingModel{GraphTopology::grid(spec.rows, spec.cols)}};
  rig.data = random_configurations(rig.model.num_nodes(), spec.data_count, spec.data_seed);
  rig.tbar = Dataset(rig.model, rig.data).empirical_mean();
  rig.set = BoxSet{spec.beta};
  rig.lambda = spec.mode == Mode::convex ? 0.0 : spec.lambda;
  rig.lipschitz = spec.lipschitz;
  rig.delta = spec.delta;
  rig.certificate = gibbs_certificate(rig.model.num_nodes(), rig.model.graph.max_degree(), spec.beta);
  rig.optimum = exact_optimum(rig.model, rig.tbar, rig.set, rig.lambda, 1e-10,
                              OptimumOptions{.lipschitz = spec.lipschitz});

  ModelQuantities q;
  q.lipschitz = spec.lipschitz;
  q.lambda = rig.lambda;
  q.r2 = stat_norm_bound(rig.model).r2;
  q.big_c = rig.certificate.big_c();
  q.alpha = rig.certificate.alpha();
  q.big_d = rig.optimum.norm();
  q.delta = spec.delta;
  const ProblemConstants consts = derive_constants(spec.mode, q);
  rig.schedule =
      spec.mode == Mode::convex
          ? plan_convex(consts, convex_schedule_epsilon(spec.epsilon, q.lipschitz, q.r2), spec.betas)
          : plan_strongly_convex(consts, spec.epsilon, spec.delta, spec.betas);
  return rig;
}

CoverageResult check_envelope_coverage(const EnvelopeRig& rig, int runs, std::uint64_t seed) {
  if (runs < 1) throw InvalidInput("need at least one run");
  const Schedule& s = rig.schedule;
  const Mode mode = s.mode;
  const Dataset data(rig.model, rig.data);
  const double f_star = negative_log_likelihood(rig.model, rig.optimum, rig.tbar, rig.lambda);
  const double d0 = rig.optimum.norm();

  ProblemConstants consts = s.constants;
  consts.big_d = d0;
  const double envelope = convergence_envelope(mode, consts, s.big_k, s.big_m, s.v, rig.delta);

  CoverageResult out;
  out.envelope.name = mode == Mode::convex ? "envelope-convex" : "envelope-strongly-convex";
  out.inexact.name = mode == Mode::convex ? "inexact-pgd-convex" : "inexact-pgd-strongly-convex";

  TrainOptions opts;
  opts.lipschitz = rig.lipschitz;
  opts.reference = rig.optimum;
  for (int r = 0; r < runs; ++r) {
    const std::uint64_t run_seed = chain_seed(seed, ChainStream{std::uint64_t(r), 0xC0FFEEu});
    const TrainingTrace trace = train(rig.model, data, rig.set, s, rig.lambda, run_seed, opts);
    double sum = 0.0;
    double worst = 0.0;
    for (const auto& rec : trace.records) {
      sum += rec.gradient_error.value_or(0.0);
      worst = std::max(worst, rec.gradient_error.value_or(0.0));
    }
    const std::string label = "run " + std::to_string(r);
    if (mode == Mode::convex) {
      const double gap =
          negative_log_likelihood(rig.model, trace.averaged_iterate, rig.tbar, rig.lambda) - f_star;
      out.envelope.record(label, gap, envelope);
      out.inexact.record(label, gap, inexact_envelope_convex(rig.lipschitz, s.big_k, d0, sum), 1e-9);
    } else {
      const double dist = (trace.final_iterate - rig.optimum).norm();
      out.envelope.record(label, dist, envelope);
      out.inexact.record(label, dist,
                         inexact_envelope_strongly_convex(rig.lipschitz, rig.lambda, s.big_k, d0, worst),
                         1e-9);
    }
  }
  out.envelope.allowed_violations = allowed_failures(runs, rig.delta);
  std::ostringstream os;
  os << "K=" << s.big_k << " M=" << s.big_m << " v=" << s.v << " envelope=" << envelope;
  out.envelope.note = os.str();
  out.inexact.note = os.str();
  return out;
}

BoundReport check_optimum_fixed_point(const IsingModel& model, const StatVector& tbar,
                                      const ConstraintSet& set, double lambda, double lipschitz,
                                      double tol) {
  const Parameters opt = exact_optimum(model, tbar, set, lambda, tol, OptimumOptions{.lipschitz = lipschitz});
  const Parameters step = pgd_step(model, opt, exact_gradient(model, opt, tbar, lambda), lipschitz, set);
  BoundReport report;
  report.name = "optimum-fixed-point";
  report.record("residual", (step - opt).norm(), 10.0 * tol);
  return report;
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"analytic",  "mixing",   "concentration",
                                              "sum-error", "envelope", "optimum"};
  return names;
}

namespace {

BoundReport failed_report(const std::string& name, const std::string& what) {
  BoundReport r;
  r.name = name;
  r.instances = 1;
  r.violations = 1;
  r.note = "error: " + what;
  return r;
}

Parameters random_box_point(const IsingModel& model, double beta, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-beta, beta);
  Parameters p(model.num_stats());
  for (Eigen::Index i = 0; i < p.size(); ++i) p[i] = unif(rng);
  return p;
}

}  // namespace

std::vector<BoundReport> run_suite(const SuiteOptions& options) {
  const auto& names = suite_names();
  if (options.selector != "all" &&
      std::find(names.begin(), names.end(), options.selector) == names.end())
    throw InvalidInput("unknown suite '" + options.selector + "'");
  auto wanted = [&](const std::string& n) { return options.selector == "all" || options.selector == n; };
  std::optional<MixingCertificate> override_cert;
  if (options.certificate)
    override_cert.emplace(options.certificate->first, options.certificate->second, "configured");

  const std::uint64_t seed = options.seed;
  const IsingModel small{GraphTopology::grid(2, 2)};
  const IsingModel medium{GraphTopology::grid(3, 3)};
  std::vector<BoundReport> reports;
  auto guarded = [&](const std::string& name, const std::function<void()>& body) {
    try {
      body();
    } catch (const std::exception& e) {
      reports.push_back(failed_report(name, e.what()));
    }
  };

  if (wanted("analytic"))
    guarded("analytic", [&] { reports.push_back(check_analytic_bounds(medium, 200, 0.5, seed)); });
  if (wanted("mixing"))
    guarded("mixing", [&] {
      const double beta = 0.2;
      const auto cert = override_cert.value_or(
          gibbs_certificate(small.num_nodes(), small.graph.max_degree(), beta));
      reports.push_back(check_mixing_certificate(small, random_box_point(small, beta, seed), cert, 5000));
    });
  if (wanted("concentration"))
    guarded("concentration", [&] {
      const Parameters theta = random_box_point(small, 0.2, seed);
      const double r2 = stat_norm_bound(small).r2;
      reports.push_back(check_hoeffding_coverage(small, theta, 2.0 * r2, 100, 0.1, 300, seed));
      reports.push_back(check_estimation_moments(small, theta, 100, 2000, seed + 1));
    });
  if (wanted("sum-error"))
    guarded("sum-error", [&] {
      const Dataset data(small, random_configurations(small.num_nodes(), 5, seed));
      const Schedule s = explicit_schedule(10, 200, 20);
      TrainOptions opts;
      opts.lipschitz = 10.0;
      opts.chain_oracle = true;
      opts.instrument = false;
      std::vector<TrainingTrace> runs;
      for (int r = 0; r < 200; ++r)
        runs.push_back(train(small, data, BoxSet{0.2}, s, 1.0, seed * 1000 + std::uint64_t(r), opts));
      reports.push_back(check_sum_error_bound(small, runs, 0.2));
    });
  if (wanted("envelope"))
    guarded("envelope", [&] {
      RigSpec strong{.rows = 2, .cols = 2, .epsilon = 0.5, .data_seed = seed};
      auto a = check_envelope_coverage(make_envelope_rig(strong), 20, seed);
      RigSpec convex{.rows = 2, .cols = 2, .mode = Mode::convex, .epsilon = 1.0,
                     .betas = {0.66, 0.33, 0.01}, .data_seed = seed};
      auto b = check_envelope_coverage(make_envelope_rig(convex), 20, seed);
      for (auto* c : {&a, &b}) {
        reports.push_back(std::move(c->envelope));
        reports.push_back(std::move(c->inexact));
      }
    });
  if (wanted("optimum"))
    guarded("optimum", [&] {
      const auto data = random_configurations(medium.num_nodes(), 5, seed);
      reports.push_back(check_optimum_fixed_point(medium, Dataset(medium, data).empirical_mean(),
                                                  BoxSet{0.2}, 1.0, 10.0, 1e-8));
    });
  return reports;
}

}  // namespace fastmix
