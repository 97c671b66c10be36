#include "fastmix/learner.hpp"

#include "fastmix/numeric.hpp"

#include <algorithm>
#include <cmath>

namespace fastmix {

std::string to_string(Mode mode) {
  return mode == Mode::convex ? "convex" : "strongly-convex";
}

Mode parse_mode(std::string_view text) {
  if (text == "convex") return Mode::convex;
  if (text == "strongly-convex" || text == "strongly_convex") return Mode::strongly_convex;
  throw InvalidInput("unknown mode '" + std::string(text) + "'");
}

void validate(const Betas& betas) {
  if (!(betas.b1 > 0.0 && betas.b2 > 0.0 && betas.b3 > 0.0))
    throw InvalidInput("beta weights must be positive");
  if (std::abs(betas.b1 + betas.b2 + betas.b3 - 1.0) > 1e-12)
    throw InvalidInput("beta weights must sum to 1");
}

ProblemConstants derive_constants(Mode mode, const ModelQuantities& q) {
  if (!(q.lipschitz > 0.0 && q.r2 > 0.0 && q.big_c > 0.0 && q.big_d >= 0.0))
    throw InvalidInput("L, R2 and C must be positive and D nonnegative");
  if (!(q.alpha > 0.0 && q.alpha < 1.0)) throw InvalidInput("alpha must lie in (0,1)");
  if (!(q.delta > 0.0 && q.delta <= 1.0)) throw InvalidInput("delta must lie in (0,1]");
  if (q.lambda < 0.0) throw InvalidInput("lambda must be nonnegative");

  ProblemConstants k;
  k.mode = mode;
  k.big_d = q.big_d;
  k.r2 = q.r2;
  k.lambda = q.lambda;
  k.lipschitz = q.lipschitz;
  k.big_c = q.big_c;
  k.alpha = q.alpha;
  k.delta = q.delta;
  if (mode == Mode::convex) {
    k.a = q.lipschitz * q.big_d / (4.0 * q.r2) + std::log(1.0 / q.delta);
    k.b = 1.0;
    k.c = q.big_c;
  } else {
    if (!(q.lambda > 0.0))
      throw ModeError("strongly convex mode needs lambda > 0; use the convex planner for lambda = 0");
    if (!(q.lambda < q.lipschitz)) throw InvalidInput("strongly convex mode needs lambda < L");
    k.gamma = 1.0 - q.lambda / q.lipschitz;
    k.a = q.big_d;
    k.b = (q.lipschitz / q.lambda) * std::sqrt(q.r2 / 2.0);
    k.c = 2.0 * q.lipschitz * q.r2 * q.big_c / q.lambda;
  }
  return k;
}

double convex_schedule_epsilon(double epsilon_f, double lipschitz, double r2) {
  return epsilon_f * lipschitz / (8.0 * r2 * r2);
}

Schedule explicit_schedule(std::int64_t big_k, std::int64_t big_m, std::int64_t v, Mode mode) {
  if (big_k < 1 || big_m < 1) throw InvalidInput("K and M must be at least 1");
  if (v < 0) throw InvalidInput("v must be nonnegative");
  Schedule s;
  s.big_k = big_k;
  s.big_m = big_m;
  s.v = v;
  s.mode = mode;
  s.raw_k = double(big_k);
  s.raw_m = double(big_m);
  s.raw_v = double(v);
  return s;
}

Schedule plan_convex(const ProblemConstants& consts, double epsilon, const Betas& betas) {
  validate(betas);
  if (!(epsilon > 0.0)) throw InvalidInput("epsilon must be positive");
  if (!(consts.a > 0.0 && consts.b > 0.0 && consts.c > 0.0))
    throw InvalidInput("convex planner needs a, b, c > 0");
  if (!(consts.alpha > 0.0 && consts.alpha < 1.0)) throw InvalidInput("alpha must lie in (0,1)");

  const auto [b1, b2, b3] = betas;
  Schedule s;
  s.mode = Mode::convex;
  s.betas = betas;
  s.epsilon = epsilon;
  s.delta = consts.delta;
  s.guaranteed_epsilon = epsilon;
  s.constants = consts;
  s.raw_k = consts.a * consts.a / (b1 * b1 * epsilon);
  s.raw_m = std::pow(consts.a * consts.b / (b1 * b2 * epsilon), 2);
  s.raw_v = std::log(consts.a * consts.c / (b1 * b3 * epsilon)) / (-std::log(consts.alpha));

  s.big_k = std::max<std::int64_t>(1, ceil_count(s.raw_k));
  s.big_m = std::max<std::int64_t>(1, ceil_count(s.raw_m));
  s.v = std::max<std::int64_t>(1, ceil_count(s.raw_v));
  if (consts.delta > 0.0 && consts.delta < 1.0)
    s.big_m = std::max(s.big_m, ceil_count(3.0 * double(s.big_k) / std::log(1.0 / consts.delta)));
  return s;
}

Schedule plan_strongly_convex(const ProblemConstants& consts, double epsilon, double delta,
                              const Betas& betas) {
  if (!(betas.b1 > 0.0 && betas.b2 > 0.0 && betas.b3 > 0.0))
    throw InvalidInput("beta weights must be positive");
  if (!(consts.lambda > 0.0))
    throw ModeError("strongly convex planning needs lambda > 0; use plan_convex for lambda = 0");
  if (!(epsilon > 0.0)) throw InvalidInput("epsilon must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidInput("delta must lie in (0,1)");
  if (!(consts.alpha > 0.0 && consts.alpha < 1.0)) throw InvalidInput("alpha must lie in (0,1)");

  const auto [b1, b2, b3] = betas;
  const double ratio = consts.lipschitz / consts.lambda;
  Schedule s;
  s.mode = Mode::strongly_convex;
  s.betas = betas;
  s.epsilon = epsilon;
  s.delta = delta;
  s.guaranteed_epsilon = betas.sum() * epsilon;
  s.constants = consts;
  s.constants.delta = delta;

  s.raw_k = ratio * std::log(consts.big_d / (b1 * epsilon));
  s.big_k = std::max<std::int64_t>(1, ceil_count(s.raw_k));

  const double concentration = 1.0 + std::sqrt(2.0 * std::log(double(s.big_k) / delta));
  s.raw_m = ratio * ratio * consts.r2 / (2.0 * epsilon * epsilon * b2 * b2) * concentration *
            concentration;
  s.big_m = std::max<std::int64_t>(1, ceil_count(s.raw_m));

  s.raw_v = std::log(2.0 * consts.lipschitz * consts.r2 * consts.big_c / (b3 * epsilon * consts.lambda)) /
            (1.0 - consts.alpha);
  s.v = std::max<std::int64_t>(1, ceil_count(s.raw_v));
  return s;
}

double work_lower_bound_convex(double a, double b, double c, double alpha, double epsilon) {
  if (!(a > 0.0 && b > 0.0 && c > 0.0 && epsilon > 0.0))
    throw InvalidInput("lower bound needs a, b, c, epsilon > 0");
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidInput("alpha must lie in (0,1)");
  return std::pow(a, 4) * b * b / std::pow(epsilon, 3) * std::log(a * c / epsilon) /
         (-std::log(alpha));
}

double work_lower_bound_strongly_convex(double a, double b, double c, double gamma,
                                        double alpha, double epsilon, double delta) {
  if (!(a > 0.0 && b > 0.0 && c > 0.0 && epsilon > 0.0 && delta > 0.0))
    throw DomainError("lower bound needs a, b, c, epsilon, delta > 0");
  if (!(gamma > 0.0 && gamma < 1.0) || !(alpha > 0.0 && alpha < 1.0))
    throw DomainError("lower bound needs gamma and alpha in (0,1)");
  const double log_a = std::log(a / epsilon);
  const double log_c = std::log(c / epsilon);
  if (log_a <= 0.0 || log_c <= 0.0) return 0.0;
  const double outer = std::log(log_a / (delta * -std::log(gamma)));
  if (outer <= 0.0) return 0.0;
  return b * b / (epsilon * epsilon) * log_a * log_c / (std::log(gamma) * std::log(alpha)) * outer;
}

StatVector batch_mean_stats(const IsingModel& model, const std::vector<SpinConfiguration>& batch) {
  if (batch.empty()) throw InvalidInput("batch must be nonempty");
  StatVector mean = StatVector::Zero(model.num_stats());
  for (const auto& x : batch) mean += sufficient_stats(model, x);
  return mean / double(batch.size());
}

StatVector approximate_gradient(const IsingModel& model,
                                const std::vector<SpinConfiguration>& batch,
                                const StatVector& tbar, double lambda, const Parameters& theta) {
  detail::check_parameters(model, theta);
  if (tbar.size() != model.num_stats()) throw InvalidInput("mean statistic has wrong length");
  return batch_mean_stats(model, batch) - tbar + lambda * theta;
}

Parameters pgd_step(const IsingModel& model, const Parameters& theta, const StatVector& gradient,
                    double lipschitz, const ConstraintSet& set) {
  if (!(lipschitz > 0.0)) throw InvalidInput("step constant L must be positive");
  if (gradient.size() != theta.size()) throw InvalidInput("gradient has wrong length");
  return project(model, theta - gradient / lipschitz, set);
}

TrainingTrace train(const IsingModel& model, const Dataset& data, const ConstraintSet& set,
                    const Schedule& schedule, double lambda, std::uint64_t seed,
                    const TrainOptions& options) {
  validate(set);
  if (lambda < 0.0) throw InvalidInput("lambda must be nonnegative");
  if (schedule.big_k < 1 || schedule.big_m < 1 || schedule.v < 0)
    throw InvalidInput("schedule needs K >= 1, M >= 1, v >= 0");
  if (options.reference && options.reference->size() != model.num_stats())
    throw InvalidInput("reference optimum has wrong length");

  const double lipschitz = options.lipschitz.value_or(lipschitz_constant(stat_norm_bound(model), lambda));
  if (!(lipschitz > 0.0)) throw InvalidInput("L must be positive");
  const bool oracle = options.instrument && model.num_nodes() <= kEnumerationLimit;
  const StatVector& tbar = data.empirical_mean();
  if (options.chain_oracle && model.num_nodes() > kChainOracleLimit)
    throw CapacityError("chain oracle needs at most " + std::to_string(kChainOracleLimit) + " nodes");

  ChainConfig chain;
  chain.num_steps = schedule.v;
  chain.master_seed = seed;
  if (options.init == InitKind::empirical) chain.init = EmpiricalInit{data.examples()};

  TrainingTrace trace;
  trace.master_seed = seed;
  trace.schedule = schedule;
  trace.lambda = lambda;
  trace.lipschitz = lipschitz;
  trace.constraint = describe(set);
  trace.chain_length = schedule.v;
  trace.records.reserve(static_cast<std::size_t>(schedule.big_k));
  Eigen::VectorXd start;
  if (options.chain_oracle) start = initial_distribution(model, chain.init);

  Parameters theta = Parameters::Zero(model.num_stats());
  Parameters sum = Parameters::Zero(model.num_stats());
  for (std::int64_t k = 1; k <= schedule.big_k; ++k) {
    IterationRecord rec;
    rec.k = k;

    std::optional<StatVector> exact_mean;
    if (oracle || options.gradient == GradientSource::exact)
      exact_mean = exact_mean_stats(model, theta);

    if (options.gradient == GradientSource::exact) {
      rec.sample_mean = *exact_mean;
    } else {
      const auto batch = draw_batch(model, theta, schedule.big_m, chain,
                                    static_cast<std::uint64_t>(k), options.threads);
      rec.sample_mean = batch_mean_stats(model, batch);
    }
    rec.gradient_estimate = rec.sample_mean - tbar + lambda * theta;
    if (!rec.gradient_estimate.allFinite()) throw NumericError("non-finite gradient estimate", k);
    if (oracle) rec.gradient_error = (rec.sample_mean - *exact_mean).norm();
    if (options.chain_oracle && options.gradient == GradientSource::sampled) {
      const Eigen::VectorXd q = chain_distribution(model, theta, start, schedule.v);
      StatVector chain_mean = StatVector::Zero(model.num_stats());
      for (Eigen::Index s = 0; s < q.size(); ++s)
        detail::add_state_stats(model, std::uint64_t(s), q[s], chain_mean);
      rec.chain_error = (rec.sample_mean - chain_mean).norm();
    }

    theta = pgd_step(model, theta, rec.gradient_estimate, lipschitz, set);
    if (!theta.allFinite()) throw NumericError("non-finite parameters", k);
    rec.theta = theta;
    sum += theta;

    if (oracle) rec.objective = negative_log_likelihood(model, theta, tbar, lambda);
    if (options.reference) rec.distance = (theta - *options.reference).norm();
    trace.records.push_back(std::move(rec));
  }
  trace.final_iterate = theta;
  trace.averaged_iterate = sum / double(schedule.big_k);
  return trace;
}

}  // namespace fastmix
