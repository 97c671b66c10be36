#include "fastmix/model.hpp"

#include <cmath>
#include <random>

namespace fastmix {

Dataset::Dataset(const IsingModel& model, std::vector<SpinConfiguration> examples)
    : examples_(std::move(examples)) {
  if (examples_.empty()) throw InvalidInput("dataset must contain at least one configuration");
  empirical_mean_ = StatVector::Zero(model.num_stats());
  for (const auto& z : examples_) empirical_mean_ += sufficient_stats(model, z);
  empirical_mean_ /= static_cast<double>(examples_.size());
}

StatVector sufficient_stats(const IsingModel& model, const SpinConfiguration& x) {
  check_configuration(model, x);
  StatVector t(model.num_stats());
  const auto& edges = model.graph.edges();
  for (std::size_t k = 0; k < edges.size(); ++k)
    t[Eigen::Index(k)] = double(x[edges[k].i] * x[edges[k].j]);
  if (model.fields_enabled) t.tail(model.num_nodes()) = x.cast<double>();
  return t;
}

SpinConfiguration configuration_of_state(std::uint64_t state, int num_nodes) {
  SpinConfiguration x(num_nodes);
  for (int n = 0; n < num_nodes; ++n) x[n] = detail::spin(state, n);
  return x;
}

std::uint64_t state_of_configuration(const SpinConfiguration& x) {
  if (x.size() > 63) throw CapacityError("configuration too long to encode as a state index");
  std::uint64_t state = 0;
  for (Eigen::Index n = 0; n < x.size(); ++n)
    if (x[n] > 0) state |= std::uint64_t{1} << n;
  return state;
}

StatBounds stat_norm_bound(const IsingModel& model) {
  // Every statistic is ±1, so ‖t(x)‖₂ is the same for all x.
  return {std::sqrt(static_cast<double>(model.num_stats())), std::nullopt};
}

std::vector<SpinConfiguration> random_configurations(int num_nodes, int count, std::uint64_t seed) {
  if (num_nodes < 1 || count < 0) throw InvalidInput("need num_nodes >= 1 and count >= 0");
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(0.5);
  std::vector<SpinConfiguration> out(static_cast<std::size_t>(count));
  for (auto& x : out) {
    x.resize(num_nodes);
    for (int i = 0; i < num_nodes; ++i) x[i] = coin(rng) ? 1 : -1;
  }
  return out;
}

double lipschitz_constant(const StatBounds& bounds, double lambda) {
  if (!(lambda >= 0.0)) throw InvalidInput("regularisation λ must be nonnegative");
  return 4.0 * bounds.r2 * bounds.r2 + lambda;
}

namespace detail {

void check_enumerable(const IsingModel& model, int limit, const char* what) {
  if (model.num_nodes() > limit)
    throw CapacityError(std::string(what) + ": " + std::to_string(model.num_nodes()) +
                        " nodes exceeds the enumeration limit of " + std::to_string(limit));
}

}  // namespace detail

}  // namespace fastmix
