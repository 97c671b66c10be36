#pragma once

#include "fastmix/error.hpp"
#include "fastmix/topology.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace fastmix {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// θ, laid out like the statistics: couplings in edge order, then fields.
using Parameters = Eigen::VectorXd;
using StatVector = Eigen::VectorXd;

/// Largest N accepted by the brute-force inference routines.
inline constexpr int kEnumerationLimit = 25;

struct StatBounds {
  double r2 = 0.0;
  std::optional<double> ra_general;
};

/// Training set z_1..z_D with its cached mean statistic t̄.
class Dataset {
 public:
  Dataset(const IsingModel& model, std::vector<SpinConfiguration> examples);

  const std::vector<SpinConfiguration>& examples() const noexcept { return examples_; }
  const StatVector& empirical_mean() const noexcept { return empirical_mean_; }
  std::size_t size() const noexcept { return examples_.size(); }

 private:
  std::vector<SpinConfiguration> examples_;
  StatVector empirical_mean_;
};

StatVector sufficient_stats(const IsingModel& model, const SpinConfiguration& x);

/// Spin configuration encoded by the bits of `state` (bit i set means x_i = +1).
SpinConfiguration configuration_of_state(std::uint64_t state, int num_nodes);
std::uint64_t state_of_configuration(const SpinConfiguration& x);

StatBounds stat_norm_bound(const IsingModel& model);

/// `count` configurations with independent fair ±1 spins.
std::vector<SpinConfiguration> random_configurations(int num_nodes, int count, std::uint64_t seed);

/// Gradient Lipschitz constant 4 R_2^2 + λ of the regularised objective.
double lipschitz_constant(const StatBounds& bounds, double lambda);

namespace detail {

void check_enumerable(const IsingModel& model, int limit, const char* what);

template <typename Derived>
void check_parameters(const IsingModel& model, const Eigen::MatrixBase<Derived>& theta) {
  if (theta.size() != model.num_stats())
    throw InvalidInput("parameter vector has length " + std::to_string(theta.size()) +
                       ", model expects " + std::to_string(model.num_stats()));
  if (!theta.allFinite()) throw InvalidInput("parameter vector has non-finite entries");
}

inline int spin(std::uint64_t state, int node) { return ((state >> node) & 1U) ? 1 : -1; }

inline int edge_stat(std::uint64_t state, const Edge& e) {
  return (((state >> e.i) ^ (state >> e.j)) & 1U) ? -1 : 1;
}

/// θ·t(x) for the configuration encoded by `state`.
template <typename Scalar, typename Derived>
Scalar state_energy(const IsingModel& model, const Eigen::MatrixBase<Derived>& theta,
                    std::uint64_t state) {
  const auto& edges = model.graph.edges();
  Scalar energy(0);
  for (std::size_t k = 0; k < edges.size(); ++k)
    energy += Scalar(edge_stat(state, edges[k])) * Scalar(theta[Eigen::Index(k)]);
  if (model.fields_enabled) {
    const Eigen::Index offset = model.num_edges();
    for (int n = 0; n < model.num_nodes(); ++n)
      energy += Scalar(spin(state, n)) * Scalar(theta[offset + n]);
  }
  return energy;
}

template <typename Scalar>
void add_state_stats(const IsingModel& model, std::uint64_t state, Scalar weight,
                     Vector<Scalar>& acc) {
  const auto& edges = model.graph.edges();
  for (std::size_t k = 0; k < edges.size(); ++k)
    acc[Eigen::Index(k)] += weight * Scalar(edge_stat(state, edges[k]));
  if (model.fields_enabled) {
    const Eigen::Index offset = model.num_edges();
    for (int n = 0; n < model.num_nodes(); ++n) acc[offset + n] += weight * Scalar(spin(state, n));
  }
}

}  // namespace detail

/// log Σ_x exp(θ·t(x)) by exhaustive enumeration, accumulated as a streaming
/// max-shifted log-sum-exp in state order.
template <typename Derived>
typename Derived::Scalar exact_log_partition(const IsingModel& model,
                                             const Eigen::MatrixBase<Derived>& theta) {
  using Scalar = typename Derived::Scalar;
  using std::exp;
  using std::log;
  detail::check_enumerable(model, kEnumerationLimit, "exact_log_partition");
  detail::check_parameters(model, theta);

  const std::uint64_t states = std::uint64_t{1} << model.num_nodes();
  Scalar shift = -std::numeric_limits<Scalar>::infinity();
  Scalar sum(0);
  for (std::uint64_t s = 0; s < states; ++s) {
    const Scalar e = detail::state_energy<Scalar>(model, theta, s);
    if (e > shift) {
      sum = sum * exp(shift - e) + Scalar(1);
      shift = e;
    } else {
      sum += exp(e - shift);
    }
  }
  return shift + log(sum);
}

/// p_θ(x) for every state, indexed by state_of_configuration.
template <typename Derived>
Vector<typename Derived::Scalar> exact_distribution(const IsingModel& model,
                                                    const Eigen::MatrixBase<Derived>& theta) {
  using Scalar = typename Derived::Scalar;
  using std::exp;
  const Scalar log_z = exact_log_partition(model, theta);
  const std::uint64_t states = std::uint64_t{1} << model.num_nodes();
  Vector<Scalar> p(static_cast<Eigen::Index>(states));
  for (std::uint64_t s = 0; s < states; ++s)
    p[Eigen::Index(s)] = exp(detail::state_energy<Scalar>(model, theta, s) - log_z);
  return p;
}

/// E_{p_θ}[t(X)] by exhaustive enumeration.
template <typename Derived>
Vector<typename Derived::Scalar> exact_mean_stats(const IsingModel& model,
                                                  const Eigen::MatrixBase<Derived>& theta) {
  using Scalar = typename Derived::Scalar;
  using std::exp;
  const Scalar log_z = exact_log_partition(model, theta);
  const std::uint64_t states = std::uint64_t{1} << model.num_nodes();
  Vector<Scalar> mean = Vector<Scalar>::Zero(model.num_stats());
  for (std::uint64_t s = 0; s < states; ++s) {
    const Scalar w = exp(detail::state_energy<Scalar>(model, theta, s) - log_z);
    detail::add_state_stats(model, s, w, mean);
  }
  return mean;
}

/// Regularised negative log-likelihood f(θ) = A(θ) - θ·t̄ + (λ/2)‖θ‖².
template <typename Derived, typename DerivedMean>
typename Derived::Scalar negative_log_likelihood(const IsingModel& model,
                                                 const Eigen::MatrixBase<Derived>& theta,
                                                 const Eigen::MatrixBase<DerivedMean>& tbar,
                                                 double lambda) {
  using Scalar = typename Derived::Scalar;
  if (!(lambda >= 0.0)) throw InvalidInput("regularisation λ must be nonnegative");
  if (tbar.size() != model.num_stats()) throw InvalidInput("mean statistic has wrong length");
  return exact_log_partition(model, theta) - theta.dot(tbar.template cast<Scalar>()) +
         Scalar(0.5 * lambda) * theta.squaredNorm();
}

/// f'(θ) = E_{p_θ}[t] - t̄ + λθ.
template <typename Derived, typename DerivedMean>
Vector<typename Derived::Scalar> exact_gradient(const IsingModel& model,
                                                const Eigen::MatrixBase<Derived>& theta,
                                                const Eigen::MatrixBase<DerivedMean>& tbar,
                                                double lambda) {
  using Scalar = typename Derived::Scalar;
  if (!(lambda >= 0.0)) throw InvalidInput("regularisation λ must be nonnegative");
  if (tbar.size() != model.num_stats()) throw InvalidInput("mean statistic has wrong length");
  return exact_mean_stats(model, theta) - tbar.template cast<Scalar>() + Scalar(lambda) * theta;
}

template <typename Derived>
double negative_log_likelihood(const IsingModel& model, const Eigen::MatrixBase<Derived>& theta,
                               const Dataset& data, double lambda) {
  return negative_log_likelihood(model, theta, data.empirical_mean(), lambda);
}

template <typename Derived>
StatVector exact_gradient(const IsingModel& model, const Eigen::MatrixBase<Derived>& theta,
                          const Dataset& data, double lambda) {
  return exact_gradient(model, theta, data.empirical_mean(), lambda);
}

}  // namespace fastmix
