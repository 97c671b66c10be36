#pragma once

#include "fastmix/model.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace fastmix {

// One Markov transition is one random-scan single-site update: pick a site
// uniformly, then resample it from its conditional. Chain lengths v and the
// mixing bounds below are all counted in these units.

struct UniformInit {};
struct EmpiricalInit {
  std::vector<SpinConfiguration> pool;
};
struct FixedInit {
  SpinConfiguration state;
};
using ChainInit = std::variant<UniformInit, EmpiricalInit, FixedInit>;

struct ChainConfig {
  std::int64_t num_steps = 0;
  ChainInit init = UniformInit{};
  std::uint64_t master_seed = 0;
};

/// Identifies one chain inside a run: gradient iteration k and chain index i.
struct ChainStream {
  std::uint64_t iteration = 0;
  std::uint64_t chain = 0;
};

/// Seed of the chain (master, k, i); a pure function of its inputs so batches
/// do not depend on how chains are scheduled.
std::uint64_t chain_seed(std::uint64_t master_seed, ChainStream stream);

/// P(x_site = +1 | rest) = σ(2(θ_site + Σ_{j~site} θ_{site,j} x_j)).
double conditional_plus_probability(const IsingModel& model, const Parameters& theta,
                                    const SpinConfiguration& x, int site);

/// Heat-bath update of one site driven by the uniform variate u ∈ [0,1).
SpinConfiguration gibbs_site_update(const IsingModel& model, const Parameters& theta,
                                    SpinConfiguration x, int site, double u);

SpinConfiguration run_chain(const IsingModel& model, const Parameters& theta,
                            const ChainConfig& cfg, ChainStream stream = {});

/// M independent chains for gradient iteration `iteration`; chain i uses the
/// stream (iteration, i). Output is identical for any thread count.
std::vector<SpinConfiguration> draw_batch(const IsingModel& model, const Parameters& theta,
                                          std::int64_t num_samples, const ChainConfig& cfg,
                                          std::uint64_t iteration = 0, unsigned threads = 1);

/// Geometric-decay guarantee ‖M^v q - p‖_TV <= C α^v over a constraint set.
class MixingCertificate {
 public:
  MixingCertificate(double big_c, double alpha, std::string constraint = {});

  double big_c() const noexcept { return big_c_; }
  double alpha() const noexcept { return alpha_; }
  const std::string& constraint() const noexcept { return constraint_; }

  double bound(std::int64_t v) const { return big_c_ * std::pow(alpha_, static_cast<double>(v)); }

 private:
  double big_c_;
  double alpha_;
  std::string constraint_;
};

/// How C is chosen for the Ising bounds. `conversion` is exp(a/b) = N from the
/// τ-to-(C, α) rule; `log_nodes` is C = ln N, the value quoted for the 4x4
/// worked example.
enum class CConvention { conversion, log_nodes };

/// ⌈N ln(N/ε) / (1 - Δ tanh β)⌉ for random-scan Gibbs with |θ_ij| <= β.
std::int64_t tau_bound_gibbs(int num_nodes, int max_degree, double beta, double epsilon);

/// ⌈N ln(N/ε) / (1 - ‖R‖)⌉ for the coupling-matrix norm condition.
std::int64_t tau_bound_spectral(double norm_of_r, int num_nodes, double epsilon);

/// From τ(ε) <= ⌈a + b ln(1/ε)⌉: C = exp(a/b), α = exp(-1/b).
MixingCertificate certificate_from_tau(double a, double b, std::string constraint = {});

MixingCertificate gibbs_certificate(int num_nodes, int max_degree, double beta,
                                    CConvention convention = CConvention::conversion);
MixingCertificate spectral_certificate(int num_nodes, double c,
                                       CConvention convention = CConvention::conversion);

/// Row-stochastic kernel of one random-scan update over all 2^N states.
Eigen::MatrixXd exact_transition_matrix(const IsingModel& model, const Parameters& theta);

/// q ↦ q M_θ for a distribution over enumerated states, without forming M_θ.
Eigen::VectorXd apply_transition(const IsingModel& model, const Parameters& theta,
                                 const Eigen::VectorXd& distribution);

/// Law of a chain's state after `steps` updates from `initial`.
Eigen::VectorXd chain_distribution(const IsingModel& model, const Parameters& theta,
                                   Eigen::VectorXd initial, std::int64_t steps);

/// Exact law of the chain's starting state.
Eigen::VectorXd initial_distribution(const IsingModel& model, const ChainInit& init);

}  // namespace fastmix
