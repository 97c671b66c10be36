#include "fastmix/sampler.hpp"

#include "fastmix/numeric.hpp"

#include <algorithm>
#include <random>
#include <thread>

namespace fastmix {
namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr int kExactKernelLimit = 12;
constexpr int kPropagationLimit = 20;

// Local field θ_site + Σ_j θ_{site,j} x_j.
double local_field(const IsingModel& model, const Parameters& theta, const SpinConfiguration& x,
                   int site) {
  double h = model.fields_enabled ? theta[model.num_edges() + site] : 0.0;
  for (const Incidence& nb : model.graph.neighbors(site)) h += theta[nb.edge] * x[nb.neighbor];
  return h;
}

// Same as local_field for a state packed into the bits of an integer.
double local_field(const IsingModel& model, const Parameters& theta, std::uint64_t state,
                   int site) {
  double h = model.fields_enabled ? theta[model.num_edges() + site] : 0.0;
  for (const Incidence& nb : model.graph.neighbors(site))
    h += theta[nb.edge] * detail::spin(state, nb.neighbor);
  return h;
}

void check_site(const IsingModel& model, int site) {
  if (site < 0 || site >= model.num_nodes())
    throw InvalidInput("site " + std::to_string(site) + " out of range");
}

void validate(const IsingModel& model, const ChainConfig& cfg) {
  if (cfg.num_steps < 0) throw InvalidInput("chain length must be nonnegative");
  if (const auto* e = std::get_if<EmpiricalInit>(&cfg.init)) {
    if (e->pool.empty()) throw InvalidInput("empirical initialisation needs a nonempty dataset");
    for (const auto& x : e->pool) check_configuration(model, x);
  }
  if (const auto* f = std::get_if<FixedInit>(&cfg.init)) check_configuration(model, f->state);
}

SpinConfiguration draw_initial(const IsingModel& model, const ChainInit& init,
                               std::mt19937_64& rng) {
  struct Visitor {
    const IsingModel& model;
    std::mt19937_64& rng;
    SpinConfiguration operator()(const UniformInit&) const {
      std::bernoulli_distribution coin(0.5);
      SpinConfiguration x(model.num_nodes());
      for (Eigen::Index n = 0; n < x.size(); ++n) x[n] = coin(rng) ? 1 : -1;
      return x;
    }
    SpinConfiguration operator()(const EmpiricalInit& e) const {
      std::uniform_int_distribution<std::size_t> pick(0, e.pool.size() - 1);
      return e.pool[pick(rng)];
    }
    SpinConfiguration operator()(const FixedInit& f) const { return f.state; }
  };
  return std::visit(Visitor{model, rng}, init);
}

SpinConfiguration run_validated_chain(const IsingModel& model, const Parameters& theta,
                                      const ChainConfig& cfg, ChainStream stream) {
  std::mt19937_64 rng(chain_seed(cfg.master_seed, stream));
  SpinConfiguration x = draw_initial(model, cfg.init, rng);
  std::uniform_int_distribution<int> pick_site(0, model.num_nodes() - 1);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (std::int64_t step = 0; step < cfg.num_steps; ++step) {
    const int site = pick_site(rng);
    const double p_plus = logistic(2.0 * local_field(model, theta, x, site));
    x[site] = unif(rng) < p_plus ? 1 : -1;
  }
  return x;
}

}  // namespace

std::uint64_t chain_seed(std::uint64_t master_seed, ChainStream stream) {
  std::uint64_t h = splitmix64(master_seed);
  h = splitmix64(h ^ stream.iteration);
  h = splitmix64(h ^ (stream.chain + 0x632be59bd9b4e019ULL));
  return h;
}

double conditional_plus_probability(const IsingModel& model, const Parameters& theta,
                                    const SpinConfiguration& x, int site) {
  check_site(model, site);
  return logistic(2.0 * local_field(model, theta, x, site));
}

SpinConfiguration gibbs_site_update(const IsingModel& model, const Parameters& theta,
                                    SpinConfiguration x, int site, double u) {
  check_configuration(model, x);
  detail::check_parameters(model, theta);
  if (!(u >= 0.0 && u < 1.0)) throw InvalidInput("uniform variate must lie in [0,1)");
  x[site] = u < conditional_plus_probability(model, theta, x, site) ? 1 : -1;
  return x;
}

SpinConfiguration run_chain(const IsingModel& model, const Parameters& theta,
                            const ChainConfig& cfg, ChainStream stream) {
  detail::check_parameters(model, theta);
  validate(model, cfg);
  return run_validated_chain(model, theta, cfg, stream);
}

std::vector<SpinConfiguration> draw_batch(const IsingModel& model, const Parameters& theta,
                                          std::int64_t num_samples, const ChainConfig& cfg,
                                          std::uint64_t iteration, unsigned threads) {
  if (num_samples < 1) throw InvalidInput("batch size must be at least 1");
  detail::check_parameters(model, theta);
  validate(model, cfg);

  std::vector<SpinConfiguration> batch(static_cast<std::size_t>(num_samples));
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i)
      batch[i] = run_validated_chain(model, theta, cfg, {iteration, i});
  };

  const std::size_t workers = std::clamp<std::size_t>(threads, 1, batch.size());
  if (workers == 1) {
    work(0, batch.size());
    return batch;
  }
  std::vector<std::jthread> pool;
  const std::size_t chunk = (batch.size() + workers - 1) / workers;
  for (std::size_t begin = 0; begin < batch.size(); begin += chunk)
    pool.emplace_back(work, begin, std::min(batch.size(), begin + chunk));
  pool.clear();
  return batch;
}

MixingCertificate::MixingCertificate(double big_c, double alpha, std::string constraint)
    : big_c_(big_c), alpha_(alpha), constraint_(std::move(constraint)) {
  if (!(big_c > 0.0) || !std::isfinite(big_c)) throw InvalidInput("certificate needs C > 0");
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidInput("certificate needs 0 < alpha < 1");
}

std::int64_t tau_bound_gibbs(int num_nodes, int max_degree, double beta, double epsilon) {
  if (!(epsilon > 0.0)) throw InvalidInput("epsilon must be positive");
  const double contraction = max_degree * std::tanh(beta);
  if (!(contraction < 1.0))
    throw NoCertificateError("Delta * tanh(beta) = " + std::to_string(contraction) +
                             " >= 1, the Gibbs mixing bound is vacuous");
  const double n = num_nodes;
  return ceil_count(n * std::log(n / epsilon) / (1.0 - contraction));
}

std::int64_t tau_bound_spectral(double norm_of_r, int num_nodes, double epsilon) {
  if (!(epsilon > 0.0)) throw InvalidInput("epsilon must be positive");
  if (!(norm_of_r < 1.0))
    throw NoCertificateError("||R(theta)|| = " + std::to_string(norm_of_r) +
                             " >= 1, the spectral mixing bound is vacuous");
  const double n = num_nodes;
  return ceil_count(n * std::log(n / epsilon) / (1.0 - norm_of_r));
}

MixingCertificate certificate_from_tau(double a, double b, std::string constraint) {
  if (!(b > 0.0)) throw InvalidInput("tau bound slope b must be positive");
  return MixingCertificate(std::exp(a / b), std::exp(-1.0 / b), std::move(constraint));
}

namespace {

MixingCertificate nodes_certificate(int num_nodes, double gap, CConvention convention,
                                    std::string constraint) {
  // τ(ε) <= N ln(N/ε)/gap = a + b ln(1/ε) with a = N ln N / gap, b = N / gap.
  const double n = num_nodes;
  MixingCertificate cert = certificate_from_tau(n * std::log(n) / gap, n / gap, constraint);
  if (convention == CConvention::log_nodes)
    return MixingCertificate(std::log(n), cert.alpha(), std::move(constraint));
  return cert;
}

}  // namespace

MixingCertificate gibbs_certificate(int num_nodes, int max_degree, double beta,
                                    CConvention convention) {
  const double contraction = max_degree * std::tanh(beta);
  if (!(contraction < 1.0))
    throw NoCertificateError("Delta * tanh(beta) = " + std::to_string(contraction) +
                             " >= 1, the Gibbs mixing bound is vacuous");
  return nodes_certificate(num_nodes, 1.0 - contraction, convention,
                           "box |theta_ij| <= " + std::to_string(beta));
}

MixingCertificate spectral_certificate(int num_nodes, double c, CConvention convention) {
  if (!(c > 0.0 && c < 1.0)) throw NoCertificateError("spectral bound c must lie in (0,1)");
  return nodes_certificate(num_nodes, 1.0 - c, convention,
                           "spectral ||R(theta)||_2 <= " + std::to_string(c));
}

Eigen::MatrixXd exact_transition_matrix(const IsingModel& model, const Parameters& theta) {
  detail::check_enumerable(model, kExactKernelLimit, "exact_transition_matrix");
  detail::check_parameters(model, theta);
  const int n = model.num_nodes();
  const Eigen::Index states = Eigen::Index{1} << n;
  Eigen::MatrixXd kernel = Eigen::MatrixXd::Zero(states, states);
  for (Eigen::Index s = 0; s < states; ++s) {
    for (int site = 0; site < n; ++site) {
      const double p_plus = logistic(2.0 * local_field(model, theta, std::uint64_t(s), site));
      const Eigen::Index bit = Eigen::Index{1} << site;
      kernel(s, s | bit) += p_plus / n;
      kernel(s, s & ~bit) += (1.0 - p_plus) / n;
    }
  }
  return kernel;
}

Eigen::VectorXd apply_transition(const IsingModel& model, const Parameters& theta,
                                 const Eigen::VectorXd& distribution) {
  detail::check_enumerable(model, kPropagationLimit, "apply_transition");
  detail::check_parameters(model, theta);
  const int n = model.num_nodes();
  const Eigen::Index states = Eigen::Index{1} << n;
  if (distribution.size() != states) throw InvalidInput("distribution has wrong support size");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(states);
  for (Eigen::Index s = 0; s < states; ++s) {
    const double mass = distribution[s] / n;
    if (mass == 0.0) continue;
    for (int site = 0; site < n; ++site) {
      const double p_plus = logistic(2.0 * local_field(model, theta, std::uint64_t(s), site));
      const Eigen::Index bit = Eigen::Index{1} << site;
      out[s | bit] += mass * p_plus;
      out[s & ~bit] += mass * (1.0 - p_plus);
    }
  }
  return out;
}

Eigen::VectorXd chain_distribution(const IsingModel& model, const Parameters& theta,
                                   Eigen::VectorXd initial, std::int64_t steps) {
  if (steps < 0) throw InvalidInput("step count must be nonnegative");
  for (std::int64_t step = 0; step < steps; ++step)
    initial = apply_transition(model, theta, initial);
  return initial;
}

Eigen::VectorXd initial_distribution(const IsingModel& model, const ChainInit& init) {
  detail::check_enumerable(model, kPropagationLimit, "initial_distribution");
  const Eigen::Index states = Eigen::Index{1} << model.num_nodes();
  Eigen::VectorXd q = Eigen::VectorXd::Zero(states);
  if (std::holds_alternative<UniformInit>(init)) {
    q.setConstant(1.0 / double(states));
  } else if (const auto* e = std::get_if<EmpiricalInit>(&init)) {
    if (e->pool.empty()) throw InvalidInput("empirical initialisation needs a nonempty dataset");
    for (const auto& x : e->pool) {
      check_configuration(model, x);
      q[Eigen::Index(state_of_configuration(x))] += 1.0 / double(e->pool.size());
    }
  } else {
    const auto& x = std::get<FixedInit>(init).state;
    check_configuration(model, x);
    q[Eigen::Index(state_of_configuration(x))] = 1.0;
  }
  return q;
}

}  // namespace fastmix
