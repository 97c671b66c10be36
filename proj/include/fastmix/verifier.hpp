#pragma once

#include "fastmix/learner.hpp"
#include "fastmix/model.hpp"
#include "fastmix/projection.hpp"
#include "fastmix/sampler.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace fastmix {

struct BoundInstance {
  std::string label;
  double observed = 0.0;
  double bound = 0.0;
  bool violated = false;
};

/// Outcome of checking one inequality over many instances.
struct BoundReport {
  std::string name;
  std::int64_t instances = 0;
  std::int64_t violations = 0;
  /// Violations tolerated for probabilistic statements (δ plus binomial slack).
  std::int64_t allowed_violations = 0;
  /// Smallest bound - observed over all instances.
  double max_slack = std::numeric_limits<double>::infinity();
  std::vector<BoundInstance> details;
  std::string note;

  /// Counts a violation when observed > bound + tolerance.
  void record(std::string label, double observed, double bound, double tolerance = 0.0);
  bool passed() const { return violations <= allowed_violations; }
};

/// floor(n (δ + 3√(δ(1-δ)/n))): failures allowed for a 1-δ statement over n runs.
std::int64_t allowed_failures(std::int64_t runs, double delta);

/// ½ Σ |p - q|.
double tv_distance(const Eigen::VectorXd& p, const Eigen::VectorXd& q);

struct OptimumOptions {
  /// Step 1/L; defaults to 4R₂² + λ.
  std::optional<double> lipschitz{};
  std::int64_t max_iterations = 200000;
};

/// argmin over the constraint set of f, by projected gradient descent with
/// exact gradients until ‖θ_k - θ_{k-1}‖ < tol.
Parameters exact_optimum(const IsingModel& model, const StatVector& tbar, const ConstraintSet& set,
                         double lambda, double tol, const OptimumOptions& options = {});
Parameters exact_optimum(const IsingModel& model, const Dataset& data, const ConstraintSet& set,
                         double lambda, double tol, const OptimumOptions& options = {});

/// √(c/(4M)) (1 + √(2 ln(1/δ))).
double hoeffding_radius(double c, std::int64_t num_samples, double delta);

/// I.i.d. draws from p_θ through its enumerated distribution.
class ExactSampler {
 public:
  ExactSampler(const IsingModel& model, const Parameters& theta);
  SpinConfiguration draw(std::mt19937_64& rng);
  const StatVector& mean() const noexcept { return mean_; }

 private:
  int num_nodes_;
  std::discrete_distribution<std::uint64_t> dist_;
  StatVector mean_;
};

/// On random pairs θ, φ with ‖·‖_∞ <= radius checks, with a = b = 2:
///   ‖f'(θ) - f'(φ)‖ <= L ‖θ - φ‖                (L = 4R₂² + λ)
///   ‖E_θ t - E_φ t‖ <= 2R₂ ‖p_θ - p_φ‖_TV
///   |A(θ) - A(φ)| <= R₂ ‖θ - φ‖
///   ‖p_θ - p_φ‖_TV <= 2R₂ ‖θ - φ‖
BoundReport check_analytic_bounds(const IsingModel& model, int sample_count, double radius,
                                  std::uint64_t seed, double lambda = 0.0,
                                  double tolerance = 1e-10);

/// d(v) = max over point-mass starts of ‖δ_x M^v - p_θ‖_TV for v = 0..v_max.
/// Once d drops below `floor` the remaining entries are left at that value
/// (d is nonincreasing), which avoids pushing rounding noise through.
std::vector<double> mixing_profile(const IsingModel& model, const Parameters& theta,
                                   std::int64_t v_max, double floor = 1e-13);

inline constexpr int kMixingCheckLimit = 10;

BoundReport check_mixing_certificate(const IsingModel& model, const Parameters& theta,
                                     const MixingCertificate& cert, std::int64_t v_max,
                                     double tolerance = 1e-12);

/// Monte-Carlo check of E‖mean - μ‖ <= 2R₂/√M and Var‖mean - μ‖ <= 2R₂²/M
/// with i.i.d. batches of size M; each estimate gets 3 standard errors slack.
BoundReport check_estimation_moments(const IsingModel& model, const Parameters& theta,
                                     std::int64_t num_samples, int trials, std::uint64_t seed);

/// Frequency with which ‖mean - μ‖ <= hoeffding_radius(c, M, δ) over i.i.d.
/// batches; passes when failures stay within δ plus 3σ binomial slack.
BoundReport check_hoeffding_coverage(const IsingModel& model, const Parameters& theta, double c,
                                     std::int64_t num_samples, double delta, int trials,
                                     std::uint64_t seed);

/// Σ_k ‖d_k‖ <= 2R₂(K/√M + ln(1/δ)) on each chain-oracle trace, with failure
/// fraction held to δ plus 3σ slack. Requires M >= 3K/ln(1/δ).
BoundReport check_sum_error_bound(const IsingModel& model, const std::vector<TrainingTrace>& runs,
                                  double delta);

/// Right-hand side of the high-probability convergence guarantee for the
/// mode, with consts.big_d standing in for ‖θ₀ - θ*‖.
///   convex:   (8R₂²/(KL)) (L D/(4R₂) + ln(1/δ) + K/√M + K C α^v)²
///   strongly: (1-λ/L)^K D + (L/λ)(√(R₂/(2M))(1 + √(2 ln(K/δ))) + 2R₂ C α^v)
double convergence_envelope(Mode mode, const ProblemConstants& consts, std::int64_t big_k,
                            std::int64_t big_m, std::int64_t v, double delta);

/// Deterministic inexact-PGD envelopes from measured gradient errors.
///   convex:   f(θ̄) - f(θ*) <= (L/(2K)) (‖θ₀ - θ*‖ + 2 Σ‖e_k‖/L)²
///   strongly: ‖θ_K - θ*‖ <= (1-λ/L)^K ‖θ₀ - θ*‖ + r L/λ,  r = max ‖e_k‖
double inexact_envelope_convex(double lipschitz, std::int64_t big_k, double initial_distance,
                               double error_sum);
double inexact_envelope_strongly_convex(double lipschitz, double lambda, std::int64_t big_k,
                                        double initial_distance, double max_error);

/// Everything a coverage experiment needs to know about one problem.
struct EnvelopeRig {
  IsingModel model;
  StatVector tbar{};
  std::vector<SpinConfiguration> data{};
  ConstraintSet set{};
  double lambda = 0.0;
  double lipschitz = 0.0;
  double delta = 0.2;
  Schedule schedule{};
  MixingCertificate certificate{1.0, 0.5};
  Parameters optimum{};
};

struct RigSpec {
  int rows = 3;
  int cols = 3;
  Mode mode = Mode::strongly_convex;
  double beta = 0.2;  ///< box radius
  double lambda = 1.0;
  double lipschitz = 10.0;
  double delta = 0.2;
  double epsilon = 1.0;  ///< ε_θ, or ε_f in convex mode
  Betas betas{0.05, 0.85, 0.10};
  int data_count = 5;
  std::uint64_t data_seed = 7;
};

/// Grid model with random data, its exact optimum, the Gibbs certificate for
/// the box and a planner schedule built with D = ‖θ*‖.
EnvelopeRig make_envelope_rig(const RigSpec& spec);

struct CoverageResult {
  BoundReport envelope;  ///< high-probability envelope, frequency statement
  BoundReport inexact;   ///< deterministic envelope with measured errors
};

/// Runs `runs` seeded trainings and compares each against both envelopes.
CoverageResult check_envelope_coverage(const EnvelopeRig& rig, int runs, std::uint64_t seed);

/// ‖θ* - Π[θ* - f'(θ*)/L]‖ <= 10 tol.
BoundReport check_optimum_fixed_point(const IsingModel& model, const StatVector& tbar,
                                      const ConstraintSet& set, double lambda, double lipschitz,
                                      double tol);

struct SuiteOptions {
  std::string selector = "all";
  std::uint64_t seed = 1;
  /// (C, α) for the mixing check instead of the Gibbs certificate.
  std::optional<std::pair<double, double>> certificate{};
};

/// Names accepted by run_suite.
const std::vector<std::string>& suite_names();

/// Default verification suite at desk scale. Errors inside one check are
/// reported as a failed report, not thrown.
std::vector<BoundReport> run_suite(const SuiteOptions& options);

}  // namespace fastmix
