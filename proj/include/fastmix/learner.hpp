#pragma once

#include "fastmix/model.hpp"
#include "fastmix/projection.hpp"
#include "fastmix/sampler.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fastmix {

enum class Mode { convex, strongly_convex };

std::string to_string(Mode mode);
Mode parse_mode(std::string_view text);

/// Split of the error budget between the optimisation, sampling and mixing
/// terms. Positive, normally summing to one.
struct Betas {
  double b1 = 0.0;
  double b2 = 0.0;
  double b3 = 0.0;

  double sum() const { return b1 + b2 + b3; }
};

/// Positive and summing to 1 within 1e-12.
void validate(const Betas& betas);

/// Problem-level inputs to the constant derivation.
struct ModelQuantities {
  double lipschitz = 0.0;
  double lambda = 0.0;
  double r2 = 0.0;
  double big_c = 0.0;
  double alpha = 0.0;
  double big_d = 0.0;  ///< bound on ‖θ₀ - θ*‖₂
  double delta = 0.0;
};

/// The (a, b, c, γ) of the schedule theorems together with the quantities
/// they were derived from.
struct ProblemConstants {
  Mode mode = Mode::strongly_convex;
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double gamma = 0.0;
  double big_d = 0.0;
  double r2 = 0.0;
  double lambda = 0.0;
  double lipschitz = 0.0;
  double big_c = 0.0;
  double alpha = 0.0;
  double delta = 0.0;
};

/// Convex mode: a = LD/(4R₂) + ln(1/δ), b = 1, c = C.
/// Strongly convex: a = D, b = (L/λ)√(R₂/2), c = 2LR₂C/λ, γ = 1 - λ/L.
ProblemConstants derive_constants(Mode mode, const ModelQuantities& q);

/// Objective accuracy ε_f mapped to the abstract ε of the convex schedule,
/// ε = ε_f L / (8 R₂²).
double convex_schedule_epsilon(double epsilon_f, double lipschitz, double r2);

struct Schedule {
  std::int64_t big_k = 1;
  std::int64_t big_m = 1;
  std::int64_t v = 1;
  Mode mode = Mode::strongly_convex;
  Betas betas{};
  double epsilon = 0.0;
  double delta = 0.0;
  /// Accuracy the schedule actually guarantees, (β₁+β₂+β₃) ε.
  double guaranteed_epsilon = 0.0;
  ProblemConstants constants{};
  /// Planner values before ceiling.
  double raw_k = 0.0;
  double raw_m = 0.0;
  double raw_v = 0.0;

  double work() const { return double(big_k) * double(big_m) * double(v); }
};

/// A schedule with explicit (K, M, v) and no planner provenance.
Schedule explicit_schedule(std::int64_t big_k, std::int64_t big_m, std::int64_t v,
                           Mode mode = Mode::strongly_convex);

/// K = a²/(β₁²ε), M = (ab/(β₁β₂ε))², v = ln(ac/(β₁β₃ε))/(-ln α), each ceiled.
/// When 0 < δ < 1 in the constants, M is also raised to 3K/ln(1/δ).
Schedule plan_convex(const ProblemConstants& consts, double epsilon, const Betas& betas);

/// K = (L/λ) ln(D/(β₁ε)), M = L²R₂/(2ε²β₂²λ²)(1 + √(2 ln(K/δ)))² using the
/// ceiled K, v = ln(2LR₂C/(β₃ελ))/(1-α), each ceiled and at least 1.
/// The β's need only be positive: the three error terms add up to
/// (β₁+β₂+β₃) ε, which is recorded as the guaranteed accuracy.
Schedule plan_strongly_convex(const ProblemConstants& consts, double epsilon, double delta,
                              const Betas& betas);

/// (a⁴b²/ε³) ln(ac/ε)/(-ln α): minimum KMv for any schedule meeting the
/// convex error budget.
double work_lower_bound_convex(double a, double b, double c, double alpha, double epsilon);

/// (b²/ε²) ln(a/ε) ln(c/ε) / ((-ln γ)(-ln α)) · ln(ln(a/ε)/(δ(-ln γ))).
/// Factors whose requirement is already met at zero cost (ln(a/ε) <= 0,
/// ln(c/ε) <= 0, or a nonpositive outer log) contribute nothing, giving 0.
double work_lower_bound_strongly_convex(double a, double b, double c, double gamma,
                                        double alpha, double epsilon, double delta);

/// Mean statistic of a batch, (1/M) Σ t(x_i).
StatVector batch_mean_stats(const IsingModel& model, const std::vector<SpinConfiguration>& batch);

/// (1/M) Σ t(x_i) - t̄ + λθ.
StatVector approximate_gradient(const IsingModel& model,
                                const std::vector<SpinConfiguration>& batch,
                                const StatVector& tbar, double lambda, const Parameters& theta);

/// Π_Θ[θ - g/L].
Parameters pgd_step(const IsingModel& model, const Parameters& theta, const StatVector& gradient,
                    double lipschitz, const ConstraintSet& set);

enum class GradientSource { sampled, exact };
enum class InitKind { uniform, empirical };

struct TrainOptions {
  /// Step size is 1/L; defaults to 4R₂² + λ when unset.
  std::optional<double> lipschitz;
  InitKind init = InitKind::uniform;
  unsigned threads = 1;
  GradientSource gradient = GradientSource::sampled;
  /// θ*, when known, fills the distance column of the trace.
  std::optional<Parameters> reference;
  /// Exact objective and gradient-error columns, only for enumerable models.
  bool instrument = true;
  /// Also record ‖batch mean - E_q[t]‖ where q is the exact law of a chain
  /// after v steps. Needs N <= kChainOracleLimit.
  bool chain_oracle = false;
};

inline constexpr int kChainOracleLimit = 8;

struct IterationRecord {
  std::int64_t k = 0;
  Parameters theta;
  StatVector gradient_estimate;
  StatVector sample_mean;
  std::optional<double> objective;       ///< f(θ_k)
  std::optional<double> gradient_error;  ///< ‖e_k‖, error of the gradient used to reach θ_k
  std::optional<double> distance;        ///< ‖θ_k - θ*‖
  std::optional<double> chain_error;     ///< ‖batch mean - E_{q_k}[t]‖
};

struct TrainingTrace {
  std::vector<IterationRecord> records;
  Parameters final_iterate;
  Parameters averaged_iterate;
  std::uint64_t master_seed = 0;
  Schedule schedule;
  double lambda = 0.0;
  double lipschitz = 0.0;
  std::string constraint;
  std::int64_t chain_length = 0;
};

/// Projected gradient descent from θ₀ = 0 with MCMC gradient estimates. Each
/// iteration draws M chains of length v from the initial distribution under
/// the current θ, forms the estimated gradient and takes a projected step.
TrainingTrace train(const IsingModel& model, const Dataset& data, const ConstraintSet& set,
                    const Schedule& schedule, double lambda, std::uint64_t seed,
                    const TrainOptions& options = {});

}  // namespace fastmix
