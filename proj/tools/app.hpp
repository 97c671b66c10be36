#pragma once

#include "fastmix/io.hpp"
#include "fastmix/learner.hpp"
#include "fastmix/verifier.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace fastmix::app {

struct RunConfig {
  std::optional<std::pair<int, int>> grid;
  std::optional<std::filesystem::path> topology_path;
  bool fields = false;

  std::optional<std::filesystem::path> data_path;
  std::optional<int> synthetic_count;
  std::uint64_t synthetic_seed = 0;

  ConstraintSet constraint = BoxSet{0.2};

  Mode mode = Mode::strongly_convex;
  double lambda = 1.0;
  std::optional<double> lipschitz;
  double epsilon = 2.0;
  double delta = 0.1;
  Betas betas{0.01, 0.9, 0.1};
  std::optional<double> distance_bound;
  CConvention c_convention = CConvention::conversion;
  std::optional<std::int64_t> big_k;
  std::optional<std::int64_t> big_m;
  std::optional<std::int64_t> v;
  InitKind init = InitKind::uniform;
  unsigned threads = 1;
  /// Exact-oracle columns and θ*: "auto" enables them for N <= 16.
  std::string oracle = "auto";

  std::optional<double> verify_big_c;
  std::optional<double> verify_alpha;

  std::uint64_t seed = 1;
  std::filesystem::path out = "out";
};

/// Flat key = value INI text with [model], [data], [constraint], [learner],
/// [verify] and [run] sections. Relative paths resolve against `base_dir`.
RunConfig parse_config(std::istream& in, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);

struct Problem {
  IsingModel model;
  std::vector<SpinConfiguration> data{};
};

Problem build_problem(const RunConfig& cfg);

MixingCertificate certificate_for(const IsingModel& model, const ConstraintSet& set,
                                  CConvention convention);

/// Diameter of the coupling set: 2β√E for the box, c√(2N) for the spectral ball.
double default_distance_bound(const IsingModel& model, const ConstraintSet& set);

double step_constant(const RunConfig& cfg, const IsingModel& model);

struct PlanResult {
  Schedule schedule;
  double lower_bound = 0.0;
  /// Strongly convex only: v under each C convention.
  std::optional<std::int64_t> v_conversion;
  std::optional<std::int64_t> v_log_nodes;
};

PlanResult plan(const RunConfig& cfg, const IsingModel& model);

/// Each command writes its report to `os` and returns the process exit code.
int cmd_plan(const RunConfig& cfg, std::ostream& os);
int cmd_train(const RunConfig& cfg, std::ostream& os);
int cmd_verify(const RunConfig& cfg, const std::string& suite, std::ostream& os);
int cmd_export(const std::filesystem::path& trace_json, const std::filesystem::path& out,
               std::ostream& os);

struct ReproduceResult {
  Schedule planned;
  std::int64_t v_conversion = 0;
  std::int64_t v_log_nodes = 0;
  std::int64_t tau = 0;
  Schedule used;
  Parameters optimum;
  std::vector<double> final_distances;
  std::vector<double> final_gaps;
};

/// Worked 4x4 example: 5 random training vectors, planner echo, 5 seeded runs
/// with v pinned to 561, per-run curves written under cfg.out.
ReproduceResult reproduce(const RunConfig& cfg, std::ostream& os);
int cmd_reproduce(const RunConfig& cfg, std::ostream& os);

/// Settings of the worked example.
RunConfig worked_example_config();

}  // namespace fastmix::app
