#include "app.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

namespace fastmix::app {
namespace {

namespace pt = boost::property_tree;

const std::set<std::string> kKnownKeys{
    "model.grid",           "model.topology",      "model.fields",
    "data.path",            "data.synthetic_count", "data.synthetic_seed",
    "constraint.kind",      "constraint.beta",     "constraint.c",
    "constraint.tolerance", "constraint.max_iterations",
    "learner.mode",         "learner.lambda",      "learner.lipschitz",
    "learner.epsilon",      "learner.delta",       "learner.betas",
    "learner.distance_bound", "learner.c_convention", "learner.iterations",
    "learner.samples",      "learner.chain_length", "learner.init",
    "learner.threads",      "learner.oracle",
    "verify.C",             "verify.alpha",
    "run.seed",             "run.out",
};

template <class T>
T parse_value(const std::string& key, const std::string& text) {
  std::istringstream is(text);
  T value{};
  std::string rest;
  if (!(is >> value) || (is >> rest)) throw ConfigError("bad value '" + text + "' for " + key);
  return value;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "yes" || text == "1") return true;
  if (text == "false" || text == "no" || text == "0") return false;
  throw ConfigError("bad boolean '" + text + "' for " + key);
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

std::string fmt(double x, int precision = 6) {
  std::ostringstream os;
  os << std::setprecision(precision) << x;
  return os.str();
}

Schedule resolve_schedule(const RunConfig& cfg, const IsingModel& model) {
  if (cfg.big_k && cfg.big_m && cfg.v) return explicit_schedule(*cfg.big_k, *cfg.big_m, *cfg.v, cfg.mode);
  Schedule s = plan(cfg, model).schedule;
  if (cfg.big_k) s.big_k = *cfg.big_k;
  if (cfg.big_m) s.big_m = *cfg.big_m;
  if (cfg.v) s.v = *cfg.v;
  if (s.big_k < 1 || s.big_m < 1 || s.v < 0) throw InvalidInput("schedule needs K >= 1, M >= 1, v >= 0");
  return s;
}

bool oracle_enabled(const RunConfig& cfg, const IsingModel& model) {
  if (cfg.oracle == "off") return false;
  if (cfg.oracle == "on") return true;
  return model.num_nodes() <= 16;
}

}  // namespace

RunConfig parse_config(std::istream& in, const std::filesystem::path& base_dir) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty())
      throw ConfigError("config key '" + section + "' must sit inside a section");
    for (const auto& [key, value] : body) {
      (void)value;
      if (!kKnownKeys.count(section + "." + key))
        throw ConfigError("unknown config key '" + section + "." + key + "'");
    }
  }
  auto get = [&](const std::string& key) { return tree.get_optional<std::string>(key); };

  RunConfig cfg;
  if (auto g = get("model.grid")) {
    int rows = 0;
    int cols = 0;
    char x = 0;
    std::istringstream is(*g);
    if (!(is >> rows >> x >> cols) || x != 'x') throw ConfigError("model.grid must look like 4x4");
    cfg.grid = std::make_pair(rows, cols);
  }
  if (auto t = get("model.topology")) cfg.topology_path = resolve(base_dir, *t);
  if (auto f = get("model.fields")) cfg.fields = parse_bool("model.fields", *f);

  if (auto p = get("data.path")) cfg.data_path = resolve(base_dir, *p);
  if (auto c = get("data.synthetic_count")) cfg.synthetic_count = parse_value<int>("data.synthetic_count", *c);
  if (auto s = get("data.synthetic_seed"))
    cfg.synthetic_seed = parse_value<std::uint64_t>("data.synthetic_seed", *s);

  const std::string kind = get("constraint.kind").value_or("box");
  if (kind == "box") {
    cfg.constraint = BoxSet{parse_value<double>("constraint.beta", get("constraint.beta").value_or("0.2"))};
  } else if (kind == "spectral") {
    auto c = get("constraint.c");
    if (!c) throw ConfigError("constraint.c is required for a spectral constraint");
    SpectralSet s{parse_value<double>("constraint.c", *c)};
    if (auto t = get("constraint.tolerance")) s.tolerance = parse_value<double>("constraint.tolerance", *t);
    if (auto m = get("constraint.max_iterations"))
      s.max_iterations = parse_value<int>("constraint.max_iterations", *m);
    cfg.constraint = s;
  } else {
    throw ConfigError("constraint.kind must be box or spectral");
  }

  try {
    if (auto m = get("learner.mode")) cfg.mode = parse_mode(*m);
  } catch (const InvalidInput& e) {
    throw ConfigError(e.what());
  }
  if (auto v = get("learner.lambda")) cfg.lambda = parse_value<double>("learner.lambda", *v);
  if (auto v = get("learner.lipschitz")) cfg.lipschitz = parse_value<double>("learner.lipschitz", *v);
  if (auto v = get("learner.epsilon")) cfg.epsilon = parse_value<double>("learner.epsilon", *v);
  if (auto v = get("learner.delta")) cfg.delta = parse_value<double>("learner.delta", *v);
  if (auto v = get("learner.betas")) {
    std::istringstream is(*v);
    std::string extra;
    if (!(is >> cfg.betas.b1 >> cfg.betas.b2 >> cfg.betas.b3) || (is >> extra))
      throw ConfigError("learner.betas needs three numbers");
  }
  if (auto v = get("learner.distance_bound"))
    cfg.distance_bound = parse_value<double>("learner.distance_bound", *v);
  if (auto v = get("learner.c_convention")) {
    if (*v == "conversion") cfg.c_convention = CConvention::conversion;
    else if (*v == "log_nodes") cfg.c_convention = CConvention::log_nodes;
    else throw ConfigError("learner.c_convention must be conversion or log_nodes");
  }
  if (auto v = get("learner.iterations")) cfg.big_k = parse_value<std::int64_t>("learner.iterations", *v);
  if (auto v = get("learner.samples")) cfg.big_m = parse_value<std::int64_t>("learner.samples", *v);
  if (auto v = get("learner.chain_length")) cfg.v = parse_value<std::int64_t>("learner.chain_length", *v);
  if (auto v = get("learner.init")) {
    if (*v == "uniform") cfg.init = InitKind::uniform;
    else if (*v == "empirical") cfg.init = InitKind::empirical;
    else throw ConfigError("learner.init must be uniform or empirical");
  }
  if (auto v = get("learner.threads")) cfg.threads = parse_value<unsigned>("learner.threads", *v);
  if (auto v = get("learner.oracle")) {
    if (*v != "auto" && *v != "on" && *v != "off") throw ConfigError("learner.oracle must be auto, on or off");
    cfg.oracle = *v;
  }
  if (auto v = get("verify.C")) cfg.verify_big_c = parse_value<double>("verify.C", *v);
  if (auto v = get("verify.alpha")) cfg.verify_alpha = parse_value<double>("verify.alpha", *v);
  if (auto v = get("run.seed")) cfg.seed = parse_value<std::uint64_t>("run.seed", *v);
  if (auto v = get("run.out")) cfg.out = resolve(base_dir, *v);

  if (bool(cfg.grid) == bool(cfg.topology_path))
    throw ConfigError("give exactly one of model.grid and model.topology");
  if (bool(cfg.data_path) == bool(cfg.synthetic_count))
    throw ConfigError("give exactly one of data.path and data.synthetic_count");
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path.string() + "'");
  return parse_config(in, path.parent_path());
}

RunConfig worked_example_config() {
  RunConfig cfg;
  cfg.grid = std::make_pair(4, 4);
  cfg.synthetic_count = 5;
  cfg.synthetic_seed = 6;
  cfg.constraint = BoxSet{0.2};
  cfg.mode = Mode::strongly_convex;
  cfg.lambda = 1.0;
  cfg.lipschitz = 10.0;
  cfg.epsilon = 2.0;
  cfg.delta = 0.1;
  cfg.betas = {0.01, 0.9, 0.1};
  cfg.v = 561;
  cfg.seed = 1;
  return cfg;
}

Problem build_problem(const RunConfig& cfg) {
  Problem p{IsingModel{cfg.grid ? GraphTopology::grid(cfg.grid->first, cfg.grid->second)
                                : read_topology(*cfg.topology_path),
                       cfg.fields}};
  if (cfg.data_path) {
    p.data = read_dataset(*cfg.data_path, p.model.num_nodes());
  } else {
    if (*cfg.synthetic_count < 1) throw ConfigError("data.synthetic_count must be at least 1");
    p.data = random_configurations(p.model.num_nodes(), *cfg.synthetic_count, cfg.synthetic_seed);
  }
  return p;
}

MixingCertificate certificate_for(const IsingModel& model, const ConstraintSet& set,
                                  CConvention convention) {
  validate(set);
  if (const auto* box = std::get_if<BoxSet>(&set))
    return gibbs_certificate(model.num_nodes(), model.graph.max_degree(), box->beta, convention);
  return spectral_certificate(model.num_nodes(), std::get<SpectralSet>(set).c, convention);
}

double default_distance_bound(const IsingModel& model, const ConstraintSet& set) {
  if (model.fields_enabled)
    throw ConfigError("fields are unconstrained; set learner.distance_bound explicitly");
  if (const auto* box = std::get_if<BoxSet>(&set))
    return 2.0 * box->beta * std::sqrt(double(model.num_edges()));
  return std::get<SpectralSet>(set).c * std::sqrt(2.0 * model.num_nodes());
}

double step_constant(const RunConfig& cfg, const IsingModel& model) {
  return cfg.lipschitz.value_or(lipschitz_constant(stat_norm_bound(model), cfg.lambda));
}

PlanResult plan(const RunConfig& cfg, const IsingModel& model) {
  auto quantities = [&](CConvention conv) {
    const MixingCertificate cert = certificate_for(model, cfg.constraint, conv);
    ModelQuantities q;
    q.lipschitz = step_constant(cfg, model);
    q.lambda = cfg.lambda;
    q.r2 = stat_norm_bound(model).r2;
    q.big_c = cert.big_c();
    q.alpha = cert.alpha();
    q.big_d = cfg.distance_bound ? *cfg.distance_bound : default_distance_bound(model, cfg.constraint);
    q.delta = cfg.delta;
    return q;
  };

  PlanResult out;
  if (cfg.mode == Mode::convex) {
    const ModelQuantities q = quantities(cfg.c_convention);
    const ProblemConstants k = derive_constants(Mode::convex, q);
    const double eps = convex_schedule_epsilon(cfg.epsilon, q.lipschitz, q.r2);
    out.schedule = plan_convex(k, eps, cfg.betas);
    out.lower_bound = work_lower_bound_convex(k.a, k.b, k.c, k.alpha, eps);
    return out;
  }
  const ProblemConstants k = derive_constants(Mode::strongly_convex, quantities(cfg.c_convention));
  out.schedule = plan_strongly_convex(k, cfg.epsilon, cfg.delta, cfg.betas);
  out.lower_bound =
      work_lower_bound_strongly_convex(k.a, k.b, k.c, k.gamma, k.alpha, cfg.epsilon, cfg.delta);
  for (CConvention conv : {CConvention::conversion, CConvention::log_nodes}) {
    const ProblemConstants kc = derive_constants(Mode::strongly_convex, quantities(conv));
    const std::int64_t v = plan_strongly_convex(kc, cfg.epsilon, cfg.delta, cfg.betas).v;
    (conv == CConvention::conversion ? out.v_conversion : out.v_log_nodes) = v;
  }
  return out;
}

int cmd_plan(const RunConfig& cfg, std::ostream& os) {
  const Problem p = build_problem(cfg);
  const PlanResult r = plan(cfg, p.model);
  const Schedule& s = r.schedule;
  os << "model: N=" << p.model.num_nodes() << " E=" << p.model.num_edges()
     << " max_degree=" << p.model.graph.max_degree() << " R2=" << fmt(s.constants.r2)
     << " L=" << fmt(s.constants.lipschitz) << " (theorem value "
     << fmt(lipschitz_constant(stat_norm_bound(p.model), cfg.lambda)) << ")\n";
  os << "constraint: " << describe(cfg.constraint) << "\n";
  os << "certificate: C=" << fmt(s.constants.big_c) << " alpha=" << fmt(s.constants.alpha, 10) << "\n";
  os << "schedule (" << to_string(s.mode) << "): K=" << s.big_k << " M=" << s.big_m << " v=" << s.v
     << "\n";
  os << "unrounded: K=" << fmt(s.raw_k, 10) << " M=" << fmt(s.raw_m, 10) << " v=" << fmt(s.raw_v, 10)
     << "\n";
  os << "constants: a=" << fmt(s.constants.a) << " b=" << fmt(s.constants.b) << " c=" << fmt(s.constants.c)
     << " gamma=" << fmt(s.constants.gamma) << " D=" << fmt(s.constants.big_d) << "\n";
  if (r.v_conversion && r.v_log_nodes) {
    os << "chain length by C convention: v=" << *r.v_conversion << " with C=N, v=" << *r.v_log_nodes
       << " with C=ln N";
    if (const auto* box = std::get_if<BoxSet>(&cfg.constraint))
      os << "; mixing-time bound tau(0.01)="
         << tau_bound_gibbs(p.model.num_nodes(), p.model.graph.max_degree(), box->beta, 0.01);
    os << "\n";
  }
  if (std::abs(cfg.betas.sum() - 1.0) > 1e-12)
    os << "note: betas sum to " << fmt(cfg.betas.sum(), 12) << ", so the guarantee is "
       << fmt(s.guaranteed_epsilon) << " rather than " << fmt(cfg.epsilon) << "\n";
  os << "work KMv=" << fmt(s.work(), 10) << "\n";
  os << "work lower bound=" << fmt(r.lower_bound, 10) << "\n";
  return 0;
}

int cmd_train(const RunConfig& cfg, std::ostream& os) {
  const Problem p = build_problem(cfg);
  const Dataset data(p.model, p.data);
  const Schedule schedule = resolve_schedule(cfg, p.model);
  const double lipschitz = step_constant(cfg, p.model);
  const bool oracle = oracle_enabled(cfg, p.model);

  TrainOptions opts;
  opts.lipschitz = lipschitz;
  opts.threads = cfg.threads;
  opts.init = cfg.init;
  opts.instrument = oracle;
  std::optional<Parameters> optimum;
  if (oracle) {
    optimum = exact_optimum(p.model, data, cfg.constraint, cfg.lambda, 1e-8,
                            OptimumOptions{.lipschitz = lipschitz});
    opts.reference = optimum;
  }
  const TrainingTrace trace = train(p.model, data, cfg.constraint, schedule, cfg.lambda, cfg.seed, opts);

  write_trace_csv(cfg.out / "trace.csv", trace);
  write_json(cfg.out / "trace.json", trace_to_json(trace));
  std::ostringstream summary;
  for (const auto& line : describe_schedule(schedule)) summary << line << "\n";
  summary << "seed=" << cfg.seed << "\n";
  if (optimum) {
    const double f_star = negative_log_likelihood(p.model, *optimum, data, cfg.lambda);
    summary << "final_distance=" << fmt((trace.final_iterate - *optimum).norm(), 10) << "\n";
    summary << "final_f_gap=" << fmt(negative_log_likelihood(p.model, trace.final_iterate, data, cfg.lambda) - f_star, 10)
            << "\n";
    summary << "average_f_gap="
            << fmt(negative_log_likelihood(p.model, trace.averaged_iterate, data, cfg.lambda) - f_star, 10)
            << "\n";
  } else {
    summary << "exact oracle unavailable for this model\n";
  }
  std::ofstream(cfg.out / "summary.txt") << summary.str();
  os << summary.str() << "wrote " << (cfg.out / "trace.csv").string() << "\n";
  return 0;
}

int cmd_verify(const RunConfig& cfg, const std::string& suite, std::ostream& os) {
  SuiteOptions opts;
  opts.selector = suite;
  opts.seed = cfg.seed;
  if (cfg.verify_big_c || cfg.verify_alpha) {
    const MixingCertificate cert(cfg.verify_big_c.value_or(4.0), cfg.verify_alpha.value_or(0.5));
    opts.certificate = std::make_pair(cert.big_c(), cert.alpha());
  }
  const auto reports = run_suite(opts);

  std::ostringstream text;
  std::ostringstream table;
  table << "name\tinstances\tviolations\tallowed\tmax_slack\tpassed\n";
  bool ok = true;
  for (const auto& r : reports) {
    ok = ok && r.passed();
    text << (r.passed() ? "PASS " : "FAIL ") << r.name << ": " << r.instances << " instances, "
         << r.violations << " violations (" << r.allowed_violations << " allowed), max_slack "
         << fmt(r.max_slack) << "\n";
    if (!r.note.empty()) text << "     " << r.note << "\n";
    table << r.name << '\t' << r.instances << '\t' << r.violations << '\t' << r.allowed_violations << '\t'
          << std::setprecision(10) << r.max_slack << '\t' << (r.passed() ? 1 : 0) << "\n";
  }
  std::filesystem::create_directories(cfg.out);
  std::ofstream(cfg.out / "verify_report.txt") << text.str();
  std::ofstream(cfg.out / "verify_summary.tsv") << table.str();
  os << text.str();
  return ok ? 0 : 1;
}

int cmd_export(const std::filesystem::path& trace_json, const std::filesystem::path& out,
               std::ostream& os) {
  const TrainingTrace trace = trace_from_json(read_json(trace_json));
  const auto target = out / (trace_json.stem().string() + ".csv");
  write_trace_csv(target, trace);
  os << "wrote " << target.string() << "\n";
  return 0;
}

ReproduceResult reproduce(const RunConfig& cfg, std::ostream& os) {
  const Problem p = build_problem(cfg);
  const Dataset data(p.model, p.data);
  const double lipschitz = step_constant(cfg, p.model);

  ReproduceResult res;
  const PlanResult planned = plan(cfg, p.model);
  res.planned = planned.schedule;
  res.v_conversion = planned.v_conversion.value_or(planned.schedule.v);
  res.v_log_nodes = planned.v_log_nodes.value_or(planned.schedule.v);
  if (const auto* box = std::get_if<BoxSet>(&cfg.constraint))
    res.tau = tau_bound_gibbs(p.model.num_nodes(), p.model.graph.max_degree(), box->beta, 0.01);
  res.used = resolve_schedule(cfg, p.model);

  os << "planner: K=" << res.planned.big_k << " M=" << res.planned.big_m << " v=" << res.planned.v << "\n";
  os << "chain length: v=" << res.v_conversion << " with C=N, v=" << res.v_log_nodes
     << " with C=ln N; mixing-time bound tau(0.01)=" << res.tau << "\n";
  os << "running with K=" << res.used.big_k << " M=" << res.used.big_m << " v=" << res.used.v << "\n";

  res.optimum = exact_optimum(p.model, data, cfg.constraint, cfg.lambda, 1e-8,
                              OptimumOptions{.lipschitz = lipschitz});
  const double f_star = negative_log_likelihood(p.model, res.optimum, data, cfg.lambda);
  write_dataset(cfg.out / "training_data.txt", p.data);

  TrainOptions opts;
  opts.lipschitz = lipschitz;
  opts.threads = cfg.threads;
  opts.init = cfg.init;
  opts.reference = res.optimum;
  for (int run = 0; run < 5; ++run) {
    const std::uint64_t seed = chain_seed(cfg.seed, ChainStream{std::uint64_t(run), 0x5EEDu});
    const TrainingTrace trace = train(p.model, data, cfg.constraint, res.used, cfg.lambda, seed, opts);
    const auto name = "run" + std::to_string(run + 1);
    write_trace_csv(cfg.out / (name + "_trace.csv"), trace);
    std::ofstream curve(cfg.out / (name + "_curves.csv"));
    if (!curve) throw IoError("cannot write curves under '" + cfg.out.string() + "'");
    curve << "iter,f_gap,param_dist\n" << std::setprecision(17);
    for (const auto& r : trace.records)
      curve << r.k << ',' << r.objective.value_or(NAN) - f_star << ',' << r.distance.value_or(NAN) << "\n";
    const double dist = (trace.final_iterate - res.optimum).norm();
    const double gap = negative_log_likelihood(p.model, trace.final_iterate, data, cfg.lambda) - f_star;
    res.final_distances.push_back(dist);
    res.final_gaps.push_back(gap);
    os << name << ": seed=" << seed << " final distance=" << fmt(dist) << " f gap=" << fmt(gap) << "\n";
  }
  return res;
}

int cmd_reproduce(const RunConfig& cfg, std::ostream& os) {
  const ReproduceResult res = reproduce(cfg, os);
  bool ok = true;
  for (double d : res.final_distances) ok = ok && d <= cfg.epsilon;
  std::ofstream summary(cfg.out / "summary.txt");
  summary << "K=" << res.planned.big_k << " M=" << res.planned.big_m << " v_used=" << res.used.v
          << " v_conversion=" << res.v_conversion << " v_log_nodes=" << res.v_log_nodes
          << " tau=" << res.tau << "\n";
  for (std::size_t i = 0; i < res.final_distances.size(); ++i)
    summary << "run" << i + 1 << " distance=" << res.final_distances[i] << " f_gap=" << res.final_gaps[i]
            << "\n";
  os << (ok ? "all runs within" : "some run outside") << " epsilon=" << cfg.epsilon << "\n";
  return ok ? 0 : 1;
}

}  // namespace fastmix::app
