#include "fastmix/io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

namespace fastmix {
namespace {

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

bool skippable(const std::string& line) {
  const auto pos = line.find_first_not_of(" \t\r");
  return pos == std::string::npos || line[pos] == '#';
}

std::string where(const std::filesystem::path& path, int line_no) {
  return path.string() + ":" + std::to_string(line_no);
}

nlohmann::json vector_json(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::VectorXd vector_from_json(const nlohmann::json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(values.data(), Eigen::Index(values.size()));
}

template <class T>
nlohmann::json optional_json(const std::optional<T>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

template <class T>
std::optional<T> optional_from_json(const nlohmann::json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<T>();
}

}  // namespace

GraphTopology read_topology(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::string line;
  int line_no = 0;
  int n = -1;
  int e = -1;
  std::vector<Edge> edges;
  while (std::getline(in, line)) {
    ++line_no;
    if (skippable(line)) continue;
    std::istringstream ls(line);
    int a = 0;
    int b = 0;
    std::string extra;
    if (!(ls >> a >> b) || (ls >> extra)) throw IoError(where(path, line_no) + ": expected two integers");
    if (n < 0) {
      n = a;
      e = b;
      if (n < 1 || e < 0) throw IoError(where(path, line_no) + ": bad header");
      continue;
    }
    edges.push_back({a, b});
  }
  if (n < 0) throw IoError(path.string() + ": missing header");
  if (int(edges.size()) != e)
    throw IoError(path.string() + ": header promises " + std::to_string(e) + " edges, found " +
                  std::to_string(edges.size()));
  return GraphTopology(n, std::move(edges));
}

void write_topology(const std::filesystem::path& path, const GraphTopology& graph) {
  auto out = open_out(path);
  out << graph.num_nodes() << ' ' << graph.num_edges() << '\n';
  for (const Edge& e : graph.edges()) out << e.i << ' ' << e.j << '\n';
}

std::vector<SpinConfiguration> read_dataset(const std::filesystem::path& path, int num_nodes) {
  auto in = open_in(path);
  std::vector<SpinConfiguration> data;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (skippable(line)) continue;
    std::istringstream ls(line);
    std::vector<int> spins;
    std::string tok;
    while (ls >> tok) {
      if (tok == "1" || tok == "+1") spins.push_back(1);
      else if (tok == "-1") spins.push_back(-1);
      else throw IoError(where(path, line_no) + ": spin '" + tok + "' is not +1 or -1");
    }
    if (int(spins.size()) != num_nodes)
      throw IoError(where(path, line_no) + ": expected " + std::to_string(num_nodes) + " spins, found " +
                    std::to_string(spins.size()));
    data.push_back(Eigen::Map<const Eigen::VectorXi>(spins.data(), num_nodes));
  }
  if (data.empty()) throw IoError(path.string() + ": dataset is empty");
  return data;
}

void write_dataset(const std::filesystem::path& path, const std::vector<SpinConfiguration>& data) {
  auto out = open_out(path);
  for (const auto& x : data) {
    for (Eigen::Index i = 0; i < x.size(); ++i) out << (i ? " " : "") << (x[i] > 0 ? "+1" : "-1");
    out << '\n';
  }
}

std::vector<std::string> describe_schedule(const Schedule& s) {
  std::vector<std::string> lines;
  std::ostringstream os;
  os << std::setprecision(10);
  os << "mode=" << to_string(s.mode) << " K=" << s.big_k << " M=" << s.big_m << " v=" << s.v
     << " KMv=" << std::setprecision(6) << s.work();
  lines.push_back(os.str());
  if (s.epsilon > 0.0) {
    os.str("");
    os << std::setprecision(6) << "epsilon=" << s.epsilon << " delta=" << s.delta << " betas=("
       << s.betas.b1 << ", " << s.betas.b2 << ", " << s.betas.b3 << ")";
    lines.push_back(os.str());
    const auto& c = s.constants;
    os.str("");
    os << "a=" << c.a << " b=" << c.b << " c=" << c.c << " gamma=" << c.gamma << " D=" << c.big_d
       << " R2=" << c.r2 << " lambda=" << c.lambda << " L=" << c.lipschitz << " C=" << c.big_c
       << " alpha=" << c.alpha;
    lines.push_back(os.str());
    os.str("");
    os << "unrounded K=" << s.raw_k << " M=" << s.raw_m << " v=" << s.raw_v;
    lines.push_back(os.str());
  }
  return lines;
}

void write_trace_csv(std::ostream& os, const TrainingTrace& trace) {
  for (const auto& line : describe_schedule(trace.schedule)) os << "# " << line << '\n';
  os << "# seed=" << trace.master_seed << " lambda=" << trace.lambda << " L=" << trace.lipschitz
     << " constraint=" << trace.constraint << '\n';
  const Eigen::Index dim = trace.final_iterate.size();
  os << "iter,f_exact,param_dist_exact,grad_err_norm";
  for (Eigen::Index i = 0; i < dim; ++i) os << ",theta_" << i;
  os << '\n';
  os << std::setprecision(17);
  auto cell = [&](const std::optional<double>& v) {
    os << ',';
    if (v) os << *v;
  };
  for (const auto& r : trace.records) {
    os << r.k;
    cell(r.objective);
    cell(r.distance);
    cell(r.gradient_error);
    for (Eigen::Index i = 0; i < r.theta.size(); ++i) os << ',' << r.theta[i];
    os << '\n';
  }
}

void write_trace_csv(const std::filesystem::path& path, const TrainingTrace& trace) {
  auto out = open_out(path);
  write_trace_csv(out, trace);
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

nlohmann::json trace_to_json(const TrainingTrace& trace) {
  using nlohmann::json;
  const Schedule& s = trace.schedule;
  const ProblemConstants& c = s.constants;
  json sched = {
      {"K", s.big_k}, {"M", s.big_m}, {"v", s.v}, {"mode", to_string(s.mode)},
      {"betas", {s.betas.b1, s.betas.b2, s.betas.b3}}, {"epsilon", s.epsilon}, {"delta", s.delta},
      {"raw", {s.raw_k, s.raw_m, s.raw_v}},
      {"constants",
       {{"a", c.a}, {"b", c.b}, {"c", c.c}, {"gamma", c.gamma}, {"D", c.big_d}, {"R2", c.r2},
        {"lambda", c.lambda}, {"L", c.lipschitz}, {"C", c.big_c}, {"alpha", c.alpha},
        {"delta", c.delta}}},
  };
  json records = json::array();
  for (const auto& r : trace.records)
    records.push_back({{"k", r.k},
                       {"theta", vector_json(r.theta)},
                       {"gradient", vector_json(r.gradient_estimate)},
                       {"sample_mean", vector_json(r.sample_mean)},
                       {"f_exact", optional_json(r.objective)},
                       {"grad_err_norm", optional_json(r.gradient_error)},
                       {"param_dist_exact", optional_json(r.distance)},
                       {"chain_err_norm", optional_json(r.chain_error)}});
  return {{"seed", trace.master_seed},
          {"lambda", trace.lambda},
          {"L", trace.lipschitz},
          {"constraint", trace.constraint},
          {"schedule", sched},
          {"final", vector_json(trace.final_iterate)},
          {"average", vector_json(trace.averaged_iterate)},
          {"records", records}};
}

TrainingTrace trace_from_json(const nlohmann::json& j) {
  try {
    TrainingTrace t;
    t.master_seed = j.at("seed").get<std::uint64_t>();
    t.lambda = j.at("lambda").get<double>();
    t.lipschitz = j.at("L").get<double>();
    t.constraint = j.at("constraint").get<std::string>();
    const auto& s = j.at("schedule");
    t.schedule.big_k = s.at("K").get<std::int64_t>();
    t.schedule.big_m = s.at("M").get<std::int64_t>();
    t.schedule.v = s.at("v").get<std::int64_t>();
    t.schedule.mode = parse_mode(s.at("mode").get<std::string>());
    const auto betas = s.at("betas").get<std::vector<double>>();
    t.schedule.betas = {betas.at(0), betas.at(1), betas.at(2)};
    t.schedule.epsilon = s.at("epsilon").get<double>();
    t.schedule.delta = s.at("delta").get<double>();
    const auto raw = s.at("raw").get<std::vector<double>>();
    t.schedule.raw_k = raw.at(0);
    t.schedule.raw_m = raw.at(1);
    t.schedule.raw_v = raw.at(2);
    const auto& c = s.at("constants");
    auto& k = t.schedule.constants;
    k.mode = t.schedule.mode;
    k.a = c.at("a");
    k.b = c.at("b");
    k.c = c.at("c");
    k.gamma = c.at("gamma");
    k.big_d = c.at("D");
    k.r2 = c.at("R2");
    k.lambda = c.at("lambda");
    k.lipschitz = c.at("L");
    k.big_c = c.at("C");
    k.alpha = c.at("alpha");
    k.delta = c.at("delta");
    t.chain_length = t.schedule.v;
    t.final_iterate = vector_from_json(j.at("final"));
    t.averaged_iterate = vector_from_json(j.at("average"));
    for (const auto& r : j.at("records")) {
      IterationRecord rec;
      rec.k = r.at("k").get<std::int64_t>();
      rec.theta = vector_from_json(r.at("theta"));
      rec.gradient_estimate = vector_from_json(r.at("gradient"));
      rec.sample_mean = vector_from_json(r.at("sample_mean"));
      rec.objective = optional_from_json<double>(r.at("f_exact"));
      rec.gradient_error = optional_from_json<double>(r.at("grad_err_norm"));
      rec.distance = optional_from_json<double>(r.at("param_dist_exact"));
      rec.chain_error = optional_from_json<double>(r.at("chain_err_norm"));
      t.records.push_back(std::move(rec));
    }
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed trace: ") + e.what());
  }
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  auto out = open_out(path);
  out << j.dump(1) << '\n';
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

nlohmann::json read_json(const std::filesystem::path& path) {
  auto in = open_in(path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

}  // namespace fastmix
