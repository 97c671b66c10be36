#pragma once

#include "fastmix/learner.hpp"
#include "fastmix/topology.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

namespace fastmix {

/// Topology file: a header line "N E" followed by E lines "i j".
/// Blank lines and lines starting with '#' are skipped.
GraphTopology read_topology(const std::filesystem::path& path);
void write_topology(const std::filesystem::path& path, const GraphTopology& graph);

/// Dataset file: one configuration per line, N whitespace-separated spins
/// written as +1, 1 or -1.
std::vector<SpinConfiguration> read_dataset(const std::filesystem::path& path, int num_nodes);
void write_dataset(const std::filesystem::path& path, const std::vector<SpinConfiguration>& data);

/// CSV with header iter,f_exact,param_dist_exact,grad_err_norm,theta_0,...
/// preceded by '#' lines echoing the schedule. Unavailable oracle columns
/// are left empty.
void write_trace_csv(std::ostream& os, const TrainingTrace& trace);
void write_trace_csv(const std::filesystem::path& path, const TrainingTrace& trace);

nlohmann::json trace_to_json(const TrainingTrace& trace);
TrainingTrace trace_from_json(const nlohmann::json& j);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

/// Human-readable schedule lines, each without a trailing newline.
std::vector<std::string> describe_schedule(const Schedule& schedule);

}  // namespace fastmix
