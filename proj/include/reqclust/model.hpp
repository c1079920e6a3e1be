#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

namespace reqclust {

struct Requirement {
  std::string id;
  std::string name;
  double effort = 0.0;
};

struct Stakeholder {
  std::string id;
  double weight = 1.0;
};

struct ValueAssignment {
  std::string stakeholder;
  std::string requirement;
  double value = 0.0;
};

enum class DependencyKind { implication, combination, exclusion };

/// `implication`: `to` cannot be selected unless `from` is.
/// `combination` / `exclusion` are symmetric and stored with from < to.
struct Dependency {
  DependencyKind kind = DependencyKind::implication;
  std::string from;
  std::string to;

  friend bool operator==(const Dependency&, const Dependency&) = default;
};

std::string to_string(DependencyKind kind);
DependencyKind parse_dependency_kind(const std::string& text);

/// Sparse symmetric pairwise adjustments. Keys are canonical (lo, hi) id
/// pairs; the diagonal is never stored.
struct InteractionMatrices {
  std::map<std::pair<std::string, std::string>, double> delta_s;
  std::map<std::pair<std::string, std::string>, double> delta_e;

  bool empty() const { return delta_s.empty() && delta_e.empty(); }
  double satisfaction(const std::string& a, const std::string& b) const;
  double effort(const std::string& a, const std::string& b) const;
};

/// A validated next-release problem. Build it with `make_problem` or one of
/// the loaders; treat it as immutable afterwards.
struct ProblemInstance {
  std::vector<Requirement> requirements;
  std::vector<Stakeholder> stakeholders;
  std::vector<ValueAssignment> values;
  /// s_j aligned with `requirements`, either supplied or computed.
  std::vector<double> satisfaction;
  bool satisfaction_supplied = false;
  std::vector<Dependency> dependencies;
  InteractionMatrices interactions;
  std::optional<double> effort_bound;
  /// Non-fatal findings from validation (implication cycles, collapsed
  /// duplicate entries).
  std::vector<std::string> warnings;

  std::size_t size() const { return requirements.size(); }
  std::size_t index_of(const std::string& id) const;
  bool contains(const std::string& id) const { return index_.count(id) != 0; }
  double total_effort() const;
  double total_satisfaction() const;

 private:
  friend ProblemInstance make_problem(ProblemInstance);
  std::unordered_map<std::string, std::size_t> index_;
};

/// Validates, canonicalizes and indexes a raw instance. `satisfaction` may be
/// pre-filled (and `satisfaction_supplied` set) instead of giving values.
ProblemInstance make_problem(ProblemInstance raw);

/// s_j = sum_i w_i * v_ij, aligned with `problem.requirements`.
std::vector<double> compute_satisfaction(const ProblemInstance& problem);

enum class ProblemFormat { json, csv_bundle };

ProblemInstance problem_from_json(const nlohmann::json& doc);
nlohmann::json problem_to_json(const ProblemInstance& problem);

/// Reads one JSON document from `in`.
ProblemInstance load_problem(std::istream& in);
/// Reads requirements.csv, stakeholders.csv, values.csv and
/// dependencies.csv from `dir` (the last three optional).
ProblemInstance load_csv_bundle(const std::filesystem::path& dir);
/// Dispatches on the path: a directory is a CSV bundle, anything else JSON.
ProblemInstance load_problem_file(const std::filesystem::path& path);
void save_problem(const ProblemInstance& problem, std::ostream& out);

}  // namespace reqclust
