#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>

#include <json.hpp>

#include "reqclust/pipeline.hpp"

namespace reqclust {

struct Response {
  int status = 200;
  std::string body;
};

enum class Override { forced_in, forced_out };
std::string to_string(Override o);

/// HTTP JSON API over problems, analyses and negotiation sessions,
/// independent of any transport: `handle` maps a request to a response and
/// `serve` binds it to a socket.
///
/// Every session's derived plan is recomputed from its base core and
/// overrides on each read. Mutations of one session are serialized by that
/// session's mutex; each applied change bumps the revision by one.
class Service {
 public:
  struct Options {
    PipelineOptions pipeline;
    /// When set, problems and sessions are written here on every change and
    /// reloaded on construction.
    std::optional<std::filesystem::path> snapshot_dir;
  };

  Service();
  explicit Service(Options options);

  Response handle(const std::string& method, const std::string& path, const std::string& body);

  std::string add_problem(ProblemInstance problem);

 private:
  struct ProblemEntry {
    std::string id;
    std::shared_ptr<const ProblemInstance> problem;
    std::mutex mutex;
    std::shared_ptr<const PipelineReport> report;
    PipelineOptions report_options;
  };

  struct Session {
    std::string id;
    std::string problem_id;
    std::shared_ptr<const ProblemInstance> problem;
    int k = 0;
    Algorithm algorithm = Algorithm::pam;
    Selection base_core;
    std::map<std::string, Override> overrides;
    std::optional<double> budget;
    long revision = 0;
    std::mutex mutex;
  };

  Response create_problem(const std::string& body);
  Response get_problem(const std::string& id);
  Response analyze(const std::string& id, const std::string& body);
  Response get_report(const std::string& id);
  Response create_session(const std::string& id, const std::string& body);
  Response get_session(const std::string& sid, bool plan_only);
  Response patch_session(const std::string& sid, const std::string& body);

  std::shared_ptr<ProblemEntry> find_problem(const std::string& id);
  std::shared_ptr<Session> find_session(const std::string& sid);
  std::shared_ptr<const PipelineReport> ensure_report(ProblemEntry& entry, const PipelineOptions& options, bool force);

  /// Caller holds session.mutex.
  static ReleasePlan derived_plan(const Session& session);
  static nlohmann::json session_json(const Session& session);

  void save_problem_snapshot(const ProblemEntry& entry);
  void save_session_snapshot(const Session& session);
  void load_snapshots();

  Options options_;
  std::shared_mutex registry_mutex_;
  std::map<std::string, std::shared_ptr<ProblemEntry>> problems_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  long next_problem_ = 1;
  long next_session_ = 1;
};

/// Blocks serving `service` over HTTP until the process is stopped.
/// Throws IoError when the port cannot be bound.
void serve(Service& service, const std::string& host, int port);

}  // namespace reqclust
