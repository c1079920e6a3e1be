#include "reqclust/service.hpp"

#include <fstream>
#include <sstream>
#include <vector>

#include <httplib.h>

#include "reqclust/errors.hpp"

namespace reqclust {

using nlohmann::json;

namespace {

/// Thrown inside handlers to produce a non-2xx response.
struct HttpError {
  int status;
  std::string code;
  std::string message;
  std::string offending_id;
};

Response reply(int status, const json& body) { return {status, body.dump()}; }

Response error_reply(const HttpError& e) {
  json err{{"code", e.code}, {"message", e.message}};
  if (!e.offending_id.empty()) err["offending_id"] = e.offending_id;
  return reply(e.status, json{{"error", std::move(err)}});
}

json parse_body(const std::string& body, bool allow_empty) {
  if (body.find_first_not_of(" \t\r\n") == std::string::npos) {
    if (allow_empty) return json::object();
    throw HttpError{400, "empty_body", "request body is required", {}};
  }
  try {
    json doc = json::parse(body);
    if (!doc.is_object()) throw HttpError{400, "bad_body", "request body must be a JSON object", {}};
    return doc;
  } catch (const json::parse_error& e) {
    throw HttpError{400, "bad_json", e.what(), {}};
  }
}

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::string cur;
  const std::string clean = path.substr(0, path.find('?'));
  for (char c : clean) {
    if (c == '/') {
      if (!cur.empty()) parts.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) parts.push_back(std::move(cur));
  return parts;
}

PipelineOptions pipeline_options(const json& body, PipelineOptions base) {
  try {
    if (auto it = body.find("k"); it != body.end() && !it->is_null()) {
      if (it->is_string() && it->get<std::string>() == "auto")
        base.k.reset();
      else
        base.k = it->get<int>();
    }
    if (auto it = body.find("algorithms"); it != body.end()) {
      base.algorithms.clear();
      for (const auto& a : *it) base.algorithms.push_back(parse_algorithm(a.get<std::string>()));
    }
    if (auto it = body.find("linkage"); it != body.end()) base.linkage = parse_linkage(it->get<std::string>());
    if (auto it = body.find("connectivity_L"); it != body.end()) base.connectivity_L = it->get<int>();
    if (auto it = body.find("gap_B"); it != body.end()) base.gap_bootstrap = it->get<int>();
    if (auto it = body.find("seed"); it != body.end()) base.seed = it->get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw HttpError{400, "bad_options", e.what(), {}};
  } catch (const std::invalid_argument& e) {
    throw HttpError{400, "bad_options", e.what(), {}};
  }
  return base;
}

void write_atomically(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::create_directories(path.parent_path());
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write snapshot", tmp);
    out << text;
  }
  std::filesystem::rename(tmp, path);
}

long numeric_suffix(const std::string& id) {
  try {
    return id.size() > 1 ? std::stol(id.substr(1)) : 0;
  } catch (...) {
    return 0;
  }
}

}  // namespace

std::string to_string(Override o) { return o == Override::forced_in ? "forced_in" : "forced_out"; }

Service::Service() : Service(Options{}) {}

Service::Service(Options options) : options_(std::move(options)) {
  if (options_.snapshot_dir) load_snapshots();
}

Response Service::handle(const std::string& method, const std::string& path, const std::string& body) {
  try {
    const auto p = split_path(path);
    if (p.size() == 1 && p[0] == "problems" && method == "POST") return create_problem(body);
    if (p.size() == 2 && p[0] == "problems" && method == "GET") return get_problem(p[1]);
    if (p.size() == 3 && p[0] == "problems" && p[2] == "analyze" && method == "POST") return analyze(p[1], body);
    if (p.size() == 3 && p[0] == "problems" && p[2] == "report" && method == "GET") return get_report(p[1]);
    if (p.size() == 3 && p[0] == "problems" && p[2] == "sessions" && method == "POST")
      return create_session(p[1], body);
    if (p.size() == 2 && p[0] == "sessions" && method == "GET") return get_session(p[1], false);
    if (p.size() == 2 && p[0] == "sessions" && method == "PATCH") return patch_session(p[1], body);
    if (p.size() == 3 && p[0] == "sessions" && p[2] == "plan" && method == "GET") return get_session(p[1], true);
    throw HttpError{404, "not_found", method + " " + path + " is not a known route", {}};
  } catch (const HttpError& e) {
    return error_reply(e);
  } catch (const ValidationError& e) {
    return error_reply({422, "validation_error", e.what(), e.offending_id()});
  } catch (const ParseError& e) {
    return error_reply({400, "parse_error", e.what(), {}});
  } catch (const DegenerateInput& e) {
    return error_reply({422, "degenerate_input", e.what(), {}});
  } catch (const std::exception& e) {
    return error_reply({500, "internal_error", e.what(), {}});
  }
}

std::string Service::add_problem(ProblemInstance problem) {
  auto entry = std::make_shared<ProblemEntry>();
  entry->problem = std::make_shared<const ProblemInstance>(make_problem(std::move(problem)));
  {
    std::unique_lock lock(registry_mutex_);
    entry->id = "p" + std::to_string(next_problem_++);
    problems_[entry->id] = entry;
  }
  save_problem_snapshot(*entry);
  return entry->id;
}

Response Service::create_problem(const std::string& body) {
  json doc = parse_body(body, false);
  ProblemInstance problem = problem_from_json(doc);
  std::vector<std::string> warnings = problem.warnings;
  const std::string id = add_problem(std::move(problem));
  return reply(201, json{{"id", id}, {"warnings", warnings}});
}

std::shared_ptr<Service::ProblemEntry> Service::find_problem(const std::string& id) {
  std::shared_lock lock(registry_mutex_);
  auto it = problems_.find(id);
  if (it == problems_.end()) throw HttpError{404, "unknown_problem", "no problem with id " + id, id};
  return it->second;
}

std::shared_ptr<Service::Session> Service::find_session(const std::string& sid) {
  std::shared_lock lock(registry_mutex_);
  auto it = sessions_.find(sid);
  if (it == sessions_.end()) throw HttpError{404, "unknown_session", "no session with id " + sid, sid};
  return it->second;
}

Response Service::get_problem(const std::string& id) {
  auto entry = find_problem(id);
  json doc = problem_to_json(*entry->problem);
  doc["id"] = id;
  return reply(200, doc);
}

std::shared_ptr<const PipelineReport> Service::ensure_report(ProblemEntry& entry, const PipelineOptions& options,
                                                            bool force) {
  std::lock_guard lock(entry.mutex);
  if (!entry.report || force) {
    entry.report = std::make_shared<const PipelineReport>(run_pipeline(*entry.problem, options));
    entry.report_options = options;
  }
  return entry.report;
}

Response Service::analyze(const std::string& id, const std::string& body) {
  auto entry = find_problem(id);
  const PipelineOptions options = pipeline_options(parse_body(body, true), options_.pipeline);
  auto report = ensure_report(*entry, options, true);
  return reply(200, to_json(*report, *entry->problem));
}

Response Service::get_report(const std::string& id) {
  auto entry = find_problem(id);
  std::shared_ptr<const PipelineReport> report;
  {
    std::lock_guard lock(entry->mutex);
    report = entry->report;
  }
  if (!report) throw HttpError{404, "not_analyzed", "problem " + id + " has not been analyzed", id};
  return reply(200, to_json(*report, *entry->problem));
}

Response Service::create_session(const std::string& id, const std::string& body) {
  auto entry = find_problem(id);
  const json doc = parse_body(body, true);
  auto report = ensure_report(*entry, options_.pipeline, false);

  auto s = std::make_shared<Session>();
  s->problem_id = id;
  s->problem = entry->problem;
  s->algorithm = report->scoreboard.winner;
  s->k = report->analyzed_ks.front();
  try {
    if (auto it = doc.find("k"); it != doc.end() && !it->is_null()) s->k = it->get<int>();
    if (auto it = doc.find("budget"); it != doc.end() && !it->is_null()) s->budget = it->get<double>();
  } catch (const json::exception& e) {
    throw HttpError{400, "bad_body", e.what(), {}};
  }
  const auto n = static_cast<int>(entry->problem->size());
  if (s->k < 2 || s->k > n - 1)
    throw HttpError{422, "bad_k", "k must lie in [2, " + std::to_string(n - 1) + "]", {}};

  Partition partition;
  if (const Partition* cached = report->partition(s->algorithm, s->k))
    partition = *cached;
  else
    partition = cluster_with(report->features.standardized, s->algorithm, s->k, entry->report_options);
  s->base_core = core_set(map_moscow(partition, report->features), partition);

  {
    std::unique_lock lock(registry_mutex_);
    s->id = "s" + std::to_string(next_session_++);
    sessions_[s->id] = s;
  }
  std::lock_guard lock(s->mutex);
  save_session_snapshot(*s);
  return reply(201, session_json(*s));
}

ReleasePlan Service::derived_plan(const Session& s) {
  const ProblemInstance& problem = *s.problem;
  std::vector<bool> in(problem.size(), false), blocked(problem.size(), false);
  for (auto i : s.base_core) in[i] = true;
  for (const auto& [id, o] : s.overrides) {
    const auto i = problem.index_of(id);
    in[i] = o == Override::forced_in;
    blocked[i] = o == Override::forced_out;
  }
  Selection seed;
  for (std::size_t i = 0; i < in.size(); ++i)
    if (in[i]) seed.push_back(i);
  return make_plan(problem, seed, close_dependencies(seed, problem, &blocked), s.budget);
}

json Service::session_json(const Session& s) {
  json overrides = json::object();
  for (const auto& [id, o] : s.overrides) overrides[id] = to_string(o);
  return {{"id", s.id},
          {"problem_id", s.problem_id},
          {"k", s.k},
          {"algorithm", to_string(s.algorithm)},
          {"revision", s.revision},
          {"base_core", ids_of(*s.problem, s.base_core)},
          {"overrides", std::move(overrides)},
          {"budget", s.budget ? json(*s.budget) : json(nullptr)},
          {"plan", plan_to_json(derived_plan(s))}};
}

Response Service::get_session(const std::string& sid, bool plan_only) {
  auto s = find_session(sid);
  std::lock_guard lock(s->mutex);
  if (plan_only) {
    json plan = plan_to_json(derived_plan(*s));
    plan["revision"] = s->revision;
    return reply(200, plan);
  }
  return reply(200, session_json(*s));
}

Response Service::patch_session(const std::string& sid, const std::string& body) {
  const json doc = parse_body(body, false);
  auto s = find_session(sid);
  std::lock_guard lock(s->mutex);

  const bool has_toggle = doc.contains("toggle");
  const bool has_budget = doc.contains("budget");
  if (has_toggle == has_budget)
    throw HttpError{400, "bad_patch", "body must contain exactly one of 'toggle' or 'budget'", {}};
  if (auto it = doc.find("expectedRevision"); it != doc.end() && !it->is_null()) {
    if (!it->is_number_integer()) throw HttpError{400, "bad_patch", "expectedRevision must be an integer", {}};
    if (it->get<long>() != s->revision)
      throw HttpError{409, "stale_revision",
                      "session is at revision " + std::to_string(s->revision) + ", request expected " +
                          std::to_string(it->get<long>()),
                      {}};
  }

  if (has_toggle) {
    if (!doc["toggle"].is_string()) throw HttpError{400, "bad_patch", "toggle must be a requirement id", {}};
    const std::string id = doc["toggle"].get<std::string>();
    if (!s->problem->contains(id)) throw HttpError{422, "unknown_requirement", "no requirement with id " + id, id};
    if (s->overrides.erase(id) == 0) {
      const auto viable = derived_plan(*s).viable;
      const bool selected = std::find(viable.begin(), viable.end(), id) != viable.end();
      s->overrides[id] = selected ? Override::forced_out : Override::forced_in;
    }
  } else {
    const json& b = doc["budget"];
    if (b.is_null())
      s->budget.reset();
    else if (b.is_number())
      s->budget = b.get<double>();
    else
      throw HttpError{400, "bad_patch", "budget must be a number or null", {}};
  }
  ++s->revision;
  save_session_snapshot(*s);
  return reply(200, session_json(*s));
}

void Service::save_problem_snapshot(const ProblemEntry& entry) {
  if (!options_.snapshot_dir) return;
  json doc{{"id", entry.id}, {"problem", problem_to_json(*entry.problem)}};
  write_atomically(*options_.snapshot_dir / "problems" / (entry.id + ".json"), doc.dump(2));
}

void Service::save_session_snapshot(const Session& s) {
  if (!options_.snapshot_dir) return;
  json overrides = json::object();
  for (const auto& [id, o] : s.overrides) overrides[id] = to_string(o);
  json doc{{"id", s.id},
           {"problem_id", s.problem_id},
           {"k", s.k},
           {"algorithm", to_string(s.algorithm)},
           {"revision", s.revision},
           {"base_core", ids_of(*s.problem, s.base_core)},
           {"overrides", std::move(overrides)},
           {"budget", s.budget ? json(*s.budget) : json(nullptr)}};
  write_atomically(*options_.snapshot_dir / "sessions" / (s.id + ".json"), doc.dump(2));
}

void Service::load_snapshots() {
  namespace fs = std::filesystem;
  const fs::path root = *options_.snapshot_dir;
  auto read = [](const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read snapshot", path.string());
    try {
      return json::parse(in);
    } catch (const json::parse_error& e) {
      throw ParseError(path.string() + ": " + e.what());
    }
  };
  auto files = [](const fs::path& dir) {
    std::vector<fs::path> out;
    if (fs::is_directory(dir))
      for (const auto& e : fs::directory_iterator(dir))
        if (e.path().extension() == ".json") out.push_back(e.path());
    std::sort(out.begin(), out.end());
    return out;
  };

  for (const auto& path : files(root / "problems")) {
    const json doc = read(path);
    auto entry = std::make_shared<ProblemEntry>();
    entry->id = doc.at("id").get<std::string>();
    entry->problem = std::make_shared<const ProblemInstance>(problem_from_json(doc.at("problem")));
    next_problem_ = std::max(next_problem_, numeric_suffix(entry->id) + 1);
    problems_[entry->id] = entry;
  }
  for (const auto& path : files(root / "sessions")) {
    const json doc = read(path);
    auto s = std::make_shared<Session>();
    s->id = doc.at("id").get<std::string>();
    s->problem_id = doc.at("problem_id").get<std::string>();
    auto it = problems_.find(s->problem_id);
    if (it == problems_.end()) throw ValidationError("session snapshot refers to unknown problem", s->problem_id);
    s->problem = it->second->problem;
    s->k = doc.at("k").get<int>();
    s->algorithm = parse_algorithm(doc.at("algorithm").get<std::string>());
    s->revision = doc.at("revision").get<long>();
    for (const auto& id : doc.at("base_core")) s->base_core.push_back(s->problem->index_of(id.get<std::string>()));
    std::sort(s->base_core.begin(), s->base_core.end());
    for (const auto& [id, o] : doc.at("overrides").items()) {
      s->problem->index_of(id);
      s->overrides[id] = o.get<std::string>() == "forced_in" ? Override::forced_in : Override::forced_out;
    }
    if (!doc.at("budget").is_null()) s->budget = doc.at("budget").get<double>();
    next_session_ = std::max(next_session_, numeric_suffix(s->id) + 1);
    sessions_[s->id] = s;
  }
}

void serve(Service& service, const std::string& host, int port) {
  httplib::Server server;
  auto route = [&service](const httplib::Request& req, httplib::Response& res) {
    const Response r = service.handle(req.method, req.path, req.body);
    res.status = r.status;
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_content(r.body, "application/json");
  };
  const std::string any = R"(/.*)";
  server.Get(any, route);
  server.Post(any, route);
  server.Patch(any, route);
  server.Options(any, [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_header("Access-Control-Allow-Methods", "GET, POST, PATCH, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.status = 204;
  });
  if (!server.bind_to_port(host, port)) throw IoError("cannot bind", host + ":" + std::to_string(port));
  server.listen_after_bind();
}

}  // namespace reqclust
