#include "reqclust/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "reqclust/errors.hpp"

namespace reqclust {

namespace {

using json = nlohmann::json;

std::pair<std::string, std::string> canonical_pair(const std::string& a, const std::string& b) {
  return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
}

double lookup_pair(const std::map<std::pair<std::string, std::string>, double>& m,
                   const std::string& a, const std::string& b) {
  if (a == b) return 0.0;
  auto it = m.find(canonical_pair(a, b));
  return it == m.end() ? 0.0 : it->second;
}

void require_finite(double v, const std::string& what, const std::string& id) {
  if (!std::isfinite(v)) throw ValidationError(what + " is not finite for '" + id + "'", id);
}

// Strongly connected components of the implication graph with more than one
// member; each is a co-selection group.
std::vector<std::vector<std::size_t>> implication_cycles(const ProblemInstance& p) {
  const std::size_t n = p.size();
  std::vector<std::vector<std::size_t>> adj(n);
  for (const auto& d : p.dependencies) {
    if (d.kind == DependencyKind::implication) adj[p.index_of(d.from)].push_back(p.index_of(d.to));
  }
  std::vector<int> index(n, -1), low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  std::vector<std::vector<std::size_t>> out;
  int counter = 0;
  std::function<void(std::size_t)> visit = [&](std::size_t v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack[v] = true;
    for (auto w : adj[v]) {
      if (index[w] < 0) {
        visit(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack[w]) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      std::vector<std::size_t> comp;
      std::size_t w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack[w] = false;
        comp.push_back(w);
      } while (w != v);
      if (comp.size() > 1) {
        std::sort(comp.begin(), comp.end());
        out.push_back(std::move(comp));
      }
    }
  };
  for (std::size_t v = 0; v < n; ++v)
    if (index[v] < 0) visit(v);
  std::sort(out.begin(), out.end());
  return out;
}

// Minimal RFC 4180 reader: quoted fields, doubled quotes, CRLF tolerant.
std::vector<std::vector<std::string>> read_csv(std::istream& in, const std::string& path) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool any = false;
  char c;
  while (in.get(c)) {
    any = true;
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field.push_back('"');
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && in.peek() == '\n') in.get(c);
      row.push_back(std::move(field));
      field.clear();
      if (!(row.size() == 1 && row[0].empty())) rows.push_back(std::move(row));
      row.clear();
    } else {
      field.push_back(c);
    }
  }
  if (quoted) throw ParseError("unterminated quoted field in " + path);
  if (any && (!field.empty() || !row.empty())) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::string path;

  std::size_t column(const std::string& name) const {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw ParseError(path + ": missing column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  }
  bool has(const std::string& name) const {
    return std::find(header.begin(), header.end(), name) != header.end();
  }
  const std::string& cell(std::size_t row, std::size_t col) const {
    if (col >= rows[row].size())
      throw ParseError(path + ": row " + std::to_string(row + 2) + " has too few fields");
    return rows[row][col];
  }
};

std::optional<CsvTable> read_table(const std::filesystem::path& file, bool required) {
  std::ifstream in(file, std::ios::binary);
  if (!in) {
    if (required) throw IoError("cannot open", file.string());
    return std::nullopt;
  }
  auto rows = read_csv(in, file.string());
  if (rows.empty()) throw ParseError(file.string() + ": empty file");
  CsvTable t;
  t.path = file.string();
  t.header = std::move(rows.front());
  for (auto& h : t.header) {
    h.erase(0, h.find_first_not_of(" \t"));
    h.erase(h.find_last_not_of(" \t") + 1);
  }
  t.rows.assign(std::make_move_iterator(rows.begin() + 1), std::make_move_iterator(rows.end()));
  return t;
}

double parse_number(const std::string& text, const std::string& where) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &pos);
  } catch (const std::exception&) {
    throw ParseError(where + ": '" + text + "' is not a number");
  }
  while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  if (pos != text.size()) throw ParseError(where + ": '" + text + "' is not a number");
  return v;
}

template <class T>
T get_field(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) throw ParseError(where + ": expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(where + ": missing key '" + key + "'");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw ParseError(where + ": key '" + std::string(key) + "' has the wrong type");
  }
}

std::map<std::pair<std::string, std::string>, double> parse_deltas(
    const json& arr, const std::string& where, std::vector<std::string>& warnings) {
  if (!arr.is_array()) throw ParseError(where + ": expected an array");
  std::map<std::pair<std::string, std::string>, double> out;
  for (const auto& e : arr) {
    auto i = get_field<std::string>(e, "i", where);
    auto j = get_field<std::string>(e, "j", where);
    auto delta = get_field<double>(e, "delta", where);
    if (i == j) throw ValidationError(where + ": self-interaction on '" + i + "'", i);
    auto key = canonical_pair(i, j);
    auto [it, inserted] = out.emplace(key, delta);
    if (inserted) continue;
    if (it->second != delta)
      throw ValidationError(where + ": conflicting duplicate entries for (" + key.first + ", " +
                                key.second + ")",
                            key.first + "," + key.second);
    warnings.push_back(where + ": duplicate entry (" + key.first + ", " + key.second + ") collapsed");
  }
  return out;
}

}  // namespace

std::string to_string(DependencyKind kind) {
  switch (kind) {
    case DependencyKind::implication: return "implies";
    case DependencyKind::combination: return "combination";
    case DependencyKind::exclusion: return "exclusion";
  }
  return "implies";
}

DependencyKind parse_dependency_kind(const std::string& text) {
  if (text == "implies" || text == "implication") return DependencyKind::implication;
  if (text == "combination" || text == "coupling") return DependencyKind::combination;
  if (text == "exclusion" || text == "excludes") return DependencyKind::exclusion;
  throw ParseError("unknown dependency kind '" + text + "'");
}

double InteractionMatrices::satisfaction(const std::string& a, const std::string& b) const {
  return lookup_pair(delta_s, a, b);
}

double InteractionMatrices::effort(const std::string& a, const std::string& b) const {
  return lookup_pair(delta_e, a, b);
}

std::size_t ProblemInstance::index_of(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw ValidationError("unknown requirement id '" + id + "'", id);
  return it->second;
}

double ProblemInstance::total_effort() const {
  double t = 0.0;
  for (const auto& r : requirements) t += r.effort;
  return t;
}

double ProblemInstance::total_satisfaction() const {
  double t = 0.0;
  for (double s : satisfaction) t += s;
  return t;
}

std::vector<double> compute_satisfaction(const ProblemInstance& problem) {
  std::unordered_map<std::string, double> weight;
  for (const auto& s : problem.stakeholders) weight[s.id] = s.weight;
  std::unordered_map<std::string, std::size_t> req;
  for (std::size_t j = 0; j < problem.requirements.size(); ++j) req[problem.requirements[j].id] = j;
  std::vector<double> s(problem.requirements.size(), 0.0);
  for (const auto& v : problem.values) s[req.at(v.requirement)] += weight.at(v.stakeholder) * v.value;
  return s;
}

ProblemInstance make_problem(ProblemInstance p) {
  p.index_.clear();
  if (p.requirements.size() < 2)
    throw ValidationError("a problem needs at least 2 requirements");
  for (std::size_t j = 0; j < p.requirements.size(); ++j) {
    const auto& r = p.requirements[j];
    if (r.id.empty()) throw ValidationError("requirement with empty id");
    if (!p.index_.emplace(r.id, j).second)
      throw ValidationError("duplicate requirement id '" + r.id + "'", r.id);
    require_finite(r.effort, "effort", r.id);
    if (r.effort < 0.0) throw ValidationError("negative effort for '" + r.id + "'", r.id);
  }

  std::unordered_map<std::string, double> weights;
  for (const auto& s : p.stakeholders) {
    if (s.id.empty()) throw ValidationError("stakeholder with empty id");
    require_finite(s.weight, "weight", s.id);
    if (s.weight <= 0.0)
      throw ValidationError("stakeholder weight must be positive for '" + s.id + "'", s.id);
    if (!weights.emplace(s.id, s.weight).second)
      throw ValidationError("duplicate stakeholder id '" + s.id + "'", s.id);
  }

  std::set<std::pair<std::string, std::string>> seen_values;
  for (const auto& v : p.values) {
    if (!weights.count(v.stakeholder))
      throw ValidationError("value references unknown stakeholder '" + v.stakeholder + "'",
                            v.stakeholder);
    if (!p.index_.count(v.requirement))
      throw ValidationError("value references unknown requirement '" + v.requirement + "'",
                            v.requirement);
    require_finite(v.value, "value", v.requirement);
    if (v.value < 0.0)
      throw ValidationError("negative value for (" + v.stakeholder + ", " + v.requirement + ")",
                            v.requirement);
    if (!seen_values.emplace(v.stakeholder, v.requirement).second)
      throw ValidationError("duplicate value for (" + v.stakeholder + ", " + v.requirement + ")",
                            v.requirement);
  }

  if (p.values.empty() && !p.satisfaction_supplied)
    throw ValidationError("either values or satisfactions must be provided");
  if (p.satisfaction_supplied) {
    if (p.satisfaction.size() != p.requirements.size())
      throw ValidationError("satisfactions must cover every requirement");
    for (std::size_t j = 0; j < p.satisfaction.size(); ++j) {
      require_finite(p.satisfaction[j], "satisfaction", p.requirements[j].id);
      if (p.satisfaction[j] < 0.0)
        throw ValidationError("negative satisfaction for '" + p.requirements[j].id + "'",
                              p.requirements[j].id);
    }
    if (!p.values.empty()) {
      auto computed = compute_satisfaction(p);
      for (std::size_t j = 0; j < computed.size(); ++j) {
        if (std::abs(computed[j] - p.satisfaction[j]) > 1e-9)
          throw ValidationError("supplied satisfaction disagrees with weighted values for '" +
                                    p.requirements[j].id + "'",
                                p.requirements[j].id);
      }
    }
  } else {
    p.satisfaction = compute_satisfaction(p);
  }

  // Dependencies: check ids, canonicalize symmetric kinds, collapse duplicates.
  std::vector<Dependency> deps;
  std::set<std::tuple<int, std::string, std::string>> seen_deps;
  for (auto d : p.dependencies) {
    for (const auto* id : {&d.from, &d.to}) {
      if (!p.index_.count(*id))
        throw ValidationError("dependency references unknown requirement '" + *id + "'", *id);
    }
    if (d.from == d.to)
      throw ValidationError("dependency of '" + d.from + "' on itself", d.from);
    if (d.kind != DependencyKind::implication && d.to < d.from) std::swap(d.from, d.to);
    if (!seen_deps.emplace(static_cast<int>(d.kind), d.from, d.to).second) {
      p.warnings.push_back("duplicate dependency " + to_string(d.kind) + " (" + d.from + ", " +
                           d.to + ") collapsed");
      continue;
    }
    deps.push_back(std::move(d));
  }
  p.dependencies = std::move(deps);

  for (const auto* m : {&p.interactions.delta_s, &p.interactions.delta_e}) {
    for (const auto& [key, delta] : *m) {
      for (const auto* id : {&key.first, &key.second}) {
        if (!p.index_.count(*id))
          throw ValidationError("interaction references unknown requirement '" + *id + "'", *id);
      }
      if (key.first >= key.second)
        throw ValidationError("interaction key (" + key.first + ", " + key.second +
                                  ") is not canonical",
                              key.first);
      require_finite(delta, "interaction delta", key.first);
    }
  }

  if (p.effort_bound) {
    require_finite(*p.effort_bound, "effort_bound", "effort_bound");
    if (*p.effort_bound <= 0.0) throw ValidationError("effort_bound must be positive");
  }

  for (const auto& cycle : implication_cycles(p)) {
    std::string members;
    for (auto v : cycle) members += (members.empty() ? "" : ", ") + p.requirements[v].id;
    p.warnings.push_back("implication cycle {" + members + "} is treated as a co-selection group");
  }
  return p;
}

ProblemInstance problem_from_json(const json& doc) {
  if (!doc.is_object()) throw ParseError("problem document must be a JSON object");
  ProblemInstance p;

  auto reqs = doc.find("requirements");
  if (reqs == doc.end() || !reqs->is_array()) throw ParseError("'requirements' must be an array");
  for (const auto& r : *reqs) {
    Requirement req;
    req.id = get_field<std::string>(r, "id", "requirements");
    if (r.contains("name") && !r["name"].is_null()) req.name = get_field<std::string>(r, "name", "requirements");
    req.effort = get_field<double>(r, "effort", "requirements");
    p.requirements.push_back(std::move(req));
  }

  if (auto it = doc.find("stakeholders"); it != doc.end()) {
    if (!it->is_array()) throw ParseError("'stakeholders' must be an array");
    for (const auto& s : *it)
      p.stakeholders.push_back({get_field<std::string>(s, "id", "stakeholders"),
                                get_field<double>(s, "weight", "stakeholders")});
  }
  if (auto it = doc.find("values"); it != doc.end()) {
    if (!it->is_array()) throw ParseError("'values' must be an array");
    for (const auto& v : *it)
      p.values.push_back({get_field<std::string>(v, "stakeholder", "values"),
                          get_field<std::string>(v, "requirement", "values"),
                          get_field<double>(v, "value", "values")});
  }
  if (auto it = doc.find("satisfactions"); it != doc.end()) {
    if (!it->is_object()) throw ParseError("'satisfactions' must be an object of id -> number");
    std::unordered_map<std::string, double> given;
    for (const auto& [id, value] : it->items()) {
      if (!value.is_number()) throw ParseError("satisfaction for '" + id + "' is not a number");
      given[id] = value.get<double>();
    }
    p.satisfaction.resize(p.requirements.size());
    for (std::size_t j = 0; j < p.requirements.size(); ++j) {
      auto g = given.find(p.requirements[j].id);
      if (g == given.end())
        throw ValidationError("no satisfaction given for '" + p.requirements[j].id + "'",
                              p.requirements[j].id);
      p.satisfaction[j] = g->second;
      given.erase(g);
    }
    if (!given.empty()) {
      auto id = given.begin()->first;
      throw ValidationError("satisfaction given for unknown requirement '" + id + "'", id);
    }
    p.satisfaction_supplied = true;
  }
  if (auto it = doc.find("dependencies"); it != doc.end()) {
    if (!it->is_array()) throw ParseError("'dependencies' must be an array");
    for (const auto& d : *it)
      p.dependencies.push_back({parse_dependency_kind(get_field<std::string>(d, "kind", "dependencies")),
                                get_field<std::string>(d, "from", "dependencies"),
                                get_field<std::string>(d, "to", "dependencies")});
  }
  if (auto it = doc.find("interactions"); it != doc.end() && !it->is_null()) {
    if (!it->is_object()) throw ParseError("'interactions' must be an object");
    if (it->contains("deltaS")) p.interactions.delta_s = parse_deltas((*it)["deltaS"], "interactions.deltaS", p.warnings);
    if (it->contains("deltaE")) p.interactions.delta_e = parse_deltas((*it)["deltaE"], "interactions.deltaE", p.warnings);
  }
  if (auto it = doc.find("effort_bound"); it != doc.end() && !it->is_null()) {
    if (!it->is_number()) throw ParseError("'effort_bound' must be a number");
    p.effort_bound = it->get<double>();
  }
  // `extra_features` is reserved for further scoring dimensions and ignored.
  return make_problem(std::move(p));
}

json problem_to_json(const ProblemInstance& p) {
  json doc;
  json reqs = json::array();
  for (const auto& r : p.requirements) {
    json o{{"id", r.id}, {"effort", r.effort}};
    if (!r.name.empty()) o["name"] = r.name;
    reqs.push_back(std::move(o));
  }
  doc["requirements"] = std::move(reqs);
  json st = json::array();
  for (const auto& s : p.stakeholders) st.push_back({{"id", s.id}, {"weight", s.weight}});
  doc["stakeholders"] = std::move(st);
  if (!p.values.empty()) {
    json vals = json::array();
    for (const auto& v : p.values)
      vals.push_back({{"stakeholder", v.stakeholder}, {"requirement", v.requirement}, {"value", v.value}});
    doc["values"] = std::move(vals);
  }
  if (p.satisfaction_supplied) {
    json sat = json::object();
    for (std::size_t j = 0; j < p.size(); ++j) sat[p.requirements[j].id] = p.satisfaction[j];
    doc["satisfactions"] = std::move(sat);
  }
  json deps = json::array();
  for (const auto& d : p.dependencies)
    deps.push_back({{"kind", to_string(d.kind)}, {"from", d.from}, {"to", d.to}});
  doc["dependencies"] = std::move(deps);
  if (!p.interactions.empty()) {
    auto dump = [](const auto& m) {
      json a = json::array();
      for (const auto& [key, delta] : m) a.push_back({{"i", key.first}, {"j", key.second}, {"delta", delta}});
      return a;
    };
    doc["interactions"] = {{"deltaS", dump(p.interactions.delta_s)},
                           {"deltaE", dump(p.interactions.delta_e)}};
  }
  if (p.effort_bound) doc["effort_bound"] = *p.effort_bound;
  return doc;
}

ProblemInstance load_problem(std::istream& in) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  return problem_from_json(doc);
}

ProblemInstance load_csv_bundle(const std::filesystem::path& dir) {
  ProblemInstance p;
  auto reqs = read_table(dir / "requirements.csv", true);
  {
    auto id = reqs->column("id");
    auto effort = reqs->column("effort");
    auto name = reqs->has("name") ? std::optional(reqs->column("name")) : std::nullopt;
    for (std::size_t r = 0; r < reqs->rows.size(); ++r) {
      Requirement req;
      req.id = reqs->cell(r, id);
      req.effort = parse_number(reqs->cell(r, effort), reqs->path);
      if (name) req.name = reqs->cell(r, *name);
      p.requirements.push_back(std::move(req));
    }
  }
  if (auto st = read_table(dir / "stakeholders.csv", false)) {
    auto id = st->column("id");
    auto weight = st->column("weight");
    for (std::size_t r = 0; r < st->rows.size(); ++r)
      p.stakeholders.push_back({st->cell(r, id), parse_number(st->cell(r, weight), st->path)});
  }
  if (auto vals = read_table(dir / "values.csv", false)) {
    auto s = vals->column("stakeholder");
    auto q = vals->column("requirement");
    auto v = vals->column("value");
    for (std::size_t r = 0; r < vals->rows.size(); ++r)
      p.values.push_back({vals->cell(r, s), vals->cell(r, q), parse_number(vals->cell(r, v), vals->path)});
  }
  if (auto deps = read_table(dir / "dependencies.csv", false)) {
    auto kind = deps->column("kind");
    auto from = deps->column("from");
    auto to = deps->column("to");
    for (std::size_t r = 0; r < deps->rows.size(); ++r)
      p.dependencies.push_back(
          {parse_dependency_kind(deps->cell(r, kind)), deps->cell(r, from), deps->cell(r, to)});
  }
  return make_problem(std::move(p));
}

ProblemInstance load_problem_file(const std::filesystem::path& path) {
  std::error_code ec;
  if (std::filesystem::is_directory(path, ec)) return load_csv_bundle(path);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open problem file", path.string());
  return load_problem(in);
}

void save_problem(const ProblemInstance& problem, std::ostream& out) {
  out << problem_to_json(problem).dump(2) << '\n';
}

}  // namespace reqclust
