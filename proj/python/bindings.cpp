#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "reqclust/errors.hpp"
#include "reqclust/pipeline.hpp"

namespace py = pybind11;
using namespace reqclust;

namespace {

ProblemInstance problem_from_text(const std::string& text) {
  try {
    return problem_from_json(nlohmann::json::parse(text));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(e.what());
  }
}

py::dict partition_dict(const Partition& p) {
  py::dict d;
  d["k"] = p.k;
  d["labels"] = p.labels;
  d["centroids"] = p.centroids;
  d["medoids"] = p.medoids;
  d["algorithm"] = to_string(p.algorithm);
  return d;
}

py::dict estimate_dict(const KEstimate& e) {
  py::dict d;
  d["method"] = e.method;
  d["ks"] = e.ks;
  d["values"] = e.values;
  d["standard_errors"] = e.standard_errors;
  d["chosen_k"] = e.chosen_k;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Requirement clustering for next-release planning";

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<DegenerateInput>(m, "DegenerateInput", PyExc_ValueError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  m.def("standardize", [](const Matrix& raw) {
    std::vector<std::string> ids;
    for (Eigen::Index i = 0; i < raw.rows(); ++i) ids.push_back(std::to_string(i));
    return standardize(std::move(ids), raw).standardized;
  }, py::arg("raw"), "z-score every column with the sample standard deviation");

  m.def("kmeans", [](const Matrix& x, int k, int restarts, std::uint64_t seed) {
    return partition_dict(kmeans(x, k, {restarts, 100, seed}));
  }, py::arg("points"), py::arg("k"), py::arg("restarts") = 25, py::arg("seed") = 42);
  m.def("pam", [](const Matrix& x, int k) { return partition_dict(pam(x, k)); }, py::arg("points"), py::arg("k"));
  m.def("hierarchical", [](const Matrix& x, int k, const std::string& linkage) {
    return partition_dict(cut_dendrogram(hierarchical(x, parse_linkage(linkage)), x, k));
  }, py::arg("points"), py::arg("k"), py::arg("linkage") = "ward");

  m.def("validity", [](const Matrix& x, const std::vector<int>& labels, int L) {
    const Partition p = make_partition(x, labels, Algorithm::kmeans);
    const ValidityReport r = evaluate(x, euclidean_distance_matrix(x), p, L);
    py::dict d;
    d["connectivity"] = r.connectivity;
    d["dunn"] = r.dunn;
    d["silhouette"] = r.silhouette;
    d["calinski_harabasz"] = r.calinski_harabasz;
    return d;
  }, py::arg("points"), py::arg("labels"), py::arg("L") = kDefaultConnectivityL);

  m.def("estimate_k", [](const Matrix& x, int k_max, int gap_B, std::uint64_t seed) {
    if (k_max <= 0) k_max = default_k_max(x.rows());
    const Clusterer c = kmeans_clusterer({25, 100, seed});
    py::dict d;
    const auto e = elbow_k(x, 1, k_max, c);
    const auto s = silhouette_k(x, 2, k_max, c);
    const auto g = gap_k(x, 1, k_max, c, {gap_B, seed, 0});
    d["elbow"] = estimate_dict(e);
    d["silhouette"] = estimate_dict(s);
    d["gap"] = estimate_dict(g);
    d["majority_k"] = majority_k({e.chosen_k, s.chosen_k, g.chosen_k});
    return d;
  }, py::arg("points"), py::arg("k_max") = 0, py::arg("gap_B") = 100, py::arg("seed") = 42);

  m.def("validate_problem", [](const std::string& text) {
    return problem_to_json(problem_from_text(text)).dump();
  }, py::arg("problem_json"), "Validate a problem document and return its canonical JSON");

  m.def("analyze", [](const std::string& text, std::optional<int> k, std::uint64_t seed, int gap_B,
                      const std::string& linkage, int connectivity_L) {
    const ProblemInstance problem = problem_from_text(text);
    PipelineOptions o;
    o.k = k;
    o.seed = seed;
    o.gap_bootstrap = gap_B;
    o.linkage = parse_linkage(linkage);
    o.connectivity_L = connectivity_L;
    PipelineReport r;
    {
      py::gil_scoped_release release;
      r = run_pipeline(problem, o);
    }
    return to_json(r, problem).dump();
  }, py::arg("problem_json"), py::arg("k") = py::none(), py::arg("seed") = 42, py::arg("gap_B") = 100,
     py::arg("linkage") = "ward", py::arg("connectivity_L") = kDefaultConnectivityL);

  m.def("analyze_file", [](const std::string& path, std::uint64_t seed) {
    const ProblemInstance problem = load_problem_file(path);
    PipelineOptions o;
    o.seed = seed;
    return to_json(run_pipeline(problem, o), problem).dump();
  }, py::arg("path"), py::arg("seed") = 42);
}
