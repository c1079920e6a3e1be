#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "reqclust/errors.hpp"
#include "reqclust/pipeline.hpp"
#include "reqclust/service.hpp"

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;
constexpr int kExitInternal = 3;

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw reqclust::IoError("cannot write", path);
  out << text;
  if (!out) throw reqclust::IoError("write failed", path);
}

std::vector<reqclust::Algorithm> parse_algorithms(const std::string& list) {
  std::vector<reqclust::Algorithm> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(reqclust::parse_algorithm(item));
  if (out.empty()) throw std::invalid_argument("--algorithms is empty");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Requirement clustering for next-release planning"};
  app.require_subcommand(1);

  std::string problem_path, k_text = "auto", algorithms = "kmeans,pam,hierarchical", linkage = "ward";
  std::string out_path, csv_path;
  int connectivity_L = reqclust::kDefaultConnectivityL, gap_B = 100;
  std::uint64_t seed = 42;
  auto* analyze = app.add_subcommand("analyze", "Run the full pipeline and write a JSON report");
  analyze->add_option("problem", problem_path, "Problem JSON file or CSV bundle directory")->required();
  analyze->add_option("--k", k_text, "Number of clusters, or 'auto' for the majority estimate");
  analyze->add_option("--algorithms", algorithms, "Comma-separated subset of kmeans,pam,hierarchical");
  analyze->add_option("--linkage", linkage, "ward, average, complete or single");
  analyze->add_option("--connectivity-L", connectivity_L, "Neighbourhood size of the connectivity index");
  analyze->add_option("--gap-B", gap_B, "Reference sets for the gap statistic");
  analyze->add_option("--seed", seed, "Seed for every randomized stage");
  analyze->add_option("--out", out_path, "Report path (default: stdout)");
  analyze->add_option("--csv", csv_path, "Also write the validity scoreboard as CSV");

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "Check a problem file and print its summary");
  validate->add_option("problem", validate_path, "Problem JSON file or CSV bundle directory")->required();

  int port = 8080;
  std::string host = "127.0.0.1", serve_problem, snapshot_dir;
  auto* serve = app.add_subcommand("serve", "Serve the HTTP JSON API");
  serve->add_option("--port", port, "TCP port");
  serve->add_option("--host", host, "Address to bind");
  serve->add_option("--problem", serve_problem, "Problem to preload as p1");
  serve->add_option("--snapshot-dir", snapshot_dir, "Directory for session snapshots");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitValidation;
  }

  try {
    if (*analyze) {
      reqclust::PipelineOptions options;
      if (k_text != "auto") {
        std::size_t used = 0;
        options.k = std::stoi(k_text, &used);
        if (used != k_text.size()) throw std::invalid_argument("--k must be 'auto' or an integer");
      }
      options.algorithms = parse_algorithms(algorithms);
      options.linkage = reqclust::parse_linkage(linkage);
      options.connectivity_L = connectivity_L;
      options.gap_bootstrap = gap_B;
      options.seed = seed;
      const auto problem = reqclust::load_problem_file(problem_path);
      for (const auto& w : problem.warnings) std::cerr << "warning: " << w << '\n';
      const auto report = reqclust::run_pipeline(problem, options);
      const std::string text = reqclust::to_json(report, problem).dump(2) + "\n";
      if (out_path.empty())
        std::cout << text;
      else
        write_file(out_path, text);
      if (!csv_path.empty()) write_file(csv_path, reqclust::scoreboard_csv(report.scoreboard));
      return 0;
    }
    if (*validate) {
      const auto problem = reqclust::load_problem_file(validate_path);
      for (const auto& w : problem.warnings) std::cerr << "warning: " << w << '\n';
      std::cout << "ok: " << problem.size() << " requirements, " << problem.stakeholders.size()
                << " stakeholders, " << problem.dependencies.size() << " dependencies, total effort "
                << problem.total_effort() << ", total satisfaction " << problem.total_satisfaction() << '\n';
      return 0;
    }
    if (*serve) {
      reqclust::Service::Options options;
      if (!snapshot_dir.empty()) options.snapshot_dir = snapshot_dir;
      reqclust::Service service(options);
      if (!serve_problem.empty()) {
        const std::string id = service.add_problem(reqclust::load_problem_file(serve_problem));
        std::cerr << "loaded " << serve_problem << " as " << id << '\n';
      }
      std::cerr << "listening on http://" << host << ':' << port << '\n';
      reqclust::serve(service, host, port);
      return 0;
    }
  } catch (const reqclust::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const reqclust::ValidationError& e) {
    std::cerr << "error: " << e.what();
    if (!e.offending_id().empty()) std::cerr << " [" << e.offending_id() << ']';
    std::cerr << '\n';
    return kExitValidation;
  } catch (const reqclust::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const reqclust::DegenerateInput& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return 0;
}
