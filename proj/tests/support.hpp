#pragma once

#include <fstream>
#include <string>

#include "reqclust/model.hpp"

inline std::string fixture(const std::string& name) { return std::string(REQCLUST_FIXTURES_DIR) + "/" + name; }

inline reqclust::ProblemInstance load_fixture(const std::string& name) {
  return reqclust::load_problem_file(fixture(name));
}

inline reqclust::ProblemInstance problem_from_text(const std::string& text) {
  return reqclust::problem_from_json(nlohmann::json::parse(text));
}
