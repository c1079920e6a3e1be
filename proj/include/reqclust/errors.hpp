#pragma once

#include <stdexcept>
#include <string>

namespace reqclust {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input (bad JSON, bad CSV row, wrong value type).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// An invariant of the problem instance is violated. `offending_id()` names
/// the requirement, stakeholder or pair that caused it, when there is one.
class ValidationError : public Error {
 public:
  ValidationError(const std::string& message, std::string offending_id = {})
      : Error(message), offending_id_(std::move(offending_id)) {}

  const std::string& offending_id() const noexcept { return offending_id_; }

 private:
  std::string offending_id_;
};

class IoError : public Error {
 public:
  IoError(const std::string& message, std::string path)
      : Error(message + ": " + path), path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

/// Input on which clustering is meaningless (e.g. every point identical).
class DegenerateInput : public Error {
 public:
  using Error::Error;
};

}  // namespace reqclust
