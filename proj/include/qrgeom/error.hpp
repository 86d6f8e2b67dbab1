#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qrgeom {

// Failure categories. The CLI maps them onto process exit codes.
enum class ErrorKind { validation, resource_cap, usage, computation };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Raised by loaders and constructors; carries every finding, not just the first.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> findings)
      : Error(ErrorKind::validation, join(findings)), findings_(std::move(findings)) {}
  explicit ValidationError(const std::string& finding)
      : ValidationError(std::vector<std::string>{finding}) {}

  const std::vector<std::string>& findings() const noexcept { return findings_; }

 private:
  static std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (const auto& s : items) {
      if (!out.empty()) out += "; ";
      out += s;
    }
    return out;
  }
  std::vector<std::string> findings_;
};

class CapExceeded : public Error {
 public:
  explicit CapExceeded(const std::string& what) : Error(ErrorKind::resource_cap, what) {}
};

}  // namespace qrgeom
