#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

namespace qrgeom {

// Verdict of a checker: pass/fail, the tight constant it measured, and the
// worst-case witness (a pair, a curve or a vertex set, as vertex indices).
struct Certificate {
  std::string name;
  bool pass = true;
  double estimate = 0.0;
  std::vector<std::size_t> witness;
  std::string witness_kind;
  std::vector<std::string> flags;
  std::map<std::string, double> values;

  void fail(std::vector<std::size_t> w, std::string kind) {
    if (pass) {
      witness = std::move(w);
      witness_kind = std::move(kind);
    }
    pass = false;
  }

  bool has_flag(const std::string& f) const {
    for (const auto& x : flags)
      if (x == f) return true;
    return false;
  }
};

}  // namespace qrgeom
