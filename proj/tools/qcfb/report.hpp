#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qcfb/system_file.hpp"

namespace qcfb::cli {

struct Verdict {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct NormValue {
  std::string name;
  double value = 0.0;
  std::string method;
  double certificate = 0.0;
};

/// Output of one subcommand, rendered as text or JSON.
struct Report {
  std::string command;
  Json input = Json::object();
  std::vector<std::string> lines;
  std::vector<Verdict> verdicts;
  NamedValues residuals;
  std::vector<NormValue> norms;
  std::vector<std::string> skipped;
  Json data = Json::object();
  std::optional<std::string> error;

  void verdict(std::string name, bool pass, std::string detail = {});
  int exit_code() const;
};

std::string render_text(const Report& r);
Json render_json(const Report& r);

/// Six significant digits; integral values keep a trailing ".0".
std::string decimal(double v);
/// Compact matrix display, rows separated by "; ".
std::string format_matrix(const Matrix& m);

}  // namespace qcfb::cli
