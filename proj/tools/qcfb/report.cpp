#include "qcfb/report.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace qcfb::cli {

void Report::verdict(std::string name, bool pass, std::string detail) {
  verdicts.push_back({std::move(name), pass, std::move(detail)});
}

int Report::exit_code() const {
  if (error) return 2;
  for (const Verdict& v : verdicts) {
    if (!v.pass) return 1;
  }
  return 0;
}

std::string decimal(double v) {
  std::string s = fmt::format("{:.6g}", v);
  if (std::isfinite(v) && s.find_first_of(".en") == std::string::npos) s += ".0";
  return s;
}

namespace {

std::string complex_str(Complex z) {
  const double re = z.real() == 0.0 ? 0.0 : z.real();
  if (z.imag() == 0.0) return fmt::format("{:.6g}", re);
  if (re == 0.0) return fmt::format("{:.6g}i", z.imag());
  return fmt::format("{:.6g}{:+.6g}i", re, z.imag());
}

}  // namespace

std::string format_matrix(const Matrix& m) {
  std::string out = "[";
  for (Index i = 0; i < m.rows(); ++i) {
    if (i > 0) out += "; ";
    for (Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out += ", ";
      out += complex_str(m(i, j));
    }
  }
  return out + "]";
}

std::string render_text(const Report& r) {
  std::string out;
  if (r.error) {
    out += "error: " + *r.error + "\n";
    return out;
  }
  for (const std::string& l : r.lines) out += l + "\n";
  for (const std::string& s : r.skipped) out += "skipped: " + s + "\n";
  std::size_t width = 24;
  auto widen = [&](const std::string& name) {
    width = std::max(width, name.size());
  };
  for (const auto& entry : r.residuals) widen(entry.first);
  for (const NormValue& n : r.norms) widen(n.name);
  for (const Verdict& v : r.verdicts) widen(v.name);
  if (!r.residuals.empty()) {
    out += "residuals:\n";
    for (const auto& [name, v] : r.residuals) out += fmt::format("  {:<{}} {:.3e}\n", name, width, v);
  }
  if (!r.norms.empty()) {
    out += "norms:\n";
    for (const NormValue& n : r.norms) {
      out += fmt::format("  {:<{}} {:.6f}  ({}, certificate {:.1e})\n", n.name, width, n.value,
                         n.method, n.certificate);
    }
  }
  if (!r.verdicts.empty()) {
    out += "verdicts:\n";
    for (const Verdict& v : r.verdicts) {
      out += fmt::format("  {:<{}} {}", v.name, width, v.pass ? "pass" : "FAIL");
      if (!v.detail.empty()) out += "  " + v.detail;
      out += "\n";
    }
  }
  out += fmt::format("exit: {}\n", r.exit_code());
  return out;
}

Json render_json(const Report& r) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["command"] = r.command;
  j["input"] = r.input;
  j["exit_code"] = r.exit_code();
  if (r.error) {
    j["error"] = *r.error;
    return j;
  }
  Json verdicts = Json::array();
  for (const Verdict& v : r.verdicts) {
    verdicts.push_back({{"name", v.name}, {"pass", v.pass}, {"detail", v.detail}});
  }
  j["verdicts"] = std::move(verdicts);
  Json res = Json::object();
  for (const auto& [name, v] : r.residuals) res[name] = std::isfinite(v) ? Json(v) : Json();
  j["residuals"] = std::move(res);
  Json norms = Json::array();
  for (const NormValue& n : r.norms) {
    norms.push_back({{"name", n.name},
                     {"value", n.value},
                     {"method", n.method},
                     {"certificate", n.certificate}});
  }
  j["norms"] = std::move(norms);
  j["skipped"] = r.skipped;
  j["lines"] = r.lines;
  j["data"] = r.data;
  return j;
}

}  // namespace qcfb::cli
