#include "qcfb/system_file.hpp"

#include <fstream>
#include <sstream>

namespace qcfb::cli {

namespace {

struct Shape {
  std::string name;
  Index rows = 0;
  Index cols = 0;
  bool required = true;
};

const char* file_kind_name(FileKind k) {
  switch (k) {
    case FileKind::system: return "system";
    case FileKind::plant: return "plant";
    case FileKind::controller: return "controller";
    case FileKind::triple: return "triple";
    case FileKind::parameters: return "parameters";
    case FileKind::state_space: return "state_space";
  }
  return "system";
}

std::vector<std::string> dimension_keys(FileKind k) {
  switch (k) {
    case FileKind::system:
    case FileKind::parameters: return {"modes", "fields"};
    case FileKind::plant: return {"modes", "noise", "control", "outputs"};
    case FileKind::controller: return {"modes", "noise", "inputs", "outputs"};
    case FileKind::triple: return {"modes", "inputs", "outputs"};
    case FileKind::state_space: return {"states", "inputs", "outputs"};
  }
  return {};
}

std::vector<Shape> matrix_shapes(FileKind k, SystemKind algebra, const SystemFile& f) {
  const Index m = k == FileKind::state_space ? 1 : multiplicity(algebra);
  auto d = [&](const char* key) { return m * f.dim(key); };
  switch (k) {
    case FileKind::system:
      return {{"F", d("modes"), d("modes")},
              {"G", d("modes"), d("fields")},
              {"H", d("fields"), d("modes")},
              {"K", d("fields"), d("fields")}};
    case FileKind::plant:
      return {{"F", d("modes"), d("modes")},
              {"G_w", d("modes"), d("noise")},
              {"G_u", d("modes"), d("control")},
              {"H", d("outputs"), d("modes")},
              {"K", d("outputs"), d("noise")}};
    case FileKind::controller:
      return {{"F_c", d("modes"), d("modes")},   {"G_cw", d("modes"), d("noise")},
              {"G_cy", d("modes"), d("inputs")}, {"H_c", d("outputs"), d("modes")},
              {"K_cw", d("outputs"), d("noise")}, {"K_cy", d("outputs"), d("inputs")}};
    case FileKind::triple:
      return {{"F_c", d("modes"), d("modes")},
              {"G_cy", d("modes"), d("inputs")},
              {"H_c", d("outputs"), d("modes")},
              {"Theta", d("modes"), d("modes"), false}};
    case FileKind::parameters:
      return {{"Theta", d("modes"), d("modes")},
              {"M", d("modes"), d("modes")},
              {"N", d("fields"), d("modes")}};
    case FileKind::state_space:
      return {{"A", d("states"), d("states")},
              {"B", d("states"), d("inputs")},
              {"C", d("outputs"), d("states")},
              {"D", d("outputs"), d("inputs")}};
  }
  return {};
}

std::string shape_str(Index r, Index c) {
  return std::to_string(r) + "x" + std::to_string(c);
}

void check_shape(const Matrix& mat, Index rows, Index cols, const std::string& loc) {
  if (mat.rows() != rows || mat.cols() != cols) {
    throw InputError(loc, "expected " + shape_str(rows, cols) + " from dimensions, got " +
                              shape_str(mat.rows(), mat.cols()));
  }
}

bool is_leaf_row(const Json& j) {
  if (!j.is_array()) return false;
  for (const Json& e : j) {
    if (e.is_structured()) {
      if (!e.is_array()) return false;
      for (const Json& x : e) {
        if (x.is_structured()) return false;
      }
    }
  }
  return true;
}

void pretty_into(const Json& j, int indent, std::string& out) {
  const std::string pad(static_cast<std::size_t>(indent), ' ');
  const std::string inner(static_cast<std::size_t>(indent + 2), ' ');
  if (!j.is_structured() || j.empty() || is_leaf_row(j)) {
    out += j.dump();
    return;
  }
  const bool obj = j.is_object();
  out += obj ? "{\n" : "[\n";
  std::size_t i = 0;
  for (auto it = j.begin(); it != j.end(); ++it, ++i) {
    out += inner;
    if (obj) out += Json(it.key()).dump() + ": ";
    pretty_into(*it, indent + 2, out);
    out += i + 1 < j.size() ? ",\n" : "\n";
  }
  out += pad + (obj ? "}" : "]");
}

}  // namespace

std::string pretty(const Json& j) {
  std::string out;
  pretty_into(j, 0, out);
  return out;
}

const Matrix* SystemFile::find(const std::string& name) const {
  for (const auto& [n, m] : matrices) {
    if (n == name) return &m;
  }
  return nullptr;
}

const Matrix* SystemFile::find_cost(const std::string& name) const {
  for (const auto& [n, m] : cost) {
    if (n == name) return &m;
  }
  return nullptr;
}

const Matrix& SystemFile::at(const std::string& name) const {
  if (const Matrix* m = find(name)) return *m;
  throw InputError("matrices." + name, "missing");
}

Index SystemFile::dim(const std::string& name) const {
  if (!dimensions.contains(name)) throw InputError("dimensions." + name, "missing");
  return dimensions.at(name).get<Index>();
}

std::string kind_name(const SystemFile& f) {
  return f.kind == FileKind::system ? std::string(to_string(f.algebra))
                                    : file_kind_name(f.kind);
}

Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(Json::array({m(i, j).real(), m(i, j).imag()}));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const Json& j, const std::string& location, Index cols_if_empty) {
  if (!j.is_array()) throw InputError(location, "matrix must be an array of rows");
  if (j.empty()) return Matrix(0, cols_if_empty);
  Index cols = -1;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string row_loc = location + "[" + std::to_string(i) + "]";
    if (!j[i].is_array()) throw InputError(row_loc, "row must be an array of entries");
    if (cols < 0) cols = static_cast<Index>(j[i].size());
    if (static_cast<Index>(j[i].size()) != cols) throw InputError(row_loc, "ragged row");
  }
  Matrix m(static_cast<Index>(j.size()), cols);
  for (std::size_t i = 0; i < j.size(); ++i) {
    for (std::size_t k = 0; k < j[i].size(); ++k) {
      const Json& e = j[i][k];
      const std::string loc = location + "[" + std::to_string(i) + "][" + std::to_string(k) + "]";
      if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number()) {
        throw InputError(loc, "entry must be [re, im]");
      }
      m(static_cast<Index>(i), static_cast<Index>(k)) = Complex(e[0].get<double>(), e[1].get<double>());
    }
  }
  return m;
}

SystemFile parse_system_file(const Json& doc) {
  if (!doc.is_object()) throw InputError("", "document must be an object");
  if (!doc.contains("schema_version") || !doc["schema_version"].is_number_integer()) {
    throw InputError("schema_version", "missing or not an integer");
  }
  if (doc["schema_version"].get<int>() != kSchemaVersion) {
    throw InputError("schema_version",
                     "unsupported version " + std::to_string(doc["schema_version"].get<int>()));
  }
  if (!doc.contains("kind") || !doc["kind"].is_string()) {
    throw InputError("kind", "missing or not a string");
  }
  SystemFile f;
  const std::string kind = doc["kind"].get<std::string>();
  auto parse_algebra = [](const std::string& s, const std::string& loc) {
    if (s == "annihilation") return SystemKind::annihilation;
    if (s == "general") return SystemKind::general;
    throw InputError(loc, "unknown algebra '" + s + "'");
  };
  if (kind == "annihilation" || kind == "general") {
    f.kind = FileKind::system;
    f.algebra = parse_algebra(kind, "kind");
  } else {
    bool found = false;
    for (FileKind k : {FileKind::plant, FileKind::controller, FileKind::triple,
                       FileKind::parameters, FileKind::state_space}) {
      if (kind == file_kind_name(k)) {
        f.kind = k;
        found = true;
      }
    }
    if (!found) throw InputError("kind", "unknown kind '" + kind + "'");
    if (!doc.contains("algebra") || !doc["algebra"].is_string()) {
      throw InputError("algebra", "missing or not a string");
    }
    f.algebra = parse_algebra(doc["algebra"].get<std::string>(), "algebra");
  }

  if (!doc.contains("dimensions") || !doc["dimensions"].is_object()) {
    throw InputError("dimensions", "missing or not an object");
  }
  for (const std::string& key : dimension_keys(f.kind)) {
    const std::string loc = "dimensions." + key;
    if (!doc["dimensions"].contains(key)) throw InputError(loc, "missing");
    const Json& v = doc["dimensions"][key];
    if (!v.is_number_integer() || v.get<long long>() < 0) {
      throw InputError(loc, "must be a non-negative integer");
    }
    f.dimensions[key] = v.get<Index>();
  }

  if (!doc.contains("matrices") || !doc["matrices"].is_object()) {
    throw InputError("matrices", "missing or not an object");
  }
  const Json& mats = doc["matrices"];
  const std::vector<Shape> shapes = matrix_shapes(f.kind, f.algebra, f);
  for (auto it = mats.begin(); it != mats.end(); ++it) {
    bool known = false;
    for (const Shape& s : shapes) known = known || s.name == it.key();
    if (!known) throw InputError("matrices." + it.key(), "unknown matrix for kind " + kind);
  }
  for (const Shape& s : shapes) {
    const std::string loc = "matrices." + s.name;
    if (!mats.contains(s.name)) {
      if (s.required) throw InputError(loc, "missing");
      continue;
    }
    Matrix m = matrix_from_json(mats[s.name], loc, s.cols);
    check_shape(m, s.rows, s.cols, loc);
    f.matrices.emplace_back(s.name, std::move(m));
  }

  if (doc.contains("cost")) {
    if (f.kind != FileKind::plant) throw InputError("cost", "only plant files carry a cost");
    const Json& c = doc["cost"];
    if (!c.is_object()) throw InputError("cost", "must be an object");
    const Index mult = multiplicity(f.algebra);
    const Index n = mult * f.dim("modes");
    const Index nu = mult * f.dim("control");
    const Index nw = mult * f.dim("noise");
    for (auto it = c.begin(); it != c.end(); ++it) {
      const std::string& key = it.key();
      if (key != "C" && key != "D" && key != "D_w" && key != "L") {
        throw InputError("cost." + key, "unknown cost matrix");
      }
    }
    Index z = -1;
    if (c.contains("C")) {
      Matrix cm = matrix_from_json(c["C"], "cost.C", n);
      z = cm.rows();
      check_shape(cm, z, n, "cost.C");
      f.cost.emplace_back("C", std::move(cm));
      Matrix dm = c.contains("D") ? matrix_from_json(c["D"], "cost.D", nu) : Matrix::Zero(z, nu);
      check_shape(dm, z, nu, "cost.D");
      f.cost.emplace_back("D", std::move(dm));
      if (c.contains("D_w")) {
        Matrix dw = matrix_from_json(c["D_w"], "cost.D_w", nw);
        check_shape(dw, z, nw, "cost.D_w");
        f.cost.emplace_back("D_w", std::move(dw));
      }
    } else if (c.contains("D") || c.contains("D_w")) {
      throw InputError("cost.C", "missing");
    }
    if (c.contains("L")) {
      Matrix l = matrix_from_json(c["L"], "cost.L", nw + nu);
      check_shape(l, l.rows(), nw + nu, "cost.L");
      f.cost.emplace_back("L", std::move(l));
    }
  }

  if (doc.contains("metadata")) {
    if (!doc["metadata"].is_object()) throw InputError("metadata", "must be an object");
    f.metadata = doc["metadata"];
  }
  return f;
}

SystemFile read_system_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError(path.string(), "cannot open file");
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(path.string(), std::string("invalid JSON: ") + e.what());
  }
  try {
    return parse_system_file(doc);
  } catch (const InputError& e) {
    const std::string where =
        e.location().empty() ? path.string() : path.string() + ": " + e.location();
    throw InputError(where, e.message());
  }
}

Json to_json(const SystemFile& f) {
  Json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["kind"] = kind_name(f);
  if (f.kind != FileKind::system) doc["algebra"] = std::string(to_string(f.algebra));
  doc["dimensions"] = f.dimensions;
  Json mats = Json::object();
  for (const auto& [name, m] : f.matrices) mats[name] = matrix_to_json(m);
  doc["matrices"] = std::move(mats);
  if (!f.cost.empty()) {
    Json c = Json::object();
    for (const auto& [name, m] : f.cost) c[name] = matrix_to_json(m);
    doc["cost"] = std::move(c);
  }
  if (!f.metadata.empty()) doc["metadata"] = f.metadata;
  return doc;
}

std::string dump(const SystemFile& f) { return pretty(to_json(f)); }

void write_system_file(const std::filesystem::path& path, const SystemFile& f) {
  std::ofstream out(path);
  if (!out) throw InputError(path.string(), "cannot write file");
  out << dump(f) << '\n';
}

SystemFile from_system(const QuantumSystem& s) {
  SystemFile f;
  f.kind = FileKind::system;
  f.algebra = s.kind();
  f.dimensions["modes"] = s.modes();
  f.dimensions["fields"] = s.fields();
  f.matrices = {{"F", s.f()}, {"G", s.g()}, {"H", s.h()}, {"K", s.k()}};
  return f;
}

QuantumSystem to_system(const SystemFile& f, const Tolerances& tol) {
  if (f.kind != FileKind::system) throw InputError("kind", "expected a system file");
  return QuantumSystem(f.algebra, f.at("F"), f.at("G"), f.at("H"), f.at("K"), tol);
}

SystemFile from_plant(const PlantModel& p) {
  SystemFile f;
  f.kind = FileKind::plant;
  f.algebra = p.kind;
  f.dimensions["modes"] = p.modes();
  f.dimensions["noise"] = p.noise_fields();
  f.dimensions["control"] = p.control_fields();
  f.dimensions["outputs"] = p.output_fields();
  f.matrices = {{"F", p.f}, {"G_w", p.g_w}, {"G_u", p.g_u}, {"H", p.h}, {"K", p.k}};
  if (p.cost) {
    f.cost.emplace_back("C", p.cost->c);
    f.cost.emplace_back("D", p.cost->d);
    if (p.cost->d_w.size() != 0) f.cost.emplace_back("D_w", p.cost->d_w);
  }
  if (p.selector) f.cost.emplace_back("L", *p.selector);
  return f;
}

PlantModel to_plant(const SystemFile& f) {
  if (f.kind != FileKind::plant) throw InputError("kind", "expected a plant file");
  PlantModel p;
  p.kind = f.algebra;
  p.f = f.at("F");
  p.g_w = f.at("G_w");
  p.g_u = f.at("G_u");
  p.h = f.at("H");
  p.k = f.at("K");
  if (const Matrix* c = f.find_cost("C")) {
    CostOutput co{*c, *f.find_cost("D"), Matrix()};
    if (const Matrix* dw = f.find_cost("D_w")) co.d_w = *dw;
    p.cost = co;
  }
  if (const Matrix* l = f.find_cost("L")) p.selector = *l;
  return p;
}

SystemFile from_controller(const ControllerModel& c) {
  SystemFile f;
  f.kind = FileKind::controller;
  f.algebra = c.kind;
  f.dimensions["modes"] = c.modes();
  f.dimensions["noise"] = c.noise_fields();
  f.dimensions["inputs"] = c.input_fields();
  f.dimensions["outputs"] = c.output_fields();
  f.matrices = {{"F_c", c.f_c}, {"G_cw", c.g_cw}, {"G_cy", c.g_cy},
                {"H_c", c.h_c}, {"K_cw", c.k_cw}, {"K_cy", c.k_cy}};
  return f;
}

ControllerModel to_controller(const SystemFile& f) {
  if (f.kind != FileKind::controller) throw InputError("kind", "expected a controller file");
  ControllerModel c;
  c.kind = f.algebra;
  c.f_c = f.at("F_c");
  c.g_cw = f.at("G_cw");
  c.g_cy = f.at("G_cy");
  c.h_c = f.at("H_c");
  c.k_cw = f.at("K_cw");
  c.k_cy = f.at("K_cy");
  return c;
}

Triple to_triple(const SystemFile& f) {
  if (f.kind != FileKind::triple) throw InputError("kind", "expected a triple file");
  Triple t;
  t.algebra = f.algebra;
  t.f_c = f.at("F_c");
  t.g_cy = f.at("G_cy");
  t.h_c = f.at("H_c");
  if (const Matrix* th = f.find("Theta")) t.theta = *th;
  return t;
}

SystemFile from_parameters(const HamiltonianCoupling& p) {
  SystemFile f;
  f.kind = FileKind::parameters;
  f.algebra = p.kind;
  f.dimensions["modes"] = p.modes();
  f.dimensions["fields"] = p.fields();
  f.matrices = {{"Theta", p.theta}, {"M", p.hamiltonian}, {"N", p.coupling}};
  return f;
}

HamiltonianCoupling to_parameters(const SystemFile& f) {
  if (f.kind != FileKind::parameters) throw InputError("kind", "expected a parameters file");
  return HamiltonianCoupling{f.algebra, f.at("Theta"), f.at("M"), f.at("N")};
}

SystemFile from_state_space(const StateSpaceTF& g, SystemKind algebra) {
  SystemFile f;
  f.kind = FileKind::state_space;
  f.algebra = algebra;
  f.dimensions["states"] = g.states();
  f.dimensions["inputs"] = g.inputs();
  f.dimensions["outputs"] = g.outputs();
  f.matrices = {{"A", g.a}, {"B", g.b}, {"C", g.c}, {"D", g.d}};
  return f;
}

}  // namespace qcfb::cli
