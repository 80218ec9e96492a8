#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "qcfb/coherent.hpp"

namespace qcfb::cli {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

/// Malformed or inconsistent input; maps to exit status 2.
class InputError : public std::runtime_error {
 public:
  InputError(std::string location, const std::string& what)
      : std::runtime_error(location.empty() ? what : location + ": " + what),
        location_(std::move(location)),
        message_(what) {}
  const std::string& location() const { return location_; }
  const std::string& message() const { return message_; }

 private:
  std::string location_;
  std::string message_;
};

enum class FileKind { system, plant, controller, triple, parameters, state_space };

struct SystemFile {
  FileKind kind = FileKind::system;
  SystemKind algebra = SystemKind::annihilation;
  Json dimensions = Json::object();
  std::vector<std::pair<std::string, Matrix>> matrices;
  std::vector<std::pair<std::string, Matrix>> cost;
  Json metadata = Json::object();

  const Matrix* find(const std::string& name) const;
  const Matrix* find_cost(const std::string& name) const;
  /// Throws InputError if absent.
  const Matrix& at(const std::string& name) const;
  Index dim(const std::string& name) const;
};

std::string kind_name(const SystemFile& f);

/// Indented JSON with arrays of scalars (and matrix rows) kept on one line.
std::string pretty(const Json& j);

Json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const Json& j, const std::string& location, Index cols_if_empty);

SystemFile parse_system_file(const Json& doc);
SystemFile read_system_file(const std::filesystem::path& path);
Json to_json(const SystemFile& f);
std::string dump(const SystemFile& f);
void write_system_file(const std::filesystem::path& path, const SystemFile& f);

SystemFile from_system(const QuantumSystem& s);
QuantumSystem to_system(const SystemFile& f, const Tolerances& tol = {});

SystemFile from_plant(const PlantModel& p);
PlantModel to_plant(const SystemFile& f);

SystemFile from_controller(const ControllerModel& c);
ControllerModel to_controller(const SystemFile& f);

struct Triple {
  SystemKind algebra = SystemKind::annihilation;
  Matrix f_c, g_cy, h_c;
  std::optional<Matrix> theta;
};
Triple to_triple(const SystemFile& f);

SystemFile from_parameters(const HamiltonianCoupling& p);
HamiltonianCoupling to_parameters(const SystemFile& f);

SystemFile from_state_space(const StateSpaceTF& g, SystemKind algebra);

}  // namespace qcfb::cli
