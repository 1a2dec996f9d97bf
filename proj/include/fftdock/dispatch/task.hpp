#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "fftdock/docking.hpp"

namespace fftdock {

struct FileRef {
  std::string id;
  std::string path;

  // id is the file stem
  static FileRef from_path(const std::filesystem::path& path);
  friend bool operator==(const FileRef&, const FileRef&) = default;
};

struct DockingTask {
  std::string task_id;  // "<receptor_id>__<ligand_id>"
  std::string receptor_id;
  std::string ligand_id;
  std::string receptor_path;
  std::string ligand_path;
  DockConfig config;

  friend bool operator==(const DockingTask&, const DockingTask&) = default;
};

std::string make_task_id(const std::string& receptor_id, const std::string& ligand_id);

// Receptor-major Cartesian product. Throws ParameterError on an empty list or
// a duplicate id within a list.
std::vector<DockingTask> cross_tasks(const std::vector<FileRef>& receptors, const std::vector<FileRef>& ligands,
                                     const DockConfig& config);

void to_json(nlohmann::json& j, const DockingTask& t);
void from_json(const nlohmann::json& j, DockingTask& t);

}  // namespace fftdock
