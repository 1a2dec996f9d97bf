#include "fftdock/dispatch/task.hpp"

#include <set>

#include "fftdock/errors.hpp"

namespace fftdock {

FileRef FileRef::from_path(const std::filesystem::path& path) { return {path.stem().string(), path.string()}; }

std::string make_task_id(const std::string& receptor_id, const std::string& ligand_id) {
  return receptor_id + "__" + ligand_id;
}

namespace {

void check_ids(const std::vector<FileRef>& refs, const char* what) {
  if (refs.empty()) throw ParameterError(std::string("empty ") + what + " list");
  std::set<std::string> seen;
  for (const FileRef& r : refs) {
    if (r.id.empty()) throw ParameterError(std::string("empty id in ") + what + " list");
    if (!seen.insert(r.id).second) throw ParameterError(std::string("duplicate ") + what + " id " + r.id);
  }
}

}  // namespace

std::vector<DockingTask> cross_tasks(const std::vector<FileRef>& receptors, const std::vector<FileRef>& ligands,
                                     const DockConfig& config) {
  check_ids(receptors, "receptor");
  check_ids(ligands, "ligand");
  std::vector<DockingTask> tasks;
  tasks.reserve(receptors.size() * ligands.size());
  for (const FileRef& r : receptors)
    for (const FileRef& l : ligands) tasks.push_back({make_task_id(r.id, l.id), r.id, l.id, r.path, l.path, config});
  return tasks;
}

void to_json(nlohmann::json& j, const DockingTask& t) {
  j = {{"task_id", t.task_id},
       {"receptor_id", t.receptor_id},
       {"ligand_id", t.ligand_id},
       {"receptor_path", t.receptor_path},
       {"ligand_path", t.ligand_path},
       {"config", t.config}};
}

void from_json(const nlohmann::json& j, DockingTask& t) {
  j.at("task_id").get_to(t.task_id);
  j.at("receptor_id").get_to(t.receptor_id);
  j.at("ligand_id").get_to(t.ligand_id);
  j.at("receptor_path").get_to(t.receptor_path);
  j.at("ligand_path").get_to(t.ligand_path);
  j.at("config").get_to(t.config);
}

}  // namespace fftdock
