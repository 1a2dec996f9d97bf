#include "fftdock/cli.hpp"

#include <unistd.h>

#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <thread>

#include "fftdock/costmodel.hpp"
#include "fftdock/dispatch/local_pool.hpp"
#include "fftdock/dispatch/master.hpp"
#include "fftdock/dispatch/worker.hpp"
#include "fftdock/docking.hpp"
#include "fftdock/errors.hpp"
#include "fftdock/io_util.hpp"

namespace fftdock {

namespace {

// Dock flags shared by dock, cross and master. Values given on the command
// line override a --config file, which overrides the built-in defaults.
struct DockFlags {
  DockConfig config;
  std::string config_path;
  std::string save_config_path;
  std::vector<std::pair<CLI::Option*, std::function<void(DockConfig&)>>> overrides;

  void add_to(CLI::App& app) {
    const DockConfig d;
    auto add = [&](const std::string& name, auto& field, const std::string& help, auto setter) {
      CLI::Option* opt = app.add_option(name, field, help)->capture_default_str();
      overrides.emplace_back(opt, [&field, setter](DockConfig& c) { setter(c, field); });
    };
    add("--pitch", config.pitch, "grid pitch in angstrom", [](DockConfig& c, double v) { c.pitch = v; });
    add("--margin", config.margin_voxels, "margin voxels on each side of the grid",
        [](DockConfig& c, int v) { c.margin_voxels = v; });
    add("--angular-step", config.angular_step, "rotation step in degrees (must divide 360)",
        [](DockConfig& c, double v) { c.angular_step = v; });
    add("--top-k", config.top_k, "poses kept in the global ranking", [](DockConfig& c, int v) { c.top_k = v; });
    add("--poses-per-rotation", config.poses_per_rotation, "best translations kept per rotation",
        [](DockConfig& c, int v) { c.poses_per_rotation = v; });
    add("--surface-weight", config.params.surface_weight, "receptor surface voxel weight",
        [](DockConfig& c, double v) { c.params.surface_weight = v; });
    add("--core-weight", config.params.receptor_core_weight, "receptor core voxel weight",
        [](DockConfig& c, double v) { c.params.receptor_core_weight = v; });
    add("--ligand-weight", config.params.ligand_weight, "ligand core voxel weight",
        [](DockConfig& c, double v) { c.params.ligand_weight = v; });
    add("--atom-radius", config.params.atom_radius, "atom radius in angstrom",
        [](DockConfig& c, double v) { c.params.atom_radius = v; });
    add("--surface-thickness", config.params.surface_thickness, "receptor surface layer in voxels",
        [](DockConfig& c, int v) { c.params.surface_thickness = v; });
    add("--threads", config.threads, "docking threads per task (0 = all logical cores)",
        [](DockConfig& c, int v) { c.threads = v; });
    app.add_option("--config", config_path, "JSON dock configuration to start from");
    app.add_option("--save-config", save_config_path, "write the resolved configuration as JSON");
  }

  DockConfig resolve() {
    DockConfig c = config;
    if (!config_path.empty()) {
      c = load_config(config_path);
      for (auto& [opt, apply] : overrides)
        if (opt->count() > 0) apply(c);
    }
    c.validate();
    if (!save_config_path.empty()) save_config(save_config_path, c);
    return c;
  }
};

void print_header(const std::string& command, const DockConfig& c) {
  std::cerr << "# fftdock " << command << " config " << nlohmann::json(c).dump() << '\n';
}

std::vector<FileRef> read_refs(const std::string& list_path) {
  std::vector<FileRef> refs;
  const std::filesystem::path base = std::filesystem::path(list_path).parent_path();
  for (const std::string& entry : read_list_file(list_path)) {
    std::filesystem::path p(entry);
    if (p.is_relative()) p = base / p;
    refs.push_back(FileRef::from_path(p));
  }
  return refs;
}

std::vector<std::string> ids_of(const std::vector<FileRef>& refs) {
  std::vector<std::string> ids;
  for (const FileRef& r : refs) ids.push_back(r.id);
  return ids;
}

int write_batch_outputs(const BatchReport& report, const std::vector<FileRef>& receptors,
                        const std::vector<FileRef>& ligands, const std::filesystem::path& out_dir,
                        const std::string& instance_label, int n_instances) {
  std::filesystem::create_directories(out_dir);
  write_file_atomic(out_dir / "score_matrix.tsv", score_matrix_tsv(report, ids_of(receptors), ids_of(ligands)));
  write_file_atomic(out_dir / "batch_report.json", report_json(report).dump(2) + "\n");
  write_file_atomic(out_dir / "results.tsv", results_tsv(report));
  if (report.wall_time > 0 && !report.results.empty()) {
    const cost::RunRecord run{instance_label, n_instances, report.wall_time, static_cast<int>(report.results.size())};
    write_file_atomic(out_dir / "run_record.tsv", cost::runs_tsv_header() + "\n" + cost::to_tsv_line(run) + "\n");
  }
  std::cout << "completed " << report.results.size() << "/" << report.total_tasks << " tasks, "
            << report.failures.size() << " failed\n";
  for (const TaskFailure& f : report.failures)
    std::cerr << "failed: " << f.task_id << " after " << f.attempts << " attempt(s): " << f.reason << '\n';
  return report.failures.empty() ? kExitOk : kExitTaskFailed;
}

int share_of_cores(int parts) {
  return std::max(1, static_cast<int>(std::thread::hardware_concurrency()) / std::max(1, parts));
}

std::string default_worker_id() {
  char host[256] = {0};
  if (::gethostname(host, sizeof host - 1) != 0) std::snprintf(host, sizeof host, "worker");
  return std::string(host) + "-" + std::to_string(::getpid());
}

std::string env_or(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return v && *v ? std::string(v) : fallback;
}

int dispatch(CLI::App& app, const std::function<int()>& body) {
  (void)app;
  try {
    return body();
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitParse;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kExitParse;
  } catch (const NoAtomsError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kExitParse;
  } catch (const TransportError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitTransport;
  } catch (const TimeoutError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitTransport;
  } catch (const ProtocolError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitTransport;
  } catch (const Error& e) {
    // parameter, grid overflow, shape and comparison errors
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitParse;
  }
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"FFT rigid-body protein docking with master-worker batch dispatch and cost analysis", "fftdock"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "help for every subcommand");

  // dock
  CLI::App* dock = app.add_subcommand("dock", "dock one receptor-ligand pair");
  DockFlags dock_flags;
  dock_flags.add_to(*dock);
  std::string receptor_path, ligand_path, out_prefix, pose_path, grid_dump_path;
  bool profile = false;
  dock->add_option("receptor", receptor_path, "receptor PDB file")->required();
  dock->add_option("ligand", ligand_path, "ligand PDB file")->required();
  dock->add_option("--out", out_prefix, "output prefix for .json and .tsv (default <receptor>__<ligand>)");
  dock->add_option("--write-pose", pose_path, "write the best-scoring ligand placement as PDB");
  dock->add_option("--dump-receptor-grid", grid_dump_path, "write the receptor grid as a binary dump");
  dock->add_flag("--profile", profile, "single-threaded run with a time breakdown");

  // cross
  CLI::App* cross = app.add_subcommand("cross", "all-to-all docking of two PDB lists");
  DockFlags cross_flags;
  cross_flags.add_to(*cross);
  std::string receptor_list, ligand_list, out_dir = ".", instance_label = "local";
  int workers = 1, max_attempts = 3;
  bool dry_run = false;
  cross->add_option("--receptors", receptor_list, "file listing receptor PDB paths")->required();
  cross->add_option("--ligands", ligand_list, "file listing ligand PDB paths")->required();
  cross->add_option("--workers", workers, "in-process workers")->capture_default_str();
  cross->add_option("--max-attempts", max_attempts, "attempts before a task is failed")->capture_default_str();
  cross->add_option("--out-dir", out_dir, "output directory")->capture_default_str();
  cross->add_option("--instance-label", instance_label, "instance name written to run_record.tsv")
      ->capture_default_str();
  cross->add_flag("--dry-run", dry_run, "print the task count and exit");

  // master
  CLI::App* master = app.add_subcommand("master", "serve a cross-docking batch to remote workers");
  DockFlags master_flags;
  master_flags.add_to(*master);
  std::string m_receptor_list, m_ligand_list, m_out_dir = ".", listen = env_or("FFTDOCK_LISTEN", "0.0.0.0:7070"),
                                              port_file, m_instance_label = "cluster";
  int m_max_attempts = 3, m_instances = 1;
  double startup_timeout = 60.0;
  master->add_option("--receptors", m_receptor_list, "file listing receptor PDB paths")->required();
  master->add_option("--ligands", m_ligand_list, "file listing ligand PDB paths")->required();
  master->add_option("--listen", listen, "listen endpoint host:port (env FFTDOCK_LISTEN)")->capture_default_str();
  master->add_option("--port-file", port_file, "write the bound port to this file");
  master->add_option("--max-attempts", m_max_attempts, "attempts before a task is failed")->capture_default_str();
  master->add_option("--startup-timeout", startup_timeout, "seconds to wait for the first worker")
      ->capture_default_str();
  master->add_option("--out-dir", m_out_dir, "output directory")->capture_default_str();
  master->add_option("--instance-label", m_instance_label, "instance name written to run_record.tsv")
      ->capture_default_str();
  master->add_option("--instances", m_instances, "instance count written to run_record.tsv")->capture_default_str();

  // worker
  CLI::App* worker = app.add_subcommand("worker", "pull tasks from a master");
  WorkerOptions wopts;
  wopts.worker_id = default_worker_id();
  std::string connect = env_or("FFTDOCK_CONNECT", "127.0.0.1:7070");
  int backoff_initial_ms = 1000, backoff_max_ms = 30'000;
  worker->add_option("--connect", connect, "master endpoint host:port (env FFTDOCK_CONNECT)")->capture_default_str();
  worker->add_option("--slots", wopts.slots, "concurrent task lanes")->capture_default_str();
  worker->add_option("--worker-id", wopts.worker_id, "name reported to the master")->capture_default_str();
  worker->add_option("--backoff-initial-ms", backoff_initial_ms, "first reconnect delay")->capture_default_str();
  worker->add_option("--backoff-max-ms", backoff_max_ms, "reconnect delay cap")->capture_default_str();
  worker->add_option("--connect-attempts", wopts.connect_attempts, "connection attempts before giving up")
      ->capture_default_str();

  // analyze
  CLI::App* analyze = app.add_subcommand("analyze", "strong scaling, throughput and fee report");
  std::string catalog_path, runs_path, json_path, reference;
  std::vector<std::string> compare_pairs;
  analyze->add_option("catalog", catalog_path, "instance catalog TSV")->required();
  analyze->add_option("runs", runs_path, "run records TSV")->required();
  analyze->add_option("--reference", reference, "instance used for relative speeds");
  analyze->add_option("--compare", compare_pairs, "instance pair A:B to compare (repeatable)");
  analyze->add_option("--json", json_path, "also write the report as JSON");

  // rotations
  CLI::App* rotations = app.add_subcommand("rotations", "print the rotation count for an angular step");
  double rot_step = 15.0;
  bool rot_list = false;
  rotations->add_option("--angular-step", rot_step, "angular step in degrees")->capture_default_str();
  rotations->add_flag("--list", rot_list, "print every quaternion");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  if (*dock) {
    return dispatch(app, [&]() -> int {
      const DockConfig config = dock_flags.resolve();
      print_header("dock", config);
      const Structure receptor = read_pdb_file(receptor_path);
      const Structure ligand = read_pdb_file(ligand_path);
      DockingResult result;
      if (profile) {
        const TimeBreakdown t = profile_dock(receptor, ligand, config, &result);
        std::fprintf(stderr,
                     "# time total %.3f s: transform %.1f%%, voxelize %.1f%%, rotate %.1f%%, reduce %.1f%%, "
                     "other %.1f%%\n",
                     t.total, 100 * t.transform / t.total, 100 * t.voxelize / t.total, 100 * t.rotate / t.total,
                     100 * t.reduce / t.total, 100 * t.other / t.total);
      } else {
        result = dock_pair(receptor, ligand, config);
      }
      result.task_id = make_task_id(receptor.id, ligand.id);
      const std::string prefix = out_prefix.empty() ? result.task_id : out_prefix;
      write_file_atomic(prefix + ".json", nlohmann::json(result).dump(2) + "\n");
      write_file_atomic(prefix + ".tsv", tsv_header() + "\n" + to_tsv_line(result) + "\n");
      if (!pose_path.empty() && !result.top_poses.empty()) {
        const Structure posed =
            posed_ligand(ligand, result, result.top_poses.front(), generate_rotations(config.angular_step));
        std::ostringstream pdb;
        write_pdb(pdb, posed);
        write_file_atomic(pose_path, pdb.str());
      }
      if (!grid_dump_path.empty()) {
        std::ostringstream dump;
        write_grid_dump(dump, assign_grid(receptor, result.grid_spec, GridRole::receptor, config.params));
        write_file_atomic(grid_dump_path, dump.str());
      }
      char line[64];
      std::snprintf(line, sizeof line, "best_score\t%.6f\n", result.best_score);
      std::cout << line;
      return kExitOk;
    });
  }

  if (*cross) {
    return dispatch(app, [&]() -> int {
      if (workers < 1) throw ParameterError("--workers must be >= 1");
      DockConfig config = cross_flags.resolve();
      if (config.threads == 0) config.threads = share_of_cores(workers);
      const auto receptors = read_refs(receptor_list);
      const auto ligands = read_refs(ligand_list);
      auto tasks = cross_tasks(receptors, ligands, config);
      if (dry_run) {
        std::cout << tasks.size() << " tasks\n";
        return kExitOk;
      }
      print_header("cross", config);
      DispatchPolicy policy;
      policy.max_attempts = max_attempts;
      const BatchReport report = local_pool_run(std::move(tasks), workers, policy);
      return write_batch_outputs(report, receptors, ligands, out_dir, instance_label, workers);
    });
  }

  if (*master) {
    return dispatch(app, [&]() -> int {
      const DockConfig config = master_flags.resolve();
      const auto receptors = read_refs(m_receptor_list);
      const auto ligands = read_refs(m_ligand_list);
      auto tasks = cross_tasks(receptors, ligands, config);
      print_header("master", config);
      DispatchPolicy policy;
      policy.max_attempts = m_max_attempts;
      policy.startup_timeout = std::chrono::milliseconds(static_cast<long>(startup_timeout * 1000));
      TcpListener listener(Endpoint::parse(listen));
      std::cerr << "[master] listening on port " << listener.port() << " with " << tasks.size() << " tasks\n";
      if (!port_file.empty()) write_file_atomic(port_file, std::to_string(listener.port()) + "\n");
      const BatchReport report = master_run(std::move(tasks), listener, policy);
      return write_batch_outputs(report, receptors, ligands, m_out_dir, m_instance_label, m_instances);
    });
  }

  if (*worker) {
    return dispatch(app, [&]() -> int {
      if (wopts.slots < 1) throw ParameterError("--slots must be >= 1");
      if (wopts.connect_attempts < 1) throw ParameterError("--connect-attempts must be >= 1");
      wopts.backoff_initial = std::chrono::milliseconds(backoff_initial_ms);
      wopts.backoff_max = std::chrono::milliseconds(backoff_max_ms);
      // tasks that leave the thread count open split this machine between the lanes
      wopts.executor = [lanes = wopts.slots](const DockingTask& task) {
        if (task.config.threads != 0) return execute_task(task);
        DockingTask local = task;
        local.config.threads = share_of_cores(lanes);
        return execute_task(local);
      };
      std::cerr << "# fftdock worker " << wopts.worker_id << " connect=" << connect << " slots=" << wopts.slots
                << '\n';
      return worker_loop(Endpoint::parse(connect), wopts);
    });
  }

  if (*analyze) {
    return dispatch(app, [&]() -> int {
      const cost::Catalog catalog = cost::read_catalog(catalog_path);
      const auto runs = cost::read_runs(runs_path);
      cost::AnalysisOptions options;
      if (!reference.empty()) options.reference_instance = reference;
      for (const std::string& pair : compare_pairs) {
        const auto colon = pair.find(':');
        if (colon == std::string::npos) throw ParameterError("--compare expects A:B, got " + pair);
        options.compare.emplace_back(pair.substr(0, colon), pair.substr(colon + 1));
      }
      const cost::AnalysisReport report = cost::analyze(catalog, runs, options);
      std::cout << cost::format_report(report);
      if (!json_path.empty()) write_file_atomic(json_path, cost::report_json(report).dump(2) + "\n");
      return kExitOk;
    });
  }

  if (*rotations) {
    return dispatch(app, [&]() -> int {
      const RotationSet set = generate_rotations(rot_step);
      std::cout << set.size() << '\n';
      if (rot_list) {
        char line[128];
        for (const Rotation& q : set) {
          std::snprintf(line, sizeof line, "%.9f\t%.9f\t%.9f\t%.9f\n", q.w, q.x, q.y, q.z);
          std::cout << line;
        }
      }
      return kExitOk;
    });
  }
  return kExitConfig;
}

int run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace fftdock
