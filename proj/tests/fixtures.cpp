#include "fixtures.hpp"

#include <unistd.h>

#include <cmath>
#include <fstream>
#include <atomic>
#include <functional>
#include <map>
#include <mutex>
#include <random>
#include <thread>
#include <set>
#include <sstream>

#include "fftdock/dispatch/local_pool.hpp"
#include "fftdock/dispatch/transport.hpp"
#include "fftdock/rotations.hpp"

namespace fixtures {

std::filesystem::path data_dir() { return FFTDOCK_DATA_DIR; }

std::filesystem::path scratch_dir(const std::string& tag) {
  static int counter = 0;
  const auto dir = std::filesystem::temp_directory_path() /
                   ("fftdock-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

Structure make_structure(const std::string& id, const std::vector<Vec3>& positions) {
  Structure s;
  s.id = id;
  int serial = 1;
  for (const Vec3& p : positions) {
    AtomRecord a;
    a.serial = serial;
    a.atom_name = "CA";
    a.residue_name = "GLY";
    a.chain_id = 'A';
    a.residue_seq = serial;
    a.position = p;
    a.element = "C";
    s.atoms.push_back(a);
    ++serial;
  }
  return s;
}

std::string pdb_text(const Structure& s) {
  std::ostringstream out;
  write_pdb(out, s);
  return out.str();
}

void write_structure(const std::filesystem::path& path, const Structure& s) {
  std::ofstream out(path);
  write_pdb(out, s);
}

Structure random_blob(std::uint64_t seed, int atoms, double radius, const std::string& id, Vec3 center) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-radius, radius);
  std::vector<Vec3> pos;
  while (static_cast<int>(pos.size()) < atoms) {
    const Vec3 p{u(rng), u(rng), u(rng)};
    if (p.norm() <= radius) pos.push_back(center + p);
  }
  return make_structure(id, pos);
}

DockGrid random_grid(std::uint64_t seed, int n, bool complex_values, GridRole role) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  DockGrid g;
  g.spec.n = n;
  g.role = role;
  g.voxels.resize(std::size_t(n) * n * n);
  for (auto& v : g.voxels) v = {u(rng), complex_values ? u(rng) : 0.0};
  return g;
}

namespace {

using Cell = std::array<int, 3>;

std::set<Cell> erode_cross(const std::set<Cell>& s) {
  std::set<Cell> out;
  for (const Cell& c : s) {
    bool keep = true;
    for (int axis = 0; axis < 3 && keep; ++axis)
      for (int d : {-1, 1}) {
        Cell nb = c;
        nb[axis] += d;
        if (!s.count(nb)) keep = false;
      }
    if (keep) out.insert(c);
  }
  return out;
}

}  // namespace

// Receptor: lattice block x,y in [0,12], z in [0,6], minus an L pocket open
// at the top (arms of unequal length). Key: the pocket's empty cells eroded
// twice by the 6-neighbour cross, clipped to the block height, so its atom
// cores fill exactly the free space inside the pocket.
LockAndKey make_lock_and_key(double pitch) {
  auto in_pocket = [](int x, int y, int z) {
    if (z < 2) return false;
    const bool arm_a = x >= 2 && x <= 7 && y >= 2 && y <= 10;
    const bool arm_b = x >= 2 && x <= 8 && y >= 2 && y <= 7;
    return arm_a || arm_b;
  };
  std::vector<Vec3> receptor_pos;
  std::set<Cell> empty;  // pocket cells plus a shell of open space above the block
  for (int z = 0; z <= 9; ++z)
    for (int y = -1; y <= 13; ++y)
      for (int x = -1; x <= 13; ++x) {
        const bool in_block = x >= 0 && x <= 12 && y >= 0 && y <= 12 && z <= 6;
        if (in_block && !in_pocket(x, y, z))
          receptor_pos.push_back({pitch * x, pitch * y, pitch * z});
        else
          empty.insert({x, y, z});
      }
  const std::set<Cell> twice = erode_cross(erode_cross(empty));
  std::vector<Vec3> key_pos;
  Vec3 key_lo{1e9, 1e9, 1e9}, key_hi{-1e9, -1e9, -1e9};
  for (const Cell& c : twice)
    if (c[2] <= 6 && in_pocket(c[0], c[1], c[2])) {
      key_pos.push_back({pitch * c[0], pitch * c[1], pitch * c[2]});
      key_lo = {std::min(key_lo.x, 1.0 * c[0]), std::min(key_lo.y, 1.0 * c[1]), std::min(key_lo.z, 1.0 * c[2])};
      key_hi = {std::max(key_hi.x, 1.0 * c[0]), std::max(key_hi.y, 1.0 * c[1]), std::max(key_hi.z, 1.0 * c[2])};
    }

  LockAndKey lk;
  lk.receptor = make_structure("lock", receptor_pos);
  lk.docked_key = make_structure("key", key_pos);
  const Vec3 key_center = 0.5 * (key_lo + key_hi);
  const Vec3 receptor_center{6, 6, 3};
  lk.seat_offset = {int(std::lround(key_center.x - receptor_center.x)),
                    int(std::lround(key_center.y - receptor_center.y)),
                    int(std::lround(key_center.z - receptor_center.z))};

  const double quarter = std::acos(0.0);
  lk.applied = Rotation::from_euler_zyz(quarter, quarter, 0.0);
  const Mat3 m = lk.applied.matrix();
  const Vec3 shift{31.7, -8.3, 14.9};
  std::vector<Vec3> moved;
  for (const Vec3& p : key_pos) moved.push_back(fftdock::apply(m, p) + shift);
  lk.key = make_structure("key", moved);
  return lk;
}

std::array<int, 3> LockAndKey::expected_translation(int n) const {
  // The ligand lands on the grid center and pose t moves it by -t voxels.
  std::array<int, 3> t{};
  for (int i = 0; i < 3; ++i) t[i] = ((-seat_offset[i]) % n + n) % n;
  return t;
}

std::vector<Pose> sparse_exhaustive_top_poses(const Structure& receptor, const Structure& ligand,
                                              const DockConfig& config, int top_k) {
  const GridSpec spec = choose_grid_size(receptor, ligand, config.pitch, config.margin_voxels);
  const DockGrid rgrid = assign_grid(receptor, spec, GridRole::receptor, config.params);
  const RotationSet rotations = generate_rotations(config.angular_step);
  const Vec3 ligand_center = bounding_box(ligand).center();
  const int n = spec.n;

  PoseHeap heap(static_cast<std::size_t>(top_k));
  for (std::size_t r = 0; r < rotations.size(); ++r) {
    const Structure placed_rot = rotate_structure(ligand, rotations[r], ligand_center);
    Structure placed = placed_rot;
    for (AtomRecord& a : placed.atoms) a.position = a.position - ligand_center + spec.center();
    const DockGrid lgrid = assign_grid(placed, spec, GridRole::ligand, config.params);

    struct Weighted {
      int x, y, z;
      double w;
    };
    std::vector<Weighted> nonzero;
    for (int z = 0; z < n; ++z)
      for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) {
          const double w = lgrid.voxels[spec.index(x, y, z)].real();
          if (w != 0.0) nonzero.push_back({x, y, z, w});
        }
    // ligand voxel u pairs with receptor voxel u - t
    for (int tz = 0; tz < n; ++tz)
      for (int ty = 0; ty < n; ++ty)
        for (int tx = 0; tx < n; ++tx) {
          double sum = 0.0;
          for (const Weighted& u : nonzero)
            sum += u.w * rgrid.voxels[spec.index((u.x - tx + n) % n, (u.y - ty + n) % n, (u.z - tz + n) % n)].real();
          heap.push(Pose{static_cast<int>(r), {tx, ty, tz}, quantize_score(sum)});
        }
  }
  return heap.sorted();
}

std::vector<DockingTask> fake_tasks(int count) {
  std::vector<DockingTask> tasks;
  for (int i = 0; i < count; ++i) {
    DockingTask t;
    t.receptor_id = "r" + std::to_string(i / 8);
    t.ligand_id = "l" + std::to_string(i % 8);
    t.task_id = make_task_id(t.receptor_id, t.ligand_id);
    tasks.push_back(t);
  }
  return tasks;
}

DockingResult fake_result(const DockingTask& task) {
  DockingResult r;
  r.task_id = task.task_id;
  r.receptor_id = task.receptor_id;
  r.ligand_id = task.ligand_id;
  const auto h = std::hash<std::string>{}(task.task_id);
  r.best_score = static_cast<double>(h % 100000) / 100.0;
  r.top_poses.push_back(Pose{static_cast<int>(h % 7), {int(h % 5), int(h % 3), int(h % 11)}, r.best_score});
  r.rotation_count = 7;
  r.angular_step = 90;
  return r;
}

namespace {

struct CrashyExecutor {
  std::mutex mutex;
  std::mt19937_64 rng;
  double kill_probability;

  DockingResult run(const DockingTask& task) {
    bool kill;
    int pause_us;
    {
      std::lock_guard lock(mutex);
      kill = std::bernoulli_distribution(kill_probability)(rng);
      pause_us = std::uniform_int_distribution<int>(0, 200)(rng);
    }
    std::this_thread::sleep_for(std::chrono::microseconds(pause_us));
    if (kill) throw WorkerKilled();
    return fake_result(task);
  }
};

}  // namespace

FaultTrial run_fault_trial(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  FaultTrial trial;
  trial.tasks = std::uniform_int_distribution<int>(1, 64)(rng);
  trial.workers = std::uniform_int_distribution<int>(1, 8)(rng);
  trial.max_attempts = std::uniform_int_distribution<int>(1, 4)(rng);
  const double kill_probability = std::uniform_real_distribution<double>(0.0, 0.3)(rng);
  const std::vector<DockingTask> tasks = fake_tasks(trial.tasks);

  DispatchPolicy policy;
  policy.max_attempts = trial.max_attempts;
  Master master(tasks, policy);

  std::mutex observed_mutex;
  std::string problem;
  std::size_t last_terminal = 0;
  master.set_observer([&](const BatchState& state) {
    std::lock_guard lock(observed_mutex);
    ++trial.transitions;
    try {
      state.check_invariants();
    } catch (const std::exception& e) {
      if (problem.empty()) problem = std::string("invariant: ") + e.what();
    }
    const std::size_t terminal = state.completed_count() + state.failed_count();
    if (terminal < last_terminal && problem.empty()) problem = "terminal count decreased";
    last_terminal = terminal;
  });

  std::atomic<int> kills{0};
  std::atomic<int> next_id{0};
  std::vector<std::thread> threads;
  for (int w = 0; w < trial.workers; ++w) {
    const int slots = std::uniform_int_distribution<int>(1, 3)(rng);
    const std::uint64_t worker_seed = rng();
    threads.emplace_back([&, slots, worker_seed] {
      std::uint64_t incarnation = 0;
      while (!master.finished()) {
        auto [master_end, worker_end] = make_memory_pipe("trial");
        master.attach(std::move(master_end));
        auto exec = std::make_shared<CrashyExecutor>();
        exec->rng.seed(worker_seed + 7919 * incarnation++);
        exec->kill_probability = kill_probability;
        WorkerOptions options;
        options.worker_id = "w" + std::to_string(next_id++);
        options.slots = slots;
        options.executor = [exec](const DockingTask& t) { return exec->run(t); };
        const WorkerStats stats = worker_session(*worker_end, options);
        // a supervisor restarts every exited worker until the batch ends, so
        // work requeued after the others drained still finds a taker
        if (stats.killed)
          ++kills;
        else
          std::this_thread::sleep_for(std::chrono::milliseconds(1));
      }
    });
  }
  BatchReport report;
  try {
    report = master.wait();
  } catch (const std::exception& e) {
    problem = std::string("wait threw: ") + e.what();
  }
  for (auto& t : threads) t.join();
  trial.kills = kills;
  trial.completed = static_cast<int>(report.results.size());
  trial.failed = static_cast<int>(report.failures.size());

  auto fail = [&](const std::string& why) {
    if (problem.empty()) problem = why;
  };
  {
    std::lock_guard lock(observed_mutex);
    if (trial.transitions == 0) fail("observer never called");
  }
  // every task terminal exactly once
  std::map<std::string, int> terminal;
  for (const DockingResult& r : report.results) ++terminal[r.task_id];
  for (const TaskFailure& f : report.failures) ++terminal[f.task_id];
  if (terminal.size() != tasks.size()) fail("not every task is terminal");
  for (const auto& [id, count] : terminal)
    if (count != 1) fail("task " + id + " terminal " + std::to_string(count) + " times");
  for (const DockingTask& t : tasks)
    if (!terminal.count(t.task_id)) fail("task " + t.task_id + " missing");
  if (report.total_tasks != trial.tasks) fail("total_tasks mismatch");

  // completed results equal the fault-free run
  const BatchReport clean =
      local_pool_run(tasks, 1, DispatchPolicy{}, [](const DockingTask& t) { return fake_result(t); });
  for (const DockingResult& r : report.results) {
    const DockingResult* ref = clean.find(r.task_id);
    if (!ref || !ref->same_outcome(r)) fail("result differs from the fault-free run for " + r.task_id);
  }
  int credited = 0;
  for (const auto& [worker, count] : report.per_worker_counts) credited += count;
  if (credited != trial.completed) fail("per-worker counts do not sum to completions");
  for (const TaskFailure& f : report.failures)
    if (f.attempts != trial.max_attempts) fail("task " + f.task_id + " failed after " + std::to_string(f.attempts));
  for (const auto& [id, attempts] : report.failed_attempts)
    if (attempts > trial.max_attempts) fail("task " + id + " exceeded max attempts");
  trial.problem = problem;
  return trial;
}

}  // namespace fixtures
