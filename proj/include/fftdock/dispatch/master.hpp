#pragma once

#include <chrono>
#include <condition_variable>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "fftdock/dispatch/task.hpp"
#include "fftdock/dispatch/transport.hpp"
#include "fftdock/docking.hpp"

namespace fftdock {

struct DispatchPolicy {
  int max_attempts = 3;
  // No worker said HELLO within this window: TimeoutError. Also bounds how
  // long unfinished work may sit with no live worker before it is abandoned.
  std::chrono::milliseconds startup_timeout{60'000};
};

struct TaskFailure {
  std::string task_id;
  int attempts = 0;
  std::string reason;
  friend bool operator==(const TaskFailure&, const TaskFailure&) = default;
};

struct BatchReport {
  int total_tasks = 0;
  std::vector<DockingResult> results;  // completed tasks, in task-list order
  std::vector<TaskFailure> failures;   // permanently failed, in task-list order
  std::map<std::string, int> failed_attempts;  // every task with at least one lost attempt
  std::map<std::string, int> per_worker_counts;
  std::vector<std::string> completion_order;
  double wall_time = 0.0;

  const DockingResult* find(const std::string& task_id) const;
};

// Bookkeeping for one batch. Not thread-safe; the Master serializes access.
// Every task is in exactly one of pending, in_flight, completed and
// permanently_failed.
class BatchState {
 public:
  struct InFlight {
    std::string worker_id;
    std::chrono::steady_clock::time_point assigned_at;
  };
  enum class Recorded { completed, duplicate, unknown };

  BatchState(std::vector<DockingTask> tasks, int max_attempts);

  // Pops the front pending task and marks it in flight for `worker_id`.
  std::optional<DockingTask> assign(const std::string& worker_id);
  Recorded complete(const std::string& task_id, DockingResult result);
  // Deterministic task error reported by a worker; no retry.
  Recorded fail(const std::string& task_id, const std::string& reason);
  // Requeues the worker's in-flight tasks at the front, in assignment order,
  // or fails them permanently once they reach max_attempts. Returns the
  // affected task ids.
  std::vector<std::string> worker_lost(const std::string& worker_id);
  // Marks everything not yet terminal as permanently failed.
  void abandon(const std::string& reason);

  bool done() const { return completed_.size() + failed_.size() == tasks_.size(); }
  std::size_t total() const { return tasks_.size(); }
  std::size_t pending_count() const { return pending_.size(); }
  std::size_t in_flight_count() const { return in_flight_.size(); }
  std::size_t completed_count() const { return completed_.size(); }
  std::size_t failed_count() const { return failed_.size(); }
  int attempts(const std::string& task_id) const;
  const std::map<std::string, InFlight>& in_flight() const { return in_flight_; }

  // Throws std::logic_error if a set overlaps another or the counts do not add
  // up to the total.
  void check_invariants() const;

  BatchReport report() const;

 private:
  std::vector<DockingTask> tasks_;
  std::map<std::string, std::size_t> index_;
  int max_attempts_;
  std::deque<std::size_t> pending_;
  std::map<std::string, InFlight> in_flight_;
  std::vector<std::string> in_flight_order_;
  std::map<std::string, DockingResult> completed_;
  std::map<std::string, TaskFailure> failed_;
  std::map<std::string, int> failed_attempts_;
  std::map<std::string, int> per_worker_;
  std::vector<std::string> completion_order_;
};

// Master side of the dispatch protocol. Each attached connection gets a reader
// thread; every message is applied to the BatchState under one lock, so state
// transitions are atomic.
class Master {
 public:
  using Observer = std::function<void(const BatchState&)>;

  Master(std::vector<DockingTask> tasks, DispatchPolicy policy);
  ~Master();
  Master(const Master&) = delete;
  Master& operator=(const Master&) = delete;

  // Called after every state transition, under the state lock.
  void set_observer(Observer observer);
  void attach(std::unique_ptr<Connection> connection);
  // Blocks until every task is terminal, then sends SHUTDOWN to all workers.
  // Throws TimeoutError if no worker said HELLO within the startup timeout.
  BatchReport wait();
  bool finished() const;

 private:
  struct Peer {
    std::unique_ptr<Connection> connection;
    std::string worker_id;
    bool live = true;
    std::thread reader;
  };

  void serve(Peer* peer);
  void handle(Peer* peer, wire::Message message);
  void disconnect(Peer* peer);
  void notify_transition();
  std::string unique_worker_id(const std::string& requested);

  DispatchPolicy policy_;
  mutable std::mutex mutex_;
  std::condition_variable changed_;
  BatchState state_;
  Observer observer_;
  std::vector<std::unique_ptr<Peer>> peers_;
  std::map<std::string, int> id_uses_;
  int live_workers_ = 0;
  bool any_hello_ = false;
  bool finished_ = false;
  std::chrono::steady_clock::time_point start_;
  std::chrono::steady_clock::time_point last_live_;
};

BatchReport master_run(std::vector<DockingTask> tasks, TcpListener& listener, const DispatchPolicy& policy);
BatchReport master_run(std::vector<DockingTask> tasks, const Endpoint& listen, const DispatchPolicy& policy);

// Output files for a finished batch.
nlohmann::json report_json(const BatchReport& report);
// Receptors as rows, ligands as columns, best_score per cell ("NA" when the
// pair did not complete).
std::string score_matrix_tsv(const BatchReport& report, const std::vector<std::string>& receptor_ids,
                             const std::vector<std::string>& ligand_ids);
// One DockingResult TSV line per completed task, with header.
std::string results_tsv(const BatchReport& report);

}  // namespace fftdock
