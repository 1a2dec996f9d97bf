#include "fftdock/dispatch/worker.hpp"

#include <deque>
#include <future>
#include <iostream>
#include <mutex>
#include <thread>
#include <vector>

#include "fftdock/errors.hpp"

namespace fftdock {

DockingResult execute_task(const DockingTask& task) {
  const Structure receptor = read_pdb_file(task.receptor_path, task.receptor_id);
  const Structure ligand = read_pdb_file(task.ligand_path, task.ligand_id);
  DockingResult r = dock_pair(receptor, ligand, task.config);
  r.task_id = task.task_id;
  return r;
}

namespace {

// Matches replies to REQUESTs. The master answers the REQUESTs of one
// connection in order, so the k-th ASSIGN/NO_MORE_TASKS belongs to the k-th
// REQUEST sent.
class RequestRouter {
 public:
  explicit RequestRouter(Connection& c) : connection_(c) {}

  // nullopt: stop this lane.
  std::optional<DockingTask> request(const std::string& worker_id) {
    std::future<std::optional<DockingTask>> reply;
    {
      std::lock_guard lock(mutex_);
      if (stopped_) return std::nullopt;
      waiters_.emplace_back();
      reply = waiters_.back().get_future();
      try {
        connection_.send(wire::Request{worker_id});
      } catch (const Error&) {
        waiters_.pop_back();
        return std::nullopt;
      }
    }
    return reply.get();
  }

  // Receiver thread body. Returns true if SHUTDOWN arrived.
  bool pump() {
    bool shutdown = false;
    while (true) {
      std::optional<wire::Message> m;
      try {
        m = connection_.receive();
      } catch (const Error&) {
      }
      if (!m) break;
      if (std::holds_alternative<wire::Shutdown>(*m)) {
        shutdown = true;
        break;
      }
      std::lock_guard lock(mutex_);
      if (waiters_.empty()) continue;
      if (auto* a = std::get_if<wire::Assign>(&*m))
        waiters_.front().set_value(std::move(a->task));
      else
        waiters_.front().set_value(std::nullopt);
      waiters_.pop_front();
    }
    stop();
    return shutdown;
  }

  void stop() {
    std::lock_guard lock(mutex_);
    stopped_ = true;
    for (auto& w : waiters_) w.set_value(std::nullopt);
    waiters_.clear();
  }

 private:
  Connection& connection_;
  std::mutex mutex_;
  std::deque<std::promise<std::optional<DockingTask>>> waiters_;
  bool stopped_ = false;
};

}  // namespace

WorkerStats worker_session(Connection& connection, const WorkerOptions& options) {
  if (options.slots < 1) throw ParameterError("slots must be >= 1");
  WorkerStats stats;
  std::mutex stats_mutex;
  connection.send(wire::Hello{options.worker_id, options.slots});

  RequestRouter router(connection);
  bool shutdown = false;
  std::thread receiver([&] { shutdown = router.pump(); });

  auto lane = [&] {
    while (auto task = router.request(options.worker_id)) {
      wire::Result result{task->task_id, std::nullopt, {}};
      try {
        result.result = options.executor(*task);
        result.result->task_id = task->task_id;
      } catch (const WorkerKilled&) {
        {
          std::lock_guard lock(stats_mutex);
          stats.killed = true;
        }
        connection.close();
        router.stop();
        return;
      } catch (const std::exception& e) {
        result.error = e.what();
      }
      try {
        connection.send(result);
      } catch (const Error&) {
        return;
      }
      std::lock_guard lock(stats_mutex);
      (result.result ? stats.completed : stats.errored)++;
    }
  };
  std::vector<std::thread> lanes;
  for (int i = 0; i < options.slots; ++i) lanes.emplace_back(lane);
  for (auto& t : lanes) t.join();
  connection.close();
  receiver.join();
  stats.shutdown_received = shutdown;
  return stats;
}

int worker_loop(const Endpoint& endpoint, const WorkerOptions& options) {
  if (options.slots < 1) throw ParameterError("slots must be >= 1");
  auto delay = options.backoff_initial;
  for (int attempt = 1; attempt <= options.connect_attempts; ++attempt) {
    std::unique_ptr<Connection> connection;
    try {
      connection = tcp_connect(endpoint);
    } catch (const TransportError& e) {
      std::cerr << "[worker " << options.worker_id << "] " << e.what() << " (attempt " << attempt << "/"
                << options.connect_attempts << ")\n";
      if (attempt == options.connect_attempts) break;
      std::this_thread::sleep_for(delay);
      delay = std::min(delay * 2, options.backoff_max);
      continue;
    }
    const WorkerStats stats = worker_session(*connection, options);
    std::cerr << "[worker " << options.worker_id << "] done: " << stats.completed << " completed, " << stats.errored
              << " errored\n";
    return 0;
  }
  return 4;
}

}  // namespace fftdock
