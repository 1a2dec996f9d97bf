#pragma once

#include <chrono>
#include <functional>
#include <string>

#include "fftdock/dispatch/task.hpp"
#include "fftdock/dispatch/transport.hpp"
#include "fftdock/docking.hpp"

namespace fftdock {

using TaskExecutor = std::function<DockingResult(const DockingTask&)>;

// Reads both PDB files and runs dock_pair with the task's config.
DockingResult execute_task(const DockingTask& task);

// Thrown by an executor to make the whole worker drop its connection without
// reporting, as a crashed process would. Used for fault injection.
class WorkerKilled : public std::exception {
 public:
  const char* what() const noexcept override { return "worker killed"; }
};

struct WorkerOptions {
  std::string worker_id = "worker";
  int slots = 4;
  TaskExecutor executor = execute_task;
  std::chrono::milliseconds backoff_initial{1000};
  std::chrono::milliseconds backoff_max{30'000};
  int connect_attempts = 8;
};

struct WorkerStats {
  int completed = 0;
  int errored = 0;  // tasks answered with an error RESULT
  bool shutdown_received = false;
  bool killed = false;
};

// Runs the protocol on an established connection: HELLO, then `slots` lanes
// each looping REQUEST -> ASSIGN -> execute -> RESULT until NO_MORE_TASKS or
// SHUTDOWN. Returns once every lane has stopped; the connection is closed.
WorkerStats worker_session(Connection& connection, const WorkerOptions& options);

// Connects with bounded exponential backoff, then runs worker_session.
// Returns a process exit code: 0 on a clean finish, 4 when the master could
// not be reached.
int worker_loop(const Endpoint& endpoint, const WorkerOptions& options);

}  // namespace fftdock
