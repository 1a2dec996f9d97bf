#include "fftdock/dispatch/local_pool.hpp"

#include <thread>

#include "fftdock/errors.hpp"

namespace fftdock {

BatchReport local_pool_run(std::vector<DockingTask> tasks, int workers, const DispatchPolicy& policy,
                           const TaskExecutor& executor) {
  if (workers < 1) throw ParameterError("workers must be >= 1");
  if (tasks.empty()) return {};
  Master master(std::move(tasks), policy);
  std::vector<std::thread> threads;
  for (int i = 0; i < workers; ++i) {
    auto [master_end, worker_end] = make_memory_pipe("local-" + std::to_string(i + 1));
    master.attach(std::move(master_end));
    threads.emplace_back([conn = std::move(worker_end), i, &executor]() mutable {
      WorkerOptions options;
      options.worker_id = "local-" + std::to_string(i + 1);
      options.slots = 1;
      options.executor = executor;
      worker_session(*conn, options);
    });
  }
  BatchReport report;
  try {
    report = master.wait();
  } catch (...) {
    for (auto& t : threads) t.join();
    throw;
  }
  for (auto& t : threads) t.join();
  return report;
}

}  // namespace fftdock
