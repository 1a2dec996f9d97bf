#pragma once

#include <vector>

#include "fftdock/dispatch/master.hpp"
#include "fftdock/dispatch/worker.hpp"

namespace fftdock {

// Master plus `workers` single-slot workers in this process, connected by
// in-memory pipes. Produces the same BatchReport as a networked run. An empty
// task list yields an empty report.
BatchReport local_pool_run(std::vector<DockingTask> tasks, int workers, const DispatchPolicy& policy = {},
                           const TaskExecutor& executor = execute_task);

}  // namespace fftdock
