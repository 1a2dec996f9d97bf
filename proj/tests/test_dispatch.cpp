#include <doctest.h>

#include <atomic>
#include <set>
#include <thread>

#include "fftdock/dispatch/local_pool.hpp"
#include "fftdock/dispatch/master.hpp"
#include "fftdock/dispatch/transport.hpp"
#include "fftdock/dispatch/worker.hpp"
#include "fftdock/errors.hpp"
#include "fixtures.hpp"

using namespace fftdock;

namespace {

std::vector<FileRef> refs(const std::string& prefix, int count) {
  std::vector<FileRef> out;
  for (int i = 1; i <= count; ++i) out.push_back({prefix + std::to_string(i), "/x/" + prefix + std::to_string(i) + ".pdb"});
  return out;
}

DockingResult fake(const DockingTask& t) { return fixtures::fake_result(t); }

// Runs a worker on a fresh pipe attached to `master`.
WorkerStats run_worker(Master& master, const std::string& id, TaskExecutor executor, int slots = 1) {
  auto [master_end, worker_end] = make_memory_pipe(id);
  master.attach(std::move(master_end));
  WorkerOptions options;
  options.worker_id = id;
  options.slots = slots;
  options.executor = std::move(executor);
  return worker_session(*worker_end, options);
}

}  // namespace

TEST_CASE("cross task enumeration") {
  const DockConfig config;
  const auto six = cross_tasks(refs("r", 3), refs("l", 2), config);
  REQUIRE(six.size() == 6);
  const std::vector<std::string> order = {"r1__l1", "r1__l2", "r2__l1", "r2__l2", "r3__l1", "r3__l2"};
  for (std::size_t i = 0; i < 6; ++i) CHECK(six[i].task_id == order[i]);
  CHECK(six[3].receptor_path == "/x/r2.pdb");
  CHECK(six[3].ligand_path == "/x/l2.pdb");

  const auto one = cross_tasks(refs("a", 1), refs("b", 1), config);
  REQUIRE(one.size() == 1);
  CHECK(one[0].task_id == "a1__b1");
  CHECK(cross_tasks(refs("r", 59), refs("l", 59), config).size() == 3481);

  CHECK_THROWS_AS(cross_tasks({}, refs("l", 2), config), ParameterError);
  auto dup = refs("r", 2);
  dup[1].id = dup[0].id;
  CHECK_THROWS_AS(cross_tasks(dup, refs("l", 2), config), ParameterError);
  CHECK(FileRef::from_path("/a/b/1abc_r.pdb").id == "1abc_r");
}

TEST_CASE("batch state transitions") {
  BatchState s(fixtures::fake_tasks(4), 2);
  const auto a = s.assign("A");
  const auto b = s.assign("A");
  const auto c = s.assign("B");
  REQUIRE((a && b && c));
  s.check_invariants();
  CHECK(s.in_flight_count() == 3);
  CHECK(s.complete(c->task_id, fake(*c)) == BatchState::Recorded::completed);
  CHECK(s.complete(c->task_id, fake(*c)) == BatchState::Recorded::duplicate);
  CHECK(s.complete("nope", fake(*c)) == BatchState::Recorded::unknown);

  // A's tasks go back to the front in assignment order
  CHECK(s.worker_lost("A") == std::vector<std::string>{a->task_id, b->task_id});
  s.check_invariants();
  CHECK(s.attempts(a->task_id) == 1);
  CHECK(s.assign("B")->task_id == a->task_id);
  CHECK(s.assign("B")->task_id == b->task_id);
  CHECK(s.worker_lost("B").size() == 2);
  CHECK(s.failed_count() == 2);  // both reached two attempts
  CHECK(s.fail(s.assign("C")->task_id, "boom") == BatchState::Recorded::completed);
  CHECK(s.pending_count() == 0);
  CHECK(s.done());
  s.check_invariants();
  const BatchReport r = s.report();
  CHECK(r.results.size() == 1);
  CHECK(r.failures.size() == 3);
  CHECK(r.per_worker_counts.at("B") == 1);
}

TEST_CASE("two workers, no faults") {
  const auto tasks = fixtures::fake_tasks(6);
  const BatchReport r = local_pool_run(tasks, 2, {}, fake);
  CHECK(r.results.size() == 6);
  CHECK(r.failures.empty());
  int sum = 0;
  for (const auto& [w, count] : r.per_worker_counts) sum += count;
  CHECK(sum == 6);
  for (std::size_t i = 0; i < tasks.size(); ++i) CHECK(r.results[i].task_id == tasks[i].task_id);
}

TEST_CASE("one worker completes in FIFO order") {
  const auto tasks = fixtures::fake_tasks(12);
  const BatchReport r = local_pool_run(tasks, 1, {}, fake);
  REQUIRE(r.completion_order.size() == 12);
  for (std::size_t i = 0; i < tasks.size(); ++i) CHECK(r.completion_order[i] == tasks[i].task_id);
}

TEST_CASE("results do not depend on the worker count") {
  const auto tasks = fixtures::fake_tasks(16);
  const BatchReport one = local_pool_run(tasks, 1, {}, fake);
  for (int workers : {2, 4}) {
    const BatchReport many = local_pool_run(tasks, workers, {}, fake);
    REQUIRE(many.results.size() == one.results.size());
    for (std::size_t i = 0; i < one.results.size(); ++i) CHECK(many.results[i].same_outcome(one.results[i]));
  }
  CHECK(local_pool_run({}, 3).total_tasks == 0);
  CHECK_THROWS_AS(local_pool_run(tasks, 0), ParameterError);
}

TEST_CASE("killed worker is replaced and its task retried") {
  const auto tasks = fixtures::fake_tasks(6);
  Master master(tasks, DispatchPolicy{});
  std::string interrupted;
  std::thread workers([&] {
    int calls = 0;
    const WorkerStats first = run_worker(master, "A", [&](const DockingTask& t) {
      if (++calls == 3) {
        interrupted = t.task_id;
        throw WorkerKilled();
      }
      return fake(t);
    });
    CHECK(first.killed);
    CHECK(first.completed == 2);
    run_worker(master, "B", fake);
  });
  const BatchReport r = master.wait();
  workers.join();
  CHECK(r.results.size() == 6);
  CHECK(r.failures.empty());
  CHECK(r.failed_attempts.size() == 1);
  CHECK(r.failed_attempts.at(interrupted) == 1);
  CHECK(r.per_worker_counts.at("A") == 2);
  CHECK(r.per_worker_counts.at("B") == 4);
}

TEST_CASE("task that always kills its worker fails permanently") {
  DispatchPolicy policy;
  policy.max_attempts = 2;
  Master master(fixtures::fake_tasks(1), policy);
  std::atomic<int> incarnations{0};
  std::thread workers([&] {
    while (!master.finished()) {
      ++incarnations;
      run_worker(master, "w", [](const DockingTask&) -> DockingResult { throw WorkerKilled(); });
    }
  });
  const BatchReport r = master.wait();
  workers.join();
  CHECK(r.results.empty());
  REQUIRE(r.failures.size() == 1);
  CHECK(r.failures[0].attempts == 2);
  CHECK(incarnations >= 2);
}

TEST_CASE("executor error fails the task without retry") {
  const auto tasks = fixtures::fake_tasks(3);
  const BatchReport r = local_pool_run(tasks, 1, {}, [](const DockingTask& t) {
    if (t.task_id == "r0__l1") throw ParseError("bad file", 4);
    return fixtures::fake_result(t);
  });
  CHECK(r.results.size() == 2);
  REQUIRE(r.failures.size() == 1);
  CHECK(r.failures[0].task_id == "r0__l1");
  CHECK(r.failures[0].reason.find("bad file") != std::string::npos);
}

TEST_CASE("one slot, one task: a single request-assign-result exchange") {
  auto [master_end, worker_end] = make_memory_pipe("script");
  std::vector<std::string> trace;
  std::thread master_side([&, conn = std::move(master_end)] {
    const auto tasks = fixtures::fake_tasks(1);
    bool assigned = false;
    while (auto m = conn->receive()) {
      trace.emplace_back(wire::type_name(*m));
      if (std::holds_alternative<wire::Request>(*m)) {
        if (!assigned) {
          conn->send(wire::Assign{tasks[0]});
          trace.emplace_back("ASSIGN");
          assigned = true;
        } else {
          conn->send(wire::NoMoreTasks{});
          trace.emplace_back("NO_MORE_TASKS");
        }
      } else if (std::holds_alternative<wire::Result>(*m)) {
        CHECK(std::get<wire::Result>(*m).result.has_value());
      }
    }
  });
  WorkerOptions options;
  options.slots = 1;
  options.executor = fake;
  const WorkerStats stats = worker_session(*worker_end, options);
  master_side.join();
  CHECK(stats.completed == 1);
  const std::vector<std::string> expected = {"HELLO", "REQUEST", "ASSIGN", "RESULT", "REQUEST", "NO_MORE_TASKS"};
  CHECK(trace == expected);
}

TEST_CASE("loopback TCP matches the in-process pool") {
  const auto tasks = fixtures::fake_tasks(6);
  TcpListener listener(Endpoint::parse("127.0.0.1:0"));
  const int port = listener.port();
  std::vector<std::thread> workers;
  std::vector<int> codes(2, -1);
  for (int i = 0; i < 2; ++i)
    workers.emplace_back([&, i] {
      WorkerOptions o;
      o.worker_id = "tcp";
      o.slots = 2;
      o.executor = fake;
      o.backoff_initial = std::chrono::milliseconds(10);
      codes[i] = worker_loop(Endpoint{"127.0.0.1", port}, o);
    });
  const BatchReport r = master_run(tasks, listener, DispatchPolicy{});
  for (auto& t : workers) t.join();
  CHECK(codes == std::vector<int>{0, 0});
  const BatchReport local = local_pool_run(tasks, 1, {}, fake);
  REQUIRE(r.results.size() == local.results.size());
  for (std::size_t i = 0; i < r.results.size(); ++i) CHECK(r.results[i].same_outcome(local.results[i]));
  CHECK(r.per_worker_counts.size() == 2);  // duplicate ids are made unique
}

TEST_CASE("no master: worker gives up after its backoff budget") {
  int port;
  {
    TcpListener probe(Endpoint::parse("127.0.0.1:0"));
    port = probe.port();
  }
  WorkerOptions o;
  o.backoff_initial = std::chrono::milliseconds(5);
  o.backoff_max = std::chrono::milliseconds(20);
  o.connect_attempts = 3;
  CHECK(worker_loop(Endpoint{"127.0.0.1", port}, o) == 4);
}

TEST_CASE("no worker within the startup timeout") {
  TcpListener listener(Endpoint::parse("127.0.0.1:0"));
  DispatchPolicy policy;
  policy.startup_timeout = std::chrono::milliseconds(150);
  CHECK_THROWS_AS(master_run(fixtures::fake_tasks(2), listener, policy), TimeoutError);
  CHECK_THROWS_AS(master_run({}, Endpoint::parse("127.0.0.1:0"), policy), ParameterError);
}

TEST_CASE("endpoint parsing") {
  CHECK(Endpoint::parse("example.org:7070").host == "example.org");
  CHECK(Endpoint::parse("example.org:7070").port == 7070);
  CHECK(Endpoint::parse(":81").port == 81);
  CHECK(Endpoint::parse("82").port == 82);
  CHECK_THROWS_AS(Endpoint::parse("host:port"), ParameterError);
}

TEST_CASE("randomized crashes keep every task terminal exactly once") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const fixtures::FaultTrial t = fixtures::run_fault_trial(seed);
    CAPTURE(seed);
    CHECK(t.problem == "");
  }
}

TEST_CASE("output tables") {
  auto tasks = cross_tasks(refs("r", 2), refs("l", 2), DockConfig{});
  const BatchReport r = local_pool_run(tasks, 2, {}, [](const DockingTask& t) {
    if (t.task_id == "r2__l1") throw IoError("gone");
    DockingResult d = fixtures::fake_result(t);
    d.best_score = t.task_id == "r1__l1" ? 12.5 : -3.0;
    return d;
  });
  const std::string matrix = score_matrix_tsv(r, {"r1", "r2"}, {"l1", "l2"});
  CHECK(matrix == "receptor\tl1\tl2\nr1\t12.500000\t-3.000000\nr2\tNA\t-3.000000\n");
  const std::string results = results_tsv(r);
  CHECK(std::count(results.begin(), results.end(), '\n') == 4);
  const auto j = report_json(r);
  CHECK(j["failures"].size() == 1);
}
