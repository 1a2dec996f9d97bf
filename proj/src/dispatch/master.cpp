#include "fftdock/dispatch/master.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <iostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "fftdock/errors.hpp"

namespace fftdock {

namespace {

using Clock = std::chrono::steady_clock;

void log_line(const std::string& msg) { std::cerr << "[master] " << msg << '\n'; }

}  // namespace

const DockingResult* BatchReport::find(const std::string& task_id) const {
  for (const DockingResult& r : results)
    if (r.task_id == task_id) return &r;
  return nullptr;
}

BatchState::BatchState(std::vector<DockingTask> tasks, int max_attempts)
    : tasks_(std::move(tasks)), max_attempts_(max_attempts) {
  if (max_attempts_ < 1) throw ParameterError("max_attempts must be >= 1");
  for (std::size_t i = 0; i < tasks_.size(); ++i) {
    if (!index_.emplace(tasks_[i].task_id, i).second)
      throw ParameterError("duplicate task id " + tasks_[i].task_id);
    pending_.push_back(i);
  }
}

std::optional<DockingTask> BatchState::assign(const std::string& worker_id) {
  if (pending_.empty()) return std::nullopt;
  const DockingTask& task = tasks_[pending_.front()];
  pending_.pop_front();
  in_flight_[task.task_id] = {worker_id, Clock::now()};
  in_flight_order_.push_back(task.task_id);
  return task;
}

BatchState::Recorded BatchState::complete(const std::string& task_id, DockingResult result) {
  if (completed_.count(task_id) || failed_.count(task_id)) return Recorded::duplicate;
  auto it = in_flight_.find(task_id);
  if (it == in_flight_.end()) return Recorded::unknown;
  per_worker_[it->second.worker_id]++;
  in_flight_.erase(it);
  std::erase(in_flight_order_, task_id);
  result.task_id = task_id;
  completed_.emplace(task_id, std::move(result));
  completion_order_.push_back(task_id);
  return Recorded::completed;
}

BatchState::Recorded BatchState::fail(const std::string& task_id, const std::string& reason) {
  if (completed_.count(task_id) || failed_.count(task_id)) return Recorded::duplicate;
  auto it = in_flight_.find(task_id);
  if (it == in_flight_.end()) return Recorded::unknown;
  in_flight_.erase(it);
  std::erase(in_flight_order_, task_id);
  failed_[task_id] = {task_id, attempts(task_id) + 1, reason};
  return Recorded::completed;
}

std::vector<std::string> BatchState::worker_lost(const std::string& worker_id) {
  std::vector<std::string> affected;
  std::vector<std::size_t> requeue;
  for (const std::string& id : in_flight_order_) {
    if (in_flight_.at(id).worker_id != worker_id) continue;
    affected.push_back(id);
    const int attempts = ++failed_attempts_[id];
    if (attempts >= max_attempts_)
      failed_[id] = {id, attempts, "worker lost " + std::to_string(attempts) + " times"};
    else
      requeue.push_back(index_.at(id));
  }
  for (const std::string& id : affected) {
    in_flight_.erase(id);
    std::erase(in_flight_order_, id);
  }
  for (auto it = requeue.rbegin(); it != requeue.rend(); ++it) pending_.push_front(*it);
  return affected;
}

void BatchState::abandon(const std::string& reason) {
  for (std::size_t i : pending_) {
    const std::string& id = tasks_[i].task_id;
    failed_[id] = {id, attempts(id), reason};
  }
  pending_.clear();
  for (const auto& [id, info] : in_flight_) failed_[id] = {id, attempts(id) + 1, reason};
  in_flight_.clear();
  in_flight_order_.clear();
}

int BatchState::attempts(const std::string& task_id) const {
  auto it = failed_attempts_.find(task_id);
  return it == failed_attempts_.end() ? 0 : it->second;
}

void BatchState::check_invariants() const {
  std::set<std::string> seen;
  auto claim = [&](const std::string& id, const char* where) {
    if (!index_.count(id)) throw std::logic_error(std::string("unknown task in ") + where + ": " + id);
    if (!seen.insert(id).second) throw std::logic_error(std::string("task in two states (") + where + "): " + id);
  };
  for (std::size_t i : pending_) claim(tasks_[i].task_id, "pending");
  for (const auto& [id, info] : in_flight_) claim(id, "in_flight");
  for (const auto& [id, r] : completed_) claim(id, "completed");
  for (const auto& [id, f] : failed_) claim(id, "failed");
  if (pending_.size() + in_flight_.size() + completed_.size() + failed_.size() != tasks_.size())
    throw std::logic_error("task conservation violated");
  if (in_flight_order_.size() != in_flight_.size()) throw std::logic_error("in-flight order out of sync");
}

BatchReport BatchState::report() const {
  BatchReport r;
  r.total_tasks = static_cast<int>(tasks_.size());
  for (const DockingTask& t : tasks_) {
    if (auto it = completed_.find(t.task_id); it != completed_.end()) r.results.push_back(it->second);
    if (auto it = failed_.find(t.task_id); it != failed_.end()) r.failures.push_back(it->second);
  }
  r.failed_attempts = failed_attempts_;
  r.per_worker_counts = per_worker_;
  r.completion_order = completion_order_;
  return r;
}

Master::Master(std::vector<DockingTask> tasks, DispatchPolicy policy)
    : policy_(policy), state_(std::move(tasks), policy.max_attempts), start_(Clock::now()), last_live_(start_) {}

Master::~Master() {
  std::vector<Peer*> peers;
  {
    std::lock_guard lock(mutex_);
    finished_ = true;
    for (auto& p : peers_) peers.push_back(p.get());
  }
  for (Peer* p : peers) p->connection->close();
  for (Peer* p : peers)
    if (p->reader.joinable()) p->reader.join();
}

void Master::set_observer(Observer observer) {
  std::lock_guard lock(mutex_);
  observer_ = std::move(observer);
}

bool Master::finished() const {
  std::lock_guard lock(mutex_);
  return finished_;
}

void Master::attach(std::unique_ptr<Connection> connection) {
  std::lock_guard lock(mutex_);
  auto peer = std::make_unique<Peer>();
  peer->connection = std::move(connection);
  Peer* raw = peer.get();
  peers_.push_back(std::move(peer));
  raw->reader = std::thread([this, raw] { serve(raw); });
}

void Master::serve(Peer* peer) {
  while (true) {
    std::optional<wire::Message> m;
    try {
      m = peer->connection->receive();
    } catch (const Error& e) {
      log_line("dropping " + peer->connection->peer() + ": " + e.what());
      peer->connection->close();
    }
    if (!m) {
      disconnect(peer);
      return;
    }
    handle(peer, std::move(*m));
  }
}

std::string Master::unique_worker_id(const std::string& requested) {
  const std::string base = requested.empty() ? "worker" : requested;
  const int uses = id_uses_[base]++;
  return uses == 0 ? base : base + "#" + std::to_string(uses + 1);
}

void Master::notify_transition() {
  if (observer_) observer_(state_);
  changed_.notify_all();
}

void Master::handle(Peer* peer, wire::Message message) {
  std::lock_guard lock(mutex_);
  auto reply = [peer](const wire::Message& m) {
    try {
      peer->connection->send(m);
    } catch (const Error&) {
      // the reader thread will see the closed connection
    }
  };
  auto register_worker = [&](const std::string& requested) {
    if (!peer->worker_id.empty()) return;
    peer->worker_id = unique_worker_id(requested);
    any_hello_ = true;
    ++live_workers_;
  };

  if (finished_) {
    reply(wire::Shutdown{});
    return;
  }
  if (auto* hello = std::get_if<wire::Hello>(&message)) {
    register_worker(hello->worker_id);
  } else if (auto* request = std::get_if<wire::Request>(&message)) {
    register_worker(request->worker_id);
    if (auto task = state_.assign(peer->worker_id)) {
      reply(wire::Assign{std::move(*task)});
      notify_transition();
    } else {
      reply(wire::NoMoreTasks{});
    }
  } else if (auto* result = std::get_if<wire::Result>(&message)) {
    const auto outcome = result->result ? state_.complete(result->task_id, std::move(*result->result))
                                        : state_.fail(result->task_id, result->error);
    if (outcome == BatchState::Recorded::duplicate)
      log_line("discarding duplicate result for " + result->task_id);
    else if (outcome == BatchState::Recorded::unknown)
      log_line("discarding result for task not in flight: " + result->task_id);
    else if (!result->error.empty())
      log_line("task " + result->task_id + " failed: " + result->error);
    notify_transition();
  } else {
    log_line("ignoring unexpected " + std::string(wire::type_name(message)) + " from " + peer->connection->peer());
  }
}

void Master::disconnect(Peer* peer) {
  std::lock_guard lock(mutex_);
  if (!peer->live) return;
  peer->live = false;
  if (peer->worker_id.empty()) return;
  if (--live_workers_ == 0) last_live_ = Clock::now();
  if (finished_) return;
  const auto lost = state_.worker_lost(peer->worker_id);
  for (const std::string& id : lost)
    log_line("worker " + peer->worker_id + " lost with " + id + " in flight (attempt " +
             std::to_string(state_.attempts(id)) + ")");
  notify_transition();
}

BatchReport Master::wait() {
  std::unique_lock lock(mutex_);
  bool timed_out = false;
  while (!state_.done()) {
    const auto now = Clock::now();
    if (!any_hello_ && now - start_ > policy_.startup_timeout) {
      timed_out = true;
      break;
    }
    if (any_hello_ && live_workers_ == 0 && now - last_live_ > policy_.startup_timeout) {
      log_line("no live workers; abandoning unfinished tasks");
      state_.abandon("abandoned: no live workers");
      notify_transition();
      break;
    }
    changed_.wait_for(lock, std::chrono::milliseconds(20));
  }
  finished_ = true;
  BatchReport report = state_.report();
  report.wall_time = std::chrono::duration<double>(Clock::now() - start_).count();
  std::vector<Peer*> peers;
  for (auto& p : peers_) {
    peers.push_back(p.get());
    if (p->live) {
      try {
        p->connection->send(wire::Shutdown{});
      } catch (const Error&) {
      }
    }
  }
  lock.unlock();
  for (Peer* p : peers) p->connection->close();
  for (Peer* p : peers)
    if (p->reader.joinable()) p->reader.join();
  if (timed_out) throw TimeoutError("no worker connected within the startup timeout");
  return report;
}

BatchReport master_run(std::vector<DockingTask> tasks, TcpListener& listener, const DispatchPolicy& policy) {
  if (tasks.empty()) throw ParameterError("master needs at least one task");
  Master master(std::move(tasks), policy);
  std::atomic<bool> stop{false};
  std::thread acceptor([&] {
    while (!stop.load()) {
      if (auto c = listener.accept(std::chrono::milliseconds(50))) {
        if (stop.load()) break;
        master.attach(std::move(c));
      }
    }
  });
  try {
    BatchReport report = master.wait();
    stop = true;
    acceptor.join();
    return report;
  } catch (...) {
    stop = true;
    acceptor.join();
    throw;
  }
}

BatchReport master_run(std::vector<DockingTask> tasks, const Endpoint& listen, const DispatchPolicy& policy) {
  TcpListener listener(listen);
  return master_run(std::move(tasks), listener, policy);
}

nlohmann::json report_json(const BatchReport& report) {
  nlohmann::json j;
  j["total_tasks"] = report.total_tasks;
  j["completed"] = report.results.size();
  j["results"] = report.results;
  j["failures"] = nlohmann::json::array();
  for (const TaskFailure& f : report.failures)
    j["failures"].push_back({{"task_id", f.task_id}, {"attempts", f.attempts}, {"reason", f.reason}});
  j["failed_attempts"] = report.failed_attempts;
  j["per_worker_counts"] = report.per_worker_counts;
  j["wall_time"] = report.wall_time;
  return j;
}

std::string score_matrix_tsv(const BatchReport& report, const std::vector<std::string>& receptor_ids,
                             const std::vector<std::string>& ligand_ids) {
  std::map<std::string, const DockingResult*> by_id;
  for (const DockingResult& r : report.results) by_id[r.task_id] = &r;
  std::ostringstream out;
  out << "receptor";
  for (const std::string& l : ligand_ids) out << '\t' << l;
  out << '\n';
  char cell[48];
  for (const std::string& r : receptor_ids) {
    out << r;
    for (const std::string& l : ligand_ids) {
      auto it = by_id.find(make_task_id(r, l));
      if (it == by_id.end()) {
        out << "\tNA";
      } else {
        std::snprintf(cell, sizeof cell, "\t%.6f", it->second->best_score);
        out << cell;
      }
    }
    out << '\n';
  }
  return out.str();
}

std::string results_tsv(const BatchReport& report) {
  std::string out = tsv_header() + "\n";
  for (const DockingResult& r : report.results) out += to_tsv_line(r) + "\n";
  return out;
}

}  // namespace fftdock
