#include "ilora/scheduler.hpp"

#include <algorithm>
#include <iostream>
#include <stdexcept>

namespace ilora::link {

Scheduler::Scheduler(ClockMode mode) : mode_(mode), epoch_(std::chrono::steady_clock::now()) {}

Scheduler::~Scheduler() {
  stop();
  for (auto& w : workers_) {
    if (w.thread.joinable()) w.thread.join();
  }
}

Time Scheduler::real_now() const {
  return std::chrono::duration_cast<Time>(std::chrono::steady_clock::now() - epoch_);
}

Time Scheduler::now() const {
  if (mode_ == ClockMode::Real) return real_now();
  std::lock_guard lock(mu_);
  return virtual_now_;
}

Scheduler::TimerId Scheduler::schedule_at(Time at, Task task) {
  TimerId id;
  {
    std::lock_guard lock(mu_);
    if (mode_ == ClockMode::Virtual) at = std::max(at, virtual_now_);
    id = next_id_++;
    queue_.emplace(Key{at, id}, std::move(task));
    index_.emplace(id, at);
  }
  cv_.notify_all();
  return id;
}

Scheduler::TimerId Scheduler::schedule_after(Duration delay, Task task) {
  return schedule_at(now() + delay, std::move(task));
}

bool Scheduler::cancel(TimerId id) {
  std::lock_guard lock(mu_);
  auto it = index_.find(id);
  if (it == index_.end()) return false;
  queue_.erase(Key{it->second, id});
  index_.erase(it);
  idle_cv_.notify_all();
  return true;
}

std::size_t Scheduler::pending() const {
  std::lock_guard lock(mu_);
  return queue_.size();
}

std::optional<Time> Scheduler::next_event_time() const {
  std::lock_guard lock(mu_);
  if (queue_.empty()) return std::nullopt;
  return queue_.begin()->first.first;
}

bool Scheduler::fire_next_locked(std::unique_lock<std::mutex>& lock) {
  if (queue_.empty()) return false;
  auto node = queue_.extract(queue_.begin());
  index_.erase(node.key().second);
  if (mode_ == ClockMode::Virtual) virtual_now_ = std::max(virtual_now_, node.key().first);
  executing_ = true;
  lock.unlock();
  try {
    node.mapped()();
  } catch (...) {
    lock.lock();
    executing_ = false;
    idle_cv_.notify_all();
    throw;
  }
  lock.lock();
  executing_ = false;
  idle_cv_.notify_all();
  return true;
}

bool Scheduler::run_one(std::optional<Time> deadline) {
  if (running()) throw std::logic_error("manual driving while the driver thread runs");
  std::unique_lock lock(mu_);
  for (;;) {
    const bool due = !queue_.empty() && (!deadline || queue_.begin()->first.first <= *deadline);
    if (due) {
      const Time at = queue_.begin()->first.first;
      if (mode_ == ClockMode::Real && at > real_now()) {
        cv_.wait_until(lock, epoch_ + at);
        continue;
      }
      return fire_next_locked(lock);
    }
    if (mode_ == ClockMode::Virtual) {
      if (deadline) virtual_now_ = std::max(virtual_now_, *deadline);
      return false;
    }
    if (!deadline || real_now() >= *deadline) return false;
    cv_.wait_until(lock, epoch_ + *deadline);
  }
}

std::size_t Scheduler::advance_until(Time until) {
  std::size_t fired = 0;
  while (run_one(until)) ++fired;
  return fired;
}

std::size_t Scheduler::run_until_idle(std::optional<Time> limit) {
  std::size_t fired = 0;
  for (;;) {
    auto next = next_event_time();
    if (!next || (limit && *next > *limit)) return fired;
    if (run_one(next)) ++fired;
  }
}

void Scheduler::start() {
  std::lock_guard lock(mu_);
  if (driver_.joinable()) return;
  stop_requested_ = false;
  driver_ = std::thread([this] { driver_loop(); });
}

void Scheduler::stop() {
  {
    std::lock_guard lock(mu_);
    stop_requested_ = true;
  }
  cv_.notify_all();
  if (driver_.joinable() && driver_.get_id() != std::this_thread::get_id()) driver_.join();
}

bool Scheduler::running() const {
  std::lock_guard lock(mu_);
  return driver_.joinable() && !stop_requested_;
}

void Scheduler::driver_loop() {
  std::unique_lock lock(mu_);
  while (!stop_requested_) {
    if (queue_.empty()) {
      cv_.wait(lock, [this] { return stop_requested_ || !queue_.empty(); });
      continue;
    }
    const Time at = queue_.begin()->first.first;
    if (mode_ == ClockMode::Real && at > real_now()) {
      cv_.wait_until(lock, epoch_ + at);
      continue;
    }
    try {
      fire_next_locked(lock);
    } catch (const std::exception& e) {
      std::cerr << "scheduler: task failed: " << e.what() << '\n';
    }
  }
}

bool Scheduler::idle_locked() const {
  return queue_.empty() && !executing_ && async_outstanding_ == 0;
}

void Scheduler::wait_idle() {
  std::unique_lock lock(mu_);
  idle_cv_.wait(lock, [this] { return idle_locked() || stop_requested_; });
}

void Scheduler::run_async(Task work, Task done, Duration virtual_cost) {
  if (mode_ == ClockMode::Virtual) {
    work();
    schedule_after(virtual_cost, std::move(done));
    return;
  }
  std::lock_guard lock(mu_);
  // reap workers that already finished
  std::erase_if(workers_, [](Worker& w) {
    if (!w.finished->load()) return false;
    w.thread.join();
    return true;
  });
  ++async_outstanding_;
  auto finished = std::make_shared<std::atomic<bool>>(false);
  std::thread t([this, finished, work = std::move(work), done = std::move(done)]() mutable {
    try {
      work();
    } catch (const std::exception& e) {
      std::cerr << "scheduler: async work failed: " << e.what() << '\n';
    }
    post(std::move(done));
    {
      std::lock_guard inner(mu_);
      --async_outstanding_;
      idle_cv_.notify_all();
    }
    finished->store(true);
  });
  workers_.push_back(Worker{std::move(t), std::move(finished)});
}

}  // namespace ilora::link
