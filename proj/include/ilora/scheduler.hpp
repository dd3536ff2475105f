#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <thread>
#include <unordered_map>
#include <vector>

#include "ilora/types.hpp"

namespace ilora::link {

enum class ClockMode { Real, Virtual };

/// Single-threaded event loop with either a wall clock or a virtual clock.
///
/// Events run in (time, insertion) order. In Virtual mode the clock jumps to
/// the next event, so multi-second protocol exchanges complete in
/// microseconds of wall time and are fully deterministic.
///
/// The loop is driven either manually (advance_until / run_one, used by unit
/// tests) or by a driver thread after start(). Scheduling, cancellation and
/// now() are safe from any thread.
class Scheduler {
 public:
  using Task = std::function<void()>;
  using TimerId = std::uint64_t;

  explicit Scheduler(ClockMode mode = ClockMode::Virtual);
  ~Scheduler();
  Scheduler(const Scheduler&) = delete;
  Scheduler& operator=(const Scheduler&) = delete;

  ClockMode mode() const { return mode_; }
  Time now() const;

  TimerId schedule_at(Time at, Task task);
  TimerId schedule_after(Duration delay, Task task);
  TimerId post(Task task) { return schedule_after(Duration::zero(), std::move(task)); }
  bool cancel(TimerId id);

  std::size_t pending() const;
  std::optional<Time> next_event_time() const;

  // Manual driving. Not allowed while the driver thread runs.
  /// Fires the earliest event if it is due no later than `deadline`. Returns
  /// false when nothing fired; a virtual clock then moves to the deadline.
  bool run_one(std::optional<Time> deadline = std::nullopt);
  /// Fires every event with timestamp <= until; virtual clock ends at until.
  std::size_t advance_until(Time until);
  /// Runs until the queue is empty (or the next event is past `limit`).
  std::size_t run_until_idle(std::optional<Time> limit = std::nullopt);

  // Threaded driving.
  void start();
  void stop();
  bool running() const;
  /// Blocks until no event is queued, none is executing and no async work is
  /// outstanding. Requires the driver thread.
  void wait_idle();

  /// Runs blocking `work` off the loop, then `done` on the loop. In Virtual
  /// mode `work` runs inline and `done` is scheduled `virtual_cost` later, so
  /// the wall time spent in `work` never leaks into the virtual timeline.
  void run_async(Task work, Task done, Duration virtual_cost = Duration::zero());

 private:
  using Key = std::pair<Time, TimerId>;

  bool fire_next_locked(std::unique_lock<std::mutex>& lock);
  bool idle_locked() const;
  void driver_loop();
  Time real_now() const;

  const ClockMode mode_;
  const std::chrono::steady_clock::time_point epoch_;

  mutable std::mutex mu_;
  std::condition_variable cv_;       // queue changes, stop requests
  std::condition_variable idle_cv_;  // progress notifications for wait_idle
  std::map<Key, Task> queue_;
  std::unordered_map<TimerId, Time> index_;
  TimerId next_id_{1};
  Time virtual_now_{0};
  bool executing_{false};
  bool stop_requested_{false};
  int async_outstanding_{0};

  struct Worker {
    std::thread thread;
    std::shared_ptr<std::atomic<bool>> finished;
  };

  std::thread driver_;
  std::vector<Worker> workers_;
};

}  // namespace ilora::link
