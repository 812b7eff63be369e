#pragma once

#include <condition_variable>
#include <cstddef>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include "dice/errors.hpp"
#include "dice/trajectory.hpp"

namespace dice {

/// Bounded multi-producer queue between actors and the learner. A trajectory
/// stays resident until it has been handed out `reuse` times; after each use it
/// goes to the back of the queue, so a batch never holds the same trajectory twice.
class DataCollector {
 public:
  using Item = std::shared_ptr<const Trajectory>;

  DataCollector(std::size_t capacity, int reuse) : capacity_(capacity), reuse_(reuse) {
    if (capacity == 0) throw InvalidArgument("data collector: capacity must be positive");
    if (reuse < 1) throw InvalidArgument("data collector: reuse must be >= 1");
  }

  /// Blocks while full. Returns false once the collector is shut down.
  bool submit(Trajectory traj) {
    auto item = std::make_shared<const Trajectory>(std::move(traj));
    std::unique_lock lock(mu_);
    not_full_.wait(lock, [&] { return closed_ || queue_.size() < capacity_; });
    if (closed_) return false;
    queue_.push_back({std::move(item), reuse_});
    ++submitted_;
    not_empty_.notify_all();
    return true;
  }

  /// Non-blocking submit; false when full or shut down.
  bool try_submit(Trajectory traj) {
    std::lock_guard lock(mu_);
    if (closed_ || queue_.size() >= capacity_) return false;
    queue_.push_back({std::make_shared<const Trajectory>(std::move(traj)), reuse_});
    ++submitted_;
    not_empty_.notify_all();
    return true;
  }

  /// Blocks until n distinct trajectories are resident, then hands them out in
  /// FIFO order. Returns nullopt if shut down before that happens.
  std::optional<std::vector<Item>> next_batch(std::size_t n) {
    if (n == 0 || n > capacity_) throw InvalidArgument("data collector: batch size must lie in [1, capacity]");
    std::unique_lock lock(mu_);
    not_empty_.wait(lock, [&] { return closed_ || queue_.size() >= n; });
    if (queue_.size() < n) return std::nullopt;
    std::vector<Item> batch;
    batch.reserve(n);
    std::vector<Entry> again;
    for (std::size_t i = 0; i < n; ++i) {
      Entry e = std::move(queue_.front());
      queue_.pop_front();
      batch.push_back(e.item);
      ++handed_out_;
      if (--e.remaining > 0) again.push_back(std::move(e));
    }
    for (auto& e : again) queue_.push_back(std::move(e));
    not_full_.notify_all();
    return batch;
  }

  /// Stops the collector: blocked producers and consumers wake and fail.
  void shutdown() {
    std::lock_guard lock(mu_);
    closed_ = true;
    not_full_.notify_all();
    not_empty_.notify_all();
  }

  /// Removes and returns every resident trajectory.
  std::vector<Item> drain() {
    std::lock_guard lock(mu_);
    std::vector<Item> out;
    for (auto& e : queue_) out.push_back(std::move(e.item));
    queue_.clear();
    not_full_.notify_all();
    return out;
  }

  std::size_t size() const {
    std::lock_guard lock(mu_);
    return queue_.size();
  }

  std::size_t submitted() const {
    std::lock_guard lock(mu_);
    return submitted_;
  }

  /// Total trajectory uses handed to consumers.
  std::size_t handed_out() const {
    std::lock_guard lock(mu_);
    return handed_out_;
  }

  bool closed() const {
    std::lock_guard lock(mu_);
    return closed_;
  }

 private:
  struct Entry {
    Item item;
    int remaining = 1;
  };

  const std::size_t capacity_;
  const int reuse_;
  mutable std::mutex mu_;
  std::condition_variable not_full_;
  std::condition_variable not_empty_;
  std::deque<Entry> queue_;
  std::size_t submitted_ = 0;
  std::size_t handed_out_ = 0;
  bool closed_ = false;
};

}  // namespace dice
