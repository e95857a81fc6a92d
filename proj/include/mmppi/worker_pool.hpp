#pragma once

#include <condition_variable>
#include <cstddef>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace mmppi {

/// Fixed set of threads running static-partition parallel loops. Each index
/// range is assigned to the same worker on every call, and callers write
/// results into per-index slots, so outcomes never depend on scheduling.
class WorkerPool
{
public:
  /// `workers` == 0 selects std::thread::hardware_concurrency().
  explicit WorkerPool(std::size_t workers = 0);
  ~WorkerPool();

  WorkerPool(const WorkerPool &) = delete;
  WorkerPool & operator=(const WorkerPool &) = delete;

  std::size_t size() const {return worker_count_;}

  /// Calls fn(begin, end) over a partition of [0, n). Blocks until done.
  void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)> & fn);

private:
  void worker_loop(std::size_t id);

  std::size_t worker_count_;
  std::vector<std::thread> threads_;
  std::mutex mutex_;
  std::condition_variable start_cv_;
  std::condition_variable done_cv_;
  const std::function<void(std::size_t, std::size_t)> * job_ = nullptr;
  std::size_t job_size_ = 0;
  std::size_t generation_ = 0;
  std::size_t pending_ = 0;
  bool stop_ = false;
};

}  // namespace mmppi
