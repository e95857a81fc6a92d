#include "mmppi/worker_pool.hpp"

#include <algorithm>

namespace mmppi {

namespace {

std::pair<std::size_t, std::size_t> chunk(std::size_t n, std::size_t parts, std::size_t id)
{
  const std::size_t base = n / parts;
  const std::size_t extra = n % parts;
  const std::size_t begin = id * base + std::min(id, extra);
  return {begin, begin + base + (id < extra ? 1 : 0)};
}

}  // namespace

WorkerPool::WorkerPool(std::size_t workers)
: worker_count_(workers == 0 ? std::max(1u, std::thread::hardware_concurrency()) : workers)
{
  // The calling thread acts as worker 0.
  for (std::size_t id = 1; id < worker_count_; ++id) {
    threads_.emplace_back([this, id] {worker_loop(id);});
  }
}

WorkerPool::~WorkerPool()
{
  {
    std::lock_guard lock(mutex_);
    stop_ = true;
  }
  start_cv_.notify_all();
  for (auto & t : threads_) {
    t.join();
  }
}

void WorkerPool::parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)> & fn)
{
  if (worker_count_ == 1 || n < 2) {
    fn(0, n);
    return;
  }
  {
    std::lock_guard lock(mutex_);
    job_ = &fn;
    job_size_ = n;
    pending_ = worker_count_ - 1;
    ++generation_;
  }
  start_cv_.notify_all();

  const auto [begin, end] = chunk(n, worker_count_, 0);
  fn(begin, end);

  std::unique_lock lock(mutex_);
  done_cv_.wait(lock, [this] {return pending_ == 0;});
  job_ = nullptr;
}

void WorkerPool::worker_loop(std::size_t id)
{
  std::size_t seen = 0;
  while (true) {
    const std::function<void(std::size_t, std::size_t)> * job;
    std::size_t n;
    {
      std::unique_lock lock(mutex_);
      start_cv_.wait(lock, [&] {return stop_ || generation_ != seen;});
      if (stop_) {
        return;
      }
      seen = generation_;
      job = job_;
      n = job_size_;
    }
    const auto [begin, end] = chunk(n, worker_count_, id);
    if (begin < end) {
      (*job)(begin, end);
    }
    {
      std::lock_guard lock(mutex_);
      --pending_;
    }
    done_cv_.notify_one();
  }
}

}  // namespace mmppi
