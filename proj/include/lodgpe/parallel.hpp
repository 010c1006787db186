#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace lodgpe
{

/// Runs body(i) for i in [0, n) on up to `threads` workers (0 or 1 means
/// the calling thread only). Tasks must write to disjoint outputs. The first
/// exception thrown by any task is rethrown after all workers finish.
template <typename Body>
void
parallel_for(int n, int threads, Body &&body)
{
  if (threads <= 1 || n <= 1)
    {
      for (int i = 0; i < n; ++i)
        body(i);
      return;
    }

  std::atomic<int>   next{0};
  std::exception_ptr failure;
  std::mutex         failure_lock;
  auto               worker = [&] {
    for (int i = next++; i < n; i = next++)
      {
        try
          {
            body(i);
          }
        catch (...)
          {
            std::lock_guard lock(failure_lock);
            if (!failure)
              failure = std::current_exception();
            next = n;
          }
      }
  };
  {
    std::vector<std::jthread> pool;
    for (int t = 0; t < std::min(threads, n); ++t)
      pool.emplace_back(worker);
  }
  if (failure)
    std::rethrow_exception(failure);
}

} // namespace lodgpe
