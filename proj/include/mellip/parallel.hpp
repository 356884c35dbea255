#pragma once

#include <cstdint>
#include <exception>
#include <mutex>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace mellip {

namespace detail {

// OpenMP regions must not leak exceptions; capture the first one and rethrow
// after the join.
class ExceptionCollector {
 public:
  template <typename Fn>
  void run(Fn&& fn) noexcept {
    try {
      fn();
    } catch (...) {
      std::lock_guard<std::mutex> lock(mu_);
      if (!eptr_) eptr_ = std::current_exception();
    }
  }
  void rethrow() {
    if (eptr_) std::rethrow_exception(eptr_);
  }

 private:
  std::mutex mu_;
  std::exception_ptr eptr_;
};

}  // namespace detail

// Plain parallel loop for independent work items. Work item effects must be
// independent; the loop body runs exactly once per index regardless of the
// worker count.
template <typename Fn>
void parallel_for(std::int64_t count, int workers, Fn&& fn) {
  detail::ExceptionCollector errs;
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(workers > 1 ? workers : 1) \
    if (workers > 1)
#endif
  for (std::int64_t i = 0; i < count; ++i) {
    errs.run([&] { fn(i); });
  }
  errs.rethrow();
}

// Deterministic blocked reduction: the block decomposition is a function of
// the problem size only, each block is evaluated independently, and the block
// partials are combined in block order. The result is bit-identical for any
// worker count.
template <typename T, typename Eval>
T blocked_sum(std::int64_t nblocks, int workers, Eval&& eval) {
  std::vector<T> partial(static_cast<std::size_t>(nblocks));
  parallel_for(nblocks, workers,
               [&](std::int64_t b) { partial[static_cast<std::size_t>(b)] = eval(b); });
  T total = T{};
  for (std::int64_t b = 0; b < nblocks; ++b) {
    total += partial[static_cast<std::size_t>(b)];
  }
  return total;
}

}  // namespace mellip
