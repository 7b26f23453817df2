#pragma once

// Runs independent per-instance jobs. run_batch_serial is the reference;
// run_batch spreads instances over OpenMP threads. Results are stored by
// instance index, so both return identical vectors. An exception from any
// job is rethrown after the loop (lowest index wins).

#include <cstddef>
#include <exception>
#include <optional>
#include <type_traits>
#include <vector>

namespace prophet {

template <class Fn>
auto run_batch_serial(std::size_t n, Fn&& fn) {
  using Result = std::invoke_result_t<Fn&, std::size_t>;
  std::vector<Result> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(fn(i));
  return out;
}

template <class Fn>
auto run_batch(std::size_t n, Fn&& fn) {
  using Result = std::invoke_result_t<Fn&, std::size_t>;
  std::vector<std::optional<Result>> slots(n);
  std::vector<std::exception_ptr> errors(n);

  const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic)
  for (long long i = 0; i < count; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    try {
      slots[idx].emplace(fn(idx));
    } catch (...) {
      errors[idx] = std::current_exception();
    }
  }

  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<Result> out;
  out.reserve(n);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace prophet
