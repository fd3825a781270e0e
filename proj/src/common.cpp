#include "homog/common.hpp"

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>

namespace homog {

SparseC hermitian_part(const SparseC& m) {
  SparseC adj = m.adjoint();
  SparseC sum = m + adj;
  sum *= 0.5;
  sum.makeCompressed();
  return sum;
}

double hermitian_defect(const SparseC& m) {
  SparseC adj = m.adjoint();
  SparseC diff = m - adj;
  double worst = 0.0;
  for (int k = 0; k < diff.outerSize(); ++k) {
    for (SparseC::InnerIterator it(diff, k); it; ++it) {
      worst = std::max(worst, std::abs(it.value()));
    }
  }
  return worst;
}

double relative_gap(const CMatrix& p, const CMatrix& q, double floor) {
  const double scale = std::max({max_abs(p), max_abs(q), floor});
  return max_abs(p - q) / scale;
}

namespace {

CMatrix pairwise_sum(std::span<const CMatrix> values) {
  if (values.size() == 1) return values.front();
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

}  // namespace

CMatrix pairwise_mean(std::span<const CMatrix> values) {
  if (values.empty()) throw std::invalid_argument("pairwise_mean of an empty set");
  return pairwise_sum(values) / static_cast<double>(values.size());
}

int worker_count() {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw <= 0) hw = 1;
  if (const char* env = std::getenv("HOMOG_THREADS")) {
    const int cap = std::atoi(env);
    if (cap > 0) return std::min(cap, hw);
  }
  return hw;
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(worker_count()), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < count; i += workers) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace homog
