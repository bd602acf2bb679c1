#include "steinflow/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <numeric>

#include "steinflow/common.hpp"

namespace steinflow {

namespace {

std::atomic<int> g_threads{0};

int threads_from_env() {
  const char* v = std::getenv("STEINFLOW_THREADS");
  if (v == nullptr) return 1;
  const int n = std::atoi(v);
  return n >= 1 ? n : 1;
}

}  // namespace

int thread_count() {
  int n = g_threads.load(std::memory_order_relaxed);
  if (n == 0) {
    n = threads_from_env();
    g_threads.store(n, std::memory_order_relaxed);
  }
  return n;
}

void set_thread_count(int n) { g_threads.store(n >= 1 ? n : 1, std::memory_order_relaxed); }

namespace {
std::atomic<bool> g_deterministic{true};
}  // namespace

bool deterministic_mode() { return g_deterministic.load(std::memory_order_relaxed); }

void set_deterministic_mode(bool on) {
  g_deterministic.store(on, std::memory_order_relaxed);
}

Ensemble::Ensemble(Eigen::MatrixXd p) : particles(std::move(p)) {
  if (particles.rows() < 1 || particles.cols() < 1) {
    throw parameter_error("ensemble needs at least one particle and one dimension");
  }
  check_finite();
}

void Ensemble::check_finite() const {
  if (!particles.allFinite()) {
    throw numeric_error("ensemble contains non-finite coordinates");
  }
}

Ensemble sample_gaussian(Rng& rng, int m, const Eigen::VectorXd& mean,
                         const Eigen::VectorXd& sd) {
  if (m < 1) throw parameter_error("sample_gaussian: m must be >= 1");
  if (mean.size() != sd.size()) {
    throw parameter_error("sample_gaussian: mean and sd dimensions differ");
  }
  if ((sd.array() < 0.0).any()) {
    throw parameter_error("sample_gaussian: negative standard deviation");
  }
  const int d = static_cast<int>(mean.size());
  Eigen::MatrixXd x(m, d);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < d; ++j) {
      x(i, j) = mean(j) + sd(j) * rng.normal();
    }
  }
  return Ensemble(std::move(x));
}

std::vector<int> canonical_order(const Ensemble& ens) {
  std::vector<int> idx(ens.count());
  std::iota(idx.begin(), idx.end(), 0);
  if (!deterministic_mode()) return idx;
  const auto& p = ens.particles;
  const int d = ens.dim();
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    for (int j = 0; j < d; ++j) {
      if (p(a, j) < p(b, j)) return true;
      if (p(a, j) > p(b, j)) return false;
    }
    return false;
  });
  return idx;
}

}  // namespace steinflow
