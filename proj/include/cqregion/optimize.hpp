#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <mutex>
#include <random>
#include <thread>

#include "cqregion/types.hpp"

namespace cqregion {

// ---------------------------------------------------------------------------
// Deterministic random streams. Every (seed, stream) pair yields the same
// sequence on every platform: mt19937_64 is fully specified by the standard
// and normals are drawn by explicit Box-Muller rather than the
// implementation-defined std::normal_distribution.
// ---------------------------------------------------------------------------

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
  return splitmix64(splitmix64(seed ^ splitmix64(a)) ^ splitmix64(b + 0x51ed2701ULL));
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform() {  // in (0, 1)
    const std::uint64_t u = gen_();
    return (static_cast<double>(u >> 11) + 0.5) * (1.0 / 9007199254740992.0);
  }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform(), u2 = uniform();
    const double mag = std::sqrt(-2.0 * std::log(u1));
    const double ang = 6.283185307179586477 * u2;
    spare_ = mag * std::sin(ang);
    have_spare_ = true;
    return mag * std::cos(ang);
  }

  std::uint64_t bits() { return gen_(); }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// ---------------------------------------------------------------------------
// Worker pool: runs fn(0..n-1) over up to `threads` std::threads. Callers are
// responsible for writing results into per-index slots so the outcome does
// not depend on scheduling.
// ---------------------------------------------------------------------------

inline int threads_from_env() {
  const char* env = std::getenv("CQREGION_THREADS");
  if (env && *env) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<int>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

inline int resolve_threads(int requested) { return requested > 0 ? requested : threads_from_env(); }

template <class Fn>
void parallel_for(int n, int threads, Fn&& fn) {
  threads = std::min(std::max(1, threads), std::max(1, n));
  if (threads == 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr eptr;
  std::mutex eptr_mutex;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(eptr_mutex);
          if (!eptr) eptr = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (eptr) std::rethrow_exception(eptr);
}

// ---------------------------------------------------------------------------
// Finite-difference gradient ascent with backtracking line search.
//
// Central differences at fd_step smooth over the entropy kinks at eigenvalue
// crossings; when a line search along the gradient fails entirely the iterate
// is jittered and the attempt repeated. A restart counts as converged once
// the per-iteration improvement stays below tol for `patience` iterations.
// ---------------------------------------------------------------------------

struct AscentOptions {
  double tol = 1e-6;
  int max_iters = 2000;
  double fd_step = 1e-5;
  int patience = 25;
};

struct AscentResult {
  std::vector<double> x;
  double value = 0.0;
  int iters = 0;
  bool converged = false;
};

template <class F>
AscentResult ascend(F&& objective, std::vector<double> x0, const AscentOptions& opt, Rng& rng) {
  AscentResult res;
  res.x = std::move(x0);
  res.value = objective(res.x);
  const int n = static_cast<int>(res.x.size());
  std::vector<double> grad(n), trial(n);
  double step = 0.5;
  int stall = 0;

  while (res.iters < opt.max_iters && stall < opt.patience) {
    ++res.iters;
    double gnorm2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double xi = res.x[i];
      res.x[i] = xi + opt.fd_step;
      const double fp = objective(res.x);
      res.x[i] = xi - opt.fd_step;
      const double fm = objective(res.x);
      res.x[i] = xi;
      grad[i] = (fp - fm) / (2.0 * opt.fd_step);
      gnorm2 += grad[i] * grad[i];
    }
    const double gnorm = std::sqrt(gnorm2);
    if (gnorm < 1e-13) {
      for (int i = 0; i < n; ++i) trial[i] = res.x[i] + 1e-3 * rng.normal();
      const double ft = objective(trial);
      if (ft > res.value) {
        res.x.swap(trial);
        res.value = ft;
      }
      ++stall;
      continue;
    }

    double s = step;
    bool accepted = false;
    for (int halvings = 0; halvings < 40; ++halvings) {
      for (int i = 0; i < n; ++i) trial[i] = res.x[i] + s * grad[i] / gnorm;
      const double ft = objective(trial);
      if (ft > res.value + 1e-15) {
        const double gain = ft - res.value;
        res.x.swap(trial);
        res.value = ft;
        step = std::min(s * 2.0, 8.0);
        stall = gain < opt.tol ? stall + 1 : 0;
        accepted = true;
        break;
      }
      s *= 0.5;
    }
    if (!accepted) {
      // Line search exhausted: likely a nondifferentiable ridge; jitter.
      for (int i = 0; i < n; ++i) trial[i] = res.x[i] + 1e-3 * rng.normal();
      const double ft = objective(trial);
      if (ft > res.value) {
        res.x.swap(trial);
        res.value = ft;
      }
      step = 0.25;
      ++stall;
    }
  }
  res.converged = stall >= opt.patience;
  return res;
}

}  // namespace cqregion
