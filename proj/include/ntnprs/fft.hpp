#pragma once

// Thin FFTW wrapper. Plans are created once per (size, direction, in-place) under a
// lock and executed on caller buffers through the new-array interface, which FFTW
// documents as thread-safe. A plan only runs on buffers with the same in-place-ness
// it was created for.

#include <complex>
#include <cstddef>
#include <map>
#include <mutex>
#include <span>
#include <stdexcept>
#include <tuple>

#include <fftw3.h>

namespace ntnprs::fft {

using cplx = std::complex<double>;

enum class Direction { kForward = FFTW_FORWARD, kBackward = FFTW_BACKWARD };

namespace detail {

class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan get(std::size_t n, Direction dir, bool in_place) {
    std::lock_guard lock(mutex_);
    const auto key = std::make_tuple(n, dir, in_place);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    auto* in = fftw_alloc_complex(n);
    auto* out = in_place ? in : fftw_alloc_complex(n);
    fftw_plan p = fftw_plan_dft_1d(static_cast<int>(n), in, out, static_cast<int>(dir),
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (!in_place) fftw_free(out);
    fftw_free(in);
    plans_.emplace(key, p);
    return p;
  }

  PlanCache(const PlanCache&) = delete;
  PlanCache& operator=(const PlanCache&) = delete;

 private:
  PlanCache() = default;
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  std::mutex mutex_;
  std::map<std::tuple<std::size_t, Direction, bool>, fftw_plan> plans_;
};

inline fftw_complex* as_fftw(cplx* p) { return reinterpret_cast<fftw_complex*>(p); }

}  // namespace detail

/// Unnormalised transform: out[k] = sum_n in[n] exp(-+ j 2 pi k n / N).
inline void transform(std::span<cplx> in, std::span<cplx> out, Direction dir) {
  if (in.size() != out.size()) throw std::invalid_argument("fft: size mismatch");
  fftw_plan plan = detail::PlanCache::instance().get(in.size(), dir, in.data() == out.data());
  fftw_execute_dft(plan, detail::as_fftw(in.data()), detail::as_fftw(out.data()));
}

inline void forward(std::span<cplx> data) { transform(data, data, Direction::kForward); }
inline void backward(std::span<cplx> data) { transform(data, data, Direction::kBackward); }

inline std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace ntnprs::fft
