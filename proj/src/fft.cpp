#include "eraser/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>
#include <vector>

namespace eraser::optics {

struct Fft::Plans {
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;

  ~Plans() {
    if (forward) fftw_destroy_plan(forward);
    if (inverse) fftw_destroy_plan(inverse);
  }
};

namespace {

// FFTW planning is not thread-safe; execution of an existing plan is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

std::shared_ptr<const Fft::Plans> plans_for(std::size_t n);

}  // namespace

Fft::Fft(std::size_t n) : n_(n) {
  if (n == 0) throw std::invalid_argument("Fft: length must be positive");
  plans_ = plans_for(n);
}

void Fft::forward(std::span<std::complex<double>> data) const {
  if (data.size() != n_) throw std::invalid_argument("Fft: length mismatch");
  auto* p = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plans_->forward, p, p);
}

void Fft::inverse(std::span<std::complex<double>> data) const {
  if (data.size() != n_) throw std::invalid_argument("Fft: length mismatch");
  auto* p = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plans_->inverse, p, p);
}

namespace {

std::shared_ptr<const Fft::Plans> plans_for(std::size_t n) {
  std::lock_guard lock(planner_mutex());
  static std::map<std::size_t, std::shared_ptr<const Fft::Plans>> cache;
  if (auto it = cache.find(n); it != cache.end()) return it->second;

  std::vector<std::complex<double>> scratch(n);
  auto* p = reinterpret_cast<fftw_complex*>(scratch.data());
  const int len = static_cast<int>(n);
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  auto plans = std::make_shared<Fft::Plans>();
  plans->forward = fftw_plan_dft_1d(len, p, p, FFTW_FORWARD, flags);
  plans->inverse = fftw_plan_dft_1d(len, p, p, FFTW_BACKWARD, flags);
  if (!plans->forward || !plans->inverse) throw std::runtime_error("Fft: planning failed");
  cache.emplace(n, plans);
  return plans;
}

}  // namespace

}  // namespace eraser::optics
