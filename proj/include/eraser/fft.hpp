#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>

namespace eraser::optics {

/// In-place discrete Fourier transforms of one fixed length.
///
/// forward() computes X_j = sum_k x_k exp(-2 pi i j k / n) and inverse() the
/// matching sum with exp(+2 pi i j k / n) and no 1/n factor. Plans are shared
/// between instances of the same length and execution is thread-safe.
class Fft {
public:
  explicit Fft(std::size_t n);

  std::size_t size() const noexcept { return n_; }
  void forward(std::span<std::complex<double>> data) const;
  void inverse(std::span<std::complex<double>> data) const;

  struct Plans;  // opaque FFTW plan pair

private:
  std::size_t n_;
  std::shared_ptr<const Plans> plans_;
};

}  // namespace eraser::optics
