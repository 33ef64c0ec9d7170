#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "eraser/fft.hpp"

namespace eraser::optics {

using Complex = std::complex<double>;

/// Uniform periodic sampling of one transverse axis, centered on the optical axis.
///
/// Positions are x_k = (k - n/2) dx with dx = extent / n, momenta are
/// q_k = (k - n/2) dq with dq = 2 pi / extent. Copies share their storage.
class TransverseGrid {
public:
  TransverseGrid(std::size_t n_points, double extent);

  std::size_t size() const noexcept;
  double extent() const noexcept;
  double dx() const noexcept;
  double dq() const noexcept;

  std::span<const double> positions() const noexcept;
  std::span<const double> momenta() const noexcept;
  double position(std::size_t k) const;

  /// Index of the sample nearest to x, clamped to the grid.
  std::size_t nearest_index(double x) const noexcept;
  /// Magnitude of the most negative representable momentum, (n/2) dq.
  double max_momentum() const noexcept;
  /// Signed lattice index m of FFT bin j (m = j below n/2, j - n above).
  long fft_mode(std::size_t j) const noexcept;

  bool operator==(const TransverseGrid& other) const noexcept;

private:
  struct Data;
  std::shared_ptr<const Data> data_;
};

/// Throws std::invalid_argument unless n is a power of two >= 2 and extent > 0.
TransverseGrid make_grid(std::size_t n_points, double extent);

/// Sampled scalar field on a grid at one vacuum wavelength.
class ComplexField {
public:
  ComplexField(TransverseGrid grid, std::vector<Complex> values, double wavelength);

  const TransverseGrid& grid() const noexcept { return grid_; }
  std::span<const Complex> values() const noexcept { return values_; }
  double wavelength() const noexcept { return wavelength_; }
  double wavenumber() const noexcept;
  /// Sum of |E|^2 dx.
  double energy() const noexcept;

private:
  TransverseGrid grid_;
  std::vector<Complex> values_;
  double wavelength_;
};

struct DoubleSlit {
  double width;       // a, each slit
  double separation;  // d, center to center
  bool operator==(const DoubleSlit&) const = default;
};

struct SingleSlit {
  double width;
  double center = 0.0;
  bool operator==(const SingleSlit&) const = default;
};

struct OpenAperture {
  bool operator==(const OpenAperture&) const = default;
};

struct CustomMask {
  std::vector<double> samples;  // one value in [0, 1] per grid point
  bool operator==(const CustomMask&) const = default;
};

/// Real amplitude transmission of a thin aperture plane.
class TransmissionMask {
public:
  using Shape = std::variant<DoubleSlit, SingleSlit, OpenAperture, CustomMask>;

  static TransmissionMask double_slit(double width, double separation);
  static TransmissionMask single_slit(double width, double center = 0.0);
  static TransmissionMask open();
  static TransmissionMask custom(std::vector<double> samples);

  const Shape& shape() const noexcept { return shape_; }
  std::string description() const;

  bool operator==(const TransmissionMask&) const = default;

private:
  explicit TransmissionMask(Shape shape) : shape_(std::move(shape)) {}
  Shape shape_;
};

/// Samples a mask onto a grid, weighting each cell by its open fraction.
///
/// Cells fully inside an opening get 1, cells fully outside 0, edge cells the
/// covered fraction of their width, so sum(T) dx equals the open width exactly.
/// Throws if the mask does not fit inside the grid extent.
std::vector<double> sample_mask(const TransmissionMask& mask, const TransverseGrid& grid);

/// Free-space Fresnel propagator for a fixed grid, wavelength and distance.
///
/// Applies exp(-i z q^2 / (2k)) in the periodic angular-spectrum basis. The
/// operator is unitary and composes exactly: P(z1) P(z2) = P(z1 + z2).
class FresnelPropagator {
public:
  FresnelPropagator(const TransverseGrid& grid, double wavelength, double distance);

  double distance() const noexcept { return distance_; }
  void apply(std::span<Complex> field) const;

private:
  Fft fft_;
  double distance_;
  std::vector<Complex> transfer_;  // includes the 1/n of the inverse transform
};

/// Thin-lens phase exp(-i k x^2 / (2 f)) sampled on the grid.
std::vector<Complex> lens_phase(const TransverseGrid& grid, double wavelength, double focal_length);

/// Throws std::invalid_argument for a non-finite distance.
ComplexField fresnel_propagate(const ComplexField& field, double distance);
/// Throws std::invalid_argument for f == 0.
ComplexField apply_lens(const ComplexField& field, double focal_length);
ComplexField apply_mask(const ComplexField& field, const TransmissionMask& mask);

/// Distance behind a lens of focal length f_prime where an object at
/// object_distance in front is imaged: 1/z = 1/f_prime - 1/object_distance.
/// Throws when the object sits in the focal plane.
double fourier_plane_distance(double object_distance, double f_prime);

}  // namespace eraser::optics
