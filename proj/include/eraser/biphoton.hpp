#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "eraser/optics.hpp"

namespace eraser::biphoton {

using optics::Complex;

struct Gap {
  double distance;
  bool operator==(const Gap&) const = default;
};

struct Lens {
  double focal_length;
  bool operator==(const Lens&) const = default;
};

struct Mask {
  optics::TransmissionMask mask;
  bool operator==(const Mask&) const = default;
};

/// Circular stop centered on the axis. Without a diameter it passes exactly
/// one grid sample; a diameter at least the grid extent leaves the plane open.
struct Pinhole {
  std::optional<double> diameter;
  bool operator==(const Pinhole&) const = default;
};

using ArmElement = std::variant<Gap, Lens, Mask, Pinhole>;

/// Ordered optical elements from the crystal exit face to one detector plane.
class OpticalArm {
public:
  OpticalArm(std::vector<ArmElement> elements, optics::TransverseGrid grid, double wavelength, std::string name = {});

  std::span<const ArmElement> elements() const noexcept { return elements_; }
  const optics::TransverseGrid& grid() const noexcept { return grid_; }
  double wavelength() const noexcept { return wavelength_; }
  const std::string& name() const noexcept { return name_; }
  /// Sum of all gap distances.
  double length() const noexcept;

private:
  std::vector<ArmElement> elements_;
  optics::TransverseGrid grid_;
  double wavelength_;
  std::string name_;
};

/// Degenerate type-II down-conversion source with a finite angular acceptance.
///
/// Signal and idler share one wavelength; the pair amplitude is a uniform sum
/// over lattice momenta with |q| <= q_aperture, pairing q with -q.
class BiphotonSource {
public:
  BiphotonSource(double wavelength, double q_aperture, optics::TransverseGrid grid);
  /// q_aperture = (2 pi / wavelength) * divergence / 2 for a full cone angle.
  static BiphotonSource from_divergence(double wavelength, double divergence, optics::TransverseGrid grid);

  double wavelength() const noexcept { return wavelength_; }
  double q_aperture() const noexcept { return q_aperture_; }
  const optics::TransverseGrid& grid() const noexcept { return grid_; }
  /// Largest lattice index M with M dq <= q_aperture; modes run over [-M, M].
  long max_mode() const noexcept;

private:
  double wavelength_;
  double q_aperture_;
  optics::TransverseGrid grid_;
};

/// Contiguous run of grid indices.
struct IndexRange {
  std::size_t first = 0;
  std::size_t count = 0;
  bool operator==(const IndexRange&) const = default;
};

/// Indices with |x| <= half_width, clipped to the grid.
IndexRange centered_range(const optics::TransverseGrid& grid, double half_width);

/// Detector rows (x1) and columns (x2) to evaluate; unset means the whole grid.
struct MapWindow {
  std::optional<IndexRange> x1;
  std::optional<IndexRange> x2;
};

/// Two-photon amplitude A(x1, x2) on a window of the detector grids.
/// g2 is |A|^2 with no further normalization.
class BiphotonMap {
public:
  BiphotonMap(std::vector<Complex> amplitude, std::vector<double> x1, std::vector<double> x2, double dx);

  std::size_t rows() const noexcept { return x1_.size(); }
  std::size_t cols() const noexcept { return x2_.size(); }
  std::span<const double> x1() const noexcept { return x1_; }
  std::span<const double> x2() const noexcept { return x2_; }
  double dx() const noexcept { return dx_; }

  Complex amplitude(std::size_t i, std::size_t j) const { return amplitude_[i * cols() + j]; }
  double g2(std::size_t i, std::size_t j) const { return std::norm(amplitude(i, j)); }
  /// Row-major amplitudes, rows indexed by x1.
  std::span<const Complex> data() const noexcept { return amplitude_; }

private:
  std::vector<Complex> amplitude_;
  std::vector<double> x1_;
  std::vector<double> x2_;
  double dx_;
};

/// Detector-plane field of a plane wave exp(i q x) launched at the crystal.
/// Throws if |q| exceeds the grid's momentum range.
optics::ComplexField arm_green_function(const OpticalArm& arm, double q);

/// A(x1, x2) = sum_q g1(x1, q) g2(x2, -q) dq over the source's aperture modes.
///
/// Throws if the arms disagree in wavelength or grid, or either differs from
/// the source. Work is split into fixed chunks so the result does not depend
/// on the thread count.
BiphotonMap biphoton_map(const OpticalArm& arm1, const OpticalArm& arm2, const BiphotonSource& source,
                         const MapWindow& window = {});

/// g2(x1, x2_fixed) for the column nearest x2_fixed, scaled to a maximum of 1.
std::vector<double> erase_pattern(const BiphotonMap& map, double x2_fixed);

/// sum over x2 of g2(x1, x2) dx, scaled to a maximum of 1.
std::vector<double> read_pattern(const BiphotonMap& map);

/// Advanced wave at the crystal: a point at x2_fixed sent backward through
/// arm 2 (negated gaps, conjugate lens phases, same masks), reflected by the
/// phase-conjugating source and limited to the source aperture.
optics::ComplexField advanced_wave_at_source(const OpticalArm& arm2, const BiphotonSource& source, double x2_fixed);

/// The advanced wave carried forward through arm 1 to detector 1. Equals the
/// column A(., x2_fixed) of biphoton_map for the same arms and source.
optics::ComplexField klyshko_unfold(const OpticalArm& arm1, const OpticalArm& arm2, const BiphotonSource& source,
                                    double x2_fixed);

}  // namespace eraser::biphoton
