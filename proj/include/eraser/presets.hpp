#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "eraser/biphoton.hpp"
#include "eraser/optics.hpp"

namespace eraser::presets {

/// Geometry and detection parameters of the two-lens eraser. Lengths in meters.
struct EraserSetup {
  double pump_wavelength;
  double signal_wavelength;
  double d_A;        // crystal to slit plane
  double d_A_prime;  // slit plane to detector 1
  double d_B;        // crystal to lens L
  double d_NPBS;     // lens L to splitter
  double d_Lprime;   // splitter to the choice lenses
  double f;          // lens L
  double f_T_prime;  // transmitted (erase) lens
  double f_R_prime;  // reflected (read) lens
  double z_T;        // lens to detector, transmitted arm
  double z_R;        // lens to detector, reflected arm
  optics::TransmissionMask slit = optics::TransmissionMask::open();
  double detector1_width;
  double divergence;  // full cone angle accepted from the crystal, rad
  double fiber_length_T;
  double fiber_length_R;
  double fiber_index;
  /// Unset: a single grid sample.
  std::optional<double> pinhole_T_diameter;
  /// Unset: fully open.
  std::optional<double> pinhole_R_diameter;

  /// Lens L to the choice-lens plane, d_NPBS + d_Lprime.
  double d_B_prime() const noexcept { return d_NPBS + d_Lprime; }
  bool operator==(const EraserSetup&) const = default;
};

/// Throws std::invalid_argument on non-physical values: non-positive lengths or
/// focal lengths, or a signal wavelength not within 0.5% of twice the pump.
void validate(const EraserSetup& setup);

/// The reported apparatus with slit set 1 (a = 150 um, d = 470 um) or
/// slit set 2 (a = 100 um, d = 250 um). Throws for any other index.
EraserSetup paper_setup(int slit_set);

/// Erase-fringe period lambda d_A' / d. Throws unless the slit is a double slit.
double fringe_period(const EraserSetup& setup);
/// Distance from the axis to the first zero of the single-slit envelope, lambda d_A' / a.
double envelope_half_width(const EraserSetup& setup);

/// Grid extent used when none is given: 1.2 sqrt(n lambda d_A') rounded up to a
/// whole millimeter, which keeps light diffracted to the edge of the sampled
/// angular band from wrapping back onto detector 1. It is capped so the source
/// aperture stays 10% below the Nyquist momentum, and never less than 8x the
/// widest aperture.
double default_extent(const EraserSetup& setup, std::size_t n_points);
optics::TransverseGrid default_grid(const EraserSetup& setup, std::size_t n_points = 4096);

/// Arm 1: crystal, slit mask, detector 1.
biphoton::OpticalArm signal_arm(const EraserSetup& setup, const optics::TransverseGrid& grid);
/// Arm 2 ending in the image plane of lens L (d_B' behind it).
biphoton::OpticalArm ghost_arm(const EraserSetup& setup, const optics::TransverseGrid& grid);
/// Transmitted choice arm: Fourier lens f_T', pinhole at z_T.
biphoton::OpticalArm erase_arm(const EraserSetup& setup, const optics::TransverseGrid& grid);
/// Reflected choice arm: lens f_R', detector at z_R.
biphoton::OpticalArm read_arm(const EraserSetup& setup, const optics::TransverseGrid& grid);
/// The transmitted arm with its pinhole removed.
biphoton::OpticalArm fourier_arm(const EraserSetup& setup, const optics::TransverseGrid& grid);
biphoton::BiphotonSource make_source(const EraserSetup& setup, const optics::TransverseGrid& grid);

/// Closed-form erase pattern sinc^2(pi x a / (lambda d_A')) cos^2(pi x d / (lambda d_A')), peak 1.
double analytic_erase(const EraserSetup& setup, double x1);

enum class PatternKind { erase, read, ghost };

/// Coincidence rate against one detector coordinate, peak-normalized.
struct PatternRecord {
  std::vector<double> positions;  // ascending, uniform spacing
  std::vector<double> rates;
  PatternKind kind = PatternKind::erase;
  double fringe_period = 0.0;
};

/// Builds a record, scaling rates to a maximum of 1. Throws on length
/// mismatch, non-uniform or non-increasing positions, or an all-zero pattern.
PatternRecord make_pattern(std::vector<double> positions, std::vector<double> rates, PatternKind kind,
                           double fringe_period);

/// (max - min) / (max + min) over the central fringe |x| <= P/2 + dx/2.
/// Throws when P <= 0 or the positions do not reach +-P/2.
double visibility(const PatternRecord& pattern);

/// Averages the pattern over a detector of the given width (top hat on the
/// linear interpolant), truncating the window at the pattern ends. Width 0 is
/// the identity; a width not smaller than the pattern span throws.
PatternRecord smear_with_detector(const PatternRecord& pattern, double width);

/// Distance between the two dark fringes nearest +-P/2, each located by a
/// parabola through the lowest sample and its neighbors. Throws if the pattern
/// does not reach P/2 + P/4 on both sides.
double measured_fringe_period(const PatternRecord& pattern);

/// max |r - mean| / mean over samples with |x| <= half_width.
double max_deviation_from_mean(const PatternRecord& pattern, double half_width);

/// RMS of (rate - analytic_erase) over samples with |x| <= half_width.
double rms_against_analytic(const EraserSetup& setup, const PatternRecord& pattern, double half_width);

/// Mean-subtracted Pearson correlation of two equal-length profiles.
double normalized_cross_correlation(std::span<const double> a, std::span<const double> b);

enum class CheckStatus { pass, fail, info };
std::string to_string(CheckStatus s);

struct AuditCheck {
  std::string name;
  CheckStatus status;
  double value;
  std::string detail;
};

struct AuditReport {
  std::vector<AuditCheck> checks;
  bool passed() const noexcept;
  const AuditCheck& at(const std::string& name) const;
  /// One line per check: "<STATUS> <name> <value> <detail>".
  std::string to_text() const;
};

/// Checks the imaging and Fourier-plane conditions and the divergence margin.
/// A Fourier-plane offset up to 1.5% is reported as info, beyond that as a failure.
AuditReport geometry_audit(const EraserSetup& setup);

}  // namespace eraser::presets
