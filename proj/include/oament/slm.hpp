#pragma once

#include <complex>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

namespace oament::slm {

using cplx = std::complex<double>;

/// Pixel geometry of a phase-only modulator. Lengths in meters.
struct SlmSpec {
  int width_px = 1920;
  int height_px = 1080;
  double pixel_pitch = 8e-6;

  SlmSpec() = default;
  /// Throws ValidationError unless both dimensions are >= 2 and the pitch is positive.
  SlmSpec(int width_px, int height_px, double pixel_pitch);

  static SlmSpec full_hd() { return {1920, 1080, 8e-6}; }

  /// Half of the shorter panel side, as a length.
  double short_half_extent() const;
  friend bool operator==(const SlmSpec&, const SlmSpec&) = default;
};

/// Position in pixel-index units; pixel (i, j) has its center at (i, j).
struct PixelCoord {
  double x = 0.0;
  double y = 0.0;
};

PixelCoord panel_center(const SlmSpec& spec);

/// Per-pixel phase in [0, 2pi), row-major with row j = 0 first.
class PhaseGrid {
 public:
  PhaseGrid(const SlmSpec& spec, PixelCoord center);

  const SlmSpec& spec() const { return spec_; }
  PixelCoord center() const { return center_; }
  int width() const { return spec_.width_px; }
  int height() const { return spec_.height_px; }

  double at(int i, int j) const { return values_[index(i, j)]; }
  /// Stores phase wrapped into [0, 2pi).
  void set(int i, int j, double phase);
  const std::vector<double>& values() const { return values_; }

 private:
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * spec_.width_px + i; }

  SlmSpec spec_;
  PixelCoord center_;
  std::vector<double> values_;
};

/// Uniformly sampled 2-D field. Sample (i, j) sits at physical position
/// ((i - cx) * spacing, (j - cy) * spacing) relative to the optical axis.
template <class T>
struct Grid2D {
  int nx = 0;
  int ny = 0;
  double spacing = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  std::vector<T> data;

  T& operator()(int i, int j) { return data[static_cast<std::size_t>(j) * nx + i]; }
  const T& operator()(int i, int j) const { return data[static_cast<std::size_t>(j) * nx + i]; }
  double x(int i) const { return (i - cx) * spacing; }
  double y(int j) const { return (j - cy) * spacing; }
};

using FieldGrid = Grid2D<cplx>;
using IntensityGrid = Grid2D<double>;

/// Square-or-rectangular sample layout centered on the axis.
struct GridGeometry {
  int nx = 512;
  int ny = 512;
  double spacing = 1e-5;
};

/// Wraps any real phase into [0, 2pi).
double wrap_phase(double phase);

/// l * atan2(y - cy, x - cx) mod 2pi at every pixel center. Throws
/// ValidationError for l == 0 and InvalidCenterError when the center is
/// outside the panel.
PhaseGrid spiral_phase_pattern(const SlmSpec& spec, int l, std::optional<PixelCoord> center = {});

/// -pi (x^2/f_x + y^2/f_y)/lambda wrapped. Pass an infinite focal length to
/// disable an axis (cylindrical lens).
PhaseGrid fresnel_lens_phase(const SlmSpec& spec, double focal_x, double focal_y, double wavelength,
                             std::optional<PixelCoord> center = {});

PhaseGrid add_phases(const PhaseGrid& a, const PhaseGrid& b);

/// Gaussian beam exp(-r^2/w^2) centered on the pattern center, reflected off
/// the pixelated pattern (zero-order hold), sampled oversample^2 times per pixel.
FieldGrid illuminate_gaussian(const PhaseGrid& pattern, double waist, int oversample = 4);

/// Sample layout illuminate_gaussian produces for a pattern.
GridGeometry oversampled_geometry(const SlmSpec& spec, int oversample);

/// exp(-r^2/w^2) exp(i l theta) on the same sample layout as
/// illuminate_gaussian(pattern, waist, oversample).
FieldGrid ideal_spiral_field(int l, double waist, const SlmSpec& spec, PixelCoord center, int oversample = 4);

/// exp(-r^2/w^2) exp(i l theta) on a centered geometry.
FieldGrid ideal_spiral_field(int l, double waist, const GridGeometry& geometry);

/// |<a|b>|^2 / (<a|a><b|b>), compensated summation in row-major order.
double overlap_efficiency(const FieldGrid& a, const FieldGrid& b);

/// Beam waist that puts the l-mode ring radius w sqrt(l/2) at 80% of the
/// shorter panel half-extent.
double default_waist(const SlmSpec& spec, int l);

/// Mode-conversion efficiency of the pixelated spiral relative to continuous
/// modulation, evaluated without materializing the oversampled field.
double conversion_efficiency(const SlmSpec& spec, int l, double waist, int oversample = 4);

/// Pixels available per 2pi of azimuthal phase on a circle of the given radius.
double pixels_per_period(const SlmSpec& spec, int l, double radius);

/// Radius inside which fewer than two pixels carry each 2pi wrap: l * pitch / pi.
double aliasing_radius(const SlmSpec& spec, int l);

/// Radius of maximum intensity of the l-mode ring for a given waist.
double ring_radius(int l, double waist);

/// |e^{il theta} + e^{i phi} e^{-il theta}|^2 = 4 cos^2(l theta - phi/2) on the
/// LG(p=0, |l|) ring envelope, normalized so the envelope peaks at 1.
IntensityGrid petal_intensity(int l, double phi, double waist, const GridGeometry& geometry);

/// Counts angular maxima of the azimuthal profile averaged over the annulus
/// r_min <= r <= r_max (physical radii). Throws NoSignalError for an empty annulus.
int count_petals(const IntensityGrid& intensity, double r_min, double r_max);

/// Azimuthal profile used by count_petals, `samples` equally spaced angles.
std::vector<double> ring_profile(const IntensityGrid& intensity, double r_min, double r_max, int samples);

struct PgmImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;
};

/// floor(phase / 2pi * 256) clamped to 255.
std::uint8_t phase_to_gray(double phase);

/// 8-bit binary graymap (P5, maxval 255). Throws IoError on failure.
void write_pgm(const PhaseGrid& grid, const std::filesystem::path& path);
/// Intensity scaled linearly so the grid maximum maps to 255.
void write_pgm(const IntensityGrid& grid, const std::filesystem::path& path);
PgmImage read_pgm(const std::filesystem::path& path);

}  // namespace oament::slm
