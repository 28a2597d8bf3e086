#include "oament/slm.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <string>

#include "compensated_sum.hpp"
#include "oament/errors.hpp"

namespace oament::slm {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Envelope product exp(-2r^2/w^2) below this is dropped from the overlap sums.
constexpr double kEnvelopeCutoffWaists = 5.0;

void check_center(const SlmSpec& spec, PixelCoord c) {
  if (!(c.x >= 0.0 && c.x <= spec.width_px - 1 && c.y >= 0.0 && c.y <= spec.height_px - 1))
    throw InvalidCenterError("pattern center (" + std::to_string(c.x) + ", " + std::to_string(c.y) +
                             ") lies outside the " + std::to_string(spec.width_px) + "x" +
                             std::to_string(spec.height_px) + " panel");
}

void check_beam(const SlmSpec& spec, double waist, int oversample) {
  if (!(waist > 0.0) || !std::isfinite(waist)) throw ValidationError("beam waist must be positive");
  if (oversample < 1) throw ValidationError("oversample must be >= 1");
  if (2.0 * waist / spec.pixel_pitch < 8.0)
    throw UnderResolutionError("beam waist " + std::to_string(waist) + " m spans fewer than 8 pixels across 2w");
}

// Fine-sample index of the beam axis along one dimension.
double fine_center(double pixel_center, int oversample) {
  return oversample * (pixel_center + 0.5) - 0.5;
}

}  // namespace

SlmSpec::SlmSpec(int w, int h, double pitch) : width_px(w), height_px(h), pixel_pitch(pitch) {
  if (w < 2 || h < 2) throw ValidationError("SLM panel must be at least 2x2 pixels");
  if (!(pitch > 0.0) || !std::isfinite(pitch)) throw ValidationError("pixel pitch must be positive");
}

double SlmSpec::short_half_extent() const {
  return 0.5 * std::min(width_px, height_px) * pixel_pitch;
}

PixelCoord panel_center(const SlmSpec& spec) {
  return {0.5 * (spec.width_px - 1), 0.5 * (spec.height_px - 1)};
}

PhaseGrid::PhaseGrid(const SlmSpec& spec, PixelCoord center)
    : spec_(spec), center_(center), values_(static_cast<std::size_t>(spec.width_px) * spec.height_px, 0.0) {
  check_center(spec, center);
}

void PhaseGrid::set(int i, int j, double phase) { values_[index(i, j)] = wrap_phase(phase); }

double wrap_phase(double phase) {
  double w = std::fmod(phase, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  // fmod of a value just below a multiple of 2pi can round up to 2pi
  if (w >= kTwoPi) w = 0.0;
  return w;
}

PhaseGrid spiral_phase_pattern(const SlmSpec& spec, int l, std::optional<PixelCoord> center) {
  if (l == 0) throw ValidationError("spiral phase pattern requires l != 0");
  PhaseGrid grid(spec, center.value_or(panel_center(spec)));
  const auto c = grid.center();
  for (int j = 0; j < spec.height_px; ++j)
    for (int i = 0; i < spec.width_px; ++i) grid.set(i, j, l * std::atan2(j - c.y, i - c.x));
  return grid;
}

PhaseGrid fresnel_lens_phase(const SlmSpec& spec, double focal_x, double focal_y, double wavelength,
                             std::optional<PixelCoord> center) {
  if (focal_x == 0.0 || focal_y == 0.0) throw ValidationError("focal lengths must be nonzero");
  if (!(wavelength > 0.0)) throw ValidationError("wavelength must be positive");
  PhaseGrid grid(spec, center.value_or(panel_center(spec)));
  const auto c = grid.center();
  // 1/inf == 0 switches an axis off
  const double kx = std::numbers::pi / (wavelength * focal_x);
  const double ky = std::numbers::pi / (wavelength * focal_y);
  for (int j = 0; j < spec.height_px; ++j) {
    const double y = (j - c.y) * spec.pixel_pitch;
    for (int i = 0; i < spec.width_px; ++i) {
      const double x = (i - c.x) * spec.pixel_pitch;
      grid.set(i, j, -(kx * x * x + ky * y * y));
    }
  }
  return grid;
}

PhaseGrid add_phases(const PhaseGrid& a, const PhaseGrid& b) {
  if (!(a.spec() == b.spec())) throw ValidationError("cannot add phase grids of different panel geometry");
  PhaseGrid out(a.spec(), a.center());
  for (int j = 0; j < a.height(); ++j)
    for (int i = 0; i < a.width(); ++i) out.set(i, j, a.at(i, j) + b.at(i, j));
  return out;
}

GridGeometry oversampled_geometry(const SlmSpec& spec, int oversample) {
  if (oversample < 1) throw ValidationError("oversample must be >= 1");
  return {spec.width_px * oversample, spec.height_px * oversample, spec.pixel_pitch / oversample};
}

FieldGrid illuminate_gaussian(const PhaseGrid& pattern, double waist, int oversample) {
  const auto& spec = pattern.spec();
  check_beam(spec, waist, oversample);
  const auto geo = oversampled_geometry(spec, oversample);
  FieldGrid f{geo.nx, geo.ny, geo.spacing, fine_center(pattern.center().x, oversample),
              fine_center(pattern.center().y, oversample), {}};
  f.data.resize(static_cast<std::size_t>(f.nx) * f.ny);
  const double inv_w2 = 1.0 / (waist * waist);
  for (int j = 0; j < f.ny; ++j) {
    const double y = f.y(j);
    for (int i = 0; i < f.nx; ++i) {
      const double x = f.x(i);
      f(i, j) = std::polar(std::exp(-(x * x + y * y) * inv_w2), pattern.at(i / oversample, j / oversample));
    }
  }
  return f;
}

namespace {

FieldGrid ideal_on(int l, double waist, FieldGrid f) {
  if (l == 0) throw ValidationError("ideal spiral field requires l != 0");
  if (!(waist > 0.0)) throw ValidationError("beam waist must be positive");
  f.data.resize(static_cast<std::size_t>(f.nx) * f.ny);
  const double inv_w2 = 1.0 / (waist * waist);
  for (int j = 0; j < f.ny; ++j) {
    const double y = f.y(j);
    for (int i = 0; i < f.nx; ++i) {
      const double x = f.x(i);
      f(i, j) = std::polar(std::exp(-(x * x + y * y) * inv_w2), l * std::atan2(y, x));
    }
  }
  return f;
}

}  // namespace

FieldGrid ideal_spiral_field(int l, double waist, const SlmSpec& spec, PixelCoord center, int oversample) {
  check_center(spec, center);
  const auto geo = oversampled_geometry(spec, oversample);
  return ideal_on(l, waist,
                  {geo.nx, geo.ny, geo.spacing, fine_center(center.x, oversample), fine_center(center.y, oversample), {}});
}

FieldGrid ideal_spiral_field(int l, double waist, const GridGeometry& g) {
  if (g.nx < 2 || g.ny < 2 || !(g.spacing > 0.0)) throw ValidationError("invalid grid geometry");
  return ideal_on(l, waist, {g.nx, g.ny, g.spacing, 0.5 * (g.nx - 1), 0.5 * (g.ny - 1), {}});
}

double overlap_efficiency(const FieldGrid& a, const FieldGrid& b) {
  if (a.nx != b.nx || a.ny != b.ny) throw ValidationError("overlap of fields with different sample layouts");
  detail::CompensatedSum re, im, na, nb;
  for (int j = 0; j < a.ny; ++j) {
    double row_re = 0.0, row_im = 0.0, row_a = 0.0, row_b = 0.0;
    for (int i = 0; i < a.nx; ++i) {
      const cplx p = std::conj(a(i, j)) * b(i, j);
      row_re += p.real();
      row_im += p.imag();
      row_a += std::norm(a(i, j));
      row_b += std::norm(b(i, j));
    }
    re.add(row_re);
    im.add(row_im);
    na.add(row_a);
    nb.add(row_b);
  }
  const double norm = na.value() * nb.value();
  if (!(norm > 0.0)) throw NumericalError("overlap of a field with zero power");
  return std::min(1.0, (re.value() * re.value() + im.value() * im.value()) / norm);
}

double default_waist(const SlmSpec& spec, int l) {
  if (l == 0) throw ValidationError("default waist requires l != 0");
  return 0.8 * spec.short_half_extent() / std::sqrt(0.5 * std::abs(l));
}

double conversion_efficiency(const SlmSpec& spec, int l, double waist, int oversample) {
  if (l < 1) throw ValidationError("conversion efficiency requires l >= 1");
  check_beam(spec, waist, oversample);
  const auto pattern = spiral_phase_pattern(spec, l);
  const double h = spec.pixel_pitch / oversample;
  const double cxf = fine_center(pattern.center().x, oversample);
  const double cyf = fine_center(pattern.center().y, oversample);
  const int nx = spec.width_px * oversample;
  const int ny = spec.height_px * oversample;

  // |ideal| * |pixelated| = exp(-2 r^2 / w^2) factorizes in x and y.
  const double two_inv_w2 = 2.0 / (waist * waist);
  const double cut = kEnvelopeCutoffWaists * waist;
  const int i0 = std::max(0, static_cast<int>(std::floor(cxf - cut / h)));
  const int i1 = std::min(nx - 1, static_cast<int>(std::ceil(cxf + cut / h)));
  const int j0 = std::max(0, static_cast<int>(std::floor(cyf - cut / h)));
  const int j1 = std::min(ny - 1, static_cast<int>(std::ceil(cyf + cut / h)));

  std::vector<double> xs(nx), gx(nx);
  for (int i = i0; i <= i1; ++i) {
    xs[i] = (i - cxf) * h;
    gx[i] = std::exp(-two_inv_w2 * xs[i] * xs[i]);
  }

  detail::CompensatedSum re, im, norm;
  for (int j = j0; j <= j1; ++j) {
    const double y = (j - cyf) * h;
    const double gy = std::exp(-two_inv_w2 * y * y);
    const int pj = j / oversample;
    double row_re = 0.0, row_im = 0.0, row_n = 0.0;
    for (int i = i0; i <= i1; ++i) {
      const double g = gx[i] * gy;
      const double dphi = pattern.at(i / oversample, pj) - l * std::atan2(y, xs[i]);
      row_re += g * std::cos(dphi);
      row_im += g * std::sin(dphi);
      row_n += g;
    }
    re.add(row_re);
    im.add(row_im);
    norm.add(row_n);
  }
  const double n = norm.value();
  if (!(n > 0.0)) throw NumericalError("beam misses the panel");
  return std::min(1.0, (re.value() * re.value() + im.value() * im.value()) / (n * n));
}

double pixels_per_period(const SlmSpec& spec, int l, double radius) {
  if (!(radius > 0.0)) throw ValidationError("radius must be positive");
  if (l == 0) throw ValidationError("pixels per period requires l != 0");
  return kTwoPi * radius / (std::abs(l) * spec.pixel_pitch);
}

double aliasing_radius(const SlmSpec& spec, int l) {
  return std::abs(l) * spec.pixel_pitch / std::numbers::pi;
}

double ring_radius(int l, double waist) { return waist * std::sqrt(0.5 * std::abs(l)); }

IntensityGrid petal_intensity(int l, double phi, double waist, const GridGeometry& g) {
  if (l < 1) throw ValidationError("petal intensity requires l >= 1");
  if (!(waist > 0.0)) throw ValidationError("beam waist must be positive");
  if (g.nx < 2 || g.ny < 2 || !(g.spacing > 0.0)) throw ValidationError("invalid grid geometry");
  IntensityGrid out{g.nx, g.ny, g.spacing, 0.5 * (g.nx - 1), 0.5 * (g.ny - 1), {}};
  out.data.resize(static_cast<std::size_t>(g.nx) * g.ny);
  const double two_inv_w2 = 2.0 / (waist * waist);
  for (int j = 0; j < out.ny; ++j) {
    const double y = out.y(j);
    for (int i = 0; i < out.nx; ++i) {
      const double x = out.x(i);
      const double rho = two_inv_w2 * (x * x + y * y);
      // rho^l e^{-rho}, scaled to peak 1 at rho = l
      const double envelope = rho > 0.0 ? std::exp(l * std::log(rho / l) - rho + l) : 0.0;
      const double c = std::cos(l * std::atan2(y, x) - 0.5 * phi);
      out(i, j) = 4.0 * c * c * envelope;
    }
  }
  return out;
}

namespace {

double bilinear(const IntensityGrid& g, double x, double y, bool& inside) {
  const double fx = x / g.spacing + g.cx;
  const double fy = y / g.spacing + g.cy;
  const int i = static_cast<int>(std::floor(fx));
  const int j = static_cast<int>(std::floor(fy));
  inside = i >= 0 && j >= 0 && i + 1 < g.nx && j + 1 < g.ny;
  if (!inside) return 0.0;
  const double tx = fx - i, ty = fy - j;
  return (1 - tx) * (1 - ty) * g(i, j) + tx * (1 - ty) * g(i + 1, j) + (1 - tx) * ty * g(i, j + 1) +
         tx * ty * g(i + 1, j + 1);
}

}  // namespace

std::vector<double> ring_profile(const IntensityGrid& intensity, double r_min, double r_max, int samples) {
  if (!(r_min >= 0.0 && r_max > r_min)) throw ValidationError("ring window needs 0 <= r_min < r_max");
  if (samples < 8) throw ValidationError("ring profile needs at least 8 samples");
  const double dr = 0.5 * intensity.spacing;
  const int radial = std::max(1, static_cast<int>(std::ceil((r_max - r_min) / dr)));
  std::vector<double> profile(samples, 0.0);
  for (int k = 0; k < samples; ++k) {
    const double theta = kTwoPi * k / samples;
    const double ct = std::cos(theta), st = std::sin(theta);
    double acc = 0.0;
    int used = 0;
    for (int m = 0; m <= radial; ++m) {
      const double r = r_min + (r_max - r_min) * m / radial;
      bool inside = false;
      const double v = bilinear(intensity, r * ct, r * st, inside);
      if (inside) {
        acc += v;
        ++used;
      }
    }
    profile[k] = used ? acc / used : 0.0;
  }
  return profile;
}

int count_petals(const IntensityGrid& intensity, double r_min, double r_max) {
  const int samples =
      std::max(1024, static_cast<int>(std::ceil(8.0 * kTwoPi * r_max / intensity.spacing)));
  const auto profile = ring_profile(intensity, r_min, r_max, samples);
  if (std::any_of(profile.begin(), profile.end(), [](double v) { return v < 0.0; }))
    throw ValidationError("intensity must be non-negative");
  const auto [lo_it, hi_it] = std::minmax_element(profile.begin(), profile.end());
  const double lo = *lo_it, hi = *hi_it;
  if (!(hi > 0.0)) throw NoSignalError("no intensity inside the ring window");
  if (hi - lo <= 1e-12 * hi) return 0;

  // Hysteresis walk around the circle starting at the global minimum; a maximum
  // counts once the profile falls 20% of the full range below it.
  const double threshold = 0.2 * (hi - lo);
  const auto start = static_cast<std::size_t>(lo_it - profile.begin());
  bool rising = true;
  double extreme = lo;
  int peaks = 0;
  for (std::size_t n = 1; n <= profile.size(); ++n) {
    const double v = profile[(start + n) % profile.size()];
    if (rising) {
      if (v > extreme) {
        extreme = v;
      } else if (v < extreme - threshold) {
        ++peaks;
        rising = false;
        extreme = v;
      }
    } else {
      if (v < extreme) {
        extreme = v;
      } else if (v > extreme + threshold) {
        rising = true;
        extreme = v;
      }
    }
  }
  return peaks;
}

std::uint8_t phase_to_gray(double phase) {
  const double v = std::floor(phase / kTwoPi * 256.0);
  return static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
}

namespace {

void write_p5(const std::filesystem::path& path, int w, int h, const std::vector<std::uint8_t>& px) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "P5\n" << w << ' ' << h << "\n255\n";
  out.write(reinterpret_cast<const char*>(px.data()), static_cast<std::streamsize>(px.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace

void write_pgm(const PhaseGrid& grid, const std::filesystem::path& path) {
  std::vector<std::uint8_t> px(grid.values().size());
  std::transform(grid.values().begin(), grid.values().end(), px.begin(), phase_to_gray);
  write_p5(path, grid.width(), grid.height(), px);
}

void write_pgm(const IntensityGrid& grid, const std::filesystem::path& path) {
  const double peak = grid.data.empty() ? 0.0 : *std::max_element(grid.data.begin(), grid.data.end());
  std::vector<std::uint8_t> px(grid.data.size(), 0);
  if (peak > 0.0)
    std::transform(grid.data.begin(), grid.data.end(), px.begin(), [peak](double v) {
      return static_cast<std::uint8_t>(std::clamp(std::floor(v / peak * 256.0), 0.0, 255.0));
    });
  write_p5(path, grid.nx, grid.ny, px);
}

PgmImage read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  auto next_token = [&]() {
    std::string tok;
    char c;
    while (in.get(c)) {
      if (c == '#') {
        std::string skip;
        std::getline(in, skip);
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        if (!tok.empty()) break;
      } else {
        tok.push_back(c);
      }
    }
    return tok;
  };
  if (next_token() != "P5") throw ParseError(0, path.string() + " is not a binary graymap");
  PgmImage img;
  try {
    img.width = std::stoi(next_token());
    img.height = std::stoi(next_token());
    if (std::stoi(next_token()) != 255) throw ParseError(0, "only maxval 255 graymaps are supported");
  } catch (const std::logic_error&) {
    throw ParseError(0, "malformed graymap header in " + path.string());
  }
  if (img.width <= 0 || img.height <= 0) throw ParseError(0, "invalid graymap dimensions");
  img.pixels.resize(static_cast<std::size_t>(img.width) * img.height);
  in.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
  if (in.gcount() != static_cast<std::streamsize>(img.pixels.size()))
    throw IoError("truncated graymap " + path.string());
  return img;
}

}  // namespace oament::slm
