#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

namespace uwb {

/// Axis-aligned support box.
struct Box {
  std::vector<double> lo, hi;

  int dims() const { return static_cast<int>(lo.size()); }
  bool contains(std::span<const double> p) const;
  double volume() const;
};

/// Immutable probability density over a finite support box. Evaluation is
/// pointwise, non-negative and zero outside the box; concurrent reads are
/// safe. Joints over (bias, features...) carry the bias on axis 0.
class Density {
 public:
  virtual ~Density() = default;
  virtual int dims() const = 0;
  virtual const Box& support() const = 0;
  virtual double eval(std::span<const double> point) const = 0;

  /// Integral over axis 0 with the remaining coordinates held at `rest`.
  virtual double marginal_over_axis0(std::span<const double> rest) const;
  /// Conditional mean of axis 0 given `rest`; 0 when the slice is empty.
  virtual double mean_of_axis0(std::span<const double> rest) const;
  /// Conditional mode of axis 0 given `rest` (smallest argmax).
  virtual double mode_of_axis0(std::span<const double> rest) const;
};

/// Values on a regular grid of cells covering a box. Shared storage for the
/// histogram and smoothed representations.
struct Lattice {
  Box box;
  std::vector<int> shape;      // cells per axis
  std::vector<double> values;  // row major, axis 0 slowest

  int dims() const { return static_cast<int>(shape.size()); }
  std::size_t cell_count() const;
  double cell_width(int axis) const;
  double cell_volume() const;
  double center(int axis, int index) const;
  /// Cell index of a point, or -1 if outside. Points on the upper face
  /// belong to the last cell.
  std::int64_t locate(std::span<const double> point) const;
};

class HistogramDensity final : public Density {
 public:
  /// Equal-width bins spanning [min, max] per dimension; cell mass is the
  /// sample fraction. Degenerate axes are widened by a tiny margin.
  static HistogramDensity fit(const std::vector<std::vector<double>>& samples,
                              const std::vector<int>& bins_per_dim);

  /// Same, with extra empty bins added per axis below and above the data
  /// range. The bin width is still set by the data span, so padding widens
  /// the support without changing the resolution.
  static HistogramDensity fit(const std::vector<std::vector<double>>& samples,
                              const std::vector<int>& bins_per_dim,
                              const std::vector<int>& pad_lo_bins,
                              const std::vector<int>& pad_hi_bins);

  HistogramDensity(Box box, std::vector<int> shape, std::vector<double> mass);

  int dims() const override { return grid_.dims(); }
  const Box& support() const override { return grid_.box; }
  double eval(std::span<const double> point) const override;
  double marginal_over_axis0(std::span<const double> rest) const override;
  double mean_of_axis0(std::span<const double> rest) const override;
  double mode_of_axis0(std::span<const double> rest) const override;

  const std::vector<double>& cell_mass() const { return grid_.values; }
  const std::vector<int>& shape() const { return grid_.shape; }
  double bin_width(int axis) const { return grid_.cell_width(axis); }
  double center(int axis, int index) const { return grid_.center(axis, index); }
  /// Total mass of cells whose centers lie below `cut` on `axis`.
  double mass_below(int axis, double cut) const;
  HistogramDensity marginal(const std::vector<int>& keep_axes) const;

  /// Density values (mass / cell volume) at cell centers.
  Lattice value_lattice() const;

 private:
  Lattice grid_;  // values hold per-cell mass
};

class SmoothedDensity final : public Density {
 public:
  explicit SmoothedDensity(Lattice grid);

  int dims() const override { return grid_.dims(); }
  const Box& support() const override { return grid_.box; }
  double eval(std::span<const double> point) const override;
  double marginal_over_axis0(std::span<const double> rest) const override;
  double mean_of_axis0(std::span<const double> rest) const override;
  double mode_of_axis0(std::span<const double> rest) const override;

  const Lattice& lattice() const { return grid_; }
  double mass_below(int axis, double cut) const;
  SmoothedDensity marginal(const std::vector<int>& keep_axes) const;

 private:
  Lattice grid_;  // values hold the density, normalized over the box
};

/// Cubic-spline interpolation of the histogram onto a lattice refined by
/// `refine_factor` per axis, followed by per-axis moving-average filtering
/// with a window of about window_fraction of the axis extent, clamping at
/// zero and renormalization.
SmoothedDensity smooth(const HistogramDensity& h, int refine_factor,
                       double window_fraction = 1.0 / 15.0);

/// Gaussian filter along one axis (sigma in axis units) with a truncated,
/// per-position renormalized kernel; mass stays inside the box.
Lattice gaussian_blur_axis(const Lattice& g, int axis, double sigma);

/// Bias-axis filter applied to a smoothed density, then renormalized.
SmoothedDensity blur_axis0(const SmoothedDensity& d, double sigma);

class PolyDensity final : public Density {
 public:
  struct Term {
    std::array<std::uint8_t, 4> powers{};  // per axis, unused axes 0
    double coef = 0.0;
  };

  /// Least-squares fit of the lattice values at cell centers by a total
  /// degree <= `degree` polynomial in axes affinely rescaled to [-1,1].
  /// Evaluation clamps at zero and renormalizes over the box.
  static PolyDensity fit(const Lattice& values, int degree);

  PolyDensity(Box box, int degree, std::vector<Term> terms, double norm,
              double fit_rmse, double fit_rmse_normalized);

  int dims() const override { return box_.dims(); }
  const Box& support() const override { return box_; }
  double eval(std::span<const double> point) const override;

  /// Unclamped, unnormalized polynomial value at a point inside the box.
  double raw(std::span<const double> point) const;

  int degree() const { return degree_; }
  const std::vector<Term>& terms() const { return terms_; }
  double norm() const { return norm_; }
  /// Root-mean-square fit residual at cell centers, in value units.
  double fit_rmse() const { return fit_rmse_; }
  /// Fit residual divided by the largest target value.
  double fit_rmse_normalized() const { return fit_rmse_normalized_; }

 private:
  Box box_;
  int degree_ = 0;
  std::vector<Term> terms_;
  double norm_ = 1.0;
  double fit_rmse_ = 0.0;
  double fit_rmse_normalized_ = 0.0;
  std::array<double, 4> mid_{}, half_{};  // axis rescaling cache
};

PolyDensity fit_poly(const HistogramDensity& h, int degree = 8);
PolyDensity fit_poly(const SmoothedDensity& d, int degree = 8);

/// Joint over (bias, features...) for line-of-sight links: a zero-mean
/// Gaussian bias factor (the ranging noise fitted from training residuals)
/// times a feature-only density.
class LosConditionalDensity final : public Density {
 public:
  LosConditionalDensity(double bias_sigma,
                        std::shared_ptr<const Density> features);

  int dims() const override;
  const Box& support() const override { return box_; }
  double eval(std::span<const double> point) const override;
  double marginal_over_axis0(std::span<const double> rest) const override;
  double mean_of_axis0(std::span<const double> rest) const override;
  double mode_of_axis0(std::span<const double> rest) const override;

  double bias_sigma() const { return bias_sigma_; }
  const std::shared_ptr<const Density>& features() const { return features_; }

 private:
  double bias_sigma_;
  std::shared_ptr<const Density> features_;
  Box box_;
};

/// Convex combination p * f_los + (1-p) * f_nlos of two same-rank densities.
class MixtureDensity final : public Density {
 public:
  MixtureDensity(std::shared_ptr<const Density> f_los,
                 std::shared_ptr<const Density> f_nlos, double p_los);

  int dims() const override { return box_.dims(); }
  const Box& support() const override { return box_; }
  double eval(std::span<const double> point) const override;
  double marginal_over_axis0(std::span<const double> rest) const override;
  double mean_of_axis0(std::span<const double> rest) const override;

  double p_los() const { return p_los_; }
  const std::shared_ptr<const Density>& f_los() const { return los_; }
  const std::shared_ptr<const Density>& f_nlos() const { return nlos_; }

 private:
  std::shared_ptr<const Density> los_, nlos_;
  double p_los_;
  Box box_;  // union of the component boxes
};

MixtureDensity mix(std::shared_ptr<const Density> f_los,
                   std::shared_ptr<const Density> f_nlos, double p_los = 0.5);

/// Midpoint-rule integral of the density over its support box.
double integrate(const Density& f, int points_per_axis);

/// Same, restricted to points whose axis-0 coordinate is below `cut`.
double integrate_below_axis0(const Density& f, double cut, int points_per_axis);

/// Mean of the axis-0 coordinate under the density (midpoint rule).
double mean_along_axis0(const Density& f, int points_per_axis);

/// Same mean, but exact for lattice-backed densities.
double unconditional_axis0_mean(const Density& f);

}  // namespace uwb
