#include "uwb/density.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>

#include "uwb/errors.hpp"

namespace uwb {

bool Box::contains(std::span<const double> p) const {
  for (int a = 0; a < dims(); ++a)
    if (p[a] < lo[a] || p[a] > hi[a]) return false;
  return true;
}

double Box::volume() const {
  double v = 1.0;
  for (int a = 0; a < dims(); ++a) v *= hi[a] - lo[a];
  return v;
}

namespace {

constexpr int kDefaultAxisQuadrature = 256;

double gauss_pdf(double x, double sigma) {
  const double z = x / sigma;
  return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * 3.14159265358979323846));
}

}  // namespace

double Density::marginal_over_axis0(std::span<const double> rest) const {
  const Box& b = support();
  const int n = kDefaultAxisQuadrature;
  const double width = (b.hi[0] - b.lo[0]) / n;
  std::vector<double> p(dims());
  for (int a = 1; a < dims(); ++a) p[a] = rest[a - 1];
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    p[0] = b.lo[0] + (i + 0.5) * width;
    acc += eval(p);
  }
  return acc * width;
}

double Density::mean_of_axis0(std::span<const double> rest) const {
  const Box& b = support();
  const int n = kDefaultAxisQuadrature;
  const double width = (b.hi[0] - b.lo[0]) / n;
  std::vector<double> p(dims());
  for (int a = 1; a < dims(); ++a) p[a] = rest[a - 1];
  double mass = 0.0, moment = 0.0;
  for (int i = 0; i < n; ++i) {
    p[0] = b.lo[0] + (i + 0.5) * width;
    const double v = eval(p);
    mass += v;
    moment += p[0] * v;
  }
  return mass > 0.0 ? moment / mass : 0.0;
}

double Density::mode_of_axis0(std::span<const double> rest) const {
  const Box& b = support();
  const int n = kDefaultAxisQuadrature;
  const double width = (b.hi[0] - b.lo[0]) / n;
  std::vector<double> p(dims());
  for (int a = 1; a < dims(); ++a) p[a] = rest[a - 1];
  double best = -1.0, arg = b.lo[0];
  for (int i = 0; i < n; ++i) {
    p[0] = b.lo[0] + (i + 0.5) * width;
    const double v = eval(p);
    if (v > best) {
      best = v;
      arg = p[0];
    }
  }
  return arg;
}

std::size_t Lattice::cell_count() const {
  std::size_t n = 1;
  for (int s : shape) n *= static_cast<std::size_t>(s);
  return n;
}

double Lattice::cell_width(int axis) const {
  return (box.hi[axis] - box.lo[axis]) / shape[axis];
}

double Lattice::cell_volume() const {
  double v = 1.0;
  for (int a = 0; a < dims(); ++a) v *= cell_width(a);
  return v;
}

double Lattice::center(int axis, int index) const {
  return box.lo[axis] + (index + 0.5) * cell_width(axis);
}

std::int64_t Lattice::locate(std::span<const double> point) const {
  std::int64_t idx = 0;
  for (int a = 0; a < dims(); ++a) {
    const double x = point[a];
    if (x < box.lo[a] || x > box.hi[a]) return -1;
    int i = static_cast<int>((x - box.lo[a]) / cell_width(a));
    if (i >= shape[a]) i = shape[a] - 1;  // upper face
    idx = idx * shape[a] + i;
  }
  return idx;
}

// ---------------------------------------------------------------------------
// Histogram

HistogramDensity::HistogramDensity(Box box, std::vector<int> shape,
                                   std::vector<double> mass) {
  grid_.box = std::move(box);
  grid_.shape = std::move(shape);
  grid_.values = std::move(mass);
  if (grid_.values.size() != grid_.cell_count())
    throw ConfigError("histogram: cell count does not match shape");
}

HistogramDensity HistogramDensity::fit(
    const std::vector<std::vector<double>>& samples,
    const std::vector<int>& bins_per_dim) {
  const std::vector<int> none(bins_per_dim.size(), 0);
  return fit(samples, bins_per_dim, none, none);
}

HistogramDensity HistogramDensity::fit(
    const std::vector<std::vector<double>>& samples,
    const std::vector<int>& bins_per_dim,
    const std::vector<int>& pad_lo_bins, const std::vector<int>& pad_hi_bins) {
  if (samples.empty()) throw DomainError("histogram: empty sample set");
  const int dims = static_cast<int>(samples.front().size());
  if (dims == 0 || static_cast<int>(bins_per_dim.size()) != dims)
    throw ConfigError("histogram: bins_per_dim does not match point rank");
  if (static_cast<int>(pad_lo_bins.size()) != dims ||
      static_cast<int>(pad_hi_bins.size()) != dims)
    throw ConfigError("histogram: padding does not match point rank");
  for (int b : bins_per_dim)
    if (b < 2) throw ConfigError("histogram: need at least 2 bins per dimension");
  for (int a = 0; a < dims; ++a)
    if (pad_lo_bins[a] < 0 || pad_hi_bins[a] < 0)
      throw ConfigError("histogram: negative padding");

  Box box;
  box.lo.assign(dims, std::numeric_limits<double>::infinity());
  box.hi.assign(dims, -std::numeric_limits<double>::infinity());
  for (const auto& s : samples) {
    if (static_cast<int>(s.size()) != dims)
      throw ConfigError("histogram: ragged sample set");
    for (int a = 0; a < dims; ++a) {
      box.lo[a] = std::min(box.lo[a], s[a]);
      box.hi[a] = std::max(box.hi[a], s[a]);
    }
  }
  std::vector<int> shape(dims);
  for (int a = 0; a < dims; ++a) {
    if (box.hi[a] <= box.lo[a]) {
      const double pad = std::max(1e-12, std::fabs(box.lo[a]) * 1e-9);
      box.lo[a] -= pad;
      box.hi[a] += pad;
    }
    const double width = (box.hi[a] - box.lo[a]) / bins_per_dim[a];
    box.lo[a] -= pad_lo_bins[a] * width;
    box.hi[a] += pad_hi_bins[a] * width;
    shape[a] = bins_per_dim[a] + pad_lo_bins[a] + pad_hi_bins[a];
  }

  Lattice grid;
  grid.box = box;
  grid.shape = std::move(shape);
  grid.values.assign(grid.cell_count(), 0.0);
  const double w = 1.0 / static_cast<double>(samples.size());
  for (const auto& s : samples) {
    const std::int64_t idx = grid.locate(s);
    grid.values[static_cast<std::size_t>(idx)] += w;
  }
  return HistogramDensity(std::move(grid.box), std::move(grid.shape),
                          std::move(grid.values));
}

double HistogramDensity::eval(std::span<const double> point) const {
  const std::int64_t idx = grid_.locate(point);
  if (idx < 0) return 0.0;
  return grid_.values[static_cast<std::size_t>(idx)] / grid_.cell_volume();
}

namespace {

// Flat offset of the feature cell (axes 1..d-1) and the axis-0 stride, or
// -1 when the feature coordinates fall outside the lattice.
std::int64_t locate_rest(const Lattice& g, std::span<const double> rest,
                         std::size_t* stride_out) {
  std::int64_t idx = 0;
  for (int a = 1; a < g.dims(); ++a) {
    const double x = rest[a - 1];
    if (x < g.box.lo[a] || x > g.box.hi[a]) return -1;
    int i = static_cast<int>((x - g.box.lo[a]) / g.cell_width(a));
    if (i >= g.shape[a]) i = g.shape[a] - 1;
    idx = idx * g.shape[a] + i;
  }
  std::size_t stride = 1;
  for (int a = 1; a < g.dims(); ++a) stride *= static_cast<std::size_t>(g.shape[a]);
  *stride_out = stride;
  return idx;
}

struct Axis0Stats {
  double mass = 0.0;    // integral of the density over axis 0
  double mean = 0.0;
  double mode_arg = 0.0;
};

// value_scale converts stored cell values to density values.
Axis0Stats axis0_stats(const Lattice& g, std::span<const double> rest,
                       double value_scale) {
  Axis0Stats st;
  st.mode_arg = g.box.lo[0];
  std::size_t stride = 0;
  const std::int64_t base = locate_rest(g, rest, &stride);
  if (base < 0) return st;
  const double w0 = g.cell_width(0);
  double moment = 0.0, best = -1.0;
  for (int i = 0; i < g.shape[0]; ++i) {
    const double v =
        g.values[static_cast<std::size_t>(i) * stride + static_cast<std::size_t>(base)] *
        value_scale;
    const double c = g.center(0, i);
    st.mass += v * w0;
    moment += c * v * w0;
    if (v > best) {
      best = v;
      st.mode_arg = c;
    }
  }
  st.mean = st.mass > 0.0 ? moment / st.mass : 0.0;
  return st;
}

double lattice_mass_below(const Lattice& g, int axis, double cut,
                          double mass_scale) {
  const double w = g.cell_width(axis);
  std::size_t stride = 1;
  for (int a = axis + 1; a < g.dims(); ++a)
    stride *= static_cast<std::size_t>(g.shape[a]);
  const std::size_t block = stride * static_cast<std::size_t>(g.shape[axis]);
  double acc = 0.0;
  for (std::size_t idx = 0; idx < g.values.size(); ++idx) {
    const int i = static_cast<int>((idx % block) / stride);
    const double a = g.box.lo[axis] + i * w;
    const double frac = std::clamp((cut - a) / w, 0.0, 1.0);
    if (frac > 0.0) acc += g.values[idx] * mass_scale * frac;
  }
  return acc;
}

Lattice lattice_marginal(const Lattice& g, const std::vector<int>& keep,
                         bool values_are_mass) {
  for (int a : keep)
    if (a < 0 || a >= g.dims()) throw ConfigError("marginal: bad axis");
  Lattice out;
  out.box.lo.reserve(keep.size());
  out.box.hi.reserve(keep.size());
  out.shape.reserve(keep.size());
  for (int a : keep) {
    out.box.lo.push_back(g.box.lo[a]);
    out.box.hi.push_back(g.box.hi[a]);
    out.shape.push_back(g.shape[a]);
  }
  out.values.assign(out.cell_count(), 0.0);

  double dropped_volume = 1.0;
  for (int a = 0; a < g.dims(); ++a) {
    if (std::find(keep.begin(), keep.end(), a) == keep.end())
      dropped_volume *= g.cell_width(a);
  }

  std::vector<int> mi(g.dims());
  for (std::size_t idx = 0; idx < g.values.size(); ++idx) {
    std::size_t r = idx;
    for (int a = g.dims() - 1; a >= 0; --a) {
      mi[a] = static_cast<int>(r % static_cast<std::size_t>(g.shape[a]));
      r /= static_cast<std::size_t>(g.shape[a]);
    }
    std::size_t o = 0;
    for (std::size_t k = 0; k < keep.size(); ++k)
      o = o * static_cast<std::size_t>(out.shape[k]) +
          static_cast<std::size_t>(mi[keep[k]]);
    // Mass lattices sum directly; value lattices integrate the dropped axes.
    out.values[o] += values_are_mass ? g.values[idx]
                                     : g.values[idx] * dropped_volume;
  }
  return out;
}

}  // namespace

double HistogramDensity::marginal_over_axis0(std::span<const double> rest) const {
  return axis0_stats(grid_, rest, 1.0 / grid_.cell_volume()).mass;
}

double HistogramDensity::mean_of_axis0(std::span<const double> rest) const {
  return axis0_stats(grid_, rest, 1.0 / grid_.cell_volume()).mean;
}

double HistogramDensity::mode_of_axis0(std::span<const double> rest) const {
  return axis0_stats(grid_, rest, 1.0 / grid_.cell_volume()).mode_arg;
}

double HistogramDensity::mass_below(int axis, double cut) const {
  return lattice_mass_below(grid_, axis, cut, 1.0);
}

HistogramDensity HistogramDensity::marginal(const std::vector<int>& keep_axes) const {
  Lattice m = lattice_marginal(grid_, keep_axes, true);
  return HistogramDensity(std::move(m.box), std::move(m.shape), std::move(m.values));
}

Lattice HistogramDensity::value_lattice() const {
  Lattice out = grid_;
  const double vol = grid_.cell_volume();
  for (double& v : out.values) v /= vol;
  return out;
}

// ---------------------------------------------------------------------------
// Smoothing

namespace {

// Natural cubic spline through (x, y); linear when only two knots.
class CubicSpline {
 public:
  CubicSpline(std::vector<double> x, std::vector<double> y)
      : x_(std::move(x)), y_(std::move(y)), m_(x_.size(), 0.0) {
    const std::size_t n = x_.size();
    if (n < 3) return;  // second derivatives stay zero
    std::vector<double> a(n, 0.0), b(n, 0.0), c(n, 0.0), d(n, 0.0);
    b[0] = 1.0;
    b[n - 1] = 1.0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double h0 = x_[i] - x_[i - 1];
      const double h1 = x_[i + 1] - x_[i];
      a[i] = h0 / 6.0;
      b[i] = (h0 + h1) / 3.0;
      c[i] = h1 / 6.0;
      d[i] = (y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0;
    }
    // Thomas algorithm
    for (std::size_t i = 1; i < n; ++i) {
      const double w = a[i] / b[i - 1];
      b[i] -= w * c[i - 1];
      d[i] -= w * d[i - 1];
    }
    m_[n - 1] = d[n - 1] / b[n - 1];
    for (std::size_t i = n - 1; i-- > 0;)
      m_[i] = (d[i] - c[i] * m_[i + 1]) / b[i];
  }

  double operator()(double t) const {
    const std::size_t n = x_.size();
    std::size_t i = std::upper_bound(x_.begin(), x_.end(), t) - x_.begin();
    i = i == 0 ? 0 : std::min(i - 1, n - 2);  // end segments extrapolate
    const double h = x_[i + 1] - x_[i];
    const double u = (x_[i + 1] - t) / h;
    const double v = (t - x_[i]) / h;
    return u * y_[i] + v * y_[i + 1] +
           ((u * u * u - u) * m_[i] + (v * v * v - v) * m_[i + 1]) * h * h / 6.0;
  }

 private:
  std::vector<double> x_, y_, m_;
};

// Applies `f` to every line of the array along `axis`; the line length may
// change from shape[axis] to new_n.
void apply_along_axis(Lattice& g, int axis, int new_n,
                      const std::function<void(const std::vector<double>&,
                                               std::vector<double>&)>& f) {
  const int n = g.shape[axis];
  std::size_t inner = 1;
  for (int a = axis + 1; a < g.dims(); ++a)
    inner *= static_cast<std::size_t>(g.shape[a]);
  std::size_t outer = 1;
  for (int a = 0; a < axis; ++a) outer *= static_cast<std::size_t>(g.shape[a]);

  std::vector<int> new_shape = g.shape;
  new_shape[axis] = new_n;
  std::vector<double> dst(outer * static_cast<std::size_t>(new_n) * inner);

  std::vector<double> line(n), out_line(new_n);
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t i = 0; i < inner; ++i) {
      const std::size_t src_base = o * static_cast<std::size_t>(n) * inner + i;
      for (int j = 0; j < n; ++j)
        line[j] = g.values[src_base + static_cast<std::size_t>(j) * inner];
      f(line, out_line);
      const std::size_t dst_base = o * static_cast<std::size_t>(new_n) * inner + i;
      for (int j = 0; j < new_n; ++j)
        dst[dst_base + static_cast<std::size_t>(j) * inner] = out_line[j];
    }
  }
  g.shape = std::move(new_shape);
  g.values = std::move(dst);
}

void moving_average_line(const std::vector<double>& in, std::vector<double>& out,
                         int radius) {
  const int n = static_cast<int>(in.size());
  for (int j = 0; j < n; ++j) {
    const int a = std::max(0, j - radius);
    const int b = std::min(n - 1, j + radius);
    double acc = 0.0;
    for (int k = a; k <= b; ++k) acc += in[k];
    out[j] = acc / (b - a + 1);
  }
}

void normalize_lattice(Lattice& g, const char* what) {
  for (double& v : g.values) v = std::max(0.0, v);
  double total = 0.0;
  for (double v : g.values) total += v;
  total *= g.cell_volume();
  if (!(total > 0.0))
    throw FitError(std::string(what) + ": density vanished after filtering");
  for (double& v : g.values) v /= total;
}

}  // namespace

SmoothedDensity::SmoothedDensity(Lattice grid) : grid_(std::move(grid)) {
  if (grid_.values.size() != grid_.cell_count())
    throw ConfigError("smoothed density: cell count does not match shape");
}

double SmoothedDensity::eval(std::span<const double> point) const {
  const std::int64_t idx = grid_.locate(point);
  return idx < 0 ? 0.0 : grid_.values[static_cast<std::size_t>(idx)];
}

double SmoothedDensity::marginal_over_axis0(std::span<const double> rest) const {
  return axis0_stats(grid_, rest, 1.0).mass;
}

double SmoothedDensity::mean_of_axis0(std::span<const double> rest) const {
  return axis0_stats(grid_, rest, 1.0).mean;
}

double SmoothedDensity::mode_of_axis0(std::span<const double> rest) const {
  return axis0_stats(grid_, rest, 1.0).mode_arg;
}

double SmoothedDensity::mass_below(int axis, double cut) const {
  return lattice_mass_below(grid_, axis, cut, grid_.cell_volume());
}

SmoothedDensity SmoothedDensity::marginal(const std::vector<int>& keep_axes) const {
  return SmoothedDensity(lattice_marginal(grid_, keep_axes, false));
}

SmoothedDensity smooth(const HistogramDensity& h, int refine_factor,
                       double window_fraction) {
  if (refine_factor < 2)
    throw ConfigError("smooth: refine_factor must be at least 2");
  if (!(window_fraction > 0.0))
    throw ConfigError("smooth: window_fraction must be positive");

  Lattice g = h.value_lattice();
  // Spline through original cell centers, sampled at refined cell centers.
  for (int axis = 0; axis < g.dims(); ++axis) {
    const int n = g.shape[axis];
    const int m = n * refine_factor;
    std::vector<double> knots(n), targets(m);
    for (int j = 0; j < n; ++j) knots[j] = g.center(axis, j);
    const double w = g.cell_width(axis) / refine_factor;
    for (int j = 0; j < m; ++j) targets[j] = g.box.lo[axis] + (j + 0.5) * w;
    apply_along_axis(g, axis, m,
                     [&](const std::vector<double>& in, std::vector<double>& out) {
                       CubicSpline s(knots, in);
                       for (int j = 0; j < m; ++j) out[j] = s(targets[j]);
                     });
  }

  for (int axis = 0; axis < g.dims(); ++axis) {
    const int n = g.shape[axis];
    int window = static_cast<int>(std::lround(window_fraction * n));
    if (window % 2 == 0) ++window;
    window = std::max(window, 1);
    if (window > n)
      throw ConfigError("smooth: moving-average window exceeds the lattice");
    const int radius = window / 2;
    if (radius == 0) continue;
    apply_along_axis(g, axis, n,
                     [&](const std::vector<double>& in, std::vector<double>& out) {
                       moving_average_line(in, out, radius);
                     });
  }

  normalize_lattice(g, "smooth");
  return SmoothedDensity(std::move(g));
}

Lattice gaussian_blur_axis(const Lattice& src, int axis, double sigma) {
  if (!(sigma > 0.0))
    throw ConfigError("gaussian_blur_axis: sigma must be positive");
  if (axis < 0 || axis >= src.dims())
    throw ConfigError("gaussian_blur_axis: bad axis");
  Lattice g = src;
  const double w = g.cell_width(axis);
  const int radius = std::max(1, static_cast<int>(std::ceil(4.0 * sigma / w)));
  std::vector<double> kernel(2 * radius + 1);
  for (int k = -radius; k <= radius; ++k)
    kernel[k + radius] = std::exp(-0.5 * (k * w) * (k * w) / (sigma * sigma));

  apply_along_axis(g, axis, g.shape[axis],
                   [&](const std::vector<double>& in, std::vector<double>& out) {
                     const int n = static_cast<int>(in.size());
                     for (int j = 0; j < n; ++j) {
                       double acc = 0.0, wsum = 0.0;
                       for (int k = -radius; k <= radius; ++k) {
                         const int q = j + k;
                         if (q < 0 || q >= n) continue;
                         acc += kernel[k + radius] * in[q];
                         wsum += kernel[k + radius];
                       }
                       out[j] = wsum > 0.0 ? acc / wsum : 0.0;
                     }
                   });
  return g;
}

SmoothedDensity blur_axis0(const SmoothedDensity& d, double sigma) {
  Lattice g = gaussian_blur_axis(d.lattice(), 0, sigma);
  normalize_lattice(g, "blur_axis0");
  return SmoothedDensity(std::move(g));
}

// ---------------------------------------------------------------------------
// LOS conditional and mixture

LosConditionalDensity::LosConditionalDensity(
    double bias_sigma, std::shared_ptr<const Density> features)
    : bias_sigma_(bias_sigma), features_(std::move(features)) {
  if (!(bias_sigma_ > 0.0))
    throw ConfigError("los density: bias_sigma must be positive");
  if (!features_) throw ConfigError("los density: missing feature density");
  // The Gaussian underflows around 38 sigma; the box just bounds quadrature.
  box_.lo.push_back(-38.0 * bias_sigma_);
  box_.hi.push_back(38.0 * bias_sigma_);
  const Box& fb = features_->support();
  box_.lo.insert(box_.lo.end(), fb.lo.begin(), fb.lo.end());
  box_.hi.insert(box_.hi.end(), fb.hi.begin(), fb.hi.end());
}

int LosConditionalDensity::dims() const { return 1 + features_->dims(); }

double LosConditionalDensity::eval(std::span<const double> point) const {
  const double b = point[0];
  if (b < box_.lo[0] || b > box_.hi[0]) return 0.0;
  return gauss_pdf(b, bias_sigma_) * features_->eval(point.subspan(1));
}

double LosConditionalDensity::marginal_over_axis0(
    std::span<const double> rest) const {
  return features_->eval(rest);
}

double LosConditionalDensity::mean_of_axis0(std::span<const double>) const {
  return 0.0;
}

double LosConditionalDensity::mode_of_axis0(std::span<const double>) const {
  return 0.0;
}

MixtureDensity::MixtureDensity(std::shared_ptr<const Density> f_los,
                               std::shared_ptr<const Density> f_nlos,
                               double p_los)
    : los_(std::move(f_los)), nlos_(std::move(f_nlos)), p_los_(p_los) {
  if (!los_ || !nlos_) throw ConfigError("mixture: missing component");
  if (los_->dims() != nlos_->dims())
    throw DomainError("mixture: component axis ranks differ");
  if (!(p_los_ >= 0.0 && p_los_ <= 1.0))
    throw ConfigError("mixture: p_los must lie in [0,1]");
  const Box& a = los_->support();
  const Box& b = nlos_->support();
  box_.lo.resize(a.dims());
  box_.hi.resize(a.dims());
  for (int i = 0; i < a.dims(); ++i) {
    box_.lo[i] = std::min(a.lo[i], b.lo[i]);
    box_.hi[i] = std::max(a.hi[i], b.hi[i]);
  }
}

double MixtureDensity::eval(std::span<const double> point) const {
  return p_los_ * los_->eval(point) + (1.0 - p_los_) * nlos_->eval(point);
}

double MixtureDensity::marginal_over_axis0(std::span<const double> rest) const {
  return p_los_ * los_->marginal_over_axis0(rest) +
         (1.0 - p_los_) * nlos_->marginal_over_axis0(rest);
}

double MixtureDensity::mean_of_axis0(std::span<const double> rest) const {
  const double ml = los_->marginal_over_axis0(rest);
  const double mn = nlos_->marginal_over_axis0(rest);
  const double wl = p_los_ * ml, wn = (1.0 - p_los_) * mn;
  if (!(wl + wn > 0.0)) return 0.0;
  return (wl * los_->mean_of_axis0(rest) + wn * nlos_->mean_of_axis0(rest)) /
         (wl + wn);
}

MixtureDensity mix(std::shared_ptr<const Density> f_los,
                   std::shared_ptr<const Density> f_nlos, double p_los) {
  return MixtureDensity(std::move(f_los), std::move(f_nlos), p_los);
}

// ---------------------------------------------------------------------------
// Quadrature helpers

namespace {

template <typename Visit>
void for_each_midpoint(const Box& box, int points_per_axis, Visit&& visit) {
  const int d = box.dims();
  std::vector<double> width(d), p(d);
  for (int a = 0; a < d; ++a)
    width[a] = (box.hi[a] - box.lo[a]) / points_per_axis;
  std::vector<int> idx(d, 0);
  for (int a = 0; a < d; ++a) p[a] = box.lo[a] + 0.5 * width[a];
  double cell = 1.0;
  for (int a = 0; a < d; ++a) cell *= width[a];
  while (true) {
    visit(std::span<const double>(p), cell);
    int a = d - 1;
    while (a >= 0) {
      if (++idx[a] < points_per_axis) {
        p[a] = box.lo[a] + (idx[a] + 0.5) * width[a];
        break;
      }
      idx[a] = 0;
      p[a] = box.lo[a] + 0.5 * width[a];
      --a;
    }
    if (a < 0) return;
  }
}

}  // namespace

double integrate(const Density& f, int points_per_axis) {
  double acc = 0.0;
  for_each_midpoint(f.support(), points_per_axis,
                    [&](std::span<const double> p, double cell) {
                      acc += f.eval(p) * cell;
                    });
  return acc;
}

double integrate_below_axis0(const Density& f, double cut, int points_per_axis) {
  double acc = 0.0;
  for_each_midpoint(f.support(), points_per_axis,
                    [&](std::span<const double> p, double cell) {
                      if (p[0] < cut) acc += f.eval(p) * cell;
                    });
  return acc;
}

double mean_along_axis0(const Density& f, int points_per_axis) {
  double mass = 0.0, moment = 0.0;
  for_each_midpoint(f.support(), points_per_axis,
                    [&](std::span<const double> p, double cell) {
                      const double v = f.eval(p) * cell;
                      mass += v;
                      moment += p[0] * v;
                    });
  return mass > 0.0 ? moment / mass : 0.0;
}

namespace {

double lattice_axis0_mean(const Lattice& g) {
  std::size_t stride = 1;
  for (int a = 1; a < g.dims(); ++a) stride *= static_cast<std::size_t>(g.shape[a]);
  double mass = 0.0, moment = 0.0;
  for (std::size_t idx = 0; idx < g.values.size(); ++idx) {
    const int i0 = static_cast<int>(idx / stride);
    mass += g.values[idx];
    moment += g.center(0, i0) * g.values[idx];
  }
  return mass > 0.0 ? moment / mass : 0.0;
}

}  // namespace

double unconditional_axis0_mean(const Density& f) {
  if (const auto* s = dynamic_cast<const SmoothedDensity*>(&f))
    return lattice_axis0_mean(s->lattice());
  if (const auto* h = dynamic_cast<const HistogramDensity*>(&f)) {
    Lattice g;
    g.box = h->support();
    g.shape = h->shape();
    g.values = h->cell_mass();
    return lattice_axis0_mean(g);
  }
  switch (f.dims()) {
    case 1: return mean_along_axis0(f, 4096);
    case 2: return mean_along_axis0(f, 256);
    case 3: return mean_along_axis0(f, 48);
    default: return mean_along_axis0(f, 24);
  }
}

}  // namespace uwb
