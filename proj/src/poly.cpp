#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "uwb/density.hpp"
#include "uwb/errors.hpp"

namespace uwb {

namespace {

std::vector<std::array<std::uint8_t, 4>> exponent_tuples(int dims, int degree) {
  std::vector<std::array<std::uint8_t, 4>> out;
  std::array<std::uint8_t, 4> cur{};
  // Lexicographic enumeration of total degree <= degree.
  std::function<void(int, int)> rec = [&](int axis, int left) {
    if (axis == dims) {
      out.push_back(cur);
      return;
    }
    for (int p = 0; p <= left; ++p) {
      cur[axis] = static_cast<std::uint8_t>(p);
      rec(axis + 1, left - p);
    }
    cur[axis] = 0;
  };
  rec(0, degree);
  return out;
}

// Evaluates the dense coefficient hypercube on a tensor grid by contracting
// one axis at a time against its Vandermonde matrix. Much cheaper than
// per-point evaluation when normalizing in four dimensions.
std::vector<double> poly_on_grid(const std::vector<double>& dense, int dims,
                                 int degree,
                                 const std::vector<std::vector<double>>& u) {
  const int nc = degree + 1;
  std::vector<double> cur = dense;
  std::size_t lead = 1;
  for (int a = 0; a < dims - 1; ++a) lead *= static_cast<std::size_t>(nc);
  std::size_t trail = 1;
  for (int a = dims - 1; a >= 0; --a) {
    const std::vector<double>& ua = u[a];
    const std::size_t n = ua.size();
    std::vector<double> vand(n * static_cast<std::size_t>(nc));
    for (std::size_t j = 0; j < n; ++j) {
      double pw = 1.0;
      for (int p = 0; p < nc; ++p) {
        vand[j * nc + p] = pw;
        pw *= ua[j];
      }
    }
    std::vector<double> next(lead * n * trail);
    for (std::size_t q = 0; q < lead; ++q) {
      const double* src = cur.data() + q * static_cast<std::size_t>(nc) * trail;
      double* dst = next.data() + q * n * trail;
      for (std::size_t j = 0; j < n; ++j) {
        const double* v = vand.data() + j * nc;
        double* row = dst + j * trail;
        std::fill(row, row + trail, 0.0);
        for (int p = 0; p < nc; ++p) {
          const double w = v[p];
          if (w == 0.0) continue;
          const double* s = src + static_cast<std::size_t>(p) * trail;
          for (std::size_t t = 0; t < trail; ++t) row[t] += w * s[t];
        }
      }
    }
    cur = std::move(next);
    trail *= n;
    if (a > 0) lead /= static_cast<std::size_t>(nc);
  }
  return cur;
}

int norm_points_per_axis(int dims) {
  switch (dims) {
    case 1: return 4096;
    case 2: return 512;
    case 3: return 96;
    default: return 48;
  }
}

}  // namespace

PolyDensity::PolyDensity(Box box, int degree, std::vector<Term> terms,
                         double norm, double fit_rmse,
                         double fit_rmse_normalized)
    : box_(std::move(box)),
      degree_(degree),
      terms_(std::move(terms)),
      norm_(norm),
      fit_rmse_(fit_rmse),
      fit_rmse_normalized_(fit_rmse_normalized) {
  for (int a = 0; a < box_.dims(); ++a) {
    mid_[a] = 0.5 * (box_.lo[a] + box_.hi[a]);
    half_[a] = 0.5 * (box_.hi[a] - box_.lo[a]);
  }
}

double PolyDensity::raw(std::span<const double> point) const {
  const int d = box_.dims();
  double pw[4][16];
  for (int a = 0; a < d; ++a) {
    const double z = (point[a] - mid_[a]) / half_[a];
    pw[a][0] = 1.0;
    for (int p = 1; p <= degree_; ++p) pw[a][p] = pw[a][p - 1] * z;
  }
  double acc = 0.0;
  for (const Term& t : terms_) {
    double m = t.coef;
    for (int a = 0; a < d; ++a) m *= pw[a][t.powers[a]];
    acc += m;
  }
  return acc;
}

double PolyDensity::eval(std::span<const double> point) const {
  if (!box_.contains(point)) return 0.0;
  return std::max(0.0, raw(point)) / norm_;
}

PolyDensity PolyDensity::fit(const Lattice& values, int degree) {
  const int d = values.dims();
  if (d < 1 || d > 4) throw ConfigError("fit_poly: rank must be 1..4");
  if (degree < 0 || degree > 15) throw ConfigError("fit_poly: bad degree");

  const auto exps = exponent_tuples(d, degree);
  const std::size_t ncoef = exps.size();
  const std::size_t cells = values.cell_count();
  if (cells < ncoef)
    throw FitError("fit_poly: fewer cells than coefficients; lower the degree "
                   "or the dimensionality");

  Eigen::MatrixXd design(cells, ncoef);
  Eigen::VectorXd target(cells);
  std::vector<int> mi(d, 0);
  std::vector<double> upow(static_cast<std::size_t>(d) * (degree + 1));
  for (std::size_t r = 0; r < cells; ++r) {
    for (int a = 0; a < d; ++a) {
      const double mid = 0.5 * (values.box.lo[a] + values.box.hi[a]);
      const double half = 0.5 * (values.box.hi[a] - values.box.lo[a]);
      const double z = (values.center(a, mi[a]) - mid) / half;
      double* pw = upow.data() + static_cast<std::size_t>(a) * (degree + 1);
      pw[0] = 1.0;
      for (int p = 1; p <= degree; ++p) pw[p] = pw[p - 1] * z;
    }
    for (std::size_t c = 0; c < ncoef; ++c) {
      double m = 1.0;
      for (int a = 0; a < d; ++a)
        m *= upow[static_cast<std::size_t>(a) * (degree + 1) + exps[c][a]];
      design(r, c) = m;
    }
    target(r) = values.values[r];
    for (int a = d - 1; a >= 0; --a) {
      if (++mi[a] < values.shape[a]) break;
      mi[a] = 0;
    }
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < static_cast<Eigen::Index>(ncoef))
    throw FitError("fit_poly: rank-deficient design; lower the degree or the "
                   "dimensionality");
  Eigen::VectorXd coef = qr.solve(target);

  const double rmse = std::sqrt((design * coef - target).squaredNorm() /
                                static_cast<double>(cells));
  const double peak = target.cwiseAbs().maxCoeff();
  if (!(peak > 0.0)) throw FitError("fit_poly: all-zero target");

  std::vector<Term> terms(ncoef);
  for (std::size_t c = 0; c < ncoef; ++c)
    terms[c] = Term{exps[c], coef(c)};

  // Normalize the clamped polynomial with a midpoint rule over the box.
  std::vector<double> dense(
      static_cast<std::size_t>(std::pow(degree + 1, d)), 0.0);
  for (const Term& t : terms) {
    std::size_t idx = 0;
    for (int a = 0; a < d; ++a)
      idx = idx * static_cast<std::size_t>(degree + 1) + t.powers[a];
    dense[idx] = t.coef;
  }
  const int npts = norm_points_per_axis(d);
  std::vector<std::vector<double>> u(d);
  double cellvol = 1.0;
  for (int a = 0; a < d; ++a) {
    u[a].resize(npts);
    for (int j = 0; j < npts; ++j) u[a][j] = -1.0 + (j + 0.5) * 2.0 / npts;
    cellvol *= (values.box.hi[a] - values.box.lo[a]) / npts;
  }
  const std::vector<double> grid = poly_on_grid(dense, d, degree, u);
  double z = 0.0;
  for (double v : grid) z += std::max(0.0, v);
  z *= cellvol;
  if (!(z > 0.0)) throw FitError("fit_poly: fitted polynomial has no mass");

  return PolyDensity(values.box, degree, std::move(terms), z, rmse, rmse / peak);
}

PolyDensity fit_poly(const HistogramDensity& h, int degree) {
  return PolyDensity::fit(h.value_lattice(), degree);
}

PolyDensity fit_poly(const SmoothedDensity& d, int degree) {
  return PolyDensity::fit(d.lattice(), degree);
}

}  // namespace uwb
