#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numeric>

#include "uwb/density.hpp"
#include "uwb/errors.hpp"
#include "uwb/model.hpp"
#include "uwb/rng.hpp"

using namespace uwb;

namespace {

double gauss(double x, double mu = 0.0, double sigma = 1.0) {
  const double z = (x - mu) / sigma;
  return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * M_PI));
}

// Histogram whose cell masses follow the standard normal over [-4, 4].
HistogramDensity discretized_gaussian(int bins) {
  Box box;
  box.lo = {-4.0};
  box.hi = {4.0};
  const double w = 8.0 / bins;
  std::vector<double> mass(bins);
  double total = 0.0;
  for (int i = 0; i < bins; ++i) {
    const double a = -4.0 + i * w, b = a + w;
    mass[i] = 0.5 * (std::erf(b / std::sqrt(2.0)) - std::erf(a / std::sqrt(2.0)));
    total += mass[i];
  }
  for (double& m : mass) m /= total;
  return HistogramDensity(std::move(box), {bins}, std::move(mass));
}

}  // namespace

TEST_CASE("histogram fit: all samples in one cell") {
  std::vector<std::vector<double>> samples(50, {0.25, 0.25});
  const HistogramDensity h = HistogramDensity::fit(samples, {4, 4});
  double total = 0.0, top = 0.0;
  for (double m : h.cell_mass()) {
    total += m;
    top = std::max(top, m);
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(top == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("histogram fit: uniform law of large numbers") {
  Rng rng = make_stream(31, 0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::vector<double>> samples(1000000);
  for (auto& s : samples) s = {u(rng), u(rng)};
  const HistogramDensity h = HistogramDensity::fit(samples, {10, 10});
  for (double m : h.cell_mass()) CHECK(m == doctest::Approx(0.01).epsilon(0.2));
  const double total =
      std::accumulate(h.cell_mass().begin(), h.cell_mass().end(), 0.0);
  CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("histogram eval: mass over cell volume inside, zero outside") {
  std::vector<std::vector<double>> samples;
  Rng rng = make_stream(32, 0);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for (int i = 0; i < 400; ++i) samples.push_back({u(rng), u(rng)});
  const HistogramDensity h = HistogramDensity::fit(samples, {5, 5});

  const double w0 = h.bin_width(0), w1 = h.bin_width(1);
  const double c0 = h.center(0, 2), c1 = h.center(1, 3);
  const double expect = h.cell_mass()[2 * 5 + 3] / (w0 * w1);
  CHECK(h.eval(std::vector<double>{c0, c1}) == doctest::Approx(expect).epsilon(1e-12));
  CHECK(h.eval(std::vector<double>{-1.0, c1}) == 0.0);
  CHECK(h.eval(std::vector<double>{c0, 99.0}) == 0.0);
}

TEST_CASE("histogram rejects bad input") {
  CHECK_THROWS_AS(HistogramDensity::fit({}, {4}), DomainError);
  CHECK_THROWS_AS(HistogramDensity::fit({{1.0}}, {1}), ConfigError);
  CHECK_THROWS_AS(HistogramDensity::fit({{1.0, 2.0}}, {4}), ConfigError);
}

TEST_CASE("smoothing a discretized Gaussian stays near the true pdf") {
  const HistogramDensity h = discretized_gaussian(25);
  const SmoothedDensity s = smooth(h, 8);
  const Lattice& g = s.lattice();
  double linf = 0.0;
  for (int i = 0; i < g.shape[0]; ++i) {
    const double x = g.center(0, i);
    linf = std::max(linf, std::fabs(s.eval(std::vector<double>{x}) - gauss(x)));
  }
  CHECK(linf < 0.05 * gauss(0.0));
  CHECK(integrate(s, 400) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("smoothing keeps single-cell histograms normalized and non-negative") {
  Box box;
  box.lo = {0.0};
  box.hi = {5.0};
  std::vector<double> mass(5, 0.0);
  mass[2] = 1.0;
  const HistogramDensity h(std::move(box), {5}, std::move(mass));
  const SmoothedDensity s = smooth(h, 4);
  for (double v : s.lattice().values) CHECK(v >= 0.0);
  CHECK(integrate(s, 200) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("smoothing preserves mirror symmetry") {
  Box box;
  box.lo = {-1.0};
  box.hi = {1.0};
  std::vector<double> mass = {0.05, 0.1, 0.2, 0.3, 0.3, 0.2, 0.1, 0.05};
  const double total = std::accumulate(mass.begin(), mass.end(), 0.0);
  for (double& m : mass) m /= total;
  const HistogramDensity h(std::move(box), {8}, std::move(mass));
  const SmoothedDensity s = smooth(h, 5);
  const auto& v = s.lattice().values;
  for (std::size_t i = 0; i < v.size() / 2; ++i)
    CHECK(v[i] == doctest::Approx(v[v.size() - 1 - i]).epsilon(1e-9));
}

TEST_CASE("smoothing preserves the dominant mode within one refined cell") {
  const HistogramDensity h = discretized_gaussian(25);
  const SmoothedDensity s = smooth(h, 8);
  const Lattice& g = s.lattice();
  int best = 0;
  for (int i = 0; i < g.shape[0]; ++i)
    if (g.values[i] > g.values[best]) best = i;
  CHECK(std::fabs(g.center(0, best)) <= g.cell_width(0) + 1e-12);
}

TEST_CASE("smooth rejects bad settings") {
  const HistogramDensity h = discretized_gaussian(10);
  CHECK_THROWS_AS(smooth(h, 1), ConfigError);
  CHECK_THROWS_AS(smooth(h, 4, 2.0), ConfigError);  // window beyond lattice
}

TEST_CASE("polynomial fit reproduces a polynomial histogram") {
  Box box;
  box.lo = {0.0, 0.0};
  box.hi = {1.0, 1.0};
  Lattice g;
  g.box = box;
  g.shape = {12, 12};
  g.values.resize(144);
  for (int i = 0; i < 12; ++i) {
    for (int j = 0; j < 12; ++j) {
      const double x = g.center(0, i), y = g.center(1, j);
      g.values[i * 12 + j] = 1.0 + 2.0 * x - y + 0.5 * x * y + x * x;
    }
  }
  const PolyDensity p = PolyDensity::fit(g, 2);
  CHECK(p.fit_rmse_normalized() < 1e-10);

  // Raw polynomial values agree with the source at cell centers.
  const double v = p.raw(std::vector<double>{g.center(0, 3), g.center(1, 7)});
  CHECK(v == doctest::Approx(g.values[3 * 12 + 7]).epsilon(1e-9));
}

TEST_CASE("polynomial fit of a constant surface is the constant") {
  Box box;
  box.lo = {0.0};
  box.hi = {2.0};
  Lattice g;
  g.box = box;
  g.shape = {16};
  g.values.assign(16, 0.5);
  const PolyDensity p = PolyDensity::fit(g, 8);
  double c0 = 0.0, rest = 0.0;
  for (const auto& t : p.terms()) {
    if (t.powers[0] == 0)
      c0 = t.coef;
    else
      rest = std::max(rest, std::fabs(t.coef));
  }
  CHECK(c0 == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(rest < 1e-9);
  CHECK(integrate(p, 1000) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("polynomial fit detects under-determined designs") {
  Lattice g;
  g.box.lo = {0.0, 0.0};
  g.box.hi = {1.0, 1.0};
  g.shape = {4, 4};
  g.values.assign(16, 1.0);
  CHECK_THROWS_AS(PolyDensity::fit(g, 8), FitError);
}

TEST_CASE("mixture evaluates the convex combination") {
  auto f = std::make_shared<HistogramDensity>(discretized_gaussian(16));
  Box box;
  box.lo = {-2.0};
  box.hi = {6.0};
  std::vector<double> mass(8, 0.125);
  auto gshift = std::make_shared<HistogramDensity>(HistogramDensity(
      std::move(box), {8}, std::move(mass)));

  const std::vector<double> pt{0.5};
  const double fl = f->eval(pt), fn = gshift->eval(pt);

  CHECK(mix(f, gshift, 1.0).eval(pt) == doctest::Approx(fl).epsilon(1e-12));
  CHECK(mix(f, gshift, 0.0).eval(pt) == doctest::Approx(fn).epsilon(1e-12));
  CHECK(mix(f, gshift, 0.5).eval(pt) ==
        doctest::Approx(0.5 * (fl + fn)).epsilon(1e-12));

  // mix(f, f, p) behaves as f for any p.
  for (double p : {0.0, 0.3, 0.7, 1.0})
    CHECK(mix(f, f, p).eval(pt) == doctest::Approx(fl).epsilon(1e-12));
}

TEST_CASE("mixture rejects mismatched ranks and bad weights") {
  auto a = std::make_shared<HistogramDensity>(discretized_gaussian(8));
  Box box;
  box.lo = {0.0, 0.0};
  box.hi = {1.0, 1.0};
  std::vector<double> mass(16, 1.0 / 16);
  auto b = std::make_shared<HistogramDensity>(
      HistogramDensity(std::move(box), {4, 4}, std::move(mass)));
  CHECK_THROWS_AS(mix(a, b, 0.5), DomainError);
  CHECK_THROWS_AS(mix(a, a, 1.5), ConfigError);
}

TEST_CASE("LOS conditional density factorizes") {
  auto feat = std::make_shared<HistogramDensity>(discretized_gaussian(16));
  const LosConditionalDensity d(2e-10, feat);
  CHECK(d.dims() == 2);
  const std::vector<double> pt{1e-10, 0.5};
  const double expect =
      gauss(1e-10, 0.0, 2e-10) * feat->eval(std::vector<double>{0.5});
  CHECK(d.eval(pt) == doctest::Approx(expect).epsilon(1e-12));
  CHECK(d.marginal_over_axis0(std::vector<double>{0.5}) ==
        doctest::Approx(feat->eval(std::vector<double>{0.5})).epsilon(1e-12));
  CHECK(d.mean_of_axis0(std::vector<double>{0.5}) == 0.0);
  // Far outside the truncated bias range.
  CHECK(d.eval(std::vector<double>{1.0, 0.5}) == 0.0);
}

TEST_CASE("axis-0 slice statistics match hand sums") {
  Box box;
  box.lo = {0.0, 0.0};
  box.hi = {4.0, 2.0};
  // shape 4 x 2, mass laid out axis-0 major
  std::vector<double> mass = {0.10, 0.00, 0.20, 0.10,
                              0.05, 0.15, 0.25, 0.15};
  const HistogramDensity h(std::move(box), {4, 2}, std::move(mass));

  // Column at second feature cell (centers 0.5, 1.5 on axis 1).
  const std::vector<double> rest{1.5};
  // density = mass / (1.0 * 1.0); integral over axis 0 = sum(mass_col) / w1
  const double marg = h.marginal_over_axis0(rest);
  CHECK(marg == doctest::Approx((0.0 + 0.1 + 0.15 + 0.15) / 1.0).epsilon(1e-12));
  const double mean = h.mean_of_axis0(rest);
  const double want =
      (0.5 * 0.0 + 1.5 * 0.1 + 2.5 * 0.15 + 3.5 * 0.15) / (0.1 + 0.15 + 0.15);
  CHECK(mean == doctest::Approx(want).epsilon(1e-12));
  CHECK(h.mode_of_axis0(rest) == doctest::Approx(2.5).epsilon(1e-12));
  // Outside the feature box the slice is empty.
  CHECK(h.marginal_over_axis0(std::vector<double>{5.0}) == 0.0);

  // mass below a cut on axis 0: first row fully below, second row halved
  CHECK(h.mass_below(0, 1.5) ==
        doctest::Approx(0.10 + 0.00 + 0.5 * (0.20 + 0.10)).epsilon(1e-12));

  // marginal over axis 0 only keeps axis 1
  const HistogramDensity m = h.marginal({1});
  CHECK(m.dims() == 1);
  CHECK(m.cell_mass()[0] == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(m.cell_mass()[1] == doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("model save/load round trip preserves evaluation") {
  Rng rng = make_stream(33, 0);
  SynthParams sp;
  sp.sample_rate = 2e9;
  sp.duration = 60e-9;
  std::uniform_real_distribution<double> dist(1.0, 4.0);
  std::vector<LinkObservation> los, nlos;
  for (int i = 0; i < 150; ++i) {
    los.push_back(synth_link(dist(rng), ChannelState::kLos, sp, rng));
    nlos.push_back(synth_link(dist(rng), ChannelState::kNlos, sp, rng));
  }

  FitOptions opt;
  opt.bins_2d = 12;
  opt.refine_2d = 4;
  opt.poly_degree = 4;

  const auto path = std::filesystem::temp_directory_path() / "uwbloc_model_rt";
  for (DensityKind kind :
       {DensityKind::kHist, DensityKind::kSmooth, DensityKind::kPoly}) {
    const ModelSet m = fit_model(los, nlos, kind, 2,
                                 Parameterization::kDistanceDependent, opt);
    save_model(m, path);
    const ModelSet back = load_model(path);
    CHECK(back.kind == m.kind);
    CHECK(back.bias_sigma == m.bias_sigma);
    CHECK(back.di.peak_slope == m.di.peak_slope);

    const Box& box = m.nlos_joint->support();
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 50; ++t) {
      std::vector<double> pt(2);
      for (int a = 0; a < 2; ++a)
        pt[a] = box.lo[a] + u(rng) * (box.hi[a] - box.lo[a]);
      CHECK(back.nlos_joint->eval(pt) == m.nlos_joint->eval(pt));
    }
    const Box& fbox = m.los_features->support();
    for (int t = 0; t < 50; ++t) {
      std::vector<double> pt(1);
      pt[0] = fbox.lo[0] + u(rng) * (fbox.hi[0] - fbox.lo[0]);
      CHECK(back.los_features->eval(pt) == m.los_features->eval(pt));
    }
  }
  std::filesystem::remove(path);
}

TEST_CASE("model loader rejects corrupted files") {
  const auto path = std::filesystem::temp_directory_path() / "uwbloc_model_bad";
  {
    std::ofstream out(path);
    out << "uwbloc-model 1\nparam dd\nkind smooth\nfeature_dims 1\n";
    out << "bias_sigma nope\n";
  }
  CHECK_THROWS_AS(load_model(path), Error);
  std::filesystem::remove(path);
}

TEST_CASE("optional bias-axis blur keeps densities valid") {
  const HistogramDensity h = discretized_gaussian(20);
  const SmoothedDensity s = smooth(h, 4);
  const SmoothedDensity b = blur_axis0(s, 0.3);
  for (double v : b.lattice().values) CHECK(v >= 0.0);
  CHECK(integrate(b, 400) == doctest::Approx(1.0).epsilon(1e-9));
}
