#include "uwb/model.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "uwb/errors.hpp"
#include "uwb/textio.hpp"

namespace uwb {

const char* to_string(DensityKind k) {
  switch (k) {
    case DensityKind::kHist: return "hist";
    case DensityKind::kSmooth: return "smooth";
    default: return "poly";
  }
}

const char* to_string(Parameterization p) {
  return p == Parameterization::kDistanceDependent ? "dd" : "di";
}

DensityKind density_kind_from_string(const std::string& s) {
  if (s == "hist") return DensityKind::kHist;
  if (s == "smooth") return DensityKind::kSmooth;
  if (s == "poly") return DensityKind::kPoly;
  throw ConfigError("unknown density kind '" + s + "'");
}

Parameterization parameterization_from_string(const std::string& s) {
  if (s == "dd") return Parameterization::kDistanceDependent;
  if (s == "di") return Parameterization::kDistanceIndependent;
  throw ConfigError("unknown parameterization '" + s + "'");
}

std::string model_file_name(DensityKind kind, int joint_dims,
                            Parameterization param) {
  return std::string(to_string(kind)) + "-" + std::to_string(joint_dims) +
         "d-" + to_string(param) + ".model";
}

namespace {

std::vector<double> feature_point(const FeatureVector& f, double distance,
                                  Parameterization param,
                                  const DIModelParams& di, int feature_dims) {
  if (param == Parameterization::kDistanceDependent) {
    if (feature_dims == 1) return {f.delay_spread};
    return {f.peak_amplitude, f.mean_excess_delay, f.delay_spread};
  }
  const DIFeatureVector g = to_distance_independent(f, distance, di);
  if (feature_dims == 1) return {g.delay_spread_per_m};
  return {g.peak_at_origin, g.excess_delay_per_m, g.delay_spread_per_m};
}

// has_bias_axis: axis 0 is the NLOS bias; it gets one pad bin below (the
// null region allows no more) and the ranging-noise blur. Feature axes get
// symmetric padding; feature_blur (LOS side) regularizes them so the
// density keeps thin tails where near-threshold links can land.
std::shared_ptr<const Density> build_density(
    const std::vector<std::vector<double>>& points, int dims,
    DensityKind kind, const FitOptions& opt, bool has_bias_axis,
    double bias_blur_sigma, bool feature_blur) {
  const int bins = dims >= 3 ? opt.bins_4d : opt.bins_2d;
  if (kind == DensityKind::kHist) {
    return std::make_shared<HistogramDensity>(
        HistogramDensity::fit(points, std::vector<int>(dims, bins)));
  }

  std::vector<int> pad_lo(dims, opt.pad_bins), pad_hi(dims, opt.pad_bins);
  if (has_bias_axis) pad_lo[0] = std::min(1, opt.pad_bins);
  const HistogramDensity hist = HistogramDensity::fit(
      points, std::vector<int>(dims, bins), pad_lo, pad_hi);

  auto apply_blurs = [&](Lattice g) {
    if (has_bias_axis && bias_blur_sigma > 0.0)
      g = gaussian_blur_axis(g, 0, bias_blur_sigma);
    if (feature_blur && opt.feature_blur_bins > 0.0) {
      for (int a = has_bias_axis ? 1 : 0; a < dims; ++a)
        g = gaussian_blur_axis(g, a,
                               opt.feature_blur_bins * hist.bin_width(a));
    }
    return g;
  };

  if (kind == DensityKind::kSmooth) {
    const int refine = dims >= 3 ? opt.refine_4d : opt.refine_2d;
    const SmoothedDensity s = smooth(hist, refine, opt.window_fraction);
    Lattice g = apply_blurs(s.lattice());
    for (double& v : g.values) v = std::max(0.0, v);
    double total = 0.0;
    for (double v : g.values) total += v;
    total *= g.cell_volume();
    for (double& v : g.values) v /= total;
    return std::make_shared<SmoothedDensity>(std::move(g));
  }

  Lattice values = apply_blurs(hist.value_lattice());
  return std::make_shared<PolyDensity>(
      PolyDensity::fit(values, opt.poly_degree));
}

}  // namespace

ModelSet fit_model(const std::vector<LinkObservation>& los,
                   const std::vector<LinkObservation>& nlos,
                   DensityKind kind, int joint_dims, Parameterization param,
                   const FitOptions& opt) {
  if (joint_dims != 2 && joint_dims != 4)
    throw ConfigError("fit_model: joint_dims must be 2 or 4");
  if (los.empty()) throw DataError("fit_model: empty LOS pool");
  if (nlos.empty()) throw DataError("fit_model: empty NLOS pool");

  ModelSet m;
  m.param = param;
  m.kind = kind;
  m.feature_dims = joint_dims - 1;

  std::vector<LinkObservation> all = los;
  all.insert(all.end(), nlos.begin(), nlos.end());
  m.di = fit_di_model(all);

  // Ranging noise of LOS links, pooled over distances.
  double acc = 0.0;
  for (const LinkObservation& o : los) {
    const double r = o.toa_est - o.true_distance / kSpeedOfLight;
    acc += r * r;
  }
  m.bias_sigma = std::sqrt(acc / static_cast<double>(los.size()));
  if (!(m.bias_sigma > 0.0))
    m.bias_sigma = 1e-12;  // noise-free pools still need a finite width

  std::vector<std::vector<double>> los_pts, nlos_pts;
  los_pts.reserve(los.size());
  for (const LinkObservation& o : los) {
    const FeatureVector f = extract_features(o.waveform, o.toa_est);
    los_pts.push_back(
        feature_point(f, o.true_distance, param, m.di, m.feature_dims));
  }
  nlos_pts.reserve(nlos.size());
  for (const LinkObservation& o : nlos) {
    const FeatureVector f = extract_features(o.waveform, o.toa_est);
    std::vector<double> p{o.true_bias};
    const std::vector<double> feat =
        feature_point(f, o.true_distance, param, m.di, m.feature_dims);
    p.insert(p.end(), feat.begin(), feat.end());
    nlos_pts.push_back(std::move(p));
  }

  // The ranging-noise convolution along the bias axis is approximated by a
  // Gaussian blur of the NLOS joint; by default its width is the noise
  // level measured on the LOS residuals.
  const double blur =
      opt.bias_blur_sigma < 0.0 ? m.bias_sigma : opt.bias_blur_sigma;
  m.los_features =
      build_density(los_pts, m.feature_dims, kind, opt, false, 0.0, true);
  m.nlos_joint =
      build_density(nlos_pts, joint_dims, kind, opt, true, blur, false);
  return m;
}

std::shared_ptr<const Density> make_los_joint(const ModelSet& m) {
  return std::make_shared<LosConditionalDensity>(m.bias_sigma, m.los_features);
}

std::shared_ptr<const MixtureDensity> make_mixture(const ModelSet& m,
                                                   double p_los) {
  return std::make_shared<MixtureDensity>(make_los_joint(m), m.nlos_joint,
                                          p_los);
}

// ---------------------------------------------------------------------------
// Model files: line-oriented text, lossless doubles.

namespace {

void write_density(std::ostream& out, const char* label, const Density& d) {
  out << "begin-density " << label << '\n';
  if (const auto* h = dynamic_cast<const HistogramDensity*>(&d)) {
    out << "type hist\n";
    out << "dims " << h->dims() << '\n';
    for (int a = 0; a < h->dims(); ++a)
      out << "axis " << format_double(h->support().lo[a]) << ' '
          << format_double(h->support().hi[a]) << ' ' << h->shape()[a] << '\n';
    out << "values " << h->cell_mass().size() << '\n';
    int col = 0;
    for (double v : h->cell_mass()) {
      out << format_double(v) << (++col % 8 == 0 ? '\n' : ' ');
    }
    if (col % 8 != 0) out << '\n';
  } else if (const auto* s = dynamic_cast<const SmoothedDensity*>(&d)) {
    out << "type smooth\n";
    out << "dims " << s->dims() << '\n';
    const Lattice& g = s->lattice();
    for (int a = 0; a < s->dims(); ++a)
      out << "axis " << format_double(g.box.lo[a]) << ' '
          << format_double(g.box.hi[a]) << ' ' << g.shape[a] << '\n';
    out << "values " << g.values.size() << '\n';
    int col = 0;
    for (double v : g.values) {
      out << format_double(v) << (++col % 8 == 0 ? '\n' : ' ');
    }
    if (col % 8 != 0) out << '\n';
  } else if (const auto* p = dynamic_cast<const PolyDensity*>(&d)) {
    out << "type poly\n";
    out << "dims " << p->dims() << '\n';
    for (int a = 0; a < p->dims(); ++a)
      out << "axis " << format_double(p->support().lo[a]) << ' '
          << format_double(p->support().hi[a]) << '\n';
    out << "degree " << p->degree() << '\n';
    out << "norm " << format_double(p->norm()) << '\n';
    out << "rmse " << format_double(p->fit_rmse()) << ' '
        << format_double(p->fit_rmse_normalized()) << '\n';
    out << "terms " << p->terms().size() << '\n';
    for (const PolyDensity::Term& t : p->terms()) {
      for (int a = 0; a < p->dims(); ++a) out << int(t.powers[a]) << ' ';
      out << format_double(t.coef) << '\n';
    }
  } else {
    throw ConfigError("save_model: unsupported density type");
  }
  out << "end-density\n";
}

class LineReader {
 public:
  LineReader(std::istream& in, std::string name)
      : in_(in), name_(std::move(name)) {}

  std::string next() {
    std::string line;
    while (std::getline(in_, line)) {
      ++lineno_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) return line;
    }
    throw DataError(where() + ": unexpected end of file");
  }

  std::string where() const {
    return name_ + ":" + std::to_string(lineno_);
  }

 private:
  std::istream& in_;
  std::string name_;
  std::size_t lineno_ = 0;
};

std::vector<std::string> tokens(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream ss(line);
  std::string t;
  while (ss >> t) out.push_back(t);
  return out;
}

// Requires the line to start with `key`; returns the remaining tokens.
std::vector<std::string> expect(LineReader& r, const std::string& key) {
  auto tk = tokens(r.next());
  if (tk.empty() || tk[0] != key)
    throw DataError(r.where() + ": expected '" + key + "'");
  tk.erase(tk.begin());
  return tk;
}

std::shared_ptr<const Density> read_density(LineReader& r, const char* label) {
  auto head = expect(r, "begin-density");
  if (head.size() != 1 || head[0] != label)
    throw DataError(r.where() + ": expected density '" + label + "'");
  const std::string type = expect(r, "type").at(0);
  const int dims = static_cast<int>(parse_u64(expect(r, "dims").at(0), r.where()));
  if (dims < 1 || dims > 4) throw DataError(r.where() + ": bad dims");

  std::shared_ptr<const Density> result;
  if (type == "hist" || type == "smooth") {
    Box box;
    std::vector<int> shape;
    for (int a = 0; a < dims; ++a) {
      auto tk = expect(r, "axis");
      if (tk.size() != 3) throw DataError(r.where() + ": bad axis line");
      box.lo.push_back(parse_double(tk[0], r.where()));
      box.hi.push_back(parse_double(tk[1], r.where()));
      shape.push_back(static_cast<int>(parse_u64(tk[2], r.where())));
    }
    const std::size_t count = parse_u64(expect(r, "values").at(0), r.where());
    std::vector<double> values;
    values.reserve(count);
    while (values.size() < count) {
      for (const std::string& t : tokens(r.next()))
        values.push_back(parse_double(t, r.where()));
    }
    if (values.size() != count)
      throw DataError(r.where() + ": value count mismatch");
    if (type == "hist")
      result = std::make_shared<HistogramDensity>(std::move(box),
                                                  std::move(shape),
                                                  std::move(values));
    else {
      Lattice g;
      g.box = std::move(box);
      g.shape = std::move(shape);
      g.values = std::move(values);
      result = std::make_shared<SmoothedDensity>(std::move(g));
    }
  } else if (type == "poly") {
    Box box;
    for (int a = 0; a < dims; ++a) {
      auto tk = expect(r, "axis");
      if (tk.size() != 2) throw DataError(r.where() + ": bad axis line");
      box.lo.push_back(parse_double(tk[0], r.where()));
      box.hi.push_back(parse_double(tk[1], r.where()));
    }
    const int degree =
        static_cast<int>(parse_u64(expect(r, "degree").at(0), r.where()));
    const double norm = parse_double(expect(r, "norm").at(0), r.where());
    auto rm = expect(r, "rmse");
    if (rm.size() != 2) throw DataError(r.where() + ": bad rmse line");
    const double rmse = parse_double(rm[0], r.where());
    const double nrmse = parse_double(rm[1], r.where());
    const std::size_t nterms = parse_u64(expect(r, "terms").at(0), r.where());
    std::vector<PolyDensity::Term> terms(nterms);
    for (std::size_t i = 0; i < nterms; ++i) {
      auto tk = tokens(r.next());
      if (tk.size() != static_cast<std::size_t>(dims) + 1)
        throw DataError(r.where() + ": bad term line");
      for (int a = 0; a < dims; ++a)
        terms[i].powers[a] =
            static_cast<std::uint8_t>(parse_u64(tk[a], r.where()));
      terms[i].coef = parse_double(tk[dims], r.where());
    }
    result = std::make_shared<PolyDensity>(std::move(box), degree,
                                           std::move(terms), norm, rmse, nrmse);
  } else {
    throw DataError(r.where() + ": unknown density type '" + type + "'");
  }
  expect(r, "end-density");
  return result;
}

}  // namespace

void save_model(const ModelSet& m, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  out << "uwbloc-model 1\n";
  out << "param " << to_string(m.param) << '\n';
  out << "kind " << to_string(m.kind) << '\n';
  out << "feature_dims " << m.feature_dims << '\n';
  out << "bias_sigma " << format_double(m.bias_sigma) << '\n';
  out << "peak_slope " << format_double(m.di.peak_slope) << '\n';
  out << "delay_spread_floor " << format_double(m.di.delay_spread_floor) << '\n';
  write_density(out, "nlos", *m.nlos_joint);
  write_density(out, "los", *m.los_features);
  if (!out) throw DataError("write failed for '" + path.string() + "'");
}

ModelSet load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  LineReader r(in, path.string());
  auto magic = tokens(r.next());
  if (magic.size() != 2 || magic[0] != "uwbloc-model" || magic[1] != "1")
    throw DataError(path.string() + ":1: not a uwbloc model file");

  ModelSet m;
  m.param = parameterization_from_string(expect(r, "param").at(0));
  m.kind = density_kind_from_string(expect(r, "kind").at(0));
  m.feature_dims =
      static_cast<int>(parse_u64(expect(r, "feature_dims").at(0), r.where()));
  m.bias_sigma = parse_double(expect(r, "bias_sigma").at(0), r.where());
  m.di.peak_slope = parse_double(expect(r, "peak_slope").at(0), r.where());
  m.di.delay_spread_floor =
      parse_double(expect(r, "delay_spread_floor").at(0), r.where());
  m.nlos_joint = read_density(r, "nlos");
  m.los_features = read_density(r, "los");
  if (m.nlos_joint->dims() != m.feature_dims + 1 ||
      m.los_features->dims() != m.feature_dims)
    throw DataError(path.string() + ": density ranks disagree with feature_dims");
  return m;
}

}  // namespace uwb
