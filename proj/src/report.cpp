#include "uwb/report.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>

#include "uwb/errors.hpp"
#include "uwb/textio.hpp"

namespace uwb {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::vector<std::vector<std::string>> read_csv(
    const std::filesystem::path& path, const std::string& expected_header,
    std::size_t columns) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line))
    throw DataError(path.string() + ":1: missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != expected_header)
    throw DataError(path.string() + ":1: unexpected header '" + line + "'");
  std::vector<std::vector<std::string>> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cols = split_csv(line);
    if (cols.size() != columns)
      throw DataError(path.string() + ":" + std::to_string(lineno) +
                      ": expected " + std::to_string(columns) + " columns");
    rows.push_back(std::move(cols));
  }
  return rows;
}

}  // namespace

std::vector<RmseRow> read_rmse_csv(const std::filesystem::path& path) {
  std::vector<RmseRow> out;
  for (const auto& cols :
       read_csv(path, "estimator,p_los,rmse_m,n_trials", 4)) {
    RmseRow r;
    r.estimator = cols[0];
    r.p_los = parse_double(cols[1], path.string());
    r.rmse_m = parse_double(cols[2], path.string());
    r.n_trials = static_cast<long>(parse_u64(cols[3], path.string()));
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<CdfRow> read_cdf_csv(const std::filesystem::path& path) {
  std::vector<CdfRow> out;
  for (const auto& cols :
       read_csv(path, "estimator,p_los,error_m,cum_prob", 4)) {
    CdfRow r;
    r.estimator = cols[0];
    r.p_los = parse_double(cols[1], path.string());
    r.error_m = parse_double(cols[2], path.string());
    r.cum_prob = parse_double(cols[3], path.string());
    out.push_back(std::move(r));
  }
  return out;
}

void write_rmse_plot(const std::vector<RmseRow>& rows,
                     const std::filesystem::path& path) {
  std::vector<std::string> estimators;
  std::set<double> p_values;
  std::map<std::pair<std::string, double>, double> cell;
  for (const RmseRow& r : rows) {
    if (std::find(estimators.begin(), estimators.end(), r.estimator) ==
        estimators.end())
      estimators.push_back(r.estimator);
    p_values.insert(r.p_los);
    cell[{r.estimator, r.p_los}] = r.rmse_m;
  }

  std::ofstream out(path);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  out << "# p_los";
  for (const std::string& e : estimators) out << ' ' << e;
  out << '\n';
  for (double p : p_values) {
    out << format_double(p);
    for (const std::string& e : estimators) {
      const auto it = cell.find({e, p});
      out << ' ' << (it == cell.end() ? "nan" : format_double(it->second));
    }
    out << '\n';
  }
  if (!out) throw DataError("write failed for '" + path.string() + "'");
}

std::vector<std::filesystem::path> write_cdf_plots(
    const std::vector<CdfRow>& rows, const std::filesystem::path& out_dir) {
  std::set<double> p_values;
  for (const CdfRow& r : rows) p_values.insert(r.p_los);

  std::vector<std::filesystem::path> written;
  for (double p : p_values) {
    std::vector<std::string> estimators;
    for (const CdfRow& r : rows) {
      if (r.p_los == p && std::find(estimators.begin(), estimators.end(),
                                    r.estimator) == estimators.end())
        estimators.push_back(r.estimator);
    }
    const std::filesystem::path path =
        out_dir / ("cdf_p" + format_double(p) + ".dat");
    std::ofstream out(path);
    if (!out)
      throw DataError("cannot open '" + path.string() + "' for writing");
    for (const std::string& e : estimators) {
      out << "# estimator=" << e << " p_los=" << format_double(p) << '\n';
      for (const CdfRow& r : rows) {
        if (r.p_los == p && r.estimator == e)
          out << format_double(r.error_m) << ' ' << format_double(r.cum_prob)
              << '\n';
      }
      out << '\n';
    }
    if (!out) throw DataError("write failed for '" + path.string() + "'");
    written.push_back(path);
  }
  return written;
}

}  // namespace uwb
