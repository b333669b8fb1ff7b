#include "uwb/dataset.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "uwb/errors.hpp"
#include "uwb/textio.hpp"

namespace uwb {

namespace {

constexpr const char* kHeader =
    "id,state,d_m,b_s,toa_s,sample_rate_hz,t_start_s,n_samples,samples_hex";

constexpr char kHexDigits[] = "0123456789abcdef";

void append_sample_hex(std::string& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int shift = 60; shift >= 0; shift -= 4)
    out.push_back(kHexDigits[(bits >> shift) & 0xF]);
}

double parse_sample_hex(std::string_view hex, const std::string& where) {
  return std::bit_cast<double>(parse_u64(hex, where, 16));
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

}  // namespace

void write_dataset(const std::vector<LinkObservation>& obs,
                   const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  out << kHeader << '\n';
  std::string line;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const LinkObservation& o = obs[i];
    line.clear();
    line += std::to_string(i);
    line += ',';
    line += to_string(o.state);
    line += ',';
    line += format_double(o.true_distance);
    line += ',';
    line += format_double(o.true_bias);
    line += ',';
    line += format_double(o.toa_est);
    line += ',';
    line += format_double(o.waveform.sample_rate);
    line += ',';
    line += format_double(o.waveform.t_start);
    line += ',';
    line += std::to_string(o.waveform.samples.size());
    line += ',';
    line.reserve(line.size() + 16 * o.waveform.samples.size());
    for (double s : o.waveform.samples) append_sample_hex(line, s);
    out << line << '\n';
  }
  if (!out) throw DataError("write failed for '" + path.string() + "'");
}

std::vector<LinkObservation> read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");

  std::string line;
  if (!std::getline(in, line))
    throw DataError(path.string() + ":1: missing header");
  if (line == std::string(kHeader) + "\r") line.pop_back();
  if (line != kHeader)
    throw DataError(path.string() + ":1: unexpected header '" + line + "'");

  std::vector<LinkObservation> obs;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(lineno);
    const auto cols = split(line, ',');
    if (cols.size() != 9)
      throw DataError(where + ": expected 9 columns, got " +
                      std::to_string(cols.size()));

    LinkObservation o;
    o.state = channel_state_from_string(std::string(cols[1]));
    o.true_distance = parse_double(cols[2], where);
    o.true_bias = parse_double(cols[3], where);
    o.toa_est = parse_double(cols[4], where);
    o.waveform.sample_rate = parse_double(cols[5], where);
    o.waveform.t_start = parse_double(cols[6], where);
    const std::uint64_t n = parse_u64(cols[7], where);
    if (cols[8].size() != 16 * n)
      throw DataError(where + ": sample payload length mismatch");
    o.waveform.samples.resize(n);
    for (std::uint64_t k = 0; k < n; ++k)
      o.waveform.samples[k] = parse_sample_hex(cols[8].substr(16 * k, 16), where);
    obs.push_back(std::move(o));
  }
  return obs;
}

}  // namespace uwb
