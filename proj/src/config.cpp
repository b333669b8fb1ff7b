#include "uwb/config.hpp"

#include <fstream>
#include <sstream>

#include "uwb/errors.hpp"
#include "uwb/textio.hpp"

namespace uwb {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream ss(s);
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  if (!out.empty() && out.back().empty()) out.pop_back();
  return out;
}

}  // namespace

Config Config::parse_string(const std::string& text, const std::string& name) {
  Config cfg;
  cfg.name_ = name;
  std::istringstream in(text);
  std::string line, section;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = name + ":" + std::to_string(lineno);
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError(where + ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) throw ConfigError(where + ": empty section name");
      cfg.sections_[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(where + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(where + ": empty key");
    if (section.empty())
      throw ConfigError(where + ": key outside of any [section]");
    cfg.sections_[section][key] = value;
  }
  return cfg;
}

Config Config::parse_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_string(ss.str(), path.string());
}

bool Config::has(const std::string& section, const std::string& key) const {
  const auto s = sections_.find(section);
  return s != sections_.end() && s->second.count(key) > 0;
}

void Config::set(const std::string& section, const std::string& key,
                 const std::string& value) {
  sections_[section][key] = value;
}

std::string Config::fetch(const std::string& section,
                          const std::string& key) const {
  consumed_.insert({section, key});
  return sections_.at(section).at(key);
}

std::string Config::get_string(const std::string& section,
                               const std::string& key,
                               const std::string& def) const {
  return has(section, key) ? fetch(section, key) : def;
}

double Config::get_double(const std::string& section, const std::string& key,
                          double def) const {
  if (!has(section, key)) return def;
  const std::string v = fetch(section, key);
  try {
    return parse_double(v, name_);
  } catch (const DataError&) {
    throw ConfigError(name_ + ": [" + section + "] " + key +
                      ": bad number '" + v + "'");
  }
}

int Config::get_int(const std::string& section, const std::string& key,
                    int def) const {
  const double v = get_double(section, key, static_cast<double>(def));
  const int i = static_cast<int>(v);
  if (static_cast<double>(i) != v)
    throw ConfigError(name_ + ": [" + section + "] " + key +
                      ": expected an integer");
  return i;
}

std::uint64_t Config::get_u64(const std::string& section,
                              const std::string& key, std::uint64_t def) const {
  if (!has(section, key)) return def;
  const std::string v = fetch(section, key);
  try {
    return parse_u64(v, name_);
  } catch (const DataError&) {
    throw ConfigError(name_ + ": [" + section + "] " + key +
                      ": bad integer '" + v + "'");
  }
}

bool Config::get_bool(const std::string& section, const std::string& key,
                      bool def) const {
  if (!has(section, key)) return def;
  const std::string v = fetch(section, key);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(name_ + ": [" + section + "] " + key +
                    ": expected a boolean, got '" + v + "'");
}

std::vector<double> Config::get_double_list(
    const std::string& section, const std::string& key,
    const std::vector<double>& def) const {
  if (!has(section, key)) return def;
  const std::string raw = fetch(section, key);
  std::vector<double> out;
  for (const std::string& item : split_list(raw)) {
    try {
      out.push_back(parse_double(item, name_));
    } catch (const DataError&) {
      throw ConfigError(name_ + ": [" + section + "] " + key +
                        ": bad number '" + item + "'");
    }
  }
  return out;
}

std::vector<std::string> Config::get_string_list(
    const std::string& section, const std::string& key,
    const std::vector<std::string>& def) const {
  if (!has(section, key)) return def;
  return split_list(fetch(section, key));
}

void Config::check_consumed(const std::string& section) const {
  const auto s = sections_.find(section);
  if (s == sections_.end()) return;
  for (const auto& [key, value] : s->second) {
    if (!consumed_.count({section, key}))
      throw ConfigError(name_ + ": unknown key '" + key + "' in [" + section +
                        "]");
  }
}

}  // namespace uwb
