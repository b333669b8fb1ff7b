#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace uwb {

/// Sectioned key = value configuration. '#' starts a comment. Typed getters
/// record which keys were read so a command can reject unknown keys in the
/// sections it owns.
class Config {
 public:
  Config() = default;

  static Config parse_file(const std::filesystem::path& path);
  static Config parse_string(const std::string& text,
                             const std::string& name = "<config>");

  bool has(const std::string& section, const std::string& key) const;
  void set(const std::string& section, const std::string& key,
           const std::string& value);

  std::string get_string(const std::string& section, const std::string& key,
                         const std::string& def) const;
  double get_double(const std::string& section, const std::string& key,
                    double def) const;
  int get_int(const std::string& section, const std::string& key, int def) const;
  std::uint64_t get_u64(const std::string& section, const std::string& key,
                        std::uint64_t def) const;
  bool get_bool(const std::string& section, const std::string& key,
                bool def) const;
  std::vector<double> get_double_list(const std::string& section,
                                      const std::string& key,
                                      const std::vector<double>& def) const;
  std::vector<std::string> get_string_list(
      const std::string& section, const std::string& key,
      const std::vector<std::string>& def) const;

  /// Throws ConfigError if the section holds keys nothing ever read.
  void check_consumed(const std::string& section) const;

  const std::map<std::string, std::map<std::string, std::string>>& sections()
      const {
    return sections_;
  }

 private:
  std::string fetch(const std::string& section, const std::string& key) const;

  std::map<std::string, std::map<std::string, std::string>> sections_;
  mutable std::set<std::pair<std::string, std::string>> consumed_;
  std::string name_ = "<config>";
};

}  // namespace uwb
