#pragma once

#include "dshrink/evaluation.hpp"
#include "dshrink/simulation.hpp"
#include "dshrink/theory.hpp"
#include "dshrink/types.hpp"

#include <string>
#include <vector>

namespace dshrink {

// Key-value config with [section] headers, '#' or ';' comment lines, and
// strict consumption tracking so unknown keys can be rejected with a line
// number.
class IniConfig {
 public:
  static IniConfig parse_file(const std::string& path);
  static IniConfig parse_string(const std::string& text,
                                const std::string& origin = "<config>");

  bool has(const std::string& section, const std::string& key) const;

  std::string get_string(const std::string& section, const std::string& key,
                         const std::string& fallback) const;
  double get_double(const std::string& section, const std::string& key,
                    double fallback) const;
  int get_int(const std::string& section, const std::string& key,
              int fallback) const;
  std::uint64_t get_u64(const std::string& section, const std::string& key,
                        std::uint64_t fallback) const;
  bool get_bool(const std::string& section, const std::string& key,
                bool fallback) const;
  std::vector<double> get_double_list(const std::string& section,
                                      const std::string& key,
                                      const std::vector<double>& fallback) const;
  std::vector<int> get_int_list(const std::string& section,
                                const std::string& key,
                                const std::vector<int>& fallback) const;

  // Throws ConfigError naming every key that no loader consumed.
  void require_consumed() const;

  const std::string& origin() const { return origin_; }

 private:
  struct Entry {
    std::string section;
    std::string key;
    std::string value;
    int line = 0;
    mutable bool consumed = false;
  };

  const Entry* find(const std::string& section, const std::string& key) const;
  [[noreturn]] void fail(const Entry& e, const std::string& what) const;

  std::vector<Entry> entries_;
  std::string origin_;
};

// Named delta grids used by the preset configs.
std::vector<double> named_delta_grid(const std::string& name);

SimulationConfig load_simulation_config(const IniConfig& ini);
BootstrapConfig load_bootstrap_config(const IniConfig& ini);
TheoryConfig load_theory_config(const IniConfig& ini);

// Effective-value echoes written next to run outputs. Worker counts are
// omitted so reruns with different parallelism stay byte-identical.
std::string render_simulation_echo(const SimulationConfig& config);
std::string render_bootstrap_echo(const BootstrapConfig& config);
std::string render_theory_echo(const TheoryConfig& config);

}  // namespace dshrink
