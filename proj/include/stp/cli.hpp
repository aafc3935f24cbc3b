#pragma once

// Config documents, potential expressions and the batch commands behind the
// `stp` executable.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "stp/counterexample.hpp"
#include "stp/pressure.hpp"

namespace stp::cli {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, int line, int column);
  [[nodiscard]] int line() const { return line_; }
  [[nodiscard]] int column() const { return column_; }

 private:
  int line_;
  int column_;
};

struct ConfigEntry {
  std::string key;
  std::string value;
  int line = 0;
  int key_column = 0;
  int value_column = 0;
};

struct ConfigSection {
  std::string name;
  int line = 0;
  std::vector<ConfigEntry> entries;

  [[nodiscard]] const ConfigEntry* find(const std::string& key) const;
};

// INI-style document: `[section]` headers, `key = value` lines, full-line
// comments starting with '#' or ';'.
struct ConfigDocument {
  std::vector<ConfigSection> sections;
  std::string text;

  [[nodiscard]] const ConfigSection* find(const std::string& name) const;
};

ConfigDocument parse_config(const std::string& text);

// Prefix notation: psi | const <c> | scale <c> <e> | sum <e> <e> |
// branch <lo>:<hi>,<lo>:<hi>,... Errors carry the column inside `text`,
// shifted by `column_offset`.
Potential parse_potential(const std::string& text, int line = 0, int column_offset = 1);

// Config text that restores `ce` exactly (hexadecimal floats).
std::string serialize_counterexample(const CounterexampleSystem& ce);

enum ExitCode : int { ok = 0, failure = 1, config_error = 2, budget_exceeded = 3, domain_error = 4 };

struct RunOptions {
  std::string command;
  std::string config_path;  // relative `file` keys resolve against its directory
  std::optional<std::string> out_path;  // overrides the [run] `out` key
  bool sequential = false;
  std::optional<std::uint64_t> budget;  // overrides the [run] `budget` key
};

inline const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"pressure", "dimension", "spectrum", "cover",
                                              "density", "hits", "counterexample-build",
                                              "counterexample-verify"};
  return names;
}

// Runs one command; results go to `out`, diagnostics to `err`.
int run(const RunOptions& options, const ConfigDocument& doc, std::ostream& out, std::ostream& err);

// Reads and parses options.config_path, then runs the command. Output goes
// to the configured file if any, otherwise to `out`. Parse errors are
// reported as "<path>:<line>:<col>: <message>".
int run_file(const RunOptions& options, std::ostream& out, std::ostream& err);

}  // namespace stp::cli
