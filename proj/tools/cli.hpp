#pragma once

// qent command-line front end. run() is the whole program minus main(), so
// tests can drive it with an argument vector and captured streams.

#include <filesystem>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "qent/datagen.hpp"
#include "qent/model.hpp"
#include "qent/trainer.hpp"

namespace qent::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kNumerical = 3 };

// Flat key=value run configuration. '#' starts a comment; blank lines are
// ignored. Relative paths resolve against the directory of the file.
class RunConfig {
 public:
  static const std::vector<std::pair<std::string, std::string>>& keys();  // key, help

  static RunConfig parse(const std::string& text, const std::filesystem::path& base_dir);
  static RunConfig load(const std::filesystem::path& path);

  // Later values win. Throws ConfigError on an unknown key.
  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::string text(const std::string& key, const std::string& fallback) const;
  long long integer(const std::string& key, long long fallback) const;
  std::uint64_t unsigned64(const std::string& key, std::uint64_t fallback) const;
  double real(const std::string& key, double fallback) const;
  bool flag(const std::string& key, bool fallback) const;
  // Explicit path key, or <out_dir>/<run_name><suffix>.
  std::filesystem::path path(const std::string& key, const std::string& suffix) const;

  const std::filesystem::path& base_dir() const { return base_; }
  void set_base_dir(std::filesystem::path dir) { base_ = std::move(dir); }

  GenConfig gen_config() const;
  ModelConfig model_config(int n_qubits) const;
  TrainConfig train_config() const;
  SplitFractions split_fractions() const;
  Task task() const;

 private:
  std::map<std::string, std::string> values_;
  std::filesystem::path base_ = ".";
};

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qent::cli
