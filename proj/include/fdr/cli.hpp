#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>

namespace fdr::cli {

// Stable exit-code contract.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitInfeasible = 2;
inline constexpr int kExitRouteDisagreement = 3;
inline constexpr int kExitPropertyFailure = 4;

// Flat key = value file, '#' comments. Only the documented keys are accepted;
// duplicates are rejected. Relative paths in values resolve against the
// config file's directory.
struct Config {
  std::map<std::string, std::string> values;
  std::string dir;  // directory of the config file, for path resolution

  bool has(const std::string& key) const { return values.count(key) != 0; }
  const std::string& get(const std::string& key) const;
  double get_double(const std::string& key) const;
  std::string path(const std::string& key) const;  // resolved against dir
};

Config load_config(const std::string& config_path);

// Subcommand drivers. Tables go to `out`; diagnostics to `err`. The returned
// int is the process exit code. oracle_trace, when nonempty, additionally runs
// the mirror-descent oracle on the solve instance and writes its trace CSV.
int run_solve(const std::string& config_path, std::ostream& out, std::ostream& err,
              const std::string& oracle_trace = "");
int run_sweep(const std::string& config_path, std::ostream& out, std::ostream& err);
int run_generr(const std::string& config_path, std::ostream& out, std::ostream& err);

struct VerifyOptions {
  std::uint64_t seed = 1;
  int instances = 20;     // budget for the randomized phases
  int max_atoms = 8;      // support size cap
  int max_datasets = 4;   // world size cap
  std::string replay_dir = ".";  // where a failing instance is serialized
  std::string out;               // optional report copy
};

int run_verify(const VerifyOptions& opt, std::ostream& out, std::ostream& err);

int cli_main(int argc, char** argv);

}  // namespace fdr::cli
