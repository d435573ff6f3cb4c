#include "fdr/cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"
#include "fdr/csv.hpp"
#include "fdr/divergence.hpp"
#include "fdr/generr.hpp"
#include "fdr/learning.hpp"
#include "fdr/model_space.hpp"
#include "fdr/oracle.hpp"
#include "fdr/solver.hpp"

namespace fdr::cli {
namespace {

const std::set<std::string>& allowed_keys() {
  static const std::set<std::string> keys = {"divergence",    "lambda", "lambda_grid",
                                             "support_csv",   "law_csv", "algorithm",
                                             "algorithm_csv", "out",     "tol"};
  return keys;
}

std::string strip_quotes(std::string s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return s.substr(1, s.size() - 2);
  return s;
}

double positive_double(const Config& cfg, const std::string& key, double fallback) {
  if (!cfg.has(key)) return fallback;
  double v = cfg.get_double(key);
  if (!(v > 0.0) || !std::isfinite(v))
    throw std::runtime_error("config key '" + key + "' must be positive and finite");
  return v;
}

// Shared "write table to stdout and optionally to the out file" tail.
int emit(const Config& cfg, const std::string& text, std::ostream& out) {
  out << text;
  if (cfg.has("out")) {
    std::ofstream f(cfg.path("out"));
    if (!f) throw std::runtime_error("cannot open " + cfg.path("out") + " for writing");
    f << text;
    if (!f) throw std::runtime_error("write failed for " + cfg.path("out"));
  }
  return kExitOk;
}

}  // namespace

const std::string& Config::get(const std::string& key) const {
  auto it = values.find(key);
  if (it == values.end()) throw std::runtime_error("missing config key '" + key + "'");
  return it->second;
}

double Config::get_double(const std::string& key) const {
  try {
    return csv::parse_double(get(key));
  } catch (const std::invalid_argument&) {
    throw std::runtime_error("config key '" + key + "' is not a number: " + get(key));
  }
}

std::string Config::path(const std::string& key) const {
  std::filesystem::path p(get(key));
  if (p.is_absolute() || dir.empty()) return p.string();
  return (std::filesystem::path(dir) / p).string();
}

Config load_config(const std::string& config_path) {
  std::ifstream in(config_path);
  if (!in) throw std::runtime_error("cannot open config file " + config_path);
  Config cfg;
  cfg.dir = std::filesystem::path(config_path).parent_path().string();
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = csv::trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(config_path + ":" + std::to_string(lineno) +
                               ": expected key = value");
    std::string key = csv::trim(line.substr(0, eq));
    std::string value = strip_quotes(csv::trim(line.substr(eq + 1)));
    if (!allowed_keys().count(key))
      throw std::runtime_error(config_path + ":" + std::to_string(lineno) +
                               ": unknown config key '" + key + "'");
    if (value.empty())
      throw std::runtime_error(config_path + ":" + std::to_string(lineno) + ": empty value for '" +
                               key + "'");
    if (!cfg.values.emplace(key, value).second)
      throw std::runtime_error(config_path + ":" + std::to_string(lineno) +
                               ": duplicate config key '" + key + "'");
  }
  return cfg;
}

int run_solve(const std::string& config_path, std::ostream& out, std::ostream& err,
              const std::string& oracle_trace) {
  Config cfg;
  Generator gen;
  SupportWithLoss sl;
  double lambda = 0.0, tol = 0.0;
  try {
    cfg = load_config(config_path);
    gen = make_generator_key(cfg.get("divergence"));
    sl = load_support_csv(cfg.path("support_csv"));
    lambda = cfg.get_double("lambda");
    if (!(lambda > 0.0) || !std::isfinite(lambda))
      throw std::runtime_error("lambda must be positive and finite");
    tol = positive_double(cfg, "tol", 1e-10);
  } catch (const std::exception& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  try {
    Posterior post = solve_posterior(gen, sl.support, sl.loss, lambda, tol);
    GapReport gr = duality_gap(gen, sl.support, sl.loss, lambda, post);
    std::ostringstream ss;
    ss << "atom_id,q,loss,rnd,weight\n";
    for (std::size_t i = 0; i < sl.support.size(); ++i)
      ss << sl.support.atom_ids[i] << ',' << csv::fmt17(sl.support.weights[i]) << ','
         << csv::fmt17(sl.loss.values[i]) << ',' << csv::fmt17(post.rnd[i]) << ','
         << csv::fmt17(post.weights[i]) << '\n';
    ss << "\nN,risk,divergence,eta,primal,dual,gap\n"
       << csv::fmt17(post.normalization) << ',' << csv::fmt17(post.risk) << ','
       << csv::fmt17(post.divergence) << ',' << csv::fmt17(post.eta) << ','
       << csv::fmt17(gr.primal) << ',' << csv::fmt17(gr.dual) << ',' << csv::fmt17(gr.gap) << '\n';
    if (!oracle_trace.empty()) {
      OracleTrace trace;
      brute_force_regularized(gen, sl.support, sl.loss, lambda, 100000, 0.5, &post.weights,
                              &trace);
      write_trace_csv(oracle_trace, trace);
    }
    return emit(cfg, ss.str(), out);
  } catch (const InfeasibleLambdaError& e) {
    err << e.what() << "\n";
    return kExitInfeasible;
  } catch (const std::exception& e) {
    err << "failure: " << e.what() << "\n";
    return kExitPropertyFailure;
  }
}

int run_sweep(const std::string& config_path, std::ostream& out, std::ostream& err) {
  Config cfg;
  Generator gen;
  SupportWithLoss sl;
  std::vector<double> grid;
  double tol = 0.0;
  try {
    cfg = load_config(config_path);
    gen = make_generator_key(cfg.get("divergence"));
    sl = load_support_csv(cfg.path("support_csv"));
    tol = positive_double(cfg, "tol", 1e-10);
    auto parts = csv::split(cfg.get("lambda_grid"), ':');
    if (parts.size() != 3) throw std::runtime_error("lambda_grid must be start:stop:count");
    double start = csv::parse_double(csv::trim(parts[0]));
    double stop = csv::parse_double(csv::trim(parts[1]));
    double dcount = csv::parse_double(csv::trim(parts[2]));
    auto count = static_cast<std::size_t>(dcount);
    if (dcount != static_cast<double>(count))
      throw std::runtime_error("lambda_grid count must be a nonnegative integer");
    grid = log_spaced(start, stop, count);
  } catch (const std::exception& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  try {
    std::vector<SweepRow> rows = sweep(gen, sl.support, sl.loss, grid, tol);
    std::ostringstream ss;
    write_sweep_csv(ss, rows);
    return emit(cfg, ss.str(), out);
  } catch (const std::exception& e) {
    err << "failure: " << e.what() << "\n";
    return kExitPropertyFailure;
  }
}

int run_generr(const std::string& config_path, std::ostream& out, std::ostream& err) {
  Config cfg;
  Generator gen;
  SupportWithLoss sl;
  FiniteWorld world;
  StochasticAlgorithm alg;
  bool alg_is_fdr = false;
  double lambda = 0.0, tol = 0.0;
  try {
    cfg = load_config(config_path);
    gen = make_generator_key(cfg.get("divergence"));
    sl = load_support_csv(cfg.path("support_csv"));
    lambda = cfg.get_double("lambda");
    if (!(lambda > 0.0) || !std::isfinite(lambda))
      throw std::runtime_error("lambda must be positive and finite");
    tol = positive_double(cfg, "tol", 1e-10);
    world = load_world_csv(cfg.path("law_csv"), sl.support);
    if (world.losses.empty())
      throw std::runtime_error(cfg.path("law_csv") +
                               ": per-atom loss columns are required for generr");
    if (cfg.has("algorithm") == cfg.has("algorithm_csv"))
      throw std::runtime_error("exactly one of 'algorithm' and 'algorithm_csv' is required");
    if (cfg.has("algorithm")) {
      if (cfg.get("algorithm") != "fdr")
        throw std::runtime_error("algorithm must be \"fdr\" (or use algorithm_csv)");
      alg_is_fdr = true;
    } else {
      alg = load_algorithm_csv(cfg.path("algorithm_csv"), sl.support, world.dataset_ids);
    }
  } catch (const std::exception& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  try {
    if (alg_is_fdr) alg = fdr_algorithm(gen, world, sl.support, lambda, tol);
    GenErrReport rep = gen_err_report(alg, world, sl.support, gen, lambda, alg_is_fdr, tol);
    std::ostringstream ss;
    write_generr_csv(ss, rep);
    int code = emit(cfg, ss.str(), out);
    if (!rep.routes_agree) {
      err << "routes disagree: max spread " << csv::fmt17(rep.max_spread) << " exceeds 1e-9\n";
      return kExitRouteDisagreement;
    }
    return code;
  } catch (const InfeasibleLambdaError& e) {
    err << e.what() << "\n";
    return kExitInfeasible;
  } catch (const std::exception& e) {
    err << "failure: " << e.what() << "\n";
    return kExitPropertyFailure;
  }
}

int cli_main(int argc, char** argv) {
  CLI::App app{"empirical risk minimization with f-divergence regularization"};
  app.require_subcommand(1);

  std::string config_path;
  std::string trace_path;
  auto* solve =
      app.add_subcommand("solve", "posterior, normalization, and duality report at one lambda");
  solve->add_option("config", config_path, "config file")->required();
  solve->add_option("--oracle-trace", trace_path,
                    "also run the mirror-descent oracle and write its trace CSV here");

  auto* sweep_cmd = app.add_subcommand("sweep", "solve across a log-spaced lambda grid");
  sweep_cmd->add_option("config", config_path, "config file")->required();

  auto* generr_cmd =
      app.add_subcommand("generr", "exact generalization error by every applicable route");
  generr_cmd->add_option("config", config_path, "config file")->required();

  VerifyOptions vo;
  auto* verify_cmd = app.add_subcommand("verify", "randomized self-check across all modules");
  verify_cmd->add_option("--seed", vo.seed, "rng seed")->capture_default_str();
  verify_cmd->add_option("--instances", vo.instances, "randomized instance budget")
      ->capture_default_str();
  verify_cmd->add_option("--max-atoms", vo.max_atoms, "support size cap")->capture_default_str();
  verify_cmd->add_option("--max-datasets", vo.max_datasets, "world size cap")
      ->capture_default_str();
  verify_cmd->add_option("--replay-dir", vo.replay_dir, "directory for failing-instance replays")
      ->capture_default_str();
  verify_cmd->add_option("--out", vo.out, "also write the report to this file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return kExitConfig;
  }

  if (solve->parsed()) return run_solve(config_path, std::cout, std::cerr, trace_path);
  if (sweep_cmd->parsed()) return run_sweep(config_path, std::cout, std::cerr);
  if (generr_cmd->parsed()) return run_generr(config_path, std::cout, std::cerr);
  return run_verify(vo, std::cout, std::cerr);
}

}  // namespace fdr::cli
