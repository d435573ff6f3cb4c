#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "fdr/cli.hpp"
#include "fdr/csv.hpp"
#include "fdr/divergence.hpp"
#include "fdr/generr.hpp"
#include "fdr/learning.hpp"
#include "fdr/model_space.hpp"
#include "fdr/numeric.hpp"
#include "fdr/oracle.hpp"
#include "fdr/solver.hpp"

namespace fdr::cli {
namespace {

const std::vector<std::string>& generator_keys() {
  static const std::vector<std::string> keys = {"kl",           "reverse_kl", "chi_squared",
                                                "hellinger_sq", "alpha:0.5",  "alpha:1.5",
                                                "alpha:2",      "alpha:3"};
  return keys;
}

struct Instance {
  std::string gen_key;
  ModelSupport support;
  LossTable losses;
  double lambda = 0.0;
};

ModelSupport random_support(numeric::Rng& rng, int atoms) {
  std::vector<std::string> ids;
  ids.reserve(atoms);
  for (int i = 0; i < atoms; ++i) ids.push_back("a" + std::to_string(i));
  return make_support(std::move(ids), rng.simplex(static_cast<std::size_t>(atoms)));
}

LossTable random_losses(numeric::Rng& rng, const ModelSupport& support, const std::string& id) {
  std::vector<double> vals;
  vals.reserve(support.size());
  for (std::size_t i = 0; i < support.size(); ++i) vals.push_back(rng.uniform(0.0, 2.0));
  return make_loss_table(id, std::move(vals));
}

// lambda strictly above the admissibility threshold, bounded away from it so
// posteriors stay interior.
double admissible_lambda(numeric::Rng& rng, const Generator& gen, const ModelSupport& support,
                         const LossTable& losses) {
  double u = rng.uniform();
  FeasibilityReport fr = feasibility(gen, support, losses, 1.0);
  return fr.lambda_star * 1.05 + 0.05 + 1.95 * u;
}

Instance draw_instance(numeric::Rng& rng, int min_atoms, int max_atoms) {
  Instance ins;
  ins.gen_key = generator_keys()[static_cast<std::size_t>(rng.uniform_int(0, 7))];
  int atoms = rng.uniform_int(min_atoms, std::max(min_atoms, max_atoms));
  ins.support = random_support(rng, atoms);
  ins.losses = random_losses(rng, ins.support, "z");
  Generator gen = make_generator_key(ins.gen_key);
  ins.lambda = admissible_lambda(rng, gen, ins.support, ins.losses);
  return ins;
}

// One failing instance is enough for replay; later failures only count.
class Recorder {
 public:
  Recorder(std::string dir) : dir_(std::move(dir)) {}

  bool armed() const { return note_.empty(); }
  const std::string& note() const { return note_; }

  void record_plain(const std::string& phase, int index, const Instance& ins) {
    if (!armed()) return;
    std::filesystem::create_directories(dir_);
    std::string support_path = dir_ + "/verify_fail_support.csv";
    write_support_csv(support_path, ins.support, ins.losses);
    std::ofstream cfg(dir_ + "/verify_fail.cfg");
    cfg << "divergence = " << ins.gen_key << "\n"
        << "lambda = " << csv::fmt17(ins.lambda) << "\n"
        << "support_csv = verify_fail_support.csv\n";
    note_ = phase + " instance " + std::to_string(index) + " (replay: " + dir_ +
            "/verify_fail.cfg)";
  }

  void record_world(const std::string& phase, int index, const std::string& gen_key,
                    const ModelSupport& support, const FiniteWorld& world, double lambda) {
    if (!armed()) return;
    std::filesystem::create_directories(dir_);
    write_support_csv(dir_ + "/verify_fail_support.csv", support, world.losses[0]);
    std::ofstream law(dir_ + "/verify_fail_law.csv");
    law << "dataset_id,prob";
    for (const auto& id : support.atom_ids) law << ',' << id;
    law << '\n';
    for (std::size_t z = 0; z < world.size(); ++z) {
      law << world.dataset_ids[z] << ',' << csv::fmt17(world.probabilities[z]);
      for (double v : world.losses[z].values) law << ',' << csv::fmt17(v);
      law << '\n';
    }
    std::ofstream cfg(dir_ + "/verify_fail.cfg");
    cfg << "divergence = " << gen_key << "\n"
        << "lambda = " << csv::fmt17(lambda) << "\n"
        << "support_csv = verify_fail_support.csv\n"
        << "law_csv = verify_fail_law.csv\n"
        << "algorithm = fdr\n";
    note_ = phase + " instance " + std::to_string(index) + " (replay: " + dir_ +
            "/verify_fail.cfg)";
  }

  void record_fixed(const std::string& phase, const std::string& what) {
    if (!armed()) return;
    note_ = phase + " " + what + " (deterministic input, no replay files)";
  }

 private:
  std::string dir_;
  std::string note_;
};

}  // namespace

int run_verify(const VerifyOptions& opt, std::ostream& out, std::ostream& err) {
  if (opt.instances < 1 || opt.max_atoms < 1 || opt.max_atoms > 12 || opt.max_datasets < 2 ||
      opt.max_datasets > 8) {
    err << "config error: instances >= 1, 1 <= max-atoms <= 12, 2 <= max-datasets <= 8\n";
    return kExitConfig;
  }
  numeric::Rng rng(opt.seed);
  Recorder rec(opt.replay_dir);
  std::ostringstream rep;
  rep << "verify seed=" << opt.seed << " instances=" << opt.instances
      << " max_atoms=" << opt.max_atoms << " max_datasets=" << opt.max_datasets << "\n";

  // Conjugate calculus identities on a fixed log grid.
  {
    std::vector<double> grid = log_spaced(1e-3, 1e3, 50);
    int pass = 0;
    int total = static_cast<int>(generator_keys().size());
    for (const auto& key : generator_keys()) {
      ConformanceReport r = check_generator(make_generator_key(key), grid);
      if (r.pass)
        ++pass;
      else
        rec.record_fixed("generator_conformance", key);
    }
    rep << "generator_conformance: " << pass << "/" << total << "\n";
  }

  // Duality gap and the two normalization routes on random instances.
  {
    int pass_gap = 0, pass_agree = 0;
    for (int i = 0; i < opt.instances; ++i) {
      Instance ins = draw_instance(rng, 1, opt.max_atoms);
      Generator gen = make_generator_key(ins.gen_key);
      try {
        Posterior post = solve_posterior(gen, ins.support, ins.losses, ins.lambda);
        GapReport gr = duality_gap(gen, ins.support, ins.losses, ins.lambda, post);
        NormalizationResult nr = normalization_constant(gen, ins.support, ins.losses, ins.lambda);
        bool ok_gap = gr.gap < 1e-8;
        bool ok_agree = std::fabs(nr.beta_root - nr.beta_dual) <= 1e-9;
        pass_gap += ok_gap;
        pass_agree += ok_agree;
        if (!ok_gap) rec.record_plain("duality_gap", i, ins);
        if (!ok_agree) rec.record_plain("dual_vs_root", i, ins);
      } catch (const std::exception&) {
        rec.record_plain("duality_gap", i, ins);
      }
    }
    rep << "duality_gap: " << pass_gap << "/" << opt.instances << "\n";
    rep << "dual_vs_root: " << pass_agree << "/" << opt.instances << "\n";
  }

  // Sensitivity identity against central finite differences.
  {
    int reps = std::max(1, opt.instances / 4);
    int pass = 0, total = 0;
    for (const std::string key : {"kl", "reverse_kl", "hellinger_sq"}) {
      for (int i = 0; i < reps; ++i) {
        ++total;
        Instance ins;
        ins.gen_key = key;
        ins.support = random_support(rng, rng.uniform_int(2, std::max(2, opt.max_atoms)));
        ins.losses = random_losses(rng, ins.support, "z");
        ins.lambda = 0.1 + 1.9 * rng.uniform();  // threshold is 0 for these generators
        Generator gen = make_generator_key(key);
        try {
          Posterior post = solve_posterior(gen, ins.support, ins.losses, ins.lambda);
          double formula = normalization_derivative(gen, ins.support, ins.losses, ins.lambda, post);
          double h = 1e-5 * ins.lambda;
          double np = normalization_constant(gen, ins.support, ins.losses, ins.lambda + h).beta;
          double nm = normalization_constant(gen, ins.support, ins.losses, ins.lambda - h).beta;
          double fd = (np - nm) / (2.0 * h);
          bool ok = std::fabs(formula - fd) <= 1e-4 * std::max(std::fabs(fd), 1e-6);
          pass += ok;
          if (!ok) rec.record_plain("sensitivity_fd", total - 1, ins);
        } catch (const std::exception&) {
          rec.record_plain("sensitivity_fd", total - 1, ins);
        }
      }
    }
    rep << "sensitivity_fd: " << pass << "/" << total << "\n";
  }

  // Mirror-descent oracle against the solver posterior.
  {
    int reps = std::max(1, opt.instances / 2);
    int pass = 0;
    for (int i = 0; i < reps; ++i) {
      Instance ins = draw_instance(rng, 2, std::min(opt.max_atoms, 8));
      Generator gen = make_generator_key(ins.gen_key);
      try {
        Posterior post = solve_posterior(gen, ins.support, ins.losses, ins.lambda);
        std::vector<double> approx =
            brute_force_regularized(gen, ins.support, ins.losses, ins.lambda);
        bool ok = numeric::tv_distance(approx, post.weights) <= 1e-4;
        pass += ok;
        if (!ok) rec.record_plain("oracle_tv", i, ins);
      } catch (const std::exception&) {
        rec.record_plain("oracle_tv", i, ins);
      }
    }
    rep << "oracle_tv: " << pass << "/" << reps << "\n";
  }

  // Generalization-error route agreement on random worlds.
  {
    int reps = std::max(1, opt.instances / 2);
    int pass = 0;
    for (int i = 0; i < reps; ++i) {
      std::string key = (i % 2 == 0) ? "kl" : "chi_squared";
      Generator gen = make_generator_key(key);
      ModelSupport support = random_support(rng, rng.uniform_int(2, std::min(4, opt.max_atoms)));
      int m = rng.uniform_int(2, opt.max_datasets);
      FiniteWorld world;
      world.probabilities = rng.simplex(static_cast<std::size_t>(m));
      double lambda_floor = 0.0;
      for (int z = 0; z < m; ++z) {
        std::string id = "z" + std::to_string(z);
        world.dataset_ids.push_back(id);
        world.losses.push_back(random_losses(rng, support, id));
        FeasibilityReport fr = feasibility(gen, support, world.losses.back(), 1.0);
        lambda_floor = std::max(lambda_floor, fr.lambda_star);
      }
      double lambda = lambda_floor * 1.05 + 0.05 + 1.95 * rng.uniform();
      try {
        StochasticAlgorithm alg = fdr_algorithm(gen, world, support, lambda);
        GenErrReport r = gen_err_report(alg, world, support, gen, lambda, true);
        pass += r.routes_agree;
        if (!r.routes_agree) rec.record_world("generr_routes", i, key, support, world, lambda);
      } catch (const std::exception&) {
        rec.record_world("generr_routes", i, key, support, world, lambda);
      }
    }
    rep << "generr_routes: " << pass << "/" << reps << "\n";
  }

  bool all_pass = rec.armed();
  if (!all_pass) rep << "first_failure: " << rec.note() << "\n";
  rep << "result: " << (all_pass ? "PASS" : "FAIL") << "\n";
  out << rep.str();
  if (!opt.out.empty()) {
    std::ofstream f(opt.out);
    if (!f) {
      err << "cannot open " << opt.out << " for writing\n";
      return kExitConfig;
    }
    f << rep.str();
  }
  return all_pass ? kExitOk : kExitPropertyFailure;
}

}  // namespace fdr::cli
