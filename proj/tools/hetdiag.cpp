// Command-line front end: diagnose what the treatment coefficient of a
// linear regression averages when effects differ across units, and run the
// companion corrective estimators.

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hetdiag/dataset.hpp"
#include "hetdiag/diagnostics.hpp"
#include "hetdiag/estimators.hpp"
#include "hetdiag/inference.hpp"
#include "hetdiag/oracle.hpp"
#include "hetdiag/report.hpp"

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitAssumption = 4;

int exit_code_for(hetdiag::ErrorCode code) {
  switch (code) {
    case hetdiag::ErrorCode::schema:
    case hetdiag::ErrorCode::treatment_not_binary:
    case hetdiag::ErrorCode::degenerate_group:
      return kExitData;
    case hetdiag::ErrorCode::bad_config:
      return kExitUsage;
    default:
      return kExitAssumption;
  }
}

struct CommonArgs {
  std::string input;
  std::string outcome;
  std::string treatment;
  std::string covariates;
  std::string format = "text";
  int reps = 0;
  std::uint64_t seed = 42;
  bool seed_given = false;
};

void add_common(CLI::App* cmd, CommonArgs& a, bool with_bootstrap) {
  cmd->add_option("--input", a.input, "CSV file")->required();
  cmd->add_option("--outcome", a.outcome, "outcome column")->required();
  cmd->add_option("--treatment", a.treatment, "binary treatment column")
      ->required();
  cmd->add_option("--covariates", a.covariates,
                  "comma-separated columns; a:b spans the file's column order")
      ->required();
  cmd->add_option("--format", a.format, "text or json")
      ->check(CLI::IsMember({"text", "json"}));
  if (with_bootstrap) {
    cmd->add_option("--reps", a.reps,
                    "bootstrap replicates (0 disables the bootstrap)")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--seed", a.seed, "bootstrap seed")
        ->each([&a](const std::string&) { a.seed_given = true; });
  }
}

std::uint64_t resolve_seed(const CommonArgs& a) {
  if (a.seed_given) return a.seed;
  if (const char* env = std::getenv("HETDIAG_SEED")) {
    try {
      return std::stoull(env);
    } catch (...) {
      throw hetdiag::Error(hetdiag::ErrorCode::bad_config,
                           std::string("HETDIAG_SEED='") + env +
                               "' is not an unsigned integer");
    }
  }
  return a.seed;
}

hetdiag::LoadResult load(const CommonArgs& a) {
  const auto header = hetdiag::csv_header(a.input);
  const auto covs = hetdiag::expand_covariate_spec(a.covariates, header);
  auto lr = hetdiag::load_csv(a.input, a.outcome, a.treatment, covs);
  std::cerr << "read " << lr.report.n_read << " rows from " << a.input
            << ", kept " << lr.report.n_kept;
  if (lr.report.n_dropped > 0) {
    std::cerr << " (dropped " << lr.report.n_dropped
              << " with missing cells)";
  }
  std::cerr << "\n";
  return lr;
}

// Retries the main fit without the covariates the rank check rejected.
hetdiag::Dataset drop_collinear(hetdiag::Dataset ds) {
  for (;;) {
    Eigen::MatrixXd z(ds.n(), ds.n_covariates() + 2);
    z.col(0).setOnes();
    z.col(1) = ds.d;
    z.rightCols(ds.n_covariates()) = ds.x;
    try {
      (void)hetdiag::fit_ols(ds.y, z);
      return ds;
    } catch (const hetdiag::RankError& e) {
      std::vector<bool> drop(static_cast<std::size_t>(ds.n_covariates()), false);
      for (auto col : e.dependent_columns()) {
        if (col < 2) throw;  // intercept or treatment itself: cannot drop
        drop[static_cast<std::size_t>(col - 2)] = true;
      }
      Eigen::Index kept = 0;
      for (bool f : drop) kept += !f;
      if (kept == ds.n_covariates() || kept == 0) throw;
      Eigen::MatrixXd x(ds.n(), kept);
      std::vector<std::string> names;
      for (Eigen::Index j = 0, o = 0; j < ds.n_covariates(); ++j) {
        if (drop[static_cast<std::size_t>(j)]) {
          std::cerr << "dropping collinear covariate: "
                    << ds.covariate_names[static_cast<std::size_t>(j)] << "\n";
          continue;
        }
        x.col(o++) = ds.x.col(j);
        names.push_back(ds.covariate_names[static_cast<std::size_t>(j)]);
      }
      ds.x = std::move(x);
      ds.covariate_names = std::move(names);
    }
  }
}

Eigen::VectorXd diagnose_stat(const hetdiag::Dataset& ds) {
  auto prop = hetdiag::propensity_lpm(ds.d, ds.x);
  auto m = hetdiag::group_moments(prop.p, ds.d);
  auto w = hetdiag::ols_weights(m);
  auto c = hetdiag::aple_components(ds.y, prop.p, ds.d);
  auto e = hetdiag::aple_effects(c, m, prop.p.mean());
  Eigen::VectorXd v(6);
  v << e.aple, e.aple1, e.aple0, w.w1, w.w0, w.delta;
  return v;
}

int run_diagnose(const CommonArgs& a, bool noisily, bool drop_flag) {
  auto lr = load(a);
  hetdiag::Dataset ds =
      drop_flag ? drop_collinear(std::move(lr.data)) : std::move(lr.data);
  auto report = hetdiag::diagnose(ds);

  hetdiag::RenderOptions opt;
  opt.noisily = noisily;
  std::optional<hetdiag::BootstrapResult> boot;
  if (a.reps > 0) {
    boot = hetdiag::pairs_bootstrap(diagnose_stat, ds, a.reps, resolve_seed(a));
    std::cerr << "bootstrap: " << boot->reps_requested << " replicates, seed "
              << boot->seed << ", " << boot->n_failed << " failed\n";
    opt.bootstrap = &*boot;
    opt.bootstrap_labels = {"ATE", "ATT", "ATU", "w1", "w0", "delta"};
  }
  std::cout << (a.format == "json" ? hetdiag::render_json(report, opt)
                                   : hetdiag::render_text(report, opt));
  return 0;
}

int run_adjustment(const CommonArgs& a) {
  auto lr = load(a);
  auto ra = hetdiag::regression_adjustment(lr.data);

  std::optional<hetdiag::BootstrapResult> boot;
  if (a.reps > 0) {
    auto stat = [](const hetdiag::Dataset& ds) {
      auto r = hetdiag::regression_adjustment(ds);
      Eigen::VectorXd v(3);
      v << r.ate, r.att, r.atu;
      return v;
    };
    boot = hetdiag::pairs_bootstrap(stat, lr.data, a.reps, resolve_seed(a));
    std::cerr << "bootstrap: " << boot->reps_requested << " replicates, seed "
              << boot->seed << ", " << boot->n_failed << " failed\n";
  }

  if (a.format == "json") {
    nlohmann::json j;
    j["n"] = lr.data.n();
    j["ate"] = ra.ate;
    j["att"] = ra.att;
    j["atu"] = ra.atu;
    if (boot) {
      j["bootstrap"] = {{"replicates", boot->reps_requested},
                        {"seed", boot->seed},
                        {"n_failed", boot->n_failed},
                        {"se",
                         {{"ate", boot->se(0)},
                          {"att", boot->se(1)},
                          {"atu", boot->se(2)}}}};
    }
    std::cout << j.dump(2) << "\n";
    return 0;
  }
  std::cout << "regression adjustment (one outcome line per arm)\n\n";
  std::cout << "   ATE  =  " << hetdiag::format_effect(ra.ate) << "\n";
  std::cout << "   ATT  =  " << hetdiag::format_effect(ra.att) << "\n";
  std::cout << "   ATU  =  " << hetdiag::format_effect(ra.atu) << "\n";
  if (boot) {
    std::cout << "\nbootstrap (" << boot->reps_requested
              << " replicates, seed " << boot->seed << ", " << boot->n_failed
              << " failed):\n";
    std::cout << "se(ATE)  =  " << hetdiag::format_effect(boot->se(0)) << "\n";
    std::cout << "se(ATT)  =  " << hetdiag::format_effect(boot->se(1)) << "\n";
    std::cout << "se(ATU)  =  " << hetdiag::format_effect(boot->se(2)) << "\n";
  }
  return 0;
}

int run_wls(const CommonArgs& a) {
  auto lr = load(a);
  const double tau = hetdiag::wls_correction(lr.data);

  std::optional<hetdiag::BootstrapResult> boot;
  if (a.reps > 0) {
    auto stat = [](const hetdiag::Dataset& ds) {
      Eigen::VectorXd v(1);
      v << hetdiag::wls_correction(ds);
      return v;
    };
    boot = hetdiag::pairs_bootstrap(stat, lr.data, a.reps, resolve_seed(a));
    std::cerr << "bootstrap: " << boot->reps_requested << " replicates, seed "
              << boot->seed << ", " << boot->n_failed << " failed\n";
  }

  if (a.format == "json") {
    nlohmann::json j;
    j["n"] = lr.data.n();
    j["tau_weighted"] = tau;
    if (boot) {
      j["bootstrap"] = {{"replicates", boot->reps_requested},
                        {"seed", boot->seed},
                        {"n_failed", boot->n_failed},
                        {"se", {{"tau_weighted", boot->se(0)}}}};
    }
    std::cout << j.dump(2) << "\n";
    return 0;
  }
  std::cout << "weighted regression tuned to undo the implicit variance "
               "weighting\n\n";
  std::cout << "   tau  =  " << hetdiag::format_effect(tau) << "\n";
  if (boot) {
    std::cout << "\nbootstrap (" << boot->reps_requested
              << " replicates, seed " << boot->seed << ", " << boot->n_failed
              << " failed):\n";
    std::cout << "se(tau)  =  " << hetdiag::format_effect(boot->se(0)) << "\n";
  }
  return 0;
}

int run_downweight(const CommonArgs& a, const std::string& k_spec) {
  auto lr = load(a);
  std::vector<double> ks;
  std::stringstream ss(k_spec);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      ks.push_back(std::stod(tok));
    } catch (...) {
      throw hetdiag::Error(hetdiag::ErrorCode::bad_config,
                           "cannot parse k value '" + tok + "'");
    }
  }
  if (ks.empty()) {
    throw hetdiag::Error(hetdiag::ErrorCode::bad_config, "empty k list");
  }

  std::vector<double> taus;
  for (double k : ks) {
    taus.push_back(hetdiag::downweight_untreated(lr.data, k));
  }

  if (a.format == "json") {
    nlohmann::json j;
    j["n"] = lr.data.n();
    nlohmann::json arr = nlohmann::json::array();
    for (std::size_t i = 0; i < ks.size(); ++i) {
      arr.push_back({{"k", ks[i]}, {"tau", taus[i]}});
    }
    j["downweight"] = arr;
    std::cout << j.dump(2) << "\n";
    return 0;
  }
  std::cout << "untreated rows weighted 1/k\n\n";
  std::printf("%8s  %s\n", "k", "coefficient on treated");
  for (std::size_t i = 0; i < ks.size(); ++i) {
    std::printf("%8s  %s\n", hetdiag::format_effect(ks[i]).c_str(),
                hetdiag::format_effect(taus[i]).c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hetdiag: what a linear regression estimates when a binary "
               "treatment has heterogeneous effects"};
  app.require_subcommand(1);

  CommonArgs diag_args, ra_args, wls_args, dw_args;
  bool noisily = false, drop_flag = false;
  std::string k_spec = "1,2,5,10,50";

  auto* diag = app.add_subcommand(
      "diagnose", "implicit weights, delta and effect analogues");
  add_common(diag, diag_args, true);
  diag->add_flag("--noisily", noisily, "print the full coefficient table");
  diag->add_flag("--drop-collinear", drop_flag,
                 "drop rank-deficient covariates instead of failing");

  auto* ra = app.add_subcommand("regression-adjustment",
                                "group-specific outcome fits");
  add_common(ra, ra_args, true);

  auto* wls = app.add_subcommand("wls-correction",
                                 "weighted fit recovering the ATE analogue");
  add_common(wls, wls_args, true);

  auto* dw = app.add_subcommand("downweight",
                                "treatment coefficient as untreated rows "
                                "are progressively downweighted");
  add_common(dw, dw_args, false);
  dw->add_option("--k", k_spec, "comma-separated downweighting factors");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (diag->parsed()) return run_diagnose(diag_args, noisily, drop_flag);
    if (ra->parsed()) return run_adjustment(ra_args);
    if (wls->parsed()) return run_wls(wls_args);
    if (dw->parsed()) return run_downweight(dw_args, k_spec);
  } catch (const hetdiag::Error& e) {
    std::cerr << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitUsage;
}
