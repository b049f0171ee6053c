#include "hetdiag/report.hpp"

#include <algorithm>
#include <cstdio>

#include <json.hpp>

namespace hetdiag {

std::string format_effect(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

std::string format_share(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  std::string s = buf;
  if (s.rfind("0.", 0) == 0) return s.substr(1);
  if (s.rfind("-0.", 0) == 0) return "-" + s.substr(2);
  return s;
}

namespace {

void append_line(std::string& out, const char* label, const std::string& v) {
  out += label;
  out += "  =  ";
  out += v;
  out += "\n";
}

std::string coefficient_table(const DiagnosticsReport& r) {
  std::size_t name_w = 4;
  for (const auto& n : r.main_fit.names) name_w = std::max(name_w, n.size());
  char buf[128];
  std::string out;
  out += "outcome: " + r.outcome_name + ", n = " + std::to_string(r.n) + "\n\n";
  std::snprintf(buf, sizeof(buf), "%-*s  %12s  %12s\n",
                static_cast<int>(name_w), "", "coef", "robust se");
  out += buf;
  for (std::size_t i = 0; i < r.main_fit.names.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%-*s  %12.6g  %12.6g\n",
                  static_cast<int>(name_w), r.main_fit.names[i].c_str(),
                  r.main_fit.coef(static_cast<Eigen::Index>(i)),
                  r.main_fit.se_robust(static_cast<Eigen::Index>(i)));
    out += buf;
  }
  out += "\n";
  return out;
}

}  // namespace

std::string render_text(const DiagnosticsReport& r, const RenderOptions& opt) {
  std::string out;
  if (opt.noisily) out += coefficient_table(r);

  out += "\"OLS\" is the estimated regression coefficient on " +
         r.treatment_name + ".\n\n";
  append_line(out, "   OLS", format_effect(r.tau_ols));
  out += "\n";
  append_line(out, "P(d=1)", format_share(r.moments.rho));
  append_line(out, "P(d=0)", format_share(1.0 - r.moments.rho));
  out += "\n";
  append_line(out, "    w1", format_share(r.weights.w1));
  append_line(out, "    w0", format_share(r.weights.w0));
  append_line(out, " delta", format_share(r.weights.delta));
  out += "\n";
  append_line(out, "   ATE", format_effect(r.aple));
  append_line(out, "   ATT", format_effect(r.aple1));
  append_line(out, "   ATU", format_effect(r.aple0));
  out += "\n";
  out += "OLS = w1*ATT + w0*ATU = " + format_effect(r.tau_ols) + "\n";

  if (opt.bootstrap != nullptr) {
    const auto& b = *opt.bootstrap;
    out += "\nbootstrap (" + std::to_string(b.reps_requested) +
           " replicates, seed " + std::to_string(b.seed) + ", " +
           std::to_string(b.n_failed) + " failed):\n";
    for (Eigen::Index j = 0; j < b.se.size(); ++j) {
      const std::string label =
          j < static_cast<Eigen::Index>(opt.bootstrap_labels.size())
              ? opt.bootstrap_labels[static_cast<std::size_t>(j)]
              : "stat" + std::to_string(j);
      char buf[96];
      std::snprintf(buf, sizeof(buf), "%9s  =  %s\n",
                    ("se(" + label + ")").c_str(),
                    format_effect(b.se(j)).c_str());
      out += buf;
    }
  }

  out += "\nnote: ATE, ATT and ATU are sample analogues of the average "
         "partial linear\neffect among all, treated and untreated units; "
         "they carry a causal reading\nonly under unconfoundedness given "
         "the covariates.\n";
  return out;
}

std::string render_json(const DiagnosticsReport& r, const RenderOptions& opt) {
  nlohmann::json j;
  j["n"] = r.n;
  j["outcome"] = r.outcome_name;
  j["treatment"] = r.treatment_name;
  j["tau_ols"] = r.tau_ols;
  j["se_tau_robust"] = r.se_tau_robust;
  j["rho"] = r.moments.rho;
  j["mean_p_treated"] = r.moments.mean_p_1;
  j["mean_p_untreated"] = r.moments.mean_p_0;
  j["var_p_treated"] = r.moments.var_p_1;
  j["var_p_untreated"] = r.moments.var_p_0;
  j["w1"] = r.weights.w1;
  j["w0"] = r.weights.w0;
  j["delta"] = r.weights.delta;
  j["w0_star"] = r.weights.w0_star;
  j["delta_star"] = r.weights.delta_star;
  j["ate"] = r.aple;
  j["att"] = r.aple1;
  j["atu"] = r.aple0;
  j["alpha1"] = r.components.alpha1;
  j["gamma1"] = r.components.gamma1;
  j["alpha0"] = r.components.alpha0;
  j["gamma0"] = r.components.gamma0;
  j["identity_residual"] = r.identity_residual;
  j["note"] =
      "ate/att/atu are sample analogues of the average partial linear "
      "effect; causal only under unconfoundedness given the covariates";

  nlohmann::json fit;
  fit["names"] = r.main_fit.names;
  fit["coef"] = std::vector<double>(r.main_fit.coef.data(),
                                    r.main_fit.coef.data() + r.main_fit.coef.size());
  fit["se_robust"] =
      std::vector<double>(r.main_fit.se_robust.data(),
                          r.main_fit.se_robust.data() + r.main_fit.se_robust.size());
  j["main_fit"] = fit;

  if (opt.bootstrap != nullptr) {
    const auto& b = *opt.bootstrap;
    nlohmann::json bj;
    bj["replicates"] = b.reps_requested;
    bj["seed"] = b.seed;
    bj["n_failed"] = b.n_failed;
    nlohmann::json se;
    for (Eigen::Index k = 0; k < b.se.size(); ++k) {
      const std::string label =
          k < static_cast<Eigen::Index>(opt.bootstrap_labels.size())
              ? opt.bootstrap_labels[static_cast<std::size_t>(k)]
              : "stat" + std::to_string(k);
      se[label] = b.se(k);
    }
    bj["se"] = se;
    j["bootstrap"] = bj;
  }
  return j.dump(2) + "\n";
}

}  // namespace hetdiag
