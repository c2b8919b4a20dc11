#include "presets.hpp"

#include <cmath>

namespace molsim::cli {

namespace {

Json doc(const char* scenario, const char* name, Json params) {
  return Json{{"format_version", kFormatVersion},
              {"scenario", scenario},
              {"name", name},
              {"params", std::move(params)}};
}

// Steady states do not depend on the RK4 step (the fixed point of the
// discrete map is the kernel of the generator), so figure presets take the
// largest stable step and a long horizon instead of the library defaults.
Json steady(Json p) {
  p["n_max"] = 0;
  p["dt"] = 0.05;
  p["t_max"] = 400.0;
  return p;
}

Json theta_sweep(double t_j) {
  return steady(Json{{"t_j", t_j},
                     {"sweep_variable", "theta_over_pi"},
                     {"values", Json{{"from", 0.05}, {"to", 4.0}, {"points", 80}}}});
}

Json phase(double ratio) {
  return Json{{"theta_over_pi", 1.0}, {"t_j", 2.5},          {"u_b_over_t_j", ratio},
              {"n_max", 12},          {"dt", 0.01},          {"t_max", 20.0},
              {"phase_interval", 0.25}, {"stop_at_steady_state", false}};
}

std::vector<Preset> build() {
  const double sqrt5 = std::sqrt(5.0);
  std::vector<Preset> out;
  out.push_back({"fig-II1a", "Fig. II1(a)", "single-well <n> vs theta, t_J = 0",
                 doc("micromaser-sweep", "fig-II1a", theta_sweep(0.0))});
  out.push_back({"fig-II1b", "Fig. II1(b)", "single-well <n> vs theta, t_J = 5",
                 doc("micromaser-sweep", "fig-II1b", theta_sweep(5.0))});
  out.push_back({"fig-II2a", "Fig. II2(a)", "Mandel Q vs theta, t_J = 0",
                 doc("micromaser-sweep", "fig-II2a", theta_sweep(0.0))});
  out.push_back({"fig-II2b", "Fig. II2(b)", "Mandel Q vs theta, t_J = 5",
                 doc("micromaser-sweep", "fig-II2b", theta_sweep(5.0))});
  out.push_back({"fig-II3a", "Fig. II3(a)", "P(n) at theta = sqrt(5) pi, t_J = 0 (trapping state)",
                 doc("micromaser-distribution", "fig-II3a",
                     steady(Json{{"theta_over_pi", sqrt5}, {"t_j", 0.0}}))});
  out.push_back({"fig-II3b", "Fig. II3(b)", "P(n) at theta = sqrt(5) pi, t_J = 5",
                 doc("micromaser-distribution", "fig-II3b",
                     steady(Json{{"theta_over_pi", sqrt5}, {"t_j", 5.0}}))});
  {
    Json p = steady(Json{{"theta_over_pi", 1.0},
                         {"t_j", 2.5},
                         {"sweep_variable", "u_b_over_t_j"},
                         {"values", Json{{"from", std::pow(10.0, -2.5)},
                                         {"to", 100.0},
                                         {"points", 28},
                                         {"log", true}}}});
    p["n_max"] = 14;
    out.push_back({"fig-II4", "Fig. II4", "|<J_x>|/<n_j> vs u_b/t_J at theta = pi, t_J = 2.5",
                   doc("micromaser-sweep", "fig-II4", std::move(p))});
  }
  out.push_back({"fig-II5a", "Fig. II5(a)", "relative-phase evolution, Rabi regime",
                 doc("micromaser-phase", "fig-II5a", phase(0.0032))});
  out.push_back({"fig-II5b", "Fig. II5(b)", "relative-phase evolution, Josephson regime",
                 doc("micromaser-phase", "fig-II5b", phase(0.5623))});
  out.push_back({"fig-II5c", "Fig. II5(c)", "relative-phase evolution, Fock regime",
                 doc("micromaser-phase", "fig-II5c", phase(56.23))});
  out.push_back({"fig-III1", "Fig. III1", "short-time <n_b>: exact vs sinh^2 for N = 100, 250, 500",
                 doc("passage-time", "fig-III1",
                     Json{{"n_pairs", {100, 250, 500}}, {"outputs", {"meannb"}}})});
  out.push_back({"fig-III4", "Fig. III4", "passage-time distributions, N = 500, 5% conversion",
                 doc("passage-time", "fig-III4",
                     Json{{"n_pairs", 500}, {"fraction", 0.05}, {"initial", "both"}})});
  out.push_back({"fig-III5", "Fig. III5", "effective potential for the pair number",
                 doc("passage-time", "fig-III5",
                     Json{{"n_pairs", 500}, {"outputs", {"potential"}}})});
  out.push_back({"fig-PnBEC", "Fig. PnBEC", "molecule statistics from a BEC, N_max = 30",
                 doc("counting", "fig-PnBEC",
                     Json{{"model", "bec"}, {"n_max_pairs", 30},
                          {"times", Json{{"from", 0.0}, {"to", 0.2}, {"points", 101}}}})});
  out.push_back({"fig-PnNFG", "Fig. PnNFG", "molecule statistics from a normal Fermi gas, N_a = 20",
                 doc("counting", "fig-PnNFG",
                     Json{{"model", "nfg"}, {"modes", 10}, {"mu", 0.1},
                          {"times", Json{{"from", 0.0}, {"to", 1.0}, {"points", 101}}}})});
  out.push_back({"fig-PnBCS", "Fig. PnBCS", "molecule statistics from a paired Fermi gas, V = 0.03",
                 doc("counting", "fig-PnBCS",
                     Json{{"model", "bcs"}, {"modes", 10}, {"mu", 0.1}, {"v", 0.03},
                          {"times", Json{{"from", 0.0}, {"to", 1.0}, {"points", 101}}}})});
  out.push_back({"fig-g2ofgap", "Fig. g2ofgap", "g2(0+) vs the BCS gap",
                 doc("counting", "fig-g2ofgap",
                     Json{{"model", "bcs"}, {"mode", "gap-sweep"}, {"modes", 10}, {"mu", 0.1},
                          {"v_values", {0.0, 0.01, 0.015, 0.02, 0.025, 0.03, 0.04, 0.05, 0.07, 0.1}}})});
  out.push_back({"fig-nofp-broad", "Fig. nofp_broad",
                 "momentum distributions of molecules from a BEC and a BCS gas, N = 1e5",
                 doc("momentum", "fig-nofp-broad",
                     Json{{"models", {"bec", "nfg", "bcs"}}, {"atoms", 1e5}})});
  return out;
}

}  // namespace

const std::vector<Preset>& presets() {
  static const std::vector<Preset> all = build();
  return all;
}

std::optional<Preset> find_preset(std::string_view name) {
  for (const auto& p : presets()) {
    if (p.name == name) return p;
  }
  return std::nullopt;
}

}  // namespace molsim::cli
