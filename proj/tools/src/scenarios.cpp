#include "scenarios.hpp"

#include "params.hpp"

#include "molsim/counting.hpp"
#include "molsim/micromaser.hpp"
#include "molsim/momentum.hpp"
#include "molsim/parallel.hpp"
#include "molsim/passage.hpp"

#include <fmt/format.h>

#include <cmath>
#include <numbers>
#include <optional>

namespace molsim::cli {

namespace mm = molsim::micromaser;
namespace ps = molsim::passage;
namespace ct = molsim::counting;
namespace mo = molsim::momentum;

namespace {

constexpr double kPi = std::numbers::pi;

std::string one_line(std::string s) {
  for (char& c : s) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

// ------------------------------------------------------------------ micromaser

struct MicromaserSettings {
  mm::MicromaserParams base;
  double theta_over_pi = 1.0;
};

MicromaserSettings read_micromaser(ParamReader& r, bool u_b_swept) {
  MicromaserSettings s;
  auto& p = s.base;
  p.n_ex = r.positive("n_ex", p.n_ex);
  s.theta_over_pi = r.non_negative("theta_over_pi", 1.0);
  p.theta = s.theta_over_pi * kPi;
  p.t_j = r.non_negative("t_j", 0.0);
  if (r.has("u_b") && r.has("u_b_over_t_j")) r.fail("u_b", "give either u_b or u_b_over_t_j");
  if (!u_b_swept) {
    if (const auto ratio = r.optional_number("u_b_over_t_j")) {
      if (!(p.t_j > 0.0)) r.fail("u_b_over_t_j", "needs t_j > 0");
      if (*ratio < 0.0) r.fail("u_b_over_t_j", "must be >= 0");
      p.u_b = *ratio * p.t_j;
    } else {
      p.u_b = r.non_negative("u_b", 0.0);
    }
  }
  p.eta = r.number("eta", 0.0);
  p.beta = r.number("beta", 0.0);
  p.n_max = r.integer("n_max", 12, 0, 60);
  p.dt = r.positive("dt", p.dt);
  p.t_max = r.positive("t_max", p.t_max);
  p.steady_tol = r.positive("steady_tol", p.steady_tol);
  p.sample_interval = r.positive("sample_interval", p.sample_interval);
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("params", e.what());
  }
  return s;
}

struct SweepSettings {
  MicromaserSettings mm;
  std::string variable;
  std::vector<double> values;
};

SweepSettings read_sweep(ParamReader& r) {
  SweepSettings s;
  s.variable = r.choice("sweep_variable", "theta_over_pi", {"theta_over_pi", "u_b_over_t_j"});
  const bool u_b_swept = s.variable == "u_b_over_t_j";
  if (u_b_swept && (r.has("u_b") || r.has("u_b_over_t_j"))) {
    r.fail("sweep_variable", "u_b is swept; drop u_b / u_b_over_t_j");
  }
  s.mm = read_micromaser(r, u_b_swept);
  s.values = r.grid("values", Json());
  for (double v : s.values) {
    if (v < 0.0) r.fail("values", "sweep values must be >= 0");
  }
  if (u_b_swept && !(s.mm.base.t_j > 0.0)) r.fail("t_j", "a u_b/t_j sweep needs t_j > 0");
  return s;
}

struct PhaseSettings {
  MicromaserSettings mm;
  double interval = 0.5;
  int grid = 64;
  bool stop = false;
};

PhaseSettings read_phase(ParamReader& r) {
  PhaseSettings s;
  s.mm = read_micromaser(r, false);
  s.interval = r.positive("phase_interval", 0.5);
  s.grid = r.integer("phase_grid", 64, 8, 4096);
  s.stop = r.flag("stop_at_steady_state", false);
  return s;
}

std::vector<std::string> micromaser_units() {
  return {"units: time in 1/gamma; rates, u_b and t_j in gamma; theta in units of pi",
          "n_max = per-well Fock cutoff actually used; edge_population = weight at the cutoff"};
}

struct SteadySummary {
  std::vector<double> pn;
  double mean_n = std::nan("");
  std::optional<double> q;
  double jx_over_n = std::nan("");
};

SteadySummary summarize(const mm::SteadyStateResult& res) {
  SteadySummary s;
  s.pn = mm::single_well_distribution(res.rho, mm::Well::left);
  s.mean_n = mm::mean_number(s.pn);
  s.q = mm::mandel_q(s.pn);
  s.jx_over_n = s.mean_n > 0.0 ? std::abs(mm::jx_coherence(res.rho)) / s.mean_n : std::nan("");
  return s;
}

ScenarioResult run_micromaser_sweep(const Json& params, unsigned workers) {
  ParamReader r(params);
  const auto s = read_sweep(r);
  r.finish();

  struct Row {
    mm::MicromaserParams p;
    std::optional<mm::SteadyStateResult> res;
    SteadySummary summary;
    std::string error;
  };
  std::vector<Row> rows(s.values.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    rows[i].p = s.mm.base;
    if (s.variable == "theta_over_pi") {
      rows[i].p.theta = s.values[i] * kPi;
    } else {
      rows[i].p.u_b = s.values[i] * s.mm.base.t_j;
    }
  }
  parallel_for(rows.size(), workers, [&](std::size_t i) {
    try {
      rows[i].res = mm::evolve_to_steady_state(rows[i].p);
      rows[i].summary = summarize(*rows[i].res);
    } catch (const std::exception& e) {
      rows[i].error = one_line(e.what());
    }
  });

  ScenarioResult out;
  out.resolved = r.resolved();
  CsvTable t;
  t.file = "sweep.csv";
  t.comments = micromaser_units();
  t.comments.push_back("mean_n and q refer to one well (both wells are equivalent); "
                       "jx_over_n = |<J_x>|/<n_j>");
  t.comments.push_back("validity: converged = 1 when ||drho/dt||_1 < steady_tol before t_max; "
                       "status = failed rows carry nan");
  t.columns = {"sweep_value", "theta_over_pi", "u_b",     "t_j",     "mean_n",          "q",
               "jx_over_n",   "converged",     "n_max",   "t_final", "edge_population", "status"};
  bool all_converged = true;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows[i];
    PointStatus st;
    st.key = fmt::format("{}={}", s.variable, num(s.values[i]));
    if (!row.res) {
      st.ok = false;
      st.converged = false;
      st.error = row.error;
      t.add_row({num(s.values[i]), num(row.p.theta / kPi), num(row.p.u_b), num(row.p.t_j), "nan",
                 "nan", "nan", "0", "nan", "nan", "nan", "failed"});
    } else {
      st.converged = row.res->converged;
      t.add_row({num(s.values[i]), num(row.p.theta / kPi), num(row.p.u_b), num(row.p.t_j),
                 num(row.summary.mean_n), num(row.summary.q.value_or(std::nan(""))),
                 num(row.summary.jx_over_n), num(row.res->converged), num(row.res->n_max),
                 num(row.res->t_final), num(row.res->edge_population), "ok"});
    }
    all_converged = all_converged && st.converged;
    out.points.push_back(std::move(st));
  }
  out.summary["all_converged"] = all_converged;
  out.tables.push_back(std::move(t));
  return out;
}

ScenarioResult run_micromaser_distribution(const Json& params, unsigned) {
  ParamReader r(params);
  const auto s = read_micromaser(r, false);
  r.finish();

  ScenarioResult out;
  out.resolved = r.resolved();
  PointStatus st;
  st.key = fmt::format("theta_over_pi={}", num(s.theta_over_pi));
  CsvTable t;
  t.file = "distribution.csv";
  t.comments = micromaser_units();
  t.columns = {"n", "P"};
  try {
    const auto res = mm::evolve_to_steady_state(s.base);
    const auto sum = summarize(res);
    st.converged = res.converged;
    t.comments.push_back(fmt::format(
        "steady state: mean_n={} q={} converged={} t_final={} n_max={} edge_population={}",
        num(sum.mean_n), num(sum.q.value_or(std::nan(""))), num(res.converged),
        num(res.t_final), res.n_max, num(res.edge_population)));
    t.comments.push_back("P = single-well molecule number distribution (left well)");
    for (std::size_t n = 0; n < sum.pn.size(); ++n) {
      t.add_row({num(static_cast<int>(n)), num(sum.pn[n])});
    }
    out.summary["mean_n"] = sum.mean_n;
    out.summary["converged"] = res.converged;
  } catch (const std::exception& e) {
    st.ok = false;
    st.converged = false;
    st.error = one_line(e.what());
  }
  out.points.push_back(std::move(st));
  out.tables.push_back(std::move(t));
  return out;
}

ScenarioResult run_micromaser_phase(const Json& params, unsigned) {
  ParamReader r(params);
  const auto s = read_phase(r);
  r.finish();

  ScenarioResult out;
  out.resolved = r.resolved();
  PointStatus st;
  st.key = fmt::format("u_b={}", num(s.mm.base.u_b));
  CsvTable t;
  t.file = "phase.csv";
  t.comments = micromaser_units();
  t.comments.push_back("P = relative-phase density on a grid starting at phi=-pi; "
                       "sum(P)*dphi = 1 per snapshot");
  t.columns = {"t", "phi", "P"};
  try {
    mm::EvolveOptions opts;
    opts.phase_grid = s.grid;
    opts.phase_interval = s.interval;
    opts.stop_at_steady_state = s.stop;
    const auto res = mm::evolve_to_steady_state(s.mm.base, opts);
    const auto sum = summarize(res);
    st.converged = res.converged;
    t.comments.push_back(fmt::format("final state: t={} mean_n={} jx_over_n={} converged={}",
                                     num(res.t_final), num(sum.mean_n), num(sum.jx_over_n),
                                     num(res.converged)));
    for (const auto& snap : res.phases) {
      for (std::size_t k = 0; k < snap.dist.phi.size(); ++k) {
        t.add_row({num(snap.t), num(snap.dist.phi[k]), num(snap.dist.prob[k])});
      }
    }
    out.summary["snapshots"] = res.phases.size();
    out.summary["jx_over_n"] = sum.jx_over_n;
  } catch (const std::exception& e) {
    st.ok = false;
    st.converged = false;
    st.error = one_line(e.what());
  }
  out.points.push_back(std::move(st));
  out.tables.push_back(std::move(t));
  return out;
}

// ------------------------------------------------------------------ passage

struct PassageSettings {
  std::vector<int> n_pairs;
  double fraction = 0.05;
  std::vector<ps::Initial> initials;
  double detuning = 0.0;
  ps::PassageOptions options;
  std::vector<std::string> outputs;
  double meannb_tau_max = 3.0;
  int meannb_points = 301;
  std::vector<double> population_tau;
  int potential_points = 241;
};

bool wants(const PassageSettings& s, const std::string& what) {
  for (const auto& o : s.outputs) {
    if (o == what) return true;
  }
  return false;
}

PassageSettings read_passage(ParamReader& r) {
  PassageSettings s;
  s.n_pairs = r.integers("n_pairs", {500}, 1, 4000);
  s.outputs = r.choices("outputs", {"passage"}, {"passage", "meannb", "population", "potential"});
  s.detuning = r.number("detuning", 0.0);
  if (wants(s, "passage")) {
    s.fraction = r.positive("fraction", 0.05);
    if (s.fraction > 1.0) r.fail("fraction", "must be in (0, 1]");
    const auto initial = r.choice("initial", "both", {"atoms", "molecules", "both"});
    if (initial != "molecules") s.initials.push_back(ps::Initial::all_atoms);
    if (initial != "atoms") s.initials.push_back(ps::Initial::all_molecules);
    s.options.points = r.integer("points", 2000, 16, 1 << 16);
    s.options.t_end = r.non_negative("t_end", 0.0);
  }
  if (wants(s, "meannb")) {
    s.meannb_tau_max = r.positive("meannb_tau_max", 3.0);
    s.meannb_points = r.integer("meannb_points", 301, 2, 100000);
  }
  if (wants(s, "population")) {
    s.population_tau = r.numbers("population_tau", {0.5, 1.0, 1.5, 2.0, 2.5, 3.0});
    for (double v : s.population_tau) {
      if (v < 0.0) r.fail("population_tau", "must be >= 0");
    }
  }
  if (wants(s, "potential")) s.potential_points = r.integer("potential_points", 241, 2, 100000);
  return s;
}

const char* initial_name(ps::Initial i) {
  return i == ps::Initial::all_atoms ? "atoms" : "molecules";
}

ScenarioResult run_passage(const Json& params, unsigned workers) {
  ParamReader r(params);
  const auto s = read_passage(r);
  r.finish();

  ScenarioResult out;
  out.resolved = r.resolved();
  const std::string units = "units: t in 1/chi; tau = chi sqrt(N) t";

  std::vector<std::optional<ps::TCSector>> sectors(s.n_pairs.size());
  std::vector<std::string> sector_error(s.n_pairs.size());
  parallel_for(s.n_pairs.size(), workers, [&](std::size_t i) {
    try {
      sectors[i] = ps::build_sector(s.n_pairs[i], s.detuning);
    } catch (const std::exception& e) {
      sector_error[i] = one_line(e.what());
    }
  });
  auto fail_point = [&](const std::string& key, const std::string& err) {
    out.points.push_back({key, false, false, err});
  };

  if (wants(s, "passage")) {
    struct Job {
      std::size_t sector;
      ps::Initial initial;
      std::optional<ps::PassageTimeResult> res;
      std::string error;
    };
    std::vector<Job> jobs;
    for (std::size_t i = 0; i < s.n_pairs.size(); ++i) {
      for (auto init : s.initials) jobs.push_back({i, init, std::nullopt, {}});
    }
    parallel_for(jobs.size(), workers, [&](std::size_t j) {
      auto& job = jobs[j];
      if (!sectors[job.sector]) {
        job.error = sector_error[job.sector];
        return;
      }
      try {
        job.res = ps::passage_time_distribution(*sectors[job.sector], job.initial, s.fraction,
                                                s.options);
      } catch (const std::exception& e) {
        job.error = one_line(e.what());
      }
    });
    CsvTable t;
    t.file = "passage.csv";
    t.comments = {units,
                  "C = probability that at least n_ref pairs have converted; W = dC/dt on the "
                  "window up to the first maximum of C, normalized",
                  "validity: in_window = 0 rows lie beyond the retained window (W = 0)"};
    t.columns = {"n_pairs", "fraction", "initial", "t", "tau", "C", "W", "in_window"};
    for (const auto& job : jobs) {
      const int n = s.n_pairs[job.sector];
      const auto key = fmt::format("n_pairs={} initial={}", n, initial_name(job.initial));
      if (!job.res) {
        fail_point(key, job.error);
        continue;
      }
      const auto& res = *job.res;
      t.comments.push_back(fmt::format(
          "run n_pairs={} fraction={} initial={}: n_ref={} mean_t={} stddev_t={} window_end_t={} "
          "saturated={}",
          n, num(s.fraction), initial_name(job.initial), res.n_ref, num(res.mean),
          num(res.stddev), num(res.times[res.window_end]), num(res.saturated)));
      const double root = std::sqrt(static_cast<double>(n));
      for (std::size_t k = 0; k < res.times.size(); ++k) {
        t.add_row({num(n), num(s.fraction), initial_name(job.initial), num(res.times[k]),
                   num(res.times[k] * root), num(res.cumulative[k]), num(res.density[k]),
                   num(k <= res.window_end)});
      }
      out.points.push_back({key, true, true, {}});
      out.summary[fmt::format("stddev_{}_{}", n, initial_name(job.initial))] = res.stddev;
    }
    out.tables.push_back(std::move(t));
  }

  if (wants(s, "meannb")) {
    CsvTable t;
    t.file = "meannb.csv";
    t.comments = {units, "exact = <n_b(t)> from the all-atom start; semiclassical = sinh^2(tau)"};
    t.columns = {"n_pairs", "t", "tau", "exact", "semiclassical", "exact_over_n"};
    std::vector<std::vector<std::vector<std::string>>> blocks(s.n_pairs.size());
    parallel_for(s.n_pairs.size(), workers, [&](std::size_t i) {
      if (!sectors[i]) return;
      const int n = s.n_pairs[i];
      const double root = std::sqrt(static_cast<double>(n));
      const ps::SectorEvolver ev(*sectors[i], ps::Initial::all_atoms);
      for (int k = 0; k < s.meannb_points; ++k) {
        const double tau = s.meannb_tau_max * k / (s.meannb_points - 1);
        const double time = tau / root;
        const double exact = ev.mean_nb(time);
        blocks[i].push_back({num(n), num(time), num(tau), num(exact),
                             num(ps::semiclassical_nb(n, time)), num(exact / n)});
      }
    });
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      const auto key = fmt::format("meannb n_pairs={}", s.n_pairs[i]);
      if (!sectors[i]) {
        fail_point(key, sector_error[i]);
        continue;
      }
      for (auto& row : blocks[i]) t.add_row(std::move(row));
      out.points.push_back({key, true, true, {}});
    }
    out.tables.push_back(std::move(t));
  }

  if (wants(s, "population")) {
    CsvTable t;
    t.file = "population.csv";
    t.comments = {units, "P = probability of n molecules (all-atom start)"};
    t.columns = {"n_pairs", "t", "tau", "n", "P"};
    for (std::size_t i = 0; i < s.n_pairs.size(); ++i) {
      const auto key = fmt::format("population n_pairs={}", s.n_pairs[i]);
      if (!sectors[i]) {
        fail_point(key, sector_error[i]);
        continue;
      }
      const int n = s.n_pairs[i];
      const double root = std::sqrt(static_cast<double>(n));
      std::vector<double> times;
      for (double tau : s.population_tau) times.push_back(tau / root);
      const auto hist = ps::evolve_population(*sectors[i], ps::Initial::all_atoms, times);
      for (std::size_t k = 0; k < times.size(); ++k) {
        for (std::size_t nb = 0; nb < hist.prob[k].size(); ++nb) {
          t.add_row({num(n), num(times[k]), num(s.population_tau[k]),
                     num(static_cast<int>(nb)), num(hist.prob[k][nb])});
        }
      }
      out.points.push_back({key, true, true, {}});
    }
    out.tables.push_back(std::move(t));
  }

  if (wants(s, "potential")) {
    CsvTable t;
    t.file = "potential.csv";
    t.comments = {"units: chi = 1; U(n_b) with d^2 n_b/dt^2 = -U'(n_b), U(0) = 0",
                  "validity: rows with physical = 0 have n_b < 0"};
    t.columns = {"n_pairs", "nb", "nb_over_n", "U", "U_over_n3", "physical"};
    for (int n : s.n_pairs) {
      const double nn = static_cast<double>(n);
      t.comments.push_back(fmt::format(
          "n_pairs={}: all-atom start at nb=0, all-molecule start at nb={}, minimum at nb={}", n,
          n, num(ps::potential_minimum(n))));
      for (int k = 0; k < s.potential_points; ++k) {
        const double x = -0.1 + 1.2 * k / (s.potential_points - 1);
        const double nb = x * nn;
        const double u = ps::effective_potential(n, nb);
        t.add_row({num(n), num(nb), num(x), num(u), num(u / (nn * nn * nn)), num(nb >= 0.0)});
      }
      out.points.push_back({fmt::format("potential n_pairs={}", n), true, true, {}});
    }
    out.tables.push_back(std::move(t));
  }
  return out;
}

// ------------------------------------------------------------------ counting

struct CountingSettings {
  ct::CountingModelSpec spec;
  std::string mode;
  std::vector<double> times;
  std::vector<double> v_values;
  double target_n = 1e-3;
};

CountingSettings read_counting(ParamReader& r) {
  CountingSettings s;
  const auto model = r.choice("model", "bec", {"bec", "nfg", "bcs"});
  s.spec.kind = model == "bec" ? ct::ModelKind::bec
                : model == "nfg" ? ct::ModelKind::nfg
                                 : ct::ModelKind::bcs;
  s.mode = r.choice("mode", "evolution", {"evolution", "gap-sweep"});
  if (s.mode == "gap-sweep" && s.spec.kind != ct::ModelKind::bcs) {
    r.fail("mode", "gap-sweep needs model = bcs");
  }
  s.spec.detuning = r.number("detuning", 0.0);
  if (s.spec.kind == ct::ModelKind::bec) {
    s.spec.n_max_pairs = r.integer("n_max_pairs", 30, 1, 400);
  } else {
    const int modes = r.integer("modes", 10, 2, ct::kMaxModes);
    s.spec.mu = r.positive("mu", 0.1);
    s.spec.pair_energies = ct::caption_pair_energies(modes, s.spec.mu);
  }
  if (s.spec.kind == ct::ModelKind::bcs && s.mode == "evolution") {
    s.spec.v = r.non_negative("v", 0.03);
  }
  if (s.mode == "evolution") {
    const Json fallback = s.spec.kind == ct::ModelKind::bec
                              ? Json{{"from", 0.0}, {"to", 0.2}, {"points", 101}}
                              : Json{{"from", 0.0}, {"to", 1.0}, {"points", 101}};
    s.times = r.grid("times", fallback);
    for (double t : s.times) {
      if (t < 0.0) r.fail("times", "must be >= 0");
    }
  } else {
    s.v_values = r.grid("v_values", Json{{"from", 0.0}, {"to", 0.1}, {"points", 11}});
    for (double v : s.v_values) {
      if (v < 0.0) r.fail("v_values", "must be >= 0");
    }
    s.target_n = r.positive("target_n", 1e-3);
  }
  s.spec.times = s.times;
  try {
    s.spec.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("params", e.what());
  }
  return s;
}

ScenarioResult run_counting(const Json& params, unsigned workers) {
  ParamReader r(params);
  const auto s = read_counting(r);
  r.finish();

  ScenarioResult out;
  out.resolved = r.resolved();
  const std::string units = "units: energies in hbar chi, times in 1/chi";

  if (s.mode == "gap-sweep") {
    std::vector<std::optional<ct::GapPoint>> pts(s.v_values.size());
    std::vector<std::string> errors(s.v_values.size());
    // one point per V; each evaluation is independent
    parallel_for(s.v_values.size(), workers, [&](std::size_t i) {
      try {
        const std::vector<double> one{s.v_values[i]};
        pts[i] = ct::g2_versus_gap(s.spec, one, s.target_n, 1).front();
      } catch (const std::exception& e) {
        errors[i] = one_line(e.what());
      }
    });
    CsvTable t;
    t.file = "g2ofgap.csv";
    t.comments = {units, fmt::format("g2 evaluated at t0 where <n(t0)> = {}", num(s.target_n)),
                  "validity: g2 = nan when <n> vanishes"};
    t.columns = {"v", "gap", "atom_number", "t0", "g2"};
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const auto key = fmt::format("v={}", num(s.v_values[i]));
      if (!pts[i]) {
        out.points.push_back({key, false, false, errors[i]});
        continue;
      }
      const auto& p = *pts[i];
      t.add_row({num(p.v), num(p.gap), num(p.atom_number), num(p.t0),
                 num(p.g2.value_or(std::nan("")))});
      out.points.push_back({key, true, p.g2.has_value(), {}});
    }
    out.tables.push_back(std::move(t));
    return out;
  }

  PointStatus st;
  st.key = fmt::format("model={}", ct::to_string(s.spec.kind));
  try {
    std::optional<ct::BCSGroundState> ground;
    if (s.spec.kind == ct::ModelKind::bcs) ground = ct::solve_bcs_ground_state(s.spec);
    const auto evolver = ground ? ct::CountingEvolver(s.spec, *ground) : ct::CountingEvolver(s.spec);
    const auto stats = evolver.run(s.times);

    CsvTable pn;
    pn.file = "pnstats.csv";
    pn.comments = {units, "P = probability of n molecules at time t"};
    pn.columns = {"t", "n", "P"};
    CsvTable mom;
    mom.file = "moments.csv";
    mom.comments = {units,
                    "thermal_fit_mean / fit_residual: geometric fit and its total-variation "
                    "distance to P(n)",
                    "perturbative_n = first-order short-time prediction, valid while mean << 1",
                    "validity: g2 and fit columns are nan while <n> vanishes"};
    mom.columns = {"t", "mean", "g2", "thermal_fit_mean", "fit_residual", "perturbative_n"};
    for (std::size_t k = 0; k < stats.times.size(); ++k) {
      const auto& p = stats.pn[k];
      for (std::size_t n = 0; n < p.size(); ++n) {
        pn.add_row({num(stats.times[k]), num(static_cast<int>(n)), num(p[n])});
      }
      double fit_mean = std::nan("");
      double fit_res = std::nan("");
      if (stats.mean[k] > 1e-12) {
        const auto fit = ct::thermal_fit(p);
        fit_mean = fit.mean;
        fit_res = fit.residual;
      }
      mom.add_row({num(stats.times[k]), num(stats.mean[k]),
                   num(stats.g2[k].value_or(std::nan(""))), num(fit_mean), num(fit_res),
                   num(ct::perturbative_n(s.spec, stats.times[k], ground))});
    }
    out.tables.push_back(std::move(pn));
    out.tables.push_back(std::move(mom));
    if (ground) {
      CsvTable b;
      b.file = "bcs.csv";
      b.comments = {units, "ground state of the discrete gap equation on the pair-energy grid"};
      b.columns = {"gap", "atom_number", "v", "mu", "cooper_pairs", "residual", "trivial"};
      b.add_row({num(ground->gap), num(ground->atom_number), num(s.spec.v), num(s.spec.mu),
                 num(ground->cooper_pairs()), num(ground->residual), num(ground->trivial)});
      out.tables.push_back(std::move(b));
      out.summary["gap"] = ground->gap;
      out.summary["atom_number"] = ground->atom_number;
    }
    out.summary["dimension"] = evolver.dimension();
  } catch (const std::exception& e) {
    st.ok = false;
    st.converged = false;
    st.error = one_line(e.what());
  }
  out.points.push_back(std::move(st));
  return out;
}

// ------------------------------------------------------------------ momentum

struct MomentumSettings {
  std::vector<std::string> models;
  mo::BecTrap bec;
  mo::FermiTrap fermi;
  double bec_p_max = 100.0;
  int bec_points = 200;
  double fermi_p_max = 2.2;
  int fermi_points = 200;
};

MomentumSettings read_momentum(ParamReader& r) {
  MomentumSettings s;
  s.models = r.choices("models", {"bec", "bcs"}, {"bec", "nfg", "bcs"});
  bool bec = false;
  bool fermi = false;
  for (const auto& m : s.models) (m == "bec" ? bec : fermi) = true;
  const double atoms = r.positive("atoms", 1e5);
  if (bec) {
    s.bec.atoms = atoms;
    s.bec.scattering_length = r.positive("scattering_length", s.bec.scattering_length);
    s.bec.temperature = r.non_negative("temperature", s.bec.temperature);
    s.bec_p_max = r.positive("bec_p_max", 100.0);
    s.bec_points = r.integer("bec_points", 200, 2, 100000);
  }
  if (fermi) {
    s.fermi.atoms = atoms;
    s.fermi.kf_a = r.positive("kf_a", s.fermi.kf_a);
    s.fermi.a_osc = r.positive("a_osc", s.fermi.a_osc);
    s.fermi_p_max = r.positive("fermi_p_max", 2.2);
    s.fermi_points = r.integer("fermi_points", 200, 2, 100000);
  }
  try {
    if (bec) s.bec.validate();
    if (fermi) s.fermi.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("params", e.what());
  }
  return s;
}

ScenarioResult run_momentum(const Json& params, unsigned workers) {
  ParamReader r(params);
  const auto s = read_momentum(r);
  r.finish();

  ScenarioResult out;
  out.resolved = r.resolved();
  for (const auto& model : s.models) {
    PointStatus st;
    st.key = "model=" + model;
    try {
      mo::RadialMomentumDistribution d;
      if (model == "bec") {
        // the thermal term diverges at p = 0, so the grid starts one step out
        std::vector<double> p;
        for (int k = 1; k <= s.bec_points; ++k) p.push_back(s.bec_p_max * k / s.bec_points);
        d = mo::bec_distribution(s.bec, p, workers);
      } else {
        const auto p = mo::linear_grid(0.0, s.fermi_p_max, s.fermi_points);
        d = model == "nfg" ? mo::nfg_distribution(s.fermi, p, workers)
                           : mo::bcs_distribution(s.fermi, p, workers);
      }
      CsvTable t;
      t.file = "nofp_" + model + ".csv";
      t.comments.push_back("model: " + d.model);
      t.comments.push_back("units: " + d.units);
      for (const auto& [k, v] : d.metadata) t.comments.push_back(k + " = " + num(v));
      t.comments.push_back("validity: valid_flag = 0 outside the model's range of validity; "
                           "quadrature_ok = 0 where the radial integral did not converge");
      t.columns = {"p", "coherent", "noise", "total", "valid_flag", "quadrature_ok", "units"};
      bool converged = true;
      for (std::size_t i = 0; i < d.p.size(); ++i) {
        converged = converged && d.quadrature_converged[i];
        t.add_row({num(d.p[i]), num(d.coherent[i]), num(d.noise[i]), num(d.total[i]),
                   num(static_cast<bool>(d.valid[i])),
                   num(static_cast<bool>(d.quadrature_converged[i])), d.units});
      }
      st.converged = converged;
      out.tables.push_back(std::move(t));
    } catch (const std::exception& e) {
      st.ok = false;
      st.converged = false;
      st.error = one_line(e.what());
    }
    out.points.push_back(std::move(st));
  }
  return out;
}

}  // namespace

Json validate_params(Scenario scenario, const Json& params) {
  ParamReader r(params);
  switch (scenario) {
    case Scenario::micromaser_sweep: read_sweep(r); break;
    case Scenario::micromaser_phase: read_phase(r); break;
    case Scenario::micromaser_distribution: read_micromaser(r, false); break;
    case Scenario::passage_time: read_passage(r); break;
    case Scenario::counting: read_counting(r); break;
    case Scenario::momentum: read_momentum(r); break;
  }
  r.finish();
  return r.resolved();
}

ScenarioResult run_scenario(const ScenarioConfig& cfg, unsigned workers) {
  switch (cfg.scenario) {
    case Scenario::micromaser_sweep: return run_micromaser_sweep(cfg.params, workers);
    case Scenario::micromaser_phase: return run_micromaser_phase(cfg.params, workers);
    case Scenario::micromaser_distribution: return run_micromaser_distribution(cfg.params, workers);
    case Scenario::passage_time: return run_passage(cfg.params, workers);
    case Scenario::counting: return run_counting(cfg.params, workers);
    case Scenario::momentum: return run_momentum(cfg.params, workers);
  }
  throw std::logic_error("run_scenario: unhandled scenario");
}

}  // namespace molsim::cli
