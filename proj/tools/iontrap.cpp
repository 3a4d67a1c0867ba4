// iontrap: structure and intrinsic decoherence budget of a linear ion chain.
//
// Subcommands: positions | modes | continuum | sums | decohere | sweep |
// spin-verify | mc-dephase. Data goes to stdout (or --out), logs and the JSON
// run manifest to stderr. Identical configuration and seed give byte-identical
// output; the only environment influence is IONTRAP_THREADS, which changes
// scheduling but never results.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "iontrap/constants.hpp"
#include "iontrap/continuum.hpp"
#include "iontrap/decoherence.hpp"
#include "iontrap/ion_array.hpp"
#include "iontrap/monte_carlo.hpp"
#include "iontrap/spin.hpp"
#include "iontrap/sums.hpp"
#include "iontrap/version.hpp"

using json = nlohmann::json;
using namespace iontrap;

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

struct Csv {
  std::ostringstream body;

  explicit Csv(const std::vector<std::string>& header) {
    for (std::size_t i = 0; i < header.size(); ++i) body << (i ? "," : "") << header[i];
    body << "\n";
  }

  void row(const std::vector<double>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) body << (i ? "," : "") << num(values[i]);
    body << "\n";
  }

  std::string str() const { return body.str(); }
};

struct Sink {
  std::string format = "csv";
  std::string out_path;  // empty: stdout

  void data(const std::string& content) const {
    if (out_path.empty()) {
      std::cout << content;
      return;
    }
    std::ofstream f(out_path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open output file " + out_path);
    f << content;
  }

  void manifest(json j) const {
    j["version"] = IONTRAP_VERSION;
    const std::string text = j.dump();
    if (out_path.empty()) {
      std::cerr << text << "\n";
      return;
    }
    std::ofstream f(out_path + ".manifest.json", std::ios::binary);
    if (f) f << text << "\n";
  }
};

// --- shared option bundles ---------------------------------------------------

struct TrapArgs {
  int n = 10;
  double omega_z = 2.0 * M_PI * 100e3;
  double omega_t = 2.0 * M_PI * 20e6;
  double mass_amu = 137.905;
  int charge = 1;
  double temperature = 0.0;
  std::string preset;  // the defaults above are exactly the ba138 preset

  TrapConfig<double> config(const PhysicalConstants<double>& pc) const {
    TrapConfig<double> cfg;
    cfg.n_ions = n;
    cfg.omega_z = omega_z;
    cfg.omega_t = omega_t;
    cfg.species = {preset.empty() ? "custom" : preset, mass_amu * pc.amu, charge};
    cfg.temperature = temperature;
    cfg.validate();
    if (cfg.linear_regime_flagged())
      std::cerr << "note: omega_t/omega_z = " << num(omega_t / omega_z)
                << " is below 10; the fluid structure laws assume a stiff transverse trap\n";
    return cfg;
  }
};

struct TransitionArgs {
  int multipole_a = 2;
  double omega_0 = 2.0 * M_PI * 1.7e14;
  double tau_s = 35.0;
  double coupling = 1.0;

  TransitionSpec<double> spec() const {
    TransitionSpec<double> t;
    t.multipole_a = multipole_a;
    t.omega_0 = omega_0;
    t.tau_s = tau_s;
    t.coupling_constant = coupling;
    t.validate();
    return t;
  }
};

void add_trap_options(CLI::App* cmd, TrapArgs& t, bool with_n = true) {
  if (with_n) cmd->add_option("--n", t.n, "Number of ions")->check(CLI::Range(1, 1000000000));
  cmd->add_option("--omega-z", t.omega_z, "Axial trap frequency [rad/s]");
  cmd->add_option("--omega-t", t.omega_t, "Transverse trap frequency [rad/s]");
  cmd->add_option("--mass-amu", t.mass_amu, "Ion mass [u]");
  cmd->add_option("--charge", t.charge, "Charge number");
  cmd->add_option("--temperature", t.temperature, "Ion temperature [K]");
  cmd->add_option("--preset", t.preset,
                  "Parameter preset; ba138 pins the 138Ba+ worked-example values")
      ->check(CLI::IsMember({"ba138"}));
}

void add_transition_options(CLI::App* cmd, TransitionArgs& t) {
  cmd->add_option("--multipole-a", t.multipole_a, "Transition multipole order: 1 (E1) or 2 (E2)")
      ->check(CLI::Range(1, 2));
  cmd->add_option("--omega-0", t.omega_0, "Optical transition frequency [rad/s]");
  cmd->add_option("--tau-s", t.tau_s, "Spontaneous decay time [s]");
  cmd->add_option("--coupling", t.coupling, "Order-one coupling constant in d_a^2");
}

json trap_json(const TrapArgs& t) {
  return {{"n", t.n},
          {"omega_z", t.omega_z},
          {"omega_t", t.omega_t},
          {"mass_amu", t.mass_amu},
          {"charge", t.charge},
          {"temperature", t.temperature},
          {"preset", t.preset}};
}

json transition_json(const TransitionArgs& t) {
  return {{"multipole_a", t.multipole_a},
          {"omega_0", t.omega_0},
          {"tau_s", t.tau_s},
          {"coupling", t.coupling}};
}

ContinuumModel parse_model(const std::string& name) {
  if (name == "simple-balance") return ContinuumModel::SimpleBalance;
  if (name == "dubin-fluid") return ContinuumModel::DubinFluid;
  if (name == "hughes-fit") return ContinuumModel::HughesFit;
  throw std::invalid_argument("unknown model " + name);
}

int mc_threads_from_env() {
  const char* env = std::getenv("IONTRAP_THREADS");
  if (!env) return 0;
  const int n = std::atoi(env);
  return n > 0 ? n : 0;
}

// --- subcommand handlers ------------------------------------------------------

int run_positions(const TrapArgs& trap, double tol, int max_iter, const Sink& sink) {
  const auto pc = PhysicalConstants<double>::codata2018();
  const auto cfg = trap.config(pc);
  const auto arr = solve_equilibrium(cfg, pc, {tol, max_iter});

  if (sink.format == "csv") {
    Csv csv({"ion_idx", "z_d0", "z_m"});
    for (Eigen::Index i = 0; i < arr.size(); ++i)
      csv.row({double(i), arr.positions_scaled[i], arr.positions_scaled[i] * arr.d0});
    sink.data(csv.str());
  } else {
    json out{{"d0_m", arr.d0},
             {"residual", arr.residual_gradient_norm},
             {"z_d0", std::vector<double>(arr.positions_scaled.data(),
                                          arr.positions_scaled.data() + arr.size())}};
    sink.data(out.dump(2) + "\n");
  }
  sink.manifest({{"command", "positions"}, {"trap", trap_json(trap)}, {"tol", tol}});
  return 0;
}

int run_modes(const TrapArgs& trap, double tol, int max_iter, const Sink& sink) {
  const auto pc = PhysicalConstants<double>::codata2018();
  const auto cfg = trap.config(pc);
  const auto arr = solve_equilibrium(cfg, pc, {tol, max_iter});
  const auto modes = longitudinal_mode_frequencies(arr);

  if (sink.format == "csv") {
    Csv csv({"mode_idx", "freq_omega_z", "freq_rad_per_s"});
    for (Eigen::Index i = 0; i < modes.size(); ++i)
      csv.row({double(i), modes[i], modes[i] * cfg.omega_z});
    sink.data(csv.str());
  } else {
    json out{{"omega_z_rad_per_s", cfg.omega_z},
             {"freq_omega_z", std::vector<double>(modes.data(), modes.data() + modes.size())}};
    sink.data(out.dump(2) + "\n");
  }
  sink.manifest({{"command", "modes"}, {"trap", trap_json(trap)}, {"tol", tol}});
  return 0;
}

int run_continuum(int n_ions, const std::string& model_name, int points, const Sink& sink) {
  const auto model = parse_model(model_name);
  const double L = half_length<double>(n_ions, model);

  json rows = json::array();
  Csv csv({"z_d0", "spacing_d0", "ion_count_1"});
  for (int k = 0; k < points; ++k) {
    const double z = -0.999 * L + 1.998 * L * k / (points - 1);
    const double s = spacing_profile(z, n_ions, model);
    const double c = ion_count_profile(z, n_ions, model);
    csv.row({z, s, c});
    if (sink.format == "json")
      rows.push_back({{"z_d0", z}, {"spacing_d0", s}, {"ion_count", c}});
  }
  if (sink.format == "csv") {
    sink.data(csv.str());
  } else {
    sink.data(json{{"model", model_name},
                   {"half_length_d0", L},
                   {"min_spacing_d0", min_spacing<double>(n_ions, model)},
                   {"profile", rows}}
                  .dump(2) +
              "\n");
  }
  sink.manifest(
      {{"command", "continuum"}, {"n", n_ions}, {"model", model_name}, {"points", points}});
  return 0;
}

int run_sums(const TrapArgs& trap, const std::string& model_name, int n_min, int n_max,
             double tol, int max_iter, const Sink& sink) {
  if (n_max < n_min) throw std::invalid_argument("sums: --n-max must be >= --n-min");
  const auto pc = PhysicalConstants<double>::codata2018();
  const auto cfg = trap.config(pc);
  const auto model = parse_model(model_name);
  const auto arr = solve_equilibrium(cfg, pc, {tol, max_iter});

  Csv csv({"power_1", "t_exact_per_d0n", "t_integral_per_d0n", "t_asymptotic_per_d0n",
           "rel_err_integral_1", "rel_err_asymptotic_1"});
  json rows = json::array();
  for (int n = n_min; n <= n_max; ++n) {
    const double exact = t_n_exact(arr, n);
    const double integral = t_n_continuum<double>(cfg.n_ions, n, model, TnForm::Integral);
    const double asymptotic = t_n_continuum<double>(cfg.n_ions, n, model, TnForm::Asymptotic);
    const auto ci = make_comparison(exact, integral);
    const auto ca = make_comparison(exact, asymptotic);
    csv.row({double(n), exact, integral, asymptotic, ci.relative_error, ca.relative_error});
    if (sink.format == "json")
      rows.push_back({{"power", n},
                      {"t_exact", exact},
                      {"t_integral", integral},
                      {"t_asymptotic", asymptotic},
                      {"rel_err_integral", ci.relative_error},
                      {"rel_err_asymptotic", ca.relative_error}});
  }
  if (sink.format == "csv")
    sink.data(csv.str());
  else
    sink.data(json{{"model", model_name}, {"rows", rows}}.dump(2) + "\n");
  sink.manifest({{"command", "sums"},
                 {"trap", trap_json(trap)},
                 {"model", model_name},
                 {"n_min", n_min},
                 {"n_max", n_max}});
  return 0;
}

int run_decohere(const TrapArgs& trap, const TransitionArgs& trans,
                 const std::string& model_name, const std::string& path, bool factor_two,
                 double tol, int max_iter, const Sink& sink) {
  const auto pc = PhysicalConstants<double>::codata2018();
  const auto cfg = trap.config(pc);
  const auto spec = trans.spec();
  const auto model = parse_model(model_name);

  DecoherenceReport<double> rep;
  if (path == "exact") {
    const auto arr = solve_equilibrium(cfg, pc, {tol, max_iter});
    rep = report_exact(arr, spec, cfg, pc, model, factor_two);
  } else {
    rep = report_continuum(spec, cfg, pc, model, RatePath::SumPipeline, factor_two);
  }

  if (sink.format == "csv") {
    Csv csv({"n_1", "d0_m", "s0_exact_m", "s0_model_m", "tau_vib_s", "tau_rad_s", "t_dec_s"});
    csv.row({double(rep.n_ions), rep.d0, rep.s0_exact, rep.s0_model, rep.tau_vib, rep.tau_rad,
             rep.t_dec});
    sink.data(csv.str());
  } else {
    json out{{"n", rep.n_ions},
             {"model", to_string(rep.model)},
             {"path", path},
             {"d0_m", rep.d0},
             {"s0_model_m", rep.s0_model},
             {"tau_vib_s", rep.tau_vib},
             {"tau_rad_s", rep.tau_rad},
             {"t_dec_s", rep.t_dec},
             {"hughes_s0_m",
              min_spacing<double>(rep.n_ions, ContinuumModel::HughesFit) * rep.d0}};
    if (std::isfinite(rep.s0_exact)) out["s0_exact_m"] = rep.s0_exact;
    if (rep.per_ion_rates.size() > 0)
      out["per_ion_rate_per_s"] = std::vector<double>(
          rep.per_ion_rates.data(), rep.per_ion_rates.data() + rep.per_ion_rates.size());
    sink.data(out.dump(2) + "\n");
  }
  sink.manifest({{"command", "decohere"},
                 {"trap", trap_json(trap)},
                 {"transition", transition_json(trans)},
                 {"model", model_name},
                 {"path", path},
                 {"radiative_factor_two", factor_two}});
  return 0;
}

int run_sweep(const TrapArgs& trap, const TransitionArgs& trans, const std::string& regime,
              const std::string& path, const std::string& model_name, std::vector<int> n_list,
              int n_start, int n_stop, int n_count, int exact_cap, bool factor_two, double tol,
              const Sink& sink) {
  const auto pc = PhysicalConstants<double>::codata2018();
  const auto base = trap.config(pc);
  const auto spec = trans.spec();

  if (n_list.empty()) {
    for (int k = 0; k < n_count; ++k) {
      const int n = int(std::lround(
          n_start * std::pow(double(n_stop) / n_start, double(k) / (n_count - 1))));
      if (n_list.empty() || n > n_list.back()) n_list.push_back(n);
    }
  }

  SweepOptions<double> opts;
  opts.regime = regime == "fixed-s0" ? SweepRegime::FixedS0 : SweepRegime::FixedOmegaZ;
  opts.path = path == "exact" ? SweepPath::Exact : SweepPath::Continuum;
  opts.model = parse_model(model_name);
  opts.exact_n_cap = exact_cap;
  opts.radiative_factor_two = factor_two;
  opts.solve.tol = tol;
  const auto res = scaling_sweep(n_list, spec, base, pc, opts);

  const json summary{{"regime", regime},
                     {"path", path},
                     {"model", model_name},
                     {"multipole_a", spec.multipole_a},
                     {"fitted_exponent", res.fitted_exponent},
                     {"fit_residual_rms", res.fit_residual_rms}};

  if (sink.format == "csv") {
    Csv csv({"n_1", "omega_z_rad_per_s", "s0_m", "tau_vib_inv_per_s", "tau_rad_inv_per_s",
             "t_dec_s", "fit_rate_per_s"});
    for (const auto& p : res.points)
      csv.row({double(p.n_ions), p.omega_z, p.s0, p.tau_vib_inv, p.tau_rad_inv, p.t_dec,
               p.fit_observable});
    sink.data(csv.str());
  } else {
    json rows = json::array();
    for (const auto& p : res.points)
      rows.push_back({{"n", p.n_ions},
                      {"omega_z_rad_per_s", p.omega_z},
                      {"s0_m", p.s0},
                      {"tau_vib_inv_per_s", p.tau_vib_inv},
                      {"tau_rad_inv_per_s", p.tau_rad_inv},
                      {"t_dec_s", p.t_dec},
                      {"fit_rate_per_s", p.fit_observable}});
    sink.data(json{{"summary", summary}, {"points", rows}}.dump(2) + "\n");
  }
  sink.manifest({{"command", "sweep"},
                 {"trap", trap_json(trap)},
                 {"transition", transition_json(trans)},
                 {"n_list", n_list},
                 {"summary", summary}});
  return 0;
}

int run_spin_verify(double omega_0, double ratio, int spp, int points, const Sink& sink) {
  const auto s0 = SpinState<double>::equal_superposition();
  const double eps = ratio * omega_0;

  Csv csv({"case_idx", "t_s", "phi_rad", "overlap_1", "cos_phi_1", "abs_err_1"});
  json cases = json::array();

  // case 0: static drive, a full phase sweep to Phi = pi
  {
    const auto drive = TransverseDrive<double>::constant(eps);
    std::vector<double> times;
    for (int k = 1; k <= points; ++k)
      times.push_back(M_PI * omega_0 / (eps * eps) * k / points);
    const auto states = evolve_sampled(omega_0, drive, s0, times, spp);
    double worst = 0.0;
    for (std::size_t k = 0; k < times.size(); ++k) {
      const double phi = dynamical_phase(drive, times[k], omega_0);
      const double ov = overlap(s0, states[k]).real();
      worst = std::max(worst, std::abs(ov - std::cos(phi)));
      csv.row({0.0, times[k], phi, ov, std::cos(phi), std::abs(ov - std::cos(phi))});
    }
    cases.push_back({{"case", "static"},
                     {"amplitude_ratio", ratio},
                     {"worst_abs_err", worst}});
  }

  // case 1: slow sinusoid at Omega = omega_0/1000; Phi grows at eps^2/2omega_0
  {
    const auto drive = TransverseDrive<double>::sinusoid_x(eps, omega_0 / 1000.0);
    std::vector<double> times;
    for (int k = 1; k <= points; ++k)
      times.push_back(2.0 * M_PI / (ratio * ratio * omega_0) * k / points);
    const auto states = evolve_sampled(omega_0, drive, s0, times, spp);
    const auto rep = adiabaticity_check(drive, omega_0);
    double worst = 0.0;
    for (std::size_t k = 0; k < times.size(); ++k) {
      const double phi = dynamical_phase(drive, times[k], omega_0);
      const double ov = overlap(s0, states[k]).real();
      worst = std::max(worst, std::abs(ov - std::cos(phi)));
      csv.row({1.0, times[k], phi, ov, std::cos(phi), std::abs(ov - std::cos(phi))});
    }
    cases.push_back({{"case", "sinusoid"},
                     {"amplitude_ratio", rep.amplitude_ratio},
                     {"slowness_ratio", rep.slowness_ratio},
                     {"breakdown_time_s", rep.breakdown_time},
                     {"worst_abs_err", worst}});
  }

  // geometric-phase residual of a rotating drive (diagnostic only)
  const double residual = adiabatic_phase_residual(
      omega_0, TransverseDrive<double>::circular(eps, omega_0 / 200.0),
      0.2 / (ratio * ratio * omega_0), spp);
  cases.push_back({{"case", "circular-residual"}, {"residual_phase_rad", residual}});

  if (sink.format == "csv")
    sink.data(csv.str());
  else
    sink.data(json{{"cases", cases}}.dump(2) + "\n");
  sink.manifest({{"command", "spin-verify"},
                 {"omega_0", omega_0},
                 {"ratio", ratio},
                 {"steps_per_period", spp},
                 {"points", points},
                 {"cases", cases}});
  return 0;
}

int run_mc_dephase(const TrapArgs& trap, const TransitionArgs& trans, int ion, int trials,
                   std::uint64_t seed, double horizon, int points, double tol,
                   const Sink& sink) {
  const auto pc = PhysicalConstants<double>::codata2018();
  const auto cfg = trap.config(pc);
  const auto spec = trans.spec();
  const auto arr = solve_equilibrium(cfg, pc, {tol, 200});

  McOptions<double> opts;
  opts.horizon = horizon;
  opts.n_points = points;
  opts.n_threads = mc_threads_from_env();
  const auto res = monte_carlo_dephasing(arr, cfg, spec, pc, ion, trials, seed, opts);

  if (sink.format == "csv") {
    Csv csv({"t_s", "mean_overlap_1", "cos_phi_predicted_1", "mean_phase_rad"});
    for (Eigen::Index p = 0; p < res.times.size(); ++p)
      csv.row({res.times[p], res.mean_overlap[p], res.predicted_overlap[p], res.mean_phase[p]});
    sink.data(csv.str());
  } else {
    json out{
        {"tau_i_s", res.tau_i},
        {"empirical_pi_time_s", res.empirical_pi_time},
        {"max_phase_rate_rad_per_s", res.max_phase_rate},
        {"t_s", std::vector<double>(res.times.data(), res.times.data() + res.times.size())},
        {"mean_overlap", std::vector<double>(res.mean_overlap.data(),
                                             res.mean_overlap.data() + res.mean_overlap.size())},
        {"cos_phi_predicted",
         std::vector<double>(res.predicted_overlap.data(),
                             res.predicted_overlap.data() + res.predicted_overlap.size())}};
    sink.data(out.dump(2) + "\n");
  }
  sink.manifest({{"command", "mc-dephase"},
                 {"trap", trap_json(trap)},
                 {"transition", transition_json(trans)},
                 {"ion", ion},
                 {"trials", trials},
                 {"seed", seed},
                 {"tau_i_s", res.tau_i},
                 {"empirical_pi_time_s", res.empirical_pi_time}});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Linear ion chain structure and intrinsic decoherence budget"};
  app.set_config("--config", "", "INI/TOML config file; command-line flags override it");
  app.set_version_flag("--version", IONTRAP_VERSION);
  app.require_subcommand(1);

  Sink sink;
  app.add_option("--format", sink.format, "Output format")
      ->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--out", sink.out_path, "Write data to this file instead of stdout");

  TrapArgs trap;
  TransitionArgs trans;
  double tol = 1e-12;
  int max_iter = 200;

  auto* positions = app.add_subcommand("positions", "Equilibrium ion positions");
  add_trap_options(positions, trap);
  positions->add_option("--tol", tol, "Solver gradient tolerance");
  positions->add_option("--max-iter", max_iter, "Solver iteration cap");

  auto* modes = app.add_subcommand("modes", "Longitudinal normal-mode frequencies");
  add_trap_options(modes, trap);
  modes->add_option("--tol", tol, "Solver gradient tolerance");

  int cont_n = 1000, cont_points = 101;
  std::string cont_model = "dubin-fluid";
  auto* continuum = app.add_subcommand("continuum", "Closed-form spacing profile");
  continuum->add_option("--n-ions", cont_n, "Number of ions")->check(CLI::Range(2, 1000000000));
  continuum->add_option("--model", cont_model, "Structure model")
      ->check(CLI::IsMember({"simple-balance", "dubin-fluid", "hughes-fit"}));
  continuum->add_option("--points", cont_points, "Profile sample count")
      ->check(CLI::Range(2, 100000));

  int sums_nmin = 3, sums_nmax = 16;
  std::string sums_model = "dubin-fluid";
  auto* sums = app.add_subcommand("sums", "Inverse-power lattice sums T_n, exact vs continuum");
  sums->add_option("--n-ions", trap.n, "Number of ions")->check(CLI::Range(2, 1000000000));
  add_trap_options(sums, trap, false);
  sums->add_option("--model", sums_model, "Structure model")
      ->check(CLI::IsMember({"simple-balance", "dubin-fluid"}));
  sums->add_option("--n-min", sums_nmin, "Lowest power")->check(CLI::Range(0, 30));
  sums->add_option("--n-max", sums_nmax, "Highest power")->check(CLI::Range(0, 30));
  sums->add_option("--tol", tol, "Solver gradient tolerance");

  std::string deco_model = "dubin-fluid", deco_path = "exact";
  bool no_factor_two = false;
  auto* decohere = app.add_subcommand("decohere", "Decoherence budget report");
  add_trap_options(decohere, trap);
  add_transition_options(decohere, trans);
  decohere->add_option("--model", deco_model, "Structure model")
      ->check(CLI::IsMember({"simple-balance", "dubin-fluid", "hughes-fit"}));
  decohere->add_option("--path", deco_path, "Rate evaluation path")
      ->check(CLI::IsMember({"exact", "continuum"}));
  decohere->add_flag("--no-radiative-factor-two", no_factor_two,
                     "Use tau_s/N instead of 2 tau_s/N for the radiative window");
  decohere->add_option("--tol", tol, "Solver gradient tolerance");
  decohere->add_option("--max-iter", max_iter, "Solver iteration cap");

  std::string sweep_regime = "fixed-omega-z", sweep_path = "continuum",
              sweep_model = "dubin-fluid";
  std::vector<int> sweep_nlist;
  int sweep_start = 200, sweep_stop = 2000, sweep_count = 12, sweep_cap = 2000;
  double sweep_tol = 1e-10;
  auto* sweep = app.add_subcommand("sweep", "Rate scaling with ion number");
  add_trap_options(sweep, trap);
  add_transition_options(sweep, trans);
  sweep->add_option("--regime", sweep_regime, "Operating regime")
      ->check(CLI::IsMember({"fixed-omega-z", "fixed-s0"}));
  sweep->add_option("--path", sweep_path, "Rate evaluation path")
      ->check(CLI::IsMember({"exact", "continuum"}));
  sweep->add_option("--model", sweep_model, "Structure model")
      ->check(CLI::IsMember({"simple-balance", "dubin-fluid"}));
  sweep->add_option("--n-list", sweep_nlist, "Explicit chain sizes (comma separated)")
      ->delimiter(',');
  sweep->add_option("--n-start", sweep_start, "Geometric grid start");
  sweep->add_option("--n-stop", sweep_stop, "Geometric grid stop");
  sweep->add_option("--n-count", sweep_count, "Geometric grid size")->check(CLI::Range(2, 1000));
  sweep->add_option("--exact-cap", sweep_cap, "Largest N allowed on the exact path");
  sweep->add_flag("--no-radiative-factor-two", no_factor_two,
                  "Use tau_s/N instead of 2 tau_s/N for the radiative window");
  sweep->add_option("--tol", sweep_tol, "Solver gradient tolerance (exact path)");

  double sv_omega0 = 1e4, sv_ratio = 0.01;
  int sv_spp = 200, sv_points = 8;
  auto* spin_verify = app.add_subcommand("spin-verify", "Adiabatic two-level evolution checks");
  spin_verify->add_option("--omega-0", sv_omega0, "Fast splitting frequency [rad/s]");
  spin_verify->add_option("--ratio", sv_ratio, "Drive-to-splitting ratio |f|/omega_0")
      ->check(CLI::Range(1e-6, 0.1));
  spin_verify->add_option("--steps-per-period", sv_spp, "Integrator steps per fast period")
      ->check(CLI::Range(20, 100000));
  spin_verify->add_option("--points", sv_points, "Samples over the phase sweep")
      ->check(CLI::Range(2, 1000));

  int mc_ion = 0, mc_trials = 0, mc_points = 400;
  std::uint64_t mc_seed = 0;
  double mc_horizon = 3.0;
  auto* mc = app.add_subcommand("mc-dephase", "Monte Carlo dephasing of one ion");
  add_trap_options(mc, trap);
  add_transition_options(mc, trans);
  mc->add_option("--ion", mc_ion, "Ion index (0-based)");
  mc->add_option("--trials", mc_trials, "Number of stochastic trials")
      ->required()
      ->check(CLI::Range(1, 100000000));
  mc->add_option("--seed", mc_seed, "RNG seed (required for reproducibility)")->required();
  mc->add_option("--horizon", mc_horizon, "Time span in units of the predicted tau_i");
  mc->add_option("--points", mc_points, "Time grid size")->check(CLI::Range(2, 1000000));
  mc->add_option("--tol", tol, "Solver gradient tolerance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (positions->parsed()) return run_positions(trap, tol, max_iter, sink);
    if (modes->parsed()) return run_modes(trap, tol, max_iter, sink);
    if (continuum->parsed()) return run_continuum(cont_n, cont_model, cont_points, sink);
    if (sums->parsed())
      return run_sums(trap, sums_model, sums_nmin, sums_nmax, tol, max_iter, sink);
    if (decohere->parsed())
      return run_decohere(trap, trans, deco_model, deco_path, !no_factor_two, tol, max_iter,
                          sink);
    if (sweep->parsed())
      return run_sweep(trap, trans, sweep_regime, sweep_path, sweep_model, sweep_nlist,
                       sweep_start, sweep_stop, sweep_count, sweep_cap, !no_factor_two,
                       sweep_tol, sink);
    if (spin_verify->parsed()) return run_spin_verify(sv_omega0, sv_ratio, sv_spp, sv_points, sink);
    if (mc->parsed())
      return run_mc_dephase(trap, trans, mc_ion, mc_trials, mc_seed, mc_horizon, mc_points,
                            tol, sink);
    std::cerr << "error: no subcommand selected\n";
    return 1;
  } catch (const ConvergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const IntegrationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
