// msfnet: command-line front end for MSF evaluation, feedback-network design,
// verification, sweeps and Monte Carlo stability estimates.
//
// Exit codes: 0 success, 1 infeasible/unstable verdict or runtime failure
// (outputs are still written where possible), 2 usage error.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "netmsf/netmsf.hpp"

namespace {

using json = nlohmann::ordered_json;
using namespace netmsf;

constexpr int kExitOk = 0;
constexpr int kExitVerdict = 1;
constexpr int kExitUsage = 2;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Everything the user asked for, recorded verbatim into the run manifest.
struct RunConfig {
  std::string subcommand;
  std::vector<std::string> argv;
  std::map<std::string, std::string> flags;
};

std::string manifest_text(const RunConfig& cfg) {
  std::string out = "program = msfnet " NETMSF_VERSION "\n";
  out += "eigen = " + std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
         "." + std::to_string(EIGEN_MINOR_VERSION) + "\n";
#if defined(__clang__)
  out += "compiler = clang " __clang_version__ "\n";
#elif defined(__GNUC__)
  out += "compiler = gcc " __VERSION__ "\n";
#endif
  out += "subcommand = " + cfg.subcommand + "\ncommand =";
  for (const auto& a : cfg.argv) out += " " + a;
  out += "\n";
  for (const auto& [k, v] : cfg.flags) out += "flag." + k + " = " + v + "\n";
  return out;
}

std::string complex_text(Complex c) {
  if (c.imag() == 0.0) return io::format_double(c.real());
  return io::format_double(c.real()) + (c.imag() > 0 ? "+" : "") + io::format_double(c.imag()) + "i";
}

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

json interval_json(const StableInterval& iv) {
  json j;
  j["lambda"] = complex_text(iv.lambda);
  j["f_l"] = iv.lower;
  j["f_u"] = iv.upper;
  j["bounded_l"] = iv.lower_bounded;
  j["bounded_u"] = iv.upper_bounded;
  return j;
}

json design_json(const DesignResult& r, const Network& plant) {
  json j;
  j["method"] = to_string(r.method);
  j["plant_network"] = plant.describe();
  j["nodes"] = plant.size();
  j["frobenius_norm"] = r.frobenius_norm;
  j["plant_frobenius_norm"] = plant.adjacency().norm();
  j["trace"] = r.trace;
  if (r.method == DesignMethod::Weighted) j["margin"] = r.margin;
  json modes = json::array();
  for (std::size_t i = 0; i < r.mode_gains.size(); ++i) {
    json m;
    m["lambda"] = complex_text(r.plant_eigenvalues[i]);
    m["mu"] = r.mode_gains[i];
    if (i < r.intervals.size()) m["interval"] = interval_json(r.intervals[i]);
    modes.push_back(m);
  }
  j["modes"] = modes;
  if (r.method == DesignMethod::Binary) {
    j["link_count"] = r.link_count;
    j["optimal"] = r.optimal;
    j["timed_out"] = r.timed_out;
  }
  if (r.method == DesignMethod::Matching) {
    j["inter_node_gain"] = matrix_json(r.inter_node_gain);
    j["matching_residual"] = r.matching_residual;
    j["matching"] = r.matching_exact ? "exact" : "inexact";
  }
  j["max_real_part"] = r.max_real_part;
  j["verdict"] = r.verified ? "stable" : "unstable";
  return j;
}

void write_output(const std::string& path, const std::string& contents) {
  if (!path.empty()) io::write_atomic(path, contents);
}

io::Range range_flag(const std::string& text, const char* flag) {
  try {
    return io::parse_range(text);
  } catch (const ParseError& e) {
    throw UsageError(std::string(flag) + ": " + e.what());
  }
}

Network resolve_network(const std::string& text, double coupling) {
  // Known generator grammars first, anything else is a CSV path.
  for (const char* prefix : {"complete:", "ring:", "er:", "file:"}) {
    if (text.rfind(prefix, 0) == 0) return make_network(parse_network_spec(text), coupling);
  }
  return make_network({.kind = NetworkKind::Custom, .file = text}, coupling);
}

struct Options {
  std::string model_path;
  std::string out;
  std::string report;
  std::string manifest;
  std::string network;
  double coupling = 1.0;
  // msf
  std::string lambda_range = "-10:10";
  std::string mu_range = "-10:10";
  std::size_t steps = 101;
  double lambda = 0.0;
  double lambda_im = 0.0;
  // design / intervals
  std::string search_range = "-50:50";
  double tol = 1e-9;
  std::size_t scan = 400;
  double margin = 0.01;
  bool symmetric = false;
  double time_limit = 60.0;
  // sweep
  std::string family;
  std::string n_range;
  // verify
  std::string plant;
  std::string feedback;
  bool simulate = false;
  double t_end = 10.0;
  double dt = 0.0;
  std::string x0 = "ones";
  std::string trajectory;
  std::size_t sample_every = 1;
  // prob
  std::size_t trials = 100;
  std::optional<std::uint64_t> seed;
  std::string method = "weighted";
};

IntervalSearch search_of(const Options& o) {
  return {range_flag(o.search_range, "--range"), o.tol, o.scan};
}

void emit_report(const Options& o, const json& report) {
  const std::string text = report.dump(2) + "\n";
  std::cout << text;
  write_output(o.report, text);
}

int cmd_msf_grid(const Options& o) {
  const PlantModel model = load_plant_model(o.model_path);
  const auto grid = sigma_grid(model, range_flag(o.lambda_range, "--lambda"),
                               range_flag(o.mu_range, "--mu"), o.steps);
  const std::string csv = format_grid_csv(grid);
  if (o.out.empty()) std::cout << csv;
  write_output(o.out, csv);
  return kExitOk;
}

int cmd_msf_interval(const Options& o) {
  const PlantModel model = load_plant_model(o.model_path);
  const Complex lambda(o.lambda, o.lambda_im);
  const StableInterval iv = stable_interval(model, lambda, search_of(o));
  std::cout << "lambda = " << complex_text(lambda) << "\n"
            << "f_l = " << io::format_double(iv.lower)
            << (iv.lower_bounded ? "" : "  (unbounded within range)") << "\n"
            << "f_u = " << io::format_double(iv.upper)
            << (iv.upper_bounded ? "" : "  (unbounded within range)") << "\n";
  write_output(o.out, interval_csv_header() + format_interval_csv_row(iv));
  return kExitOk;
}

int finish_design(const Options& o, const DesignResult& r, const Network& plant) {
  write_output(o.out, format_adjacency_csv(r.feedback));
  emit_report(o, design_json(r, plant));
  return r.verified ? kExitOk : kExitVerdict;
}

int cmd_design(const Options& o, DesignMethod method) {
  const PlantModel model = load_plant_model(o.model_path);
  const Network plant = resolve_network(o.network, o.coupling);
  switch (method) {
    case DesignMethod::Weighted:
      return finish_design(o, design_weighted(model, plant, {search_of(o), o.margin}), plant);
    case DesignMethod::Binary: {
      BinaryOptions bo;
      bo.symmetric = o.symmetric;
      bo.time_limit_seconds = o.time_limit;
      return finish_design(o, design_binary(model, plant, bo), plant);
    }
    case DesignMethod::Matching:
      return finish_design(o, design_matching(model, plant), plant);
  }
  return kExitUsage;
}

int cmd_sweep(const Options& o) {
  const PlantModel model = load_plant_model(o.model_path);
  const SweepFamily family = parse_sweep_family(o.family);
  const auto parts = io::split(o.n_range, ':');
  if (parts.size() != 2) throw UsageError("--n must look like a:b");
  const auto lo = io::parse_int(parts[0], "--n"), hi = io::parse_int(parts[1], "--n");
  const auto rows = norm_sweep(model, family, lo, hi, {search_of(o), o.margin});
  const std::string csv = format_sweep_csv(rows);
  if (o.out.empty()) std::cout << csv;
  write_output(o.out, csv);
  for (const auto& r : rows)
    if (r.status != "ok") return kExitVerdict;
  return kExitOk;
}

Eigen::VectorXd initial_state(const std::string& spec, Eigen::Index dim) {
  if (spec == "ones") return Eigen::VectorXd::Ones(dim);
  if (spec.rfind("random:", 0) == 0) {
    const long seed = io::parse_int(spec.substr(7), "--x0 seed");
    std::mt19937_64 rng(static_cast<std::uint64_t>(seed));
    Eigen::VectorXd x(dim);
    for (Eigen::Index i = 0; i < dim; ++i) x(i) = 2.0 * detail::unit_uniform(rng) - 1.0;
    return x;
  }
  throw UsageError("--x0 must be 'ones' or 'random:SEED'");
}

int cmd_verify(const Options& o) {
  const PlantModel model = load_plant_model(o.model_path);
  const Network plant = resolve_network(o.plant, o.coupling);
  const Eigen::MatrixXd feedback =
      o.feedback == "zero" ? Eigen::MatrixXd::Zero(plant.size(), plant.size())
                           : resolve_network(o.feedback, 1.0).adjacency();
  const ClosedLoopSystem sys = build_closed_loop(model, plant, feedback);
  const SpectralVerdict v = spectral_verdict(sys);

  json report;
  report["plant_network"] = plant.describe();
  report["nodes"] = sys.nodes;
  report["states_per_node"] = sys.states;
  report["feedback_frobenius_norm"] = feedback.norm();
  report["max_real_part"] = v.max_real_part;
  report["verdict"] = v.stable ? "stable" : "unstable";
  if (o.simulate) {
    SimOptions so;
    so.t_end = o.t_end;
    so.dt = o.dt > 0.0 ? o.dt : default_time_step(sys);
    so.sample_every = o.sample_every;
    const Eigen::VectorXd x0 = initial_state(o.x0, sys.matrix.rows());
    const Trajectory traj = simulate(sys, x0, so);
    json sim;
    sim["t_end"] = traj.final_state().t;
    sim["dt"] = so.dt;
    sim["initial_norm"] = x0.norm();
    sim["final_norm"] = traj.final_state().x.norm();
    sim["diverged"] = traj.diverged;
    report["simulation"] = sim;
    write_output(o.trajectory, format_trajectory_csv(traj));
  }
  emit_report(o, report);
  return v.stable ? kExitOk : kExitVerdict;
}

int cmd_prob(const Options& o) {
  if (!o.seed) throw UsageError("--seed is required for randomized runs");
  const PlantModel model = load_plant_model(o.model_path);
  ProbabilityOptions po;
  po.trials = o.trials;
  po.seed = *o.seed;
  po.method = parse_design_method(o.method);
  po.weighted = {search_of(o), o.margin};
  po.binary.symmetric = true;
  po.binary.time_limit_seconds = o.time_limit;
  const ProbabilityEstimate est = stability_probability(model, parse_random_family(o.family), po);
  const std::string csv = format_probability_csv(est);
  std::cout << csv;
  write_output(o.out, csv);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Master stability function analysis and feedback-network design for networks of "
               "identical LTI plants.\n\n"
               "Grammars:\n"
               "  range    a:b            e.g. -50:50\n"
               "  network  complete:N | ring:N:k | er:N:p:seed | file:PATH | PATH (CSV)\n"
               "  family   ring:k | complete   (sweep norm)\n"
               "           er:N:p              (prob stability)\n\n"
               "Adjacency CSV: N rows of N comma-separated values; entry (i,j) is the link from\n"
               "node j into node i.",
               "msfnet"};
  app.require_subcommand(1);
  Options o;

  const auto add_model = [&](CLI::App* c) {
    c->add_option("--model", o.model_path, "Plant model file (key = value)")->required()->check(CLI::ExistingFile);
  };
  const auto add_common_out = [&](CLI::App* c) {
    c->add_option("--manifest", o.manifest, "Run manifest path (default: <out>.manifest)");
  };
  const auto add_search = [&](CLI::App* c) {
    c->add_option("--range", o.search_range, "mu search range a:b (must contain 0)")->capture_default_str();
    c->add_option("--tol", o.tol, "Bisection tolerance")->capture_default_str()->check(CLI::PositiveNumber);
    c->add_option("--scan", o.scan, "Coarse scan points")->capture_default_str()->check(CLI::Range(2, 1000000));
  };
  const auto add_network = [&](CLI::App* c) {
    c->add_option("--network", o.network, "Plant network")->required();
    c->add_option("--coupling", o.coupling, "Scalar folded into the plant network")->capture_default_str();
  };

  auto* msf = app.add_subcommand("msf", "Master stability function evaluation");
  msf->require_subcommand(1);
  auto* grid = msf->add_subcommand("grid", "Evaluate sigma over a real (lambda, mu) rectangle");
  add_model(grid);
  grid->add_option("--lambda", o.lambda_range, "lambda range a:b")->capture_default_str();
  grid->add_option("--mu", o.mu_range, "mu range a:b")->capture_default_str();
  grid->add_option("--steps", o.steps, "Points per axis")->capture_default_str()->check(CLI::Range(2, 100000));
  grid->add_option("--out", o.out, "Grid CSV (lambda,mu,sigma)");
  add_common_out(grid);

  auto* interval = msf->add_subcommand("interval", "Stable mu-interval nearest the origin");
  add_model(interval);
  interval->add_option("--lambda", o.lambda, "Real part of the plant eigenvalue")->required();
  interval->add_option("--lambda-im", o.lambda_im, "Imaginary part of the plant eigenvalue");
  add_search(interval);
  interval->add_option("--out", o.out, "Interval CSV");
  add_common_out(interval);

  auto* design = app.add_subcommand("design", "Synthesize a feedback network");
  design->require_subcommand(1);
  auto* weighted = design->add_subcommand("weighted", "Frobenius-minimal weighted design");
  add_model(weighted);
  add_network(weighted);
  weighted->add_option("--margin", o.margin, "Interior stability margin")->capture_default_str()->check(CLI::PositiveNumber);
  add_search(weighted);
  auto* binary = design->add_subcommand("binary", "Minimum-link binary design (branch and bound)");
  add_model(binary);
  add_network(binary);
  binary->add_flag("--symmetric", o.symmetric, "Restrict to undirected feedback links");
  binary->add_option("--time-limit", o.time_limit, "Seconds")->capture_default_str()->check(CLI::PositiveNumber);
  auto* matching = design->add_subcommand("matching", "Matching-condition baseline A = B");
  add_model(matching);
  add_network(matching);
  for (auto* c : {weighted, binary, matching}) {
    c->add_option("--out", o.out, "Feedback adjacency CSV");
    c->add_option("--report", o.report, "Also write the report to this file");
    add_common_out(c);
  }

  auto* sweep = app.add_subcommand("sweep", "Parameter sweeps");
  sweep->require_subcommand(1);
  auto* norm = sweep->add_subcommand("norm", "Weighted vs matching Frobenius norm over N");
  add_model(norm);
  norm->add_option("--family", o.family, "ring:k or complete")->required();
  norm->add_option("--n", o.n_range, "N range a:b")->required();
  norm->add_option("--margin", o.margin, "Interior stability margin")->capture_default_str()->check(CLI::PositiveNumber);
  add_search(norm);
  norm->add_option("--out", o.out, "Sweep CSV (N,weighted_norm,matching_norm,status)");
  add_common_out(norm);

  auto* verify = app.add_subcommand("verify", "Full-spectrum stability check of a closed loop");
  add_model(verify);
  verify->add_option("--plant", o.plant, "Plant network (spec or CSV path)")->required();
  verify->add_option("--feedback", o.feedback, "Feedback network (spec, CSV path or 'zero')")->required();
  verify->add_option("--coupling", o.coupling, "Scalar folded into the plant network")->capture_default_str();
  verify->add_flag("--simulate", o.simulate, "Also integrate x' = Ft x with RK4");
  verify->add_option("--t-end", o.t_end, "Simulation horizon")->capture_default_str()->check(CLI::PositiveNumber);
  verify->add_option("--dt", o.dt, "RK4 step (default 1e-3 / max(1, spectral radius))")->check(CLI::PositiveNumber);
  verify->add_option("--x0", o.x0, "Initial state: ones | random:SEED")->capture_default_str();
  verify->add_option("--sample-every", o.sample_every, "Keep every k-th step")->capture_default_str()->check(CLI::Range(1, 1000000000));
  verify->add_option("--traj", o.trajectory, "Trajectory CSV (t,x_1,...)");
  verify->add_option("--report", o.report, "Also write the report to this file");
  add_common_out(verify);

  auto* prob = app.add_subcommand("prob", "Monte Carlo estimates");
  prob->require_subcommand(1);
  auto* stability = prob->add_subcommand("stability", "Fraction of random plant networks stabilised");
  add_model(stability);
  stability->add_option("--family", o.family, "er:N:p")->required();
  stability->add_option("--trials", o.trials, "Number of trials")->capture_default_str()->check(CLI::Range(1, 100000000));
  stability->add_option("--seed", o.seed, "Master seed (trial t uses seed + t)")->required();
  stability->add_option("--method", o.method, "weighted | binary | matching")
      ->capture_default_str()
      ->check(CLI::IsMember({"weighted", "binary", "matching"}));
  stability->add_option("--margin", o.margin, "Interior stability margin")->capture_default_str()->check(CLI::PositiveNumber);
  stability->add_option("--time-limit", o.time_limit, "Binary designer seconds per trial")->capture_default_str()->check(CLI::PositiveNumber);
  add_search(stability);
  stability->add_option("--out", o.out, "Probability CSV");
  add_common_out(stability);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  RunConfig cfg;
  for (int i = 1; i < argc; ++i) cfg.argv.emplace_back(argv[i]);
  const CLI::App* leaf = &app;
  while (!leaf->get_subcommands().empty()) {
    leaf = leaf->get_subcommands().front();
    cfg.subcommand += (cfg.subcommand.empty() ? "" : " ") + leaf->get_name();
  }
  for (const CLI::Option* opt : leaf->get_options()) {
    if (opt->get_name() == "--help") continue;
    const auto value = opt->as<std::string>();
    cfg.flags[opt->get_name()] = opt->count() ? value : opt->get_default_str();
  }

  int code = kExitOk;
  try {
    if (cfg.subcommand == "msf grid") code = cmd_msf_grid(o);
    else if (cfg.subcommand == "msf interval") code = cmd_msf_interval(o);
    else if (cfg.subcommand == "design weighted") code = cmd_design(o, DesignMethod::Weighted);
    else if (cfg.subcommand == "design binary") code = cmd_design(o, DesignMethod::Binary);
    else if (cfg.subcommand == "design matching") code = cmd_design(o, DesignMethod::Matching);
    else if (cfg.subcommand == "sweep norm") code = cmd_sweep(o);
    else if (cfg.subcommand == "verify") code = cmd_verify(o);
    else if (cfg.subcommand == "prob stability") code = cmd_prob(o);
    else throw UsageError("unknown subcommand '" + cfg.subcommand + "'");
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << leaf->help();
    return kExitUsage;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const BadParameter& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << e.kind() << ": " << e.what() << "\n";
    code = kExitVerdict;
  }

  const std::string manifest = !o.manifest.empty() ? o.manifest : (o.out.empty() ? "" : o.out + ".manifest");
  try {
    write_output(manifest, manifest_text(cfg));
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return kExitVerdict;
  }
  return code;
}
