// tvlab command line front end.
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "tvlab/config.hpp"
#include "tvlab/decay.hpp"
#include "tvlab/discretization.hpp"
#include "tvlab/fingerprint.hpp"
#include "tvlab/observability.hpp"
#include "tvlab/simulation.hpp"
#include "tvlab/spectral.hpp"

namespace fs = std::filesystem;
using namespace tvlab;
using ojson = nlohmann::ordered_json;

namespace {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Context {
  RunConfig config;
  fs::path out;
  std::uint64_t seed = 1;
  int threads = 1;
  std::vector<std::string> files;

  // Opens out/name for writing and records it for the manifest.
  std::ofstream open(const std::string& name) {
    std::ofstream os(out / name, std::ios::binary);
    if (!os) throw IoError("cannot write " + (out / name).string());
    os.precision(17);
    files.push_back(name);
    return os;
  }

  void write_json(const std::string& name, const ojson& j) { open(name) << j.dump(2) << '\n'; }
};

// NaN and infinity are not JSON numbers.
ojson number(double x) { return std::isfinite(x) ? ojson(x) : ojson(nullptr); }

DiscreteGenerator generator(const RunConfig& c) {
  return assemble_generator(c.params, c.kernel, c.bc, c.variant, c.grids);
}

Eigen::VectorXd initial_state(const Context& ctx, const DiscreteGenerator& genr) {
  return ctx.config.initial == InitialData::Rough ? rough_initial_state(genr, ctx.seed)
                                                  : default_initial_state(genr);
}

std::vector<double> lambda_grid(const ResolventOptions& r) {
  return log_lambda_grid(r.lambda_min, r.lambda_max, r.count, r.include_zero);
}

int run_simulate(Context& ctx) {
  const DiscreteGenerator genr = generator(ctx.config);
  const EnergyTrace trace = simulate(genr, initial_state(ctx, genr), ctx.config.scheme);
  auto os = ctx.open("energy.csv");
  write_trace_csv(os, trace);
  return kOk;
}

int run_spectrum(Context& ctx) {
  const DiscreteGenerator genr = generator(ctx.config);
  const SpectrumReport report = spectrum(genr);
  {
    auto os = ctx.open("spectrum.csv");
    write_spectrum_csv(os, report);
  }
  {
    auto os = ctx.open("A.txt");
    write_triplets(os, genr.A);
  }
  {
    auto os = ctx.open("G.txt");
    write_triplets(os, genr.G);
  }
  ctx.write_json("summary.json", ojson{{"abscissa", number(report.abscissa)},
                                       {"min_imag_gap", number(report.min_imag_gap)},
                                       {"eigenvalues", report.eigenvalues.size()},
                                       {"fingerprint", report.fingerprint}});
  return kOk;
}

int run_resolvent(Context& ctx) {
  const DiscreteGenerator genr = generator(ctx.config);
  const ResolventSweep sweep =
      resolvent_sweep(energy_frame(genr), lambda_grid(ctx.config.resolvent), ctx.threads);
  {
    auto os = ctx.open("sweep.csv");
    write_sweep_csv(os, sweep);
  }
  ctx.write_json("summary.json",
                 ojson{{"sup_norm", number(sweep.sup_norm)}, {"fingerprint", fingerprint(genr)}});
  return kOk;
}

int run_decay(Context& ctx) {
  const DiscreteGenerator genr = generator(ctx.config);
  const EnergyTrace trace = simulate(genr, initial_state(ctx, genr), ctx.config.scheme);
  const DecayFit fit = fit_decay(trace);
  const double abscissa = spectrum(genr).abscissa;
  {
    auto os = ctx.open("energy.csv");
    write_trace_csv(os, trace);
  }
  const double reference = 2.0 * std::abs(abscissa);
  ctx.write_json("fit.json", ojson{{"m_hat", number(fit.m_hat)},
                                   {"M_hat", number(fit.M_hat)},
                                   {"t_lo", fit.window.t_lo},
                                   {"t_hi", fit.window.t_hi},
                                   {"residual", number(fit.residual)},
                                   {"samples", fit.samples},
                                   {"abscissa", number(abscissa)},
                                   {"relative_to_spectrum", number((fit.m_hat - reference) / reference)},
                                   {"fingerprint", fingerprint(genr)}});
  return kOk;
}

int run_compare(Context& ctx) {
  const ScanConfig& sc = ctx.config.scan;
  ScanOptions opt;
  opt.scheme = ctx.config.scheme;
  opt.tail_tol = ctx.config.grids.tail_tol;
  opt.initial = sc.initial;
  opt.seed = ctx.seed;
  opt.spectrum_max_n = sc.spectrum_max_n;
  opt.threads = ctx.threads;
  const ScanResult scan =
      wave_speed_scan(ctx.config.params, ctx.config.kernel, sc.ratios,
                      {CouplingVariant::CaseI, CouplingVariant::CaseII}, sc.bcs, sc.meshes, opt);
  {
    auto os = ctx.open("scan.csv");
    write_scan_csv(os, scan);
  }
  const ContrastDigest digest = contrast_digest(scan, sc.unequal_ratio, sc.equal_ratio);
  ojson verdicts = ojson::array();
  for (const auto& v : digest.verdicts)
    verdicts.push_back({{"name", v.name},
                        {"bc", std::string(to_string(v.bc))},
                        {"passed", v.passed},
                        {"detail", v.detail}});
  ctx.write_json("digest.json", ojson{{"passed", digest.passed()},
                                      {"unequal_ratio", sc.unequal_ratio},
                                      {"equal_ratio", sc.equal_ratio},
                                      {"verdicts", verdicts},
                                      {"skipped", scan.skipped}});
  for (const auto& s : scan.skipped) std::cerr << "skipped: " << s << '\n';
  for (const auto& v : digest.verdicts)
    std::cerr << (v.passed ? "pass " : "FAIL ") << v.name << " [" << to_string(v.bc) << "] "
              << v.detail << '\n';
  return digest.passed() ? kOk : kCriterionFailed;
}

int run_observability(Context& ctx) {
  const ObservabilityOptions& o = ctx.config.observability;
  const DataFamily family = seeded_family(ctx.seed, o.samples, o.lambda_max, o.modes, o.rho, o.k, o.L);
  const ObservabilityReport report =
      measure_constants(family, o.n, o.a1, o.a2, o.b1, o.b2, ctx.threads);
  auto os = ctx.open("observability.json");
  write_observability_json(os, report);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Thermo-viscoelastic Timoshenko beam: simulation, spectra, decay scans and "
               "wave observability",
               "tvlab"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed = 1;
  int threads = 1;

  const std::vector<std::pair<std::string, std::function<int(Context&)>>> commands{
      {"simulate", run_simulate},   {"spectrum", run_spectrum}, {"resolvent", run_resolvent},
      {"decay", run_decay},         {"compare", run_compare},   {"observability", run_observability},
  };
  const std::map<std::string, std::string> help{
      {"simulate", "integrate the model and write energy.csv"},
      {"spectrum", "eigenvalues in the energy norm (spectrum.csv, summary.json, A.txt, G.txt)"},
      {"resolvent", "resolvent norm sweep along the imaginary axis (sweep.csv, summary.json)"},
      {"decay", "simulate and fit the energy decay rate (energy.csv, fit.json)"},
      {"compare", "CaseI/CaseII wave-speed and mesh scan (scan.csv, digest.json); exit 1 if a trend fails"},
      {"observability", "empirical observability constants of the wave resolvent (observability.json)"},
  };
  for (const auto& [name, run] : commands) {
    CLI::App* sub = app.add_subcommand(name, help.at(name));
    sub->add_option("--config", config_path, "JSON configuration (defaults if omitted)");
    sub->add_option("--out", out_dir, "output directory")->capture_default_str();
    sub->add_option("--seed", seed, "seed for random initial data and sample families")
        ->capture_default_str();
    sub->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return kUsage;
  }

  const auto started = std::chrono::steady_clock::now();
  CLI::App* chosen = app.get_subcommands().front();
  Context ctx;
  ctx.out = out_dir;
  ctx.seed = seed;
  ctx.threads = threads;
  try {
    ctx.config = config_path.empty() ? parse_config(nlohmann::json::object())
                                     : parse_config(fs::path(config_path));
  } catch (const ConfigError& e) {
    for (const auto& line : e.errors()) std::cerr << "config: " << line << '\n';
    return e.code();
  }

  int code = kOk;
  try {
    std::error_code ec;
    fs::create_directories(ctx.out, ec);
    if (ec) throw IoError("cannot create " + ctx.out.string() + ": " + ec.message());
    for (const auto& [name, run] : commands)
      if (name == chosen->get_name()) code = run(ctx);

    RunManifest manifest;
    manifest.command = chosen->get_name();
    manifest.fingerprint = config_fingerprint(ctx.config);
    manifest.seed = ctx.seed;
    manifest.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    manifest.files = ctx.files;
    manifest.config = to_json(ctx.config);
    write_manifest(ctx.out, manifest);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIoError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kSchemaError;
  } catch (const std::length_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kSchemaError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIoError;
  }
  return code;
}
