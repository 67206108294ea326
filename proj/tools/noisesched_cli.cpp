#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "noisesched/errors.hpp"
#include "noisesched/experiment.hpp"

namespace ns = noisesched;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitRuntime = 2;

/// Splits "--block.key value" and "--block.key=value" pairs off the argument list.
std::vector<ns::Override> take_overrides(std::vector<std::string>& args) {
  std::vector<ns::Override> out;
  std::vector<std::string> rest;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (a.rfind("--", 0) != 0) {
      rest.push_back(a);
      continue;
    }
    const std::size_t eq = a.find('=');
    const std::string key = a.substr(2, eq == std::string::npos ? std::string::npos : eq - 2);
    if (key.find('.') == std::string::npos) {
      rest.push_back(a);
      continue;
    }
    if (eq != std::string::npos) {
      out.emplace_back(key, a.substr(eq + 1));
    } else if (i + 1 < args.size()) {
      out.emplace_back(key, args[++i]);
    } else {
      throw ns::ConfigError("override --" + key + " has no value");
    }
  }
  args = std::move(rest);
  return out;
}

ns::Json load_with_overrides(const std::string& path, const std::vector<ns::Override>& overrides,
                             const std::string& out_dir, const std::int64_t* seed) {
  ns::Json doc = ns::load_config_file(path);
  for (const auto& kv : overrides) ns::apply_override(doc, kv);
  if (!out_dir.empty()) ns::apply_override(doc, {"output.directory", "\"" + out_dir + "\""});
  if (seed != nullptr) ns::apply_override(doc, {"run.seed", std::to_string(*seed)});
  return doc;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::vector<ns::Override> overrides;
  try {
    overrides = take_overrides(args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  }

  CLI::App app{"Probability-flow ODE simulator for two-mode targets under time-dilated schedules"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  std::int64_t seed = -1;
  unsigned threads = 1;

  auto* run = app.add_subcommand("run", "simulate a configured experiment and write artifacts");
  run->add_option("--config", config_path, "experiment config (JSON)")->required();
  run->add_option("--out", out_dir, "output directory (overrides output.directory)");
  run->add_option("--seed", seed, "master seed (overrides run.seed)");
  run->add_option("--threads", threads, "worker threads, 0 = auto");

  std::string axis;
  std::vector<std::string> values;
  auto* sweep = app.add_subcommand("sweep", "run a config once per value of a numeric key");
  sweep->add_option("--config", config_path, "template config (JSON)")->required();
  sweep->add_option("--axis", axis, "dotted config key, e.g. run.d")->required();
  sweep->add_option("--values", values, "values for the axis")->required()->delimiter(',');
  sweep->add_option("--out", out_dir, "output directory");
  sweep->add_option("--seed", seed, "master seed");
  sweep->add_option("--threads", threads, "worker threads, 0 = auto");

  std::string kind_name, limit_model = "gm", alpha_form = "linear", name = "limit";
  double p = 0.8, sigma2 = 0.25, kappa = 3.0, beta = 2.0, delta_t = 0.01, initial = 0.0;
  double t0 = -1.0, t1 = -1.0;
  int mode_sign = 1;
  std::int64_t d = 10000, members = 1000;
  auto* limit = app.add_subcommand("limit", "integrate a reduced large-d ODE ensemble");
  limit->add_option("--kind", kind_name, "limit kind, e.g. ve-dilated-phase1-M")->required();
  limit->add_option("--model", limit_model, "gm or cw")->check(CLI::IsMember({"gm", "cw"}));
  limit->add_option("--p", p, "mode weight");
  limit->add_option("--sigma2", sigma2, "GM per-mode variance");
  limit->add_option("--kappa", kappa, "dilation parameter");
  limit->add_option("--beta", beta, "CW inverse temperature");
  limit->add_option("--alpha-form", alpha_form, "linear or circular (ve-magnetization)");
  limit->add_option("--mode-sign", mode_sign, "sgn(M) for coordinate kinds")->check(CLI::IsMember({-1, 1}));
  limit->add_option("--d", d, "dimension for phase-boundary samplers");
  limit->add_option("--n", members, "ensemble size");
  limit->add_option("--seed", seed, "ensemble seed");
  limit->add_option("--delta-t", delta_t, "Euler step");
  limit->add_option("--t0", t0, "start time (default: start of the kind's interval)");
  limit->add_option("--t1", t1, "end time (default: end of the kind's interval)");
  auto* initial_opt = limit->add_option("--initial", initial, "common initial value instead of the asymptotic law");
  limit->add_option("--name", name, "artifact name");
  limit->add_option("--out", out_dir, "output directory");

  std::string validate_model;
  std::int64_t points = 20, samples = 200000;
  std::string noise_scale = "vp", dilation_kind = "uniform", report_path;
  bool corrupt = false;
  std::int64_t vd = 2;
  auto* validate = app.add_subcommand("validate", "check the closed-form field against the oracle");
  validate->add_option("model", validate_model, "gm or cw")->required()->check(CLI::IsMember({"gm", "cw"}));
  validate->add_option("--d", vd, "dimension");
  validate->add_option("--points", points, "number of (t, x) points");
  validate->add_option("--samples", samples, "importance samples per point");
  validate->add_option("--seed", seed, "seed");
  validate->add_flag("--corrupt", corrupt, "flip the sign of the nonlinear term (negative control)");
  validate->add_option("--noise-scale", noise_scale, "vp or ve");
  validate->add_option("--alpha-form", alpha_form, "linear or circular");
  validate->add_option("--dilation", dilation_kind, "dilation kind");
  validate->add_option("--kappa", kappa, "dilation parameter");
  validate->add_option("--p", p, "mode weight");
  validate->add_option("--sigma2", sigma2, "GM per-mode variance");
  validate->add_option("--beta", beta, "CW inverse temperature");
  validate->add_option("--out", report_path, "write the JSON report here instead of stdout");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitInvalid;
  }
  if (!overrides.empty() && !run->parsed() && !sweep->parsed()) {
    std::cerr << "error: dotted overrides apply to run and sweep only\n";
    return kExitInvalid;
  }

  // Invalid input exits 1 before any compute; failures during compute exit 2.
  int stage_failure = kExitInvalid;
  try {
    if (run->parsed()) {
      ns::Json doc = load_with_overrides(config_path, overrides, out_dir, seed >= 0 ? &seed : nullptr);
      ns::ExperimentConfig ex = ns::build_experiment(doc);
      ex.sim.threads = threads;
      stage_failure = kExitRuntime;
      ns::FeatureReport report;
      const ns::ArtifactPaths paths = ns::run_experiment(ex, &report);
      std::cout << "wrote " << paths.magnetization.string() << '\n'
                << "wrote " << paths.coords.string() << '\n'
                << "wrote " << paths.report.string() << '\n'
                << "p_hat " << ns::format_double(report.mode.p_hat) << " +- "
                << ns::format_double(report.mode.std_err) << '\n';
      return kExitOk;
    }
    if (sweep->parsed()) {
      ns::Json doc = load_with_overrides(config_path, overrides, out_dir, seed >= 0 ? &seed : nullptr);
      ns::apply_override(doc, {"run.threads", std::to_string(threads)});
      ns::build_experiment(doc);
      stage_failure = kExitRuntime;
      std::filesystem::path agg;
      const auto rows = ns::run_sweep(doc, axis, values, &agg);
      bool all_ok = true;
      for (const auto& r : rows) {
        std::cout << axis << '=' << r.axis_value << ' ' << r.status << '\n';
        all_ok = all_ok && r.status == "ok";
      }
      std::cout << "wrote " << agg.string() << '\n';
      return all_ok ? kExitOk : kExitRuntime;
    }
    if (limit->parsed()) {
      ns::LimitRunOptions opt;
      opt.kind = ns::parse_limit_kind(kind_name);
      opt.params = limit_model == "gm" ? ns::LimitParams::for_gm(p, sigma2, kappa)
                                       : ns::LimitParams::for_cw(p, beta, kappa);
      opt.params.beta_temp = beta;
      opt.params.alpha_form = ns::parse_alpha_form(alpha_form);
      opt.params.mode_sign = mode_sign;
      opt.params.d = d;
      opt.n_members = members;
      opt.seed = seed >= 0 ? static_cast<std::uint64_t>(seed) : 0;
      opt.delta_t = delta_t;
      const ns::LimitInterval iv = ns::limit_interval(opt.kind);
      opt.t0 = t0 >= 0.0 ? t0 : iv.lo;
      opt.t1 = t1 >= 0.0 ? t1 : iv.hi;
      opt.fixed_initial = initial_opt->count() > 0;
      opt.initial = initial;
      opt.name = name;
      opt.output_dir = out_dir.empty() ? "." : out_dir;
      if (!(opt.t0 >= iv.lo && opt.t1 <= iv.hi && opt.t0 < opt.t1)) {
        throw ns::DomainError("requested interval lies outside the interval of " + kind_name);
      }
      stage_failure = kExitRuntime;
      const ns::LimitRunResult res = ns::run_limit(opt);
      std::cout << "wrote " << res.csv.string() << '\n' << "wrote " << res.json.string() << '\n'
                << "terminal mean " << ns::format_double(res.summary["terminal"]["mean"].get<double>())
                << ", plus fraction "
                << ns::format_double(res.summary["terminal"]["plus_fraction"].get<double>()) << '\n';
      return kExitOk;
    }
    if (validate->parsed()) {
      ns::TargetModel model = validate_model == "gm"
                                  ? ns::TargetModel{ns::GaussianMixture::make(p, sigma2, vd)}
                                  : ns::TargetModel{ns::CurieWeiss::make(p, beta, vd)};
      ns::InterpolantSpec spec{ns::parse_alpha_form(alpha_form), ns::parse_noise_scale(noise_scale)};
      ns::TimeDilation dilation;
      dilation.kind = ns::parse_dilation_kind(dilation_kind);
      dilation.kappa = kappa;
      dilation.dim = vd;
      dilation.validate();
      ns::ValidationOptions opt;
      opt.n_points = points;
      opt.n_samples = samples;
      opt.seed = seed >= 0 ? static_cast<std::uint64_t>(seed) : 0;
      stage_failure = kExitRuntime;
      const ns::ValidationReport rep =
          corrupt ? ns::validate_field(model, spec, dilation, opt, ns::corrupted_velocity)
                  : ns::validate_field(model, spec, dilation, opt);
      const std::string json = ns::validation_to_json(rep).dump(2) + '\n';
      if (report_path.empty()) {
        std::cout << json;
      } else {
        std::ofstream(report_path, std::ios::binary) << json;
      }
      std::cerr << (rep.passed ? "PASS" : "FAIL") << " max|z|=" << ns::format_double(rep.max_abs_z)
                << " frac(|z|>3)=" << ns::format_double(rep.frac_above_3)
                << " max exact dev=" << ns::format_double(rep.max_abs_dev)
                << " excluded=" << rep.n_excluded << '\n';
      return rep.passed ? kExitOk : kExitInvalid;
    }
  } catch (const ns::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return stage_failure;
  }
  return kExitInvalid;
}
