#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "noisesched/analysis.hpp"
#include "noisesched/errors.hpp"
#include "noisesched/experiment.hpp"
#include "noisesched/integrator.hpp"
#include "noisesched/limits.hpp"
#include "noisesched/models.hpp"
#include "noisesched/oracle.hpp"
#include "noisesched/schedules.hpp"
#include "noisesched/velocity.hpp"

namespace py = pybind11;
using namespace noisesched;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Array to_array(const std::vector<double>& v) {
  Array out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

TargetModel make_model(const std::string& model, double p, double sigma2, double beta_temp,
                       std::int64_t d) {
  if (model == "gm") return GaussianMixture::make(p, sigma2, d);
  if (model == "cw") return CurieWeiss::make(p, beta_temp, d);
  throw DomainError("model must be 'gm' or 'cw', got '" + model + "'");
}

TimeDilation make_dilation(const std::string& kind, double kappa, std::int64_t d) {
  switch (parse_dilation_kind(kind)) {
    case DilationKind::uniform:
      return TimeDilation::uniform();
    case DilationKind::dilated_vp:
      return TimeDilation::dilated_vp(kappa, d);
    case DilationKind::dilated_ve:
      return TimeDilation::dilated_ve(kappa, d);
    case DilationKind::ddpm_gamma:
      return TimeDilation::ddpm_gamma(0.1, 20.0);
  }
  throw DomainError("unknown dilation");
}

InterpolantSpec make_spec(const std::string& alpha_form, const std::string& noise_scale) {
  return {parse_alpha_form(alpha_form), parse_noise_scale(noise_scale)};
}

// Returns the report JSON text plus dense observable arrays of shape (n_traj, n_records).
py::dict simulate(const std::string& config_text, const std::map<std::string, std::string>& overrides) {
  Json doc = parse_config_text(config_text);
  for (const auto& kv : overrides) apply_override(doc, kv);
  const ExperimentConfig experiment = build_experiment(doc);

  TrajectoryBatch batch;
  FeatureReport report;
  {
    py::gil_scoped_release release;
    batch = simulate_batch(experiment.sim);
    report = feature_report(batch);
  }

  const std::vector<double> times = batch.record_times();
  const auto n_traj = static_cast<py::ssize_t>(batch.trajectories.size());
  const auto n_rec = static_cast<py::ssize_t>(times.size());
  Array M({n_traj, n_rec});
  Array mu({n_traj, n_rec});
  Array sp({n_traj, n_rec});
  for (py::ssize_t j = 0; j < n_traj; ++j) {
    const auto& recs = batch.trajectories[static_cast<std::size_t>(j)].records;
    for (py::ssize_t k = 0; k < n_rec; ++k) {
      const auto& r = recs[static_cast<std::size_t>(k)];
      M.mutable_at(j, k) = r.M;
      mu.mutable_at(j, k) = r.mu;
      sp.mutable_at(j, k) = r.sigma_perp2;
    }
  }

  py::dict out;
  out["t"] = to_array(times);
  out["M"] = M;
  out["mu"] = mu;
  out["sigma_perp2"] = sp;
  out["report"] = report_to_json(experiment, report).dump();
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Exact-velocity probability-flow simulation under time-dilation schedules.";

  auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<DomainError>(m, "DomainError", error.ptr());
  py::register_exception<SingularityError>(m, "SingularityError", error.ptr());
  py::register_exception<SimulationError>(m, "SimulationError", error.ptr());
  py::register_exception<UnreliableEstimateError>(m, "UnreliableEstimateError", error.ptr());
  py::register_exception<QualityError>(m, "QualityError", error.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", error.ptr());

  m.def("cw_fixed_point", &cw_fixed_point, py::arg("beta"));

  m.def(
      "eval_dilation",
      [](const std::string& kind, double t, double kappa, std::int64_t d) {
        const DilationValue v = eval_dilation(make_dilation(kind, kappa, d), t);
        return py::make_tuple(v.tau, v.tau_dot);
      },
      py::arg("kind"), py::arg("t"), py::arg("kappa") = 3.0, py::arg("d") = 1);

  m.def(
      "eval_coeffs",
      [](double t, std::int64_t d, const std::string& alpha_form, const std::string& noise_scale,
         const std::string& dilation, double kappa) {
        const InterpolantCoeffs c = eval_coeffs(make_spec(alpha_form, noise_scale),
                                                make_dilation(dilation, kappa, d), t, d);
        py::dict out;
        out["alpha"] = c.alpha;
        out["alpha_dot"] = c.alpha_dot;
        out["beta"] = c.beta;
        out["beta_dot"] = c.beta_dot;
        out["c"] = c.c;
        out["tau"] = c.tau;
        return out;
      },
      py::arg("t"), py::arg("d"), py::arg("alpha_form") = "linear", py::arg("noise_scale") = "vp",
      py::arg("dilation") = "uniform", py::arg("kappa") = 3.0);

  m.def(
      "velocity",
      [](const std::string& model, double t, Array x, double p, double sigma2, double beta,
         const std::string& alpha_form, const std::string& noise_scale,
         const std::string& dilation, double kappa) {
        if (x.ndim() != 1) throw DomainError("x must be one-dimensional");
        const auto d = static_cast<std::int64_t>(x.shape(0));
        const InterpolantCoeffs coeffs = eval_coeffs(make_spec(alpha_form, noise_scale),
                                                     make_dilation(dilation, kappa, d), t, d);
        const FieldContext ctx(make_model(model, p, sigma2, beta, d), coeffs, t);
        Array out(x.shape(0));
        velocity(ctx, std::span<const double>(x.data(), x.size()),
                 std::span<double>(out.mutable_data(), out.size()));
        return out;
      },
      py::arg("model"), py::arg("t"), py::arg("x"), py::arg("p") = 0.8, py::arg("sigma2") = 0.25,
      py::arg("beta") = 2.0, py::arg("alpha_form") = "linear", py::arg("noise_scale") = "vp",
      py::arg("dilation") = "uniform", py::arg("kappa") = 3.0);

  m.def("simulate", &simulate, py::arg("config_text"),
        py::arg("overrides") = std::map<std::string, std::string>{});

  m.def(
      "integrate_limit",
      [](const std::string& kind, double initial, double t0, double t1, double delta_t,
         const std::string& model, double p, double sigma2, double beta, double kappa,
         const std::string& alpha_form, int mode_sign, std::int64_t d) {
        LimitParams params = model == "cw" ? LimitParams::for_cw(p, beta, kappa)
                                           : LimitParams::for_gm(p, sigma2, kappa);
        params.alpha_form = parse_alpha_form(alpha_form);
        params.mode_sign = mode_sign;
        params.d = d;
        const LimitTrajectory path =
            integrate_limit(parse_limit_kind(kind), initial, t0, t1, delta_t, params);
        return py::make_tuple(to_array(path.t), to_array(path.y));
      },
      py::arg("kind"), py::arg("initial"), py::arg("t0"), py::arg("t1"), py::arg("delta_t") = 0.01,
      py::arg("model") = "gm", py::arg("p") = 0.8, py::arg("sigma2") = 0.25, py::arg("beta") = 2.0,
      py::arg("kappa") = 3.0, py::arg("alpha_form") = "linear", py::arg("mode_sign") = 1,
      py::arg("d") = 10000);

  m.def(
      "limit_interval",
      [](const std::string& kind) {
        const LimitInterval iv = limit_interval(parse_limit_kind(kind));
        return py::make_tuple(iv.lo, iv.hi, iv.hi_open);
      },
      py::arg("kind"));

  m.def(
      "predicted_orth_std",
      [](const std::string& theorem, double t, double kappa, double sigma2) {
        return predicted_orth_std(parse_orth_theorem(theorem), t, kappa, sigma2);
      },
      py::arg("theorem"), py::arg("t"), py::arg("kappa") = 3.0, py::arg("sigma2") = 0.25);

  m.def(
      "validate",
      [](const std::string& model, std::int64_t d, std::int64_t n_points, std::int64_t n_samples,
         std::uint64_t seed, bool corrupt, double p, double sigma2, double beta,
         const std::string& alpha_form, const std::string& noise_scale,
         const std::string& dilation, double kappa) {
        ValidationOptions options;
        options.n_points = n_points;
        options.n_samples = n_samples;
        options.seed = seed;
        const FieldFn field = corrupt ? FieldFn(corrupted_velocity) : FieldFn(velocity);
        ValidationReport report;
        {
          py::gil_scoped_release release;
          report = validate_field(make_model(model, p, sigma2, beta, d),
                                  make_spec(alpha_form, noise_scale),
                                  make_dilation(dilation, kappa, d), options, field);
        }
        return validation_to_json(report).dump();
      },
      py::arg("model"), py::arg("d"), py::arg("n_points") = 20, py::arg("n_samples") = 200000,
      py::arg("seed") = 0, py::arg("corrupt") = false, py::arg("p") = 0.8,
      py::arg("sigma2") = 0.25, py::arg("beta") = 2.0, py::arg("alpha_form") = "linear",
      py::arg("noise_scale") = "vp", py::arg("dilation") = "uniform", py::arg("kappa") = 3.0);
}
