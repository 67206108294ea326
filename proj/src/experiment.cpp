#include "noisesched/experiment.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "noisesched/errors.hpp"

namespace noisesched {

namespace fs = std::filesystem;

namespace {

void check_keys(const Json& block, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!block.is_object()) throw ConfigError(path + " must be an object");
  for (const auto& [key, value] : block.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) throw ConfigError("unknown key " + path + "." + key);
  }
}

const Json* find(const Json& block, const char* key) {
  const auto it = block.find(key);
  return it == block.end() ? nullptr : &*it;
}

double get_number(const Json& block, const std::string& path, const char* key, double fallback,
                  bool required = false) {
  const Json* v = find(block, key);
  if (v == nullptr) {
    if (required) throw ConfigError("missing required key " + path + "." + key);
    return fallback;
  }
  if (!v->is_number()) throw ConfigError(path + "." + key + " must be a number");
  return v->get<double>();
}

std::int64_t get_integer(const Json& block, const std::string& path, const char* key,
                         std::int64_t fallback, bool required = false) {
  const Json* v = find(block, key);
  if (v == nullptr) {
    if (required) throw ConfigError("missing required key " + path + "." + key);
    return fallback;
  }
  if (v->is_number_integer()) return v->get<std::int64_t>();
  if (v->is_number_float()) {
    const double x = v->get<double>();
    if (std::floor(x) == x && std::abs(x) < 9.0e15) return static_cast<std::int64_t>(x);
  }
  throw ConfigError(path + "." + key + " must be an integer");
}

std::string get_string(const Json& block, const std::string& path, const char* key,
                       const std::string& fallback, bool required = false) {
  const Json* v = find(block, key);
  if (v == nullptr) {
    if (required) throw ConfigError("missing required key " + path + "." + key);
    return fallback;
  }
  if (!v->is_string()) throw ConfigError(path + "." + key + " must be a string");
  return v->get<std::string>();
}

template <typename F>
auto parse_enum(F parse, const std::string& value, const std::string& path) {
  try {
    return parse(value);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

void write_file(const fs::path& path, const std::string& content, std::vector<fs::path>& written) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  written.push_back(path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.close();
  if (!out) throw Error("failed writing " + path.string());
}

void remove_all_quietly(const std::vector<fs::path>& paths) {
  for (const auto& p : paths) {
    std::error_code ec;
    fs::remove(p, ec);
  }
}

Json series_json(const Series& s) {
  Json j;
  j["t"] = s.t;
  j["value"] = s.value;
  return j;
}

Json mode_spin_json(const ModeSpinStats& s) {
  Json j;
  j["n_traj"] = s.n_traj;
  j["plus_fraction"] = s.mean_fraction;
  j["std_err"] = s.std_err;
  return j;
}

std::string csv_safe(std::string s) {
  for (char& c : s) {
    if (c == ',' || c == '\n' || c == '\r' || c == '"') c = ';';
  }
  return s;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

Json parse_config_text(const std::string& text, const std::string& origin) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    // Recover line and column from the byte offset of the failure.
    std::size_t line = 1, col = 1, line_start = 0;
    const std::size_t upto = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t i = 0; i < upto; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
        line_start = i + 1;
      } else {
        ++col;
      }
    }
    const std::size_t line_end = text.find('\n', line_start);
    const std::string snippet = text.substr(line_start, line_end == std::string::npos
                                                            ? std::string::npos
                                                            : line_end - line_start);
    throw ConfigError(origin + ":" + std::to_string(line) + ":" + std::to_string(col) +
                      ": syntax error near: " + snippet);
  }
}

Json load_config_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path.string());
}

void apply_override(Json& doc, const Override& override_kv) {
  const auto& [key, raw] = override_kv;
  if (key.empty() || key.front() == '.' || key.back() == '.') {
    throw ConfigError("malformed override key '" + key + "'");
  }
  Json value;
  try {
    value = Json::parse(raw);
  } catch (const Json::parse_error&) {
    value = raw;
  }
  Json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    Json& child = (*node)[part];
    if (child.is_null()) child = Json::object();
    if (!child.is_object()) throw ConfigError("override '" + key + "' descends into a non-object");
    node = &child;
    start = dot + 1;
  }
}

ExperimentConfig build_experiment(const Json& doc) {
  check_keys(doc, "config", {"experiment", "model", "interpolant", "dilation", "run", "output"});
  ExperimentConfig ex;
  ex.source = doc;
  ex.name = get_string(doc, "config", "experiment", "", true);
  if (ex.name.empty() || ex.name.find('/') != std::string::npos) {
    throw ConfigError("experiment name must be non-empty and contain no '/'");
  }

  const Json* run_block = find(doc, "run");
  if (run_block == nullptr) throw ConfigError("missing required block run");
  const Json& run = *run_block;
  check_keys(run, "run", {"d", "delta_t", "steps", "n_traj", "seed", "record_coords", "record_stride",
                          "coords_trajectories", "keep_final_state", "threads"});
  SimulationConfig& sim = ex.sim;
  sim.d = get_integer(run, "run", "d", 0, true);
  if (sim.d < 1) throw ConfigError("run.d must be >= 1");
  sim.n_traj = get_integer(run, "run", "n_traj", 0, true);
  if (sim.n_traj < 1) throw ConfigError("run.n_traj must be >= 1");
  const Json* seed = find(run, "seed");
  if (seed == nullptr) throw ConfigError("missing required key run.seed (no implicit entropy)");
  if (!seed->is_number_unsigned()) throw ConfigError("run.seed must be a non-negative integer");
  sim.seed = seed->get<std::uint64_t>();
  const bool has_dt = find(run, "delta_t") != nullptr;
  const bool has_steps = find(run, "steps") != nullptr;
  if (has_dt == has_steps) throw ConfigError("run needs exactly one of delta_t or steps");
  if (has_dt) {
    try {
      sim.steps = steps_from_delta_t(get_number(run, "run", "delta_t", 0.0));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("run.delta_t: ") + e.what());
    }
  } else {
    sim.steps = get_integer(run, "run", "steps", 0);
    if (sim.steps < 1) throw ConfigError("run.steps must be >= 1");
  }
  sim.record_coords = get_integer(run, "run", "record_coords", 0);
  sim.record_stride = get_integer(run, "run", "record_stride", 1);
  sim.coords_trajectories = get_integer(run, "run", "coords_trajectories", 1);
  if (const Json* keep = find(run, "keep_final_state")) {
    if (!keep->is_boolean()) throw ConfigError("run.keep_final_state must be a boolean");
    sim.keep_final_state = keep->get<bool>();
  }
  const std::int64_t threads = get_integer(run, "run", "threads", 1);
  if (threads < 0) throw ConfigError("run.threads must be >= 0");
  sim.threads = static_cast<unsigned>(threads);

  const Json* model_block = find(doc, "model");
  if (model_block == nullptr) throw ConfigError("missing required block model");
  const Json& model = *model_block;
  check_keys(model, "model", {"type", "p", "sigma2", "beta"});
  const std::string type = get_string(model, "model", "type", "", true);
  const double p = get_number(model, "model", "p", 0.5, true);
  try {
    if (type == "gm") {
      if (find(model, "beta")) throw ConfigError("model.beta is not a GM parameter");
      sim.model = GaussianMixture::make(p, get_number(model, "model", "sigma2", 0.0, true), sim.d);
    } else if (type == "cw") {
      if (find(model, "sigma2")) throw ConfigError("model.sigma2 is not a CW parameter");
      const CurieWeiss cw = CurieWeiss::make(p, get_number(model, "model", "beta", 0.0, true), sim.d);
      if (!(cw.p > 0.0 && cw.p < 1.0)) throw ConfigError("CW model needs 0 < p < 1");
      sim.model = cw;
    } else {
      throw ConfigError("model.type must be gm or cw, got '" + type + "'");
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("model: ") + e.what());
  }

  const Json empty = Json::object();
  const Json* ip = find(doc, "interpolant");
  const Json& interp = ip ? *ip : empty;
  check_keys(interp, "interpolant", {"alpha_form", "noise_scale"});
  sim.interpolant.alpha_form = parse_enum(parse_alpha_form, get_string(interp, "interpolant", "alpha_form", "linear"),
                                          "interpolant.alpha_form");
  sim.interpolant.noise_scale = parse_enum(parse_noise_scale, get_string(interp, "interpolant", "noise_scale", "vp"),
                                           "interpolant.noise_scale");

  const Json* dp = find(doc, "dilation");
  const Json& dil = dp ? *dp : empty;
  check_keys(dil, "dilation", {"kind", "kappa", "gamma_min", "gamma_max"});
  sim.dilation.kind = parse_enum(parse_dilation_kind, get_string(dil, "dilation", "kind", "uniform"), "dilation.kind");
  sim.dilation.kappa = get_number(dil, "dilation", "kappa", 3.0);
  sim.dilation.gamma_min = get_number(dil, "dilation", "gamma_min", 0.1);
  sim.dilation.gamma_max = get_number(dil, "dilation", "gamma_max", 20.0);
  sim.dilation.dim = sim.d;

  const Json* op = find(doc, "output");
  const Json& output = op ? *op : empty;
  check_keys(output, "output", {"directory", "formats"});
  ex.output_dir = get_string(output, "output", "directory", ".");
  if (const Json* formats = find(output, "formats")) {
    if (!formats->is_array()) throw ConfigError("output.formats must be an array");
    for (const auto& f : *formats) {
      if (!f.is_string() || (f != "csv" && f != "json")) {
        throw ConfigError("output.formats entries must be \"csv\" or \"json\"");
      }
    }
  }

  try {
    sim.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return ex;
}

Json report_to_json(const ExperimentConfig& experiment, const FeatureReport& report) {
  Json j;
  j["experiment"] = experiment.name;
  Json config = experiment.source;
  if (config.contains("run")) config["run"].erase("threads");
  if (config.contains("output")) config["output"].erase("directory");
  j["config"] = config;
  j["n_traj"] = report.n_traj;
  j["d"] = report.d;
  j["delta_t"] = report.delta_t;
  j["p_hat"] = {{"value", report.mode.p_hat},
                {"std_err", report.mode.std_err},
                {"n", report.mode.n},
                {"n_ambiguous", report.mode.n_ambiguous}};
  j["sigma_hat2"] = series_json(report.sigma_hat2);
  j["sigma_hat2_final"] = report.sigma_hat2.value.empty() ? 0.0 : report.sigma_hat2.value.back();
  const SpeciationEstimate& sp = report.speciation;
  j["speciation"] = {{"threshold", sp.threshold}, {"t_median", sp.t_median},
                     {"tau_median", sp.tau_median}, {"n_used", sp.n_used},
                     {"n_unstable", sp.n_unstable}};
  if (report.spins) {
    j["spin_stats"] = {{"plus_mode", mode_spin_json(report.spins->plus_mode)},
                       {"minus_mode", mode_spin_json(report.spins->minus_mode)},
                       {"unroundable_fraction", report.spins->unroundable_fraction},
                       {"quality_ok", report.spins->unroundable_fraction <= 0.01}};
  }
  return j;
}

ArtifactPaths write_artifacts(const ExperimentConfig& experiment, const TrajectoryBatch& batch,
                              const FeatureReport& report) {
  fs::create_directories(experiment.output_dir);
  ArtifactPaths paths{experiment.output_dir / (experiment.name + ".magnetization.csv"),
                      experiment.output_dir / (experiment.name + ".coords.csv"),
                      experiment.output_dir / (experiment.name + ".report.json")};
  std::vector<fs::path> written;
  try {
    std::string mag = "t,traj_id,M,mu,sigma_perp2\n";
    std::string coords = "t,traj_id";
    for (std::int64_t i = 0; i < std::min(batch.config.record_coords, batch.config.d); ++i) {
      coords += ",x" + std::to_string(i);
    }
    coords += '\n';
    for (std::size_t j = 0; j < batch.trajectories.size(); ++j) {
      const std::string id = std::to_string(j);
      for (const auto& rec : batch.trajectories[j].records) {
        const std::string t = format_double(rec.t);
        mag += t + ',' + id + ',' + format_double(rec.M) + ',' + format_double(rec.mu) + ',' +
               format_double(rec.sigma_perp2) + '\n';
        if (rec.coords.empty()) continue;
        coords += t + ',' + id;
        for (double v : rec.coords) coords += ',' + format_double(v);
        coords += '\n';
      }
    }
    write_file(paths.magnetization, mag, written);
    write_file(paths.coords, coords, written);
    write_file(paths.report, report_to_json(experiment, report).dump(2) + '\n', written);
  } catch (...) {
    remove_all_quietly(written);
    throw;
  }
  return paths;
}

ArtifactPaths run_experiment(const ExperimentConfig& experiment, FeatureReport* report_out) {
  const TrajectoryBatch batch = simulate_batch(experiment.sim);
  const FeatureReport report = feature_report(batch);
  if (report_out != nullptr) *report_out = report;
  return write_artifacts(experiment, batch, report);
}

Json validation_to_json(const ValidationReport& report) {
  Json j;
  j["passed"] = report.passed;
  j["tol_sigmas"] = report.tol_sigmas;
  j["max_abs_z"] = report.max_abs_z;
  j["frac_above_3"] = report.frac_above_3;
  j["max_abs_dev_exact"] = report.max_abs_dev;
  j["n_excluded"] = report.n_excluded;
  Json points = Json::array();
  for (const auto& p : report.points) {
    Json pj;
    pj["t"] = p.t;
    pj["x"] = p.x;
    pj["closed_form"] = p.closed_form;
    pj["oracle"] = p.oracle;
    pj["z"] = p.z;
    pj["max_abs_z"] = p.max_abs_z;
    pj["max_abs_dev"] = p.max_abs_dev;
    pj["ess"] = p.ess;
    pj["exact"] = p.exact;
    pj["excluded"] = p.excluded;
    if (!p.note.empty()) pj["note"] = p.note;
    points.push_back(std::move(pj));
  }
  j["points"] = std::move(points);
  return j;
}

std::vector<SweepRow> run_sweep(const Json& template_doc, const std::string& axis,
                                const std::vector<std::string>& values, fs::path* aggregate_path) {
  if (values.empty()) throw ConfigError("sweep needs at least one value");
  // The template itself must be valid before any run starts.
  const ExperimentConfig base = build_experiment(template_doc);
  std::string axis_tag = axis;
  for (char& c : axis_tag) {
    if (c == '.') c = '_';
  }
  std::vector<SweepRow> rows;
  for (const auto& value : values) {
    SweepRow row;
    row.axis_value = value;
    try {
      Json doc = template_doc;
      if (!parse_config_text(value, "sweep value").is_number()) {
        throw ConfigError("sweep value '" + value + "' is not numeric");
      }
      // The step count and step size are alternative spellings of one key.
      if (axis == "run.steps") doc["run"].erase("delta_t");
      if (axis == "run.delta_t") doc["run"].erase("steps");
      apply_override(doc, {axis, value});
      doc["experiment"] = base.name + "." + axis_tag + "-" + value;
      ExperimentConfig ex = build_experiment(doc);
      ex.sim.threads = base.sim.threads;
      FeatureReport report;
      run_experiment(ex, &report);
      row.p_hat = report.mode.p_hat;
      row.p_hat_se = report.mode.std_err;
      row.sigma_hat2_final = report.sigma_hat2.value.back();
      row.tau_s = report.speciation.tau_median;
      row.t_s = report.speciation.t_median;
      row.status = "ok";
    } catch (const std::exception& e) {
      row.p_hat = row.p_hat_se = row.sigma_hat2_final = row.tau_s = row.t_s = std::nan("");
      row.status = csv_safe(e.what());
    }
    rows.push_back(std::move(row));
  }
  std::string csv = "axis_value,p_hat,p_hat_se,sigma_hat2_final,tau_s,t_s,status\n";
  for (const auto& r : rows) {
    csv += csv_safe(r.axis_value) + ',' + format_double(r.p_hat) + ',' + format_double(r.p_hat_se) + ',' +
           format_double(r.sigma_hat2_final) + ',' + format_double(r.tau_s) + ',' +
           format_double(r.t_s) + ',' + r.status + '\n';
  }
  fs::create_directories(base.output_dir);
  const fs::path agg = base.output_dir / (base.name + "." + axis_tag + ".sweep.csv");
  std::vector<fs::path> written;
  write_file(agg, csv, written);
  if (aggregate_path != nullptr) *aggregate_path = agg;
  return rows;
}

LimitRunResult run_limit(const LimitRunOptions& options) {
  const LimitInterval iv = limit_interval(options.kind);
  const double t0 = options.t0;
  const double t1 = options.t1;
  if (!(t0 >= iv.lo && t1 <= iv.hi && t0 < t1)) {
    throw DomainError(std::string(to_string(options.kind)) + ": requested interval [" +
                      format_double(t0) + ", " + format_double(t1) + "] is outside [" +
                      format_double(iv.lo) + ", " + format_double(iv.hi) + "]");
  }
  if (options.n_members < 1) throw std::invalid_argument("ensemble size must be >= 1");
  const std::vector<double> initial =
      options.fixed_initial ? std::vector<double>(static_cast<std::size_t>(options.n_members), options.initial)
                            : sample_limit_initial(options.kind, options.params, options.n_members, options.seed);

  LimitRunResult result;
  result.ensemble = integrate_limit_ensemble(options.kind, initial, t0, t1, options.delta_t, options.params);
  const std::vector<double> terminal = result.ensemble.terminal();
  double mean = 0.0, plus = 0.0;
  for (double y : terminal) {
    mean += y;
    if (y > 0.0) plus += 1.0;
  }
  const double n = static_cast<double>(terminal.size());
  mean /= n;
  double var = 0.0;
  for (double y : terminal) var += (y - mean) * (y - mean);
  var = terminal.size() > 1 ? var / (n - 1.0) : 0.0;

  Json& s = result.summary;
  s["kind"] = std::string(to_string(options.kind));
  s["interval"] = {{"lo", iv.lo}, {"hi", iv.hi}, {"hi_open", iv.hi_open}};
  s["t0"] = t0;
  s["t1"] = t1;
  s["delta_t"] = options.delta_t;
  s["n_members"] = options.n_members;
  s["seed"] = options.seed;
  s["params"] = {{"h", options.params.h},           {"kappa", options.params.kappa},
                 {"sigma2", options.params.sigma2}, {"m", options.params.m},
                 {"beta", options.params.beta_temp}, {"mode_sign", options.params.mode_sign},
                 {"p", options.params.p},           {"d", options.params.d},
                 {"alpha_form", std::string(to_string(options.params.alpha_form))}};
  s["terminal"] = {{"mean", mean},
                   {"variance", var},
                   {"std_err", std::sqrt(var / n)},
                   {"plus_fraction", plus / n}};
  s["mean_path"] = {{"t", result.ensemble.t}, {"value", result.ensemble.mean()}};

  fs::create_directories(options.output_dir);
  result.csv = options.output_dir / (options.name + ".limit.csv");
  result.json = options.output_dir / (options.name + ".limit.json");
  std::string csv = "t,member,y\n";
  for (std::size_t j = 0; j < result.ensemble.members.size(); ++j) {
    const std::string id = std::to_string(j);
    for (std::size_t k = 0; k < result.ensemble.t.size(); ++k) {
      csv += format_double(result.ensemble.t[k]) + ',' + id + ',' +
             format_double(result.ensemble.members[j][k]) + '\n';
    }
  }
  std::vector<fs::path> written;
  try {
    write_file(result.csv, csv, written);
    write_file(result.json, s.dump(2) + '\n', written);
  } catch (...) {
    remove_all_quietly(written);
    throw;
  }
  return result;
}

}  // namespace noisesched
