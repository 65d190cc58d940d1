#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "amo/experiment.hpp"

using namespace amo;

namespace {

struct FreqArgs {
  std::string spec = "golden";
  Int q_cap = 1'000'000;
  std::size_t depth = 0;
  std::size_t beta_window = 0;

  void add(CLI::App* cmd, bool positional = false) {
    if (positional) {
      cmd->add_option("spec", spec, "frequency: golden | silver | cf:[..] | cf-rule:exp(beta=..,seed=[..])");
    } else {
      cmd->add_option("--freq", spec, "frequency spec");
    }
    cmd->add_option("--q-cap", q_cap, "largest admissible denominator");
    cmd->add_option("--depth", depth, "number of convergents (0: as deep as the cap allows)");
    cmd->add_option("--beta-window", beta_window, "tail window for the beta estimate (0: last half)");
  }

  std::shared_ptr<const FrequencyModel> build() const {
    if (q_cap < 2) throw UsageError("--q-cap must be at least 2");
    FrequencyOptions opts;
    opts.q_cap = q_cap;
    return std::make_shared<const FrequencyModel>(make_frequency(parse_frequency_spec(spec), depth, opts));
  }

  Json echo() const { return {{"spec", spec}, {"q_cap", q_cap}, {"depth", depth}, {"beta_window", beta_window}}; }
};

struct OperatorArgs {
  double lambda = 3.0;
  std::optional<double> theta;
  Int p = 0;
  Int j = 0;
  double energy = 0.0;

  void add(CLI::App* cmd) {
    cmd->add_option("--lambda", lambda, "coupling (negative values use theta + 1/2)");
    cmd->add_option("--theta", theta, "explicit phase; overrides --p/--j");
    cmd->add_option("--p", p, "resonant phase index p <= 0");
    cmd->add_option("--j", j, "resonant phase index j");
    cmd->add_option("--energy,-E", energy, "spectral parameter");
  }

  OperatorParams build(std::shared_ptr<const FrequencyModel> model) const {
    if (theta) return reduce_negative_coupling(lambda, model, *theta, energy);
    if (lambda <= 0.0) throw UsageError("--lambda must be positive with a resonant phase");
    return make_params(lambda, model, make_resonant_phase(*model, p, j), energy);
  }

  Json echo() const {
    Json e{{"lambda", lambda}, {"energy", energy}};
    if (theta) {
      e["theta"] = *theta;
    } else {
      e["p"] = p;
      e["j"] = j;
    }
    return e;
  }
};

IntervalZ parse_interval(const std::string& text) {
  const auto dots = text.find("..");
  if (dots == std::string::npos) throw UsageError("interval must look like a..b");
  try {
    std::size_t used = 0;
    const long long a = std::stoll(text.substr(0, dots), &used);
    if (used != dots) throw UsageError("bad interval start");
    const std::string rest = text.substr(dots + 2);
    const long long b = std::stoll(rest, &used);
    if (used != rest.size()) throw UsageError("bad interval end");
    if (a > b) throw UsageError("interval needs a <= b");
    return IntervalZ(a, b);
  } catch (const std::logic_error& ex) {
    if (dynamic_cast<const UsageError*>(&ex)) throw;
    throw UsageError("cannot parse interval '" + text + "'");
  }
}

Json envelope(const std::string& command, Json config) {
  Json out;
  out["artifact"] = artifact_json();
  out["command"] = command;
  out["config"] = std::move(config);
  return out;
}

void emit(const Json& j) { std::cout << dump17(j) << "\n"; }

int emit_error(const std::string& command, const std::string& kind, const std::string& message, int code) {
  Json out;
  out["artifact"] = artifact_json();
  out["command"] = command;
  out["error"] = {{"kind", kind}, {"message", message}, {"exit_code", code}};
  emit(out);
  return code;
}

int cmd_cf(const FreqArgs& f, Int brute_cap) {
  const auto model = f.build();
  Json out = envelope("cf", {{"frequency", f.echo()}, {"brute_force_cap", brute_cap}});
  out["frequency"] = frequency_report(*model, f.beta_window, brute_cap);
  emit(out);
  return 0;
}

int cmd_green(const FreqArgs& f, const OperatorArgs& o, const std::string& interval, Int y, const std::string& side) {
  const IntervalZ box = parse_interval(interval);
  if (!box.contains(y)) throw UsageError("--y must lie in the interval");
  if (side != "left" && side != "right" && side != "both") throw UsageError("--side must be left, right or both");
  const auto model = f.build();
  const OperatorParams params = o.build(model);
  Json out = envelope("green", {{"frequency", f.echo()},
                                {"operator", o.echo()},
                                {"interval", to_json(box)},
                                {"y", y},
                                {"side", side}});
  const GreenPair cramer = green_pair_cramer(params, box, y);
  if (cramer.singular) throw DegenerateError("box restriction is singular at this energy");
  std::optional<DenseGreen> dense;
  if (box.length() <= kDenseGreenCap) dense = green_dense(params, box);
  bool agree = true;
  Json entries = Json::array();
  auto one = [&](Endpoint e) {
    const bool left = e == Endpoint::Left;
    const LogScalar c = left ? cramer.left : cramer.right;
    Json entry{{"side", left ? "left" : "right"},
               {"x", left ? box.x1 : box.x2},
               {"y", y},
               {"cramer", to_json(c)}};
    if (dense) {
      const LogScalar d = left ? dense->log_entry(box.x1, y) : dense->log_entry(y, box.x2);
      const double diff = std::fabs(c.log_mag - d.log_mag);
      const bool ok = c.sign == d.sign && diff <= 1e-6 * std::max(1.0, std::fabs(d.log_mag));
      agree = agree && ok;
      entry["dense"] = to_json(d);
      entry["log_difference"] = diff;
      entry["agreement"] = ok;
    }
    entries.push_back(entry);
  };
  if (side != "right") one(Endpoint::Left);
  if (side != "left") one(Endpoint::Right);
  out["entries"] = entries;
  out["agreement"] = dense ? Json(agree) : Json(nullptr);
  if (dense) out["dense_rcond"] = dense->rcond;
  emit(out);
  return 0;
}

int cmd_regular(const FreqArgs& f, const OperatorArgs& o, Int y, double t, Int k) {
  const auto model = f.build();
  const OperatorParams params = o.build(model);
  Json out = envelope("regular", {{"frequency", f.echo()}, {"operator", o.echo()}, {"y", y}, {"t", t}, {"k", k}});
  out["verdict"] = to_json(classify_regularity(params, y, t, k));
  emit(out);
  return 0;
}

int cmd_resonance(const FreqArgs& f, Int y, std::optional<Int> p) {
  const auto model = f.build();
  Json cfg{{"frequency", f.echo()}, {"y", y}};
  if (p) cfg["p"] = *p;
  Json out = envelope("resonance", cfg);
  const ResonanceReport r = classify_resonance(y, *model);
  out["report"] = to_json(r);
  if (p) {
    const PhaseSet set = r.resonant ? build_resonant_sets(r, *p, model) : build_nonresonant_sets(r, *p, model);
    out["phase_set"] = to_json(set);
  }
  emit(out);
  return 0;
}

int cmd_uniformity(const FreqArgs& f, std::string set_kind, std::optional<std::size_t> n, Int p, Int j,
                   std::optional<Int> ell, std::optional<Int> y, std::size_t grid) {
  if (set_kind.rfind("§", 0) == 0) set_kind = set_kind.substr(std::string("§").size());
  if (set_kind != "3" && set_kind != "4") throw UsageError("--set must be 3 or 4");
  const auto model = f.build();
  const ResonantPhase phase = make_resonant_phase(*model, p, j);
  Json cfg{{"frequency", f.echo()}, {"set", set_kind}, {"p", p}, {"j", j}, {"grid", grid}};
  PhaseSet set;
  if (set_kind == "4") {
    if (!n) throw UsageError("--set 4 needs --n");
    cfg["n"] = *n;
    cfg["ell"] = ell.value_or(1);
    set = build_resonant_sets_at(*n, ell.value_or(1), phase, model);
  } else {
    if (!y) throw UsageError("--set 3 needs --y (a non-resonant site)");
    cfg["y"] = *y;
    const ResonanceReport r = classify_resonance(*y, *model);
    if (r.resonant) throw UsageError("--y is resonant at its scale; use --set 4");
    if (n && *n != r.n) throw UsageError("--n disagrees with the scale of --y (" + std::to_string(r.n) + ")");
    set = build_nonresonant_sets(r, phase, model);
  }
  Json out = envelope("uniformity", cfg);
  UniformityOptions opts;
  opts.grid_points = grid;
  const double beta_hat = model->depth() >= 2 ? beta_estimate(*model, f.beta_window).tail_sup : 0.0;
  out["phase_set"] = to_json(set);
  out["margin"] = to_json(uniformity_margin(set, opts));
  out["beta_hat"] = beta_hat;
  out["reference"] = to_json(reference_margins(set, beta_hat));
  emit(out);
  return 0;
}

std::string quoted(const std::string& s) { return Json(s).dump(); }

template <class T>
std::string list_text(const std::vector<T>& v) {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << Json(v[i]).dump();
  os << "]";
  return os.str();
}

int cmd_localize(const std::string& config_path, const FreqArgs& f, const std::vector<double>& lambdas, Int p, Int j,
                 Int N, bool filter, const std::string& csv_path) {
  ExperimentConfig config;
  if (!config_path.empty()) {
    config = load_experiment_config(config_path);
  } else {
    std::ostringstream text;
    text << "[frequency]\nspec = " << quoted(f.spec) << "\nq_cap = " << f.q_cap << "\ndepth = " << f.depth
         << "\nbeta_window = " << f.beta_window << "\n[operator]\nlambda = " << list_text(lambdas) << "\np = " << p
         << "\nj = " << j << "\n[truncation]\nN = " << N << "\n[filter]\nenabled = " << (filter ? "true" : "false")
         << "\n";
    config = parse_experiment_config(text.str());
  }
  if (config.point_count() != 1) throw UsageError("localize runs one point; use sweep for grids");
  const PointOutcome o = run_point(config, experiment_frequency(config), expand_points(config).front());
  if (o.failed) return emit_error("localize", o.error_kind, o.error_message, o.exit_code);
  Json out = o.json;
  out["command"] = "localize";
  emit(out);
  if (!csv_path.empty()) {
    std::ofstream csv(csv_path, std::ios::binary | std::ios::trunc);
    if (!csv) throw UsageError("cannot write " + csv_path);
    csv << o.csv;
  }
  return o.exit_code;
}

int cmd_sweep(const std::string& config_path, std::string out_dir, std::optional<unsigned> jobs) {
  const ExperimentConfig config = load_experiment_config(config_path);
  if (out_dir.empty()) out_dir = config.output_dir;
  const SweepSummary s = run_sweep(config, out_dir, jobs.value_or(config.parallelism));
  Json out = envelope("sweep", to_json(config));
  out["output_dir"] = out_dir;
  out["points"] = s.total;
  out["computed"] = s.computed;
  out["skipped"] = s.skipped;
  out["failed"] = s.failed;
  out["aggregate"] = s.aggregate.string();
  out["manifest"] = s.manifest.string();
  emit(out);
  return s.failed.empty() ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Almost Mathieu localization laboratory"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kArtifactVersion));

  FreqArgs freq;
  OperatorArgs op;

  auto* cf = app.add_subcommand("cf", "continued-fraction report");
  freq.add(cf, true);
  Int brute_cap = 100'000;
  cf->add_option("--brute-cap", brute_cap, "largest q_{n+1} checked by exhaustive scan");

  auto* green = app.add_subcommand("green", "Cramer Green's function entries, checked against a dense inverse");
  freq.add(green);
  op.add(green);
  std::string interval;
  Int y = 0;
  std::string side = "both";
  green->add_option("--interval", interval, "box a..b")->required();
  green->add_option("--y", y, "site in the box")->required();
  green->add_option("--side", side, "left | right | both");

  auto* regular = app.add_subcommand("regular", "(t,k)-regularity of a site");
  freq.add(regular);
  op.add(regular);
  double t = 0.0;
  Int k = 0;
  regular->add_option("--y", y, "site")->required();
  regular->add_option("--t", t, "decay rate")->required();
  regular->add_option("--k", k, "window length")->required();

  auto* resonance = app.add_subcommand("resonance", "resonance classification of a site");
  freq.add(resonance);
  std::optional<Int> set_p;
  resonance->add_option("--y", y, "site")->required();
  resonance->add_option("--p", set_p, "also build the phase set for this p");

  auto* uniformity = app.add_subcommand("uniformity", "uniformity margin of a phase set");
  freq.add(uniformity);
  std::string set_kind;
  std::optional<std::size_t> scale;
  std::optional<Int> ell, uy;
  Int up = 0, uj = 0;
  std::size_t grid = 0;
  uniformity->add_option("--set", set_kind, "3 (non-resonant) or 4 (resonant)")->required();
  uniformity->add_option("--n", scale, "scale index");
  uniformity->add_option("--ell", ell, "multiple of q_n for --set 4 (default 1)");
  uniformity->add_option("--y", uy, "non-resonant site for --set 3");
  uniformity->add_option("--p", up, "phase index p <= 0");
  uniformity->add_option("--j", uj, "phase index j");
  uniformity->add_option("--grid", grid, "Chebyshev grid size (0: 4 x set size)");

  auto* localize = app.add_subcommand("localize", "decay-rate verdict at one parameter point");
  std::string config_path, csv_path;
  std::vector<double> lambdas{3.0};
  Int lp = 0, lj = 0, N = 1500;
  bool filter = false;
  localize->add_option("--config", config_path, "experiment file");
  freq.add(localize);
  localize->add_option("--lambda", lambdas, "coupling");
  localize->add_option("--p", lp, "phase index p <= 0");
  localize->add_option("--j", lj, "phase index j");
  localize->add_option("--N", N, "truncation half-width");
  localize->add_flag("--filter", filter, "run the I1/I2 membership filter");
  localize->add_option("--csv", csv_path, "write the per-mode CSV here");

  auto* sweep = app.add_subcommand("sweep", "run every grid point of an experiment file");
  std::string out_dir;
  std::optional<unsigned> jobs;
  sweep->add_option("--config", config_path, "experiment file")->required();
  sweep->add_option("--out", out_dir, "output directory (default: output.dir)");
  sweep->add_option("--jobs", jobs, "parallelism (default: sweep.parallelism)");

  std::string command = "amolab";
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return emit_error(command, "usage", e.what(), 2);
  }

  const auto* chosen = app.get_subcommands().front();
  command = chosen->get_name();
  try {
    if (chosen == cf) return cmd_cf(freq, brute_cap);
    if (chosen == green) return cmd_green(freq, op, interval, y, side);
    if (chosen == regular) return cmd_regular(freq, op, y, t, k);
    if (chosen == resonance) return cmd_resonance(freq, y, set_p);
    if (chosen == uniformity) return cmd_uniformity(freq, set_kind, scale, up, uj, ell, uy, grid);
    if (chosen == localize) {
      if (!config_path.empty() && (localize->count("--lambda") || localize->count("--freq") ||
                                   localize->count("--p") || localize->count("--j") || localize->count("--N"))) {
        throw UsageError("--config cannot be combined with point flags");
      }
      return cmd_localize(config_path, freq, lambdas, lp, lj, N, filter, csv_path);
    }
    if (chosen == sweep) return cmd_sweep(config_path, out_dir, jobs);
  } catch (const UsageError& e) {
    return emit_error(command, "usage", e.what(), 2);
  } catch (const DegenerateError& e) {
    return emit_error(command, "degenerate", e.what(), 3);
  } catch (const RegimeError& e) {
    return emit_error(command, "regime", e.what(), 4);
  }
  return 2;
}
