#include "amo/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include <openssl/evp.h>

namespace amo {

namespace fs = std::filesystem;

std::string point_key(const PointSpec& spec) {
  return "lambda=" + format17(spec.lambda) + "_p=" + std::to_string(spec.p) + "_j=" + std::to_string(spec.j);
}

std::vector<PointSpec> expand_points(const ExperimentConfig& config) {
  std::vector<PointSpec> out;
  for (double l : config.lambdas) {
    for (Int p : config.ps) {
      for (Int j : config.js) out.push_back({l, p, j});
    }
  }
  return out;
}

std::shared_ptr<const FrequencyModel> experiment_frequency(const ExperimentConfig& config) {
  FrequencyOptions opts;
  opts.q_cap = config.q_cap;
  return std::make_shared<const FrequencyModel>(make_frequency(parse_frequency_spec(config.frequency), config.depth, opts));
}

namespace {

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

Json point_json(const PointSpec& spec) { return {{"lambda", spec.lambda}, {"p", spec.p}, {"j", spec.j}}; }

void write_file(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << text;
  }
  fs::rename(tmp, path);
}

std::optional<std::string> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

std::string point_hash(const ExperimentConfig& config, const PointSpec& spec) {
  Json echo = to_json(config);
  echo.erase("output");
  echo.erase("sweep");
  echo["operator"] = point_json(spec);
  return sha256_hex(std::string(kArtifactVersion) + "\n" + dump17(echo, 0));
}

PointOutcome run_point(const ExperimentConfig& config, std::shared_ptr<const FrequencyModel> model,
                       const PointSpec& spec) {
  PointOutcome out;
  out.spec = spec;
  out.key = point_key(spec);
  out.hash = point_hash(config, spec);
  Json j;
  j["artifact"] = artifact_json();
  j["key"] = out.key;
  j["hash"] = out.hash;
  j["point"] = point_json(spec);
  j["config"] = to_json(config);
  try {
    const ResonantPhase phase = make_resonant_phase(*model, spec.p, spec.j);
    const OperatorParams params = make_params(spec.lambda, model, phase, 0.0);
    j["point"]["theta"] = phase.theta;
    j["point"]["N"] = config.half_width;
    const TheoremVerdict v = theorem_verdict(params, config.half_width, config.policy);
    j["verdict"] = to_json(v);
    if (config.filter_enabled) {
      Json f;
      std::vector<std::size_t> scales = admissible_resonant_scales(*model, spec.p, config.max_set_size);
      if (scales.size() > config.max_scales) {
        scales.erase(scales.begin(), scales.end() - static_cast<std::ptrdiff_t>(config.max_scales));
      }
      const double rate = std::log(spec.lambda) - 1.4 * v.beta_hat - config.rate_offset;
      f["rate"] = rate;
      f["scales"] = scales;
      bool pass = !scales.empty();
      Json checks = Json::array();
      if (!scales.empty() && rate > 0.0) {
        const SiteEnergy se = origin_localized_energy(params, config.half_width, config.local_half_width);
        f["energy"] = static_cast<double>(se.energy);
        f["energy_extended"] = se.energy.str(50, std::ios_base::scientific);
        f["energy_index"] = se.index;
        f["local_weight"] = se.local_weight;
        for (std::size_t n : scales) {
          const FilterCheck fc = resonant_filter_check(params, se.energy, n, 1, rate);
          pass = pass && fc.pass;
          checks.push_back(to_json(fc));
        }
      } else {
        pass = false;
      }
      f["checks"] = checks;
      f["pass"] = pass;
      j["filter"] = f;
    }
    out.csv = modes_csv(v);
    out.exit_code = v.regime_ok ? 0 : 4;
    j["status"] = "ok";
  } catch (const UsageError& ex) {
    out.failed = true;
    out.exit_code = 2;
    out.error_kind = "usage";
    out.error_message = ex.what();
  } catch (const DegenerateError& ex) {
    out.failed = true;
    out.exit_code = 3;
    out.error_kind = "degenerate";
    out.error_message = ex.what();
  }
  if (out.failed) {
    j["status"] = "error";
    j["error"] = {{"kind", out.error_kind}, {"message", out.error_message}};
  }
  out.json = j;
  return out;
}

std::string aggregate_header() {
  return "key,lambda,p,j,theta,N,beta_hat,threshold_7beta,threshold_2beta,reference_lnlambda,median_rate,mean_rate,"
         "min_rate,max_rate,modes_qualifying,regime_ok,pass,filter_pass,status";
}

namespace {

std::string csv_number(const Json& v) {
  if (v.is_number_float()) return format17(v.get<double>());
  if (v.is_number()) return v.dump();
  return "";
}

std::string csv_bool(const Json& v) {
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  return "";
}

std::string aggregate_row(const Json& j) {
  std::ostringstream os;
  const Json& pt = j.at("point");
  os << j.at("key").get<std::string>() << "," << csv_number(pt.at("lambda")) << "," << csv_number(pt.at("p")) << ","
     << csv_number(pt.at("j")) << ",";
  if (j.at("status") == "ok") {
    const Json& v = j.at("verdict");
    const Json& r = v.at("measured_rates");
    os << csv_number(pt.at("theta")) << "," << csv_number(pt.at("N")) << "," << csv_number(v.at("beta_hat")) << ","
       << csv_number(v.at("threshold_7beta")) << "," << csv_number(v.at("threshold_2beta")) << ","
       << csv_number(v.at("reference_lnlambda")) << "," << csv_number(r.at("median")) << ","
       << csv_number(r.at("mean")) << "," << csv_number(r.at("min")) << "," << csv_number(r.at("max")) << ","
       << csv_number(v.at("modes_qualifying")) << "," << csv_bool(v.at("regime_ok")) << ","
       << csv_bool(v.at("pass")) << "," << (j.contains("filter") ? csv_bool(j.at("filter").at("pass")) : "")
       << ",ok";
  } else {
    os << ",,,,,,,,,,,,,error";
  }
  return os.str();
}

}  // namespace

SweepSummary run_sweep(const ExperimentConfig& config, const fs::path& out_dir, unsigned parallelism) {
  if (parallelism < 1) throw UsageError("sweep: parallelism must be at least 1");
  const std::vector<PointSpec> points = expand_points(config);
  if (points.empty()) throw UsageError("sweep: no points");
  const auto model = experiment_frequency(config);
  const fs::path point_dir = out_dir / "points";
  fs::create_directories(point_dir);

  SweepSummary summary;
  summary.total = points.size();
  std::vector<Json> results(points.size());
  std::vector<char> skipped(points.size(), 0);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < points.size(); i = next++) {
      const std::string key = point_key(points[i]);
      const fs::path json_path = point_dir / (key + ".json");
      const std::string hash = point_hash(config, points[i]);
      if (const auto existing = read_file(json_path)) {
        try {
          Json prior = Json::parse(*existing);
          if (prior.value("hash", "") == hash && prior.value("status", "") == "ok") {
            results[i] = std::move(prior);
            skipped[i] = 1;
            continue;
          }
        } catch (const Json::exception&) {
        }
      }
      PointOutcome o = run_point(config, model, points[i]);
      if (!o.failed) write_file(point_dir / (key + ".modes.csv"), o.csv);
      const std::string text = dump17(o.json) + "\n";
      write_file(json_path, text);
      results[i] = Json::parse(text);
    }
  };
  std::vector<std::thread> pool;
  const unsigned threads = std::min<unsigned>(parallelism, static_cast<unsigned>(points.size()));
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  std::vector<std::size_t> order(points.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const PointSpec& x = points[a];
    const PointSpec& y = points[b];
    if (x.lambda != y.lambda) return x.lambda < y.lambda;
    if (x.p != y.p) return x.p < y.p;
    return x.j < y.j;
  });

  std::ostringstream csv;
  csv << aggregate_header() << "\n";
  Json failed = Json::array();
  Json keys = Json::array();
  for (std::size_t i : order) {
    const Json& r = results[i];
    csv << aggregate_row(r) << "\n";
    keys.push_back(r.at("key"));
    if (r.at("status") != "ok") {
      failed.push_back({{"key", r.at("key")}, {"error", r.at("error")}});
      summary.failed.push_back(r.at("key").get<std::string>());
    }
    if (skipped[i]) {
      ++summary.skipped;
    } else {
      ++summary.computed;
    }
  }
  summary.aggregate = out_dir / "aggregate.csv";
  summary.manifest = out_dir / "manifest.json";
  write_file(summary.aggregate, csv.str());
  Json manifest;
  manifest["artifact"] = artifact_json();
  manifest["config"] = to_json(config);
  manifest["points"] = keys;
  manifest["failed"] = failed;
  write_file(summary.manifest, dump17(manifest) + "\n");
  return summary;
}

}  // namespace amo
