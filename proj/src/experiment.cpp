#include "iidgan/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "iidgan/checkpoint.hpp"
#include "iidgan/format.hpp"
#include "iidgan/stats.hpp"

namespace iidgan {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kEvalStream = 1ULL << 32;
constexpr std::uint64_t kIidStream = 2ULL << 32;

const std::set<std::string> kTrainKeys{
    "latent_dim", "target_dim", "batch_size", "steps",      "eval_every", "d_steps",
    "lambda_re",  "lambda_gau", "gau_variant", "pnorm_p",   "lr",         "beta1",
    "beta2",      "adam_epsilon", "seed",      "dataset",   "dataset_std"};
const std::set<std::string> kExperimentKeys{"schema_version", "seeds",     "out_dir",
                                            "n_gen",          "n_real",    "radius_factor",
                                            "min_count",      "export",    "variants"};

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  return out;
}

Variant parse_variant(const json& v) {
  Variant out;
  if (v.is_string()) {
    out.name = v.get<std::string>();
    out.gau_variant = parse_gau_variant(out.name);
    return out;
  }
  if (!v.is_object()) throw ConfigError("variants entries must be strings or objects");
  for (const auto& [key, _] : v.items())
    if (key != "name" && key != "gau_variant" && key != "lambda_re" && key != "lambda_gau")
      throw ConfigError("unknown variant field '" + key + "'");
  if (!v.contains("gau_variant") || !v.at("gau_variant").is_string())
    throw ConfigError("variant needs a gau_variant string");
  out.gau_variant = parse_gau_variant(v.at("gau_variant").get<std::string>());
  out.name = v.value("name", gau_variant_name(out.gau_variant));
  auto weight = [&](const char* key) -> std::optional<double> {
    if (!v.contains(key)) return std::nullopt;
    if (!v.at(key).is_number()) throw ConfigError(std::string("variant ") + key + " must be a number");
    return v.at(key).get<double>();
  };
  out.lambda_re = weight("lambda_re");
  out.lambda_gau = weight("lambda_gau");
  return out;
}

json aggregate_json(const Aggregate& a) {
  return json{{"mean", a.mean}, {"std", a.std ? json(*a.std) : json(nullptr)}};
}

std::string opt_text(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

std::mutex g_log_mutex;

void log_line(std::ostream& log, const std::string& line) {
  std::lock_guard<std::mutex> lock(g_log_mutex);
  log << line << '\n' << std::flush;
}

template <typename Fn>
int guarded(std::ostream& log, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    log_line(log, std::string("config error: ") + e.what());
    return kExitConfig;
  } catch (const TrainingDiverged& e) {
    log_line(log, std::string("diverged: ") + e.what());
    return kExitDiverged;
  } catch (const CheckpointError& e) {
    log_line(log, std::string("corrupt checkpoint: ") + e.what());
    return kExitCheckpoint;
  } catch (const std::exception& e) {
    log_line(log, std::string("error: ") + e.what());
    return kExitFailure;
  }
}

std::string report_line(std::uint64_t seed, std::uint64_t step, const MetricsReport& r) {
  std::ostringstream s;
  s << "seed " << seed << " step " << step << " modes " << r.modes_covered << " quality "
    << format_double(r.quality) << " rkl " << format_double(r.reverse_kl) << " sw "
    << format_double(r.sw_mean());
  return s.str();
}

SeedResult run_seed(const ExperimentConfig& cfg, const fs::path& out, std::uint64_t seed,
                    const Variant* variant, std::ostream* log) {
  const TrainConfig tc = cfg.for_seed(seed, variant);
  const GaussianMixture mix = tc.mixture();
  const fs::path dir = out / ("seed_" + std::to_string(seed));
  fs::create_directories(dir);
  std::ofstream csv = open_out(dir / "metrics.csv");
  csv << metrics_csv_header(tc.latent_dim) << '\n';

  SeedResult result;
  result.seed = seed;
  result.state = trainer_new(tc);
  auto sink = [&](const TrainerState& s) {
    Rng rng = eval_rng(seed, s.step);
    result.report = evaluate(s, mix, cfg.eval, rng);
    result.step = s.step;
    csv << metrics_csv_row(s.step, result.report) << '\n';
    csv.flush();
    if (log) log_line(*log, report_line(seed, s.step, result.report));
  };
  train_from(result.state, tc, sink);
  if (!csv) throw Error("failed writing " + (dir / "metrics.csv").string());

  if (cfg.exports.checkpoint) save_checkpoint(dir / "checkpoint", result.state, tc);
  if (cfg.exports.qq || cfg.exports.dataset) {
    Rng rng = iidtest_rng(seed, result.step);
    std::vector<std::size_t> modes;
    const Matrix x = sample_mixture(mix, cfg.eval.n_real, rng, &modes);
    if (cfg.exports.dataset) write_dataset_csv(dir / "dataset.csv", x, modes);
    if (cfg.exports.qq) write_qq_csvs(dir / "qq", result.state.f.predict(x));
  }
  return result;
}

}  // namespace

// ---- configuration ------------------------------------------------------------

TrainConfig ExperimentConfig::for_seed(std::uint64_t seed, const Variant* variant) const {
  TrainConfig tc = train;
  tc.seed = seed;
  if (variant) {
    tc.gau_variant = variant->gau_variant;
    if (variant->lambda_re) tc.lambda_re = *variant->lambda_re;
    if (variant->lambda_gau) tc.lambda_gau = *variant->lambda_gau;
  }
  return validated(tc);
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ExperimentConfig parse_experiment_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, _] : doc.items())
    if (!kTrainKeys.count(key) && !kExperimentKeys.count(key))
      throw ConfigError("unknown config field '" + key + "'");
  if (!doc.contains("schema_version") || !doc.at("schema_version").is_number_integer() ||
      doc.at("schema_version").get<int>() != kConfigSchema)
    throw ConfigError("schema_version must be " + std::to_string(kConfigSchema));

  ExperimentConfig cfg;
  cfg.config_hash = fnv1a64(text);
  json train_doc = json::object();
  for (const auto& key : kTrainKeys)
    if (doc.contains(key)) train_doc[key] = doc.at(key);
  cfg.train = train_config_from_json(train_doc);

  try {
    if (doc.contains("seeds")) {
      cfg.seeds = doc.at("seeds").get<std::vector<std::uint64_t>>();
      if (cfg.seeds.empty()) throw ConfigError("seeds must be non-empty");
      if (std::set<std::uint64_t>(cfg.seeds.begin(), cfg.seeds.end()).size() != cfg.seeds.size())
        throw ConfigError("seeds must be distinct");
    } else if (doc.contains("seed")) {
      cfg.seeds = {cfg.train.seed};
    }
    if (doc.contains("out_dir")) cfg.out_dir = doc.at("out_dir").get<std::string>();
    cfg.eval.n_gen = doc.value("n_gen", cfg.train.dataset == Dataset::Grid ? 100000 : 50000);
    cfg.eval.n_real = doc.value("n_real", cfg.eval.n_real);
    cfg.eval.radius_factor = doc.value("radius_factor", cfg.eval.radius_factor);
    cfg.eval.min_count = doc.value("min_count", cfg.eval.min_count);
    if (doc.contains("export")) {
      const auto& ex = doc.at("export");
      if (!ex.is_object()) throw ConfigError("export must be an object");
      for (const auto& [key, _] : ex.items())
        if (key != "checkpoint" && key != "qq" && key != "dataset")
          throw ConfigError("unknown export field '" + key + "'");
      cfg.exports.checkpoint = ex.value("checkpoint", cfg.exports.checkpoint);
      cfg.exports.qq = ex.value("qq", cfg.exports.qq);
      cfg.exports.dataset = ex.value("dataset", cfg.exports.dataset);
    }
    if (doc.contains("variants")) {
      if (!doc.at("variants").is_array()) throw ConfigError("variants must be an array");
      std::set<std::string> names;
      for (const auto& v : doc.at("variants")) {
        cfg.variants.push_back(parse_variant(v));
        if (!names.insert(cfg.variants.back().name).second)
          throw ConfigError("duplicate variant name '" + cfg.variants.back().name + "'");
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config field has the wrong type: ") + e.what());
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  if (cfg.eval.n_gen == 0) throw ConfigError("n_gen must be > 0");
  if (cfg.eval.n_real < 3) throw ConfigError("n_real must be >= 3");
  if (!(cfg.eval.radius_factor > 0.0)) throw ConfigError("radius_factor must be > 0");
  for (const auto& v : cfg.variants) cfg.for_seed(cfg.seeds.front(), &v);
  return cfg;
}

ExperimentConfig load_experiment_config(const fs::path& path) {
  return parse_experiment_config(read_text(path));
}

json experiment_config_to_json(const ExperimentConfig& cfg) {
  json j = train_config_to_json(cfg.train);
  j.erase("seed");
  j["schema_version"] = kConfigSchema;
  j["seeds"] = cfg.seeds;
  j["out_dir"] = cfg.out_dir.string();
  j["n_gen"] = cfg.eval.n_gen;
  j["n_real"] = cfg.eval.n_real;
  j["radius_factor"] = cfg.eval.radius_factor;
  j["min_count"] = cfg.eval.min_count;
  j["export"] = {{"checkpoint", cfg.exports.checkpoint},
                 {"qq", cfg.exports.qq},
                 {"dataset", cfg.exports.dataset}};
  json variants = json::array();
  for (const auto& v : cfg.variants) {
    json e{{"name", v.name}, {"gau_variant", gau_variant_name(v.gau_variant)}};
    if (v.lambda_re) e["lambda_re"] = *v.lambda_re;
    if (v.lambda_gau) e["lambda_gau"] = *v.lambda_gau;
    variants.push_back(e);
  }
  j["variants"] = variants;
  return j;
}

// ---- CSV and aggregation --------------------------------------------------------

std::string metrics_csv_header(std::size_t latent_dim) {
  std::string h = "step,modes,quality,rkl";
  for (std::size_t i = 1; i <= latent_dim; ++i) h += ",sw_" + std::to_string(i);
  for (std::size_t i = 1; i <= latent_dim; ++i) h += ",ks_" + std::to_string(i);
  return h;
}

std::string metrics_csv_row(std::uint64_t step, const MetricsReport& r) {
  std::string row = std::to_string(step) + ',' + std::to_string(r.modes_covered) + ',' +
                    format_double(r.quality) + ',' + format_double(r.reverse_kl);
  for (double v : r.sw_per_dim) row += ',' + format_double(v);
  for (double v : r.ks_per_dim) row += ',' + format_double(v);
  return row;
}

Rng eval_rng(std::uint64_t seed, std::uint64_t step) { return Rng::derive(seed, kEvalStream + step); }

Rng iidtest_rng(std::uint64_t seed, std::uint64_t step) {
  return Rng::derive(seed, kIidStream + step);
}

Aggregate aggregate(const std::vector<double>& values) {
  Aggregate a;
  if (values.empty()) return a;
  a.mean = mean(values);
  if (values.size() > 1) a.std = sample_std(values);
  return a;
}

json summary_json(const ExperimentConfig& cfg, const std::vector<SeedResult>& results,
                  const Variant* variant) {
  json seeds = json::array();
  std::vector<double> modes, qual, rkl, sw;
  const std::size_t dims = results.empty() ? 0 : results.front().report.ks_per_dim.size();
  std::vector<std::vector<double>> ks(dims), swd(dims);
  for (const auto& r : results) {
    const auto& m = r.report;
    seeds.push_back({{"seed", r.seed},
                     {"step", r.step},
                     {"modes", m.modes_covered},
                     {"quality", m.quality},
                     {"rkl", m.reverse_kl},
                     {"sw", m.sw_per_dim},
                     {"ks", m.ks_per_dim},
                     {"sw_mean", m.sw_mean()}});
    modes.push_back(static_cast<double>(m.modes_covered));
    qual.push_back(m.quality);
    rkl.push_back(m.reverse_kl);
    sw.push_back(m.sw_mean());
    for (std::size_t d = 0; d < dims; ++d) {
      swd[d].push_back(m.sw_per_dim[d]);
      ks[d].push_back(m.ks_per_dim[d]);
    }
  }
  json agg{{"modes", aggregate_json(aggregate(modes))},
           {"quality", aggregate_json(aggregate(qual))},
           {"rkl", aggregate_json(aggregate(rkl))},
           {"sw_mean", aggregate_json(aggregate(sw))}};
  for (std::size_t d = 0; d < dims; ++d) {
    agg["sw_" + std::to_string(d + 1)] = aggregate_json(aggregate(swd[d]));
    agg["ks_" + std::to_string(d + 1)] = aggregate_json(aggregate(ks[d]));
  }
  const TrainConfig tc = cfg.for_seed(cfg.seeds.front(), variant);
  json train = train_config_to_json(tc);
  train.erase("seed");
  json s{{"schema_version", kConfigSchema},
         {"config_hash", hash_hex(cfg.config_hash)},
         {"train", train},
         {"seeds", seeds},
         {"aggregate", agg}};
  if (variant) s["variant"] = variant->name;
  return s;
}

std::size_t thread_cap() {
  if (const char* env = std::getenv("IIDGAN_THREADS")) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<SeedResult> run_experiment(const ExperimentConfig& cfg, const fs::path& out,
                                       const Variant* variant) {
  return run_experiment_logged(cfg, out, variant, nullptr);
}

std::vector<SeedResult> run_experiment_logged(const ExperimentConfig& cfg, const fs::path& out,
                                              const Variant* variant, std::ostream* log) {
  if (cfg.seeds.empty()) throw ConfigError("seeds must be non-empty");
  fs::create_directories(out);
  std::vector<SeedResult> results(cfg.seeds.size());
  std::vector<std::exception_ptr> errors(cfg.seeds.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cfg.seeds.size(); i = next++) {
      try {
        results[i] = run_seed(cfg, out, cfg.seeds[i], variant, log);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t workers = std::min(thread_cap(), cfg.seeds.size());
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::ofstream summary = open_out(out / "summary.json");
  summary << summary_json(cfg, results, variant).dump(2) << '\n';
  return results;
}

void write_qq_csvs(const fs::path& dir, const Matrix& inverse) {
  fs::create_directories(dir);
  for (std::size_t d = 0; d < inverse.cols(); ++d) {
    const std::string n = std::to_string(d + 1);
    std::ofstream out = open_out(dir / ("qq_dim" + n + ".csv"));
    out << "theoretical,sample,dim\n";
    for (const auto& p : qq_data(inverse.column(d)))
      out << format_double(p.theoretical) << ',' << format_double(p.sample) << ',' << n << '\n';
  }
}

// ---- subcommands ------------------------------------------------------------------

int cmd_train(const fs::path& config, const std::optional<fs::path>& out, std::ostream& log) {
  return guarded(log, [&] {
    const ExperimentConfig cfg = load_experiment_config(config);
    const fs::path dir = out ? *out : cfg.out_dir;
    const auto results = run_experiment_logged(cfg, dir, nullptr, &log);
    std::vector<double> modes, qual, rkl;
    for (const auto& r : results) {
      modes.push_back(static_cast<double>(r.report.modes_covered));
      qual.push_back(r.report.quality);
      rkl.push_back(r.report.reverse_kl);
    }
    const Aggregate m = aggregate(modes), q = aggregate(qual), k = aggregate(rkl);
    auto pm = [](const Aggregate& a) {
      return format_double(a.mean) + (a.std ? " ± " + format_double(*a.std) : std::string());
    };
    log_line(log, "modes " + pm(m) + "  quality " + pm(q) + "  rkl " + pm(k));
    log_line(log, "summary: " + (dir / "summary.json").string());
    return int(kExitOk);
  });
}

int cmd_eval(const fs::path& manifest, const fs::path& config, std::ostream& out,
             std::ostream& log) {
  return guarded(log, [&] {
    const ExperimentConfig cfg = load_experiment_config(config);
    const LoadedCheckpoint ck = load_checkpoint(manifest);
    Rng rng = eval_rng(ck.config.seed, ck.state.step);
    const MetricsReport r = evaluate(ck.state, ck.config.mixture(), cfg.eval, rng);
    out << metrics_csv_header(ck.config.latent_dim) << '\n'
        << metrics_csv_row(ck.state.step, r) << '\n';
    return int(kExitOk);
  });
}

int cmd_iidtest(const fs::path& manifest, const fs::path& config, const fs::path& qq_out,
                std::ostream& out, std::ostream& log) {
  return guarded(log, [&] {
    const ExperimentConfig cfg = load_experiment_config(config);
    const LoadedCheckpoint ck = load_checkpoint(manifest);
    Rng rng = iidtest_rng(ck.config.seed, ck.state.step);
    const Matrix z = inverse_samples(ck.state, ck.config.mixture(), cfg.eval.n_real, rng);
    require_finite(z, "inverse samples");
    std::vector<double> sw, ks;
    iid_statistics(z, sw, ks);
    out << "dim,sw,ks\n";
    for (std::size_t d = 0; d < sw.size(); ++d)
      out << d + 1 << ',' << format_double(sw[d]) << ',' << format_double(ks[d]) << '\n';
    out << "mean," << format_double(mean(sw)) << ',' << format_double(mean(ks)) << '\n';
    write_qq_csvs(qq_out, z);
    return int(kExitOk);
  });
}

int cmd_sweep(const fs::path& config, std::ostream& out, std::ostream& log) {
  return guarded(log, [&] {
    const ExperimentConfig cfg = load_experiment_config(config);
    if (cfg.variants.empty()) throw ConfigError("sweep needs a non-empty variants list");
    std::ostringstream table;
    table << "variant,gau_variant,lambda_re,lambda_gau,seeds,modes_mean,modes_std,quality_mean,"
             "quality_std,rkl_mean,rkl_std,sw_mean,sw_std\n";
    for (const auto& v : cfg.variants) {
      const auto results = run_experiment_logged(cfg, cfg.out_dir / v.name, &v, &log);
      const TrainConfig tc = cfg.for_seed(cfg.seeds.front(), &v);
      std::vector<double> modes, qual, rkl, sw;
      for (const auto& r : results) {
        modes.push_back(static_cast<double>(r.report.modes_covered));
        qual.push_back(r.report.quality);
        rkl.push_back(r.report.reverse_kl);
        sw.push_back(r.report.sw_mean());
      }
      table << v.name << ',' << gau_variant_name(tc.gau_variant) << ','
            << format_double(tc.lambda_re) << ',' << format_double(tc.lambda_gau) << ','
            << results.size();
      for (const auto& values : {modes, qual, rkl, sw}) {
        const Aggregate a = aggregate(values);
        table << ',' << format_double(a.mean) << ',' << opt_text(a.std);
      }
      table << '\n';
    }
    std::ofstream csv = open_out(cfg.out_dir / "sweep.csv");
    csv << table.str();
    out << table.str();
    return int(kExitOk);
  });
}

}  // namespace iidgan
