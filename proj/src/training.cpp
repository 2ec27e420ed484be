#include "iidgan/training.hpp"

#include <cmath>

#include "iidgan/checkpoint.hpp"

namespace iidgan {

using nlohmann::json;

namespace {

Matrix as_column(const std::vector<double>& v) { return Matrix(v.size(), 1, v); }


void add_scaled(Matrix& acc, const Matrix& g, double s) {
  for (std::size_t i = 0; i < acc.size(); ++i) acc.data()[i] += s * g.data()[i];
}

Matrix scaled(const Matrix& g, double s) { return s * g; }

void check_finite(double v, std::uint64_t step, const char* what) {
  if (!std::isfinite(v)) throw TrainingDiverged(step, std::string(what) + " is not finite");
}

template <typename T>
T field(const json& doc, const char* key, T fallback) {
  if (!doc.contains(key)) return fallback;
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("config field '") + key + "' has the wrong type");
  }
}

std::size_t count(const json& doc, const char* key, std::size_t fallback) {
  if (!doc.contains(key)) return fallback;
  const auto& v = doc.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0)
    throw ConfigError(std::string("config field '") + key + "' must be a non-negative integer");
  return v.get<std::size_t>();
}

StepReport generator_backward_taped(TrainerState& s, const TrainConfig& cfg, const Matrix& z,
                                    const Matrix& x, const Matrix& gz, const Tape& tape_gz,
                                    const Matrix& fx, const Tape& tape_fx) {
  const LossWeights w = cfg.weights();
  const std::size_t n = x.rows();
  const bool zdisc = cfg.gau_variant == GauVariant::ZDisc;
  StepReport r;
  Tape tape_dg;
  const Matrix p_gen = s.d.forward(gz, tape_dg);
  const ScalarLoss adv = g_adv_loss(p_gen.values());
  Matrix grad_gz = s.d.backward(tape_dg, as_column(adv.grad), ParamGrads::Skip);

  Tape tape_zc;
  const Matrix zc = s.f.forward(gz, tape_zc);
  Tape tape_xc;
  const Matrix xc = s.g.forward(fx, tape_xc);
  const ReconLoss rec = recon_loss(z, zc, x, xc, w.dim_ratio);

  Matrix grad_fx(n, cfg.latent_dim);
  double gau = 0.0;
  if (zdisc) {
    Tape tape_q;
    const Matrix q = s.dz->forward(fx, tape_q);
    const ScalarLoss fa = g_adv_loss(q.values());
    gau = fa.value;
    if (w.lambda_gau > 0.0)
      add_scaled(grad_fx, s.dz->backward(tape_q, as_column(fa.grad), ParamGrads::Skip),
                 w.lambda_gau);
  } else if (cfg.gau_variant != GauVariant::None) {
    const BatchLoss gl = gaussian_consistency(fx, cfg.gau_variant, cfg.pnorm_p);
    gau = gl.value;
    if (w.lambda_gau > 0.0) add_scaled(grad_fx, gl.grad, w.lambda_gau);
  }

  r.g_adv = adv.value;
  r.recon = rec.value;
  r.gau = gau;
  r.total = total_objective(adv.value, rec.value, gau, w);

  if (w.lambda_re > 0.0) {
    add_scaled(grad_fx, s.g.backward(tape_xc, scaled(rec.grad_x_cycled, w.lambda_re)), 1.0);
    add_scaled(grad_gz, s.f.backward(tape_zc, scaled(rec.grad_z_cycled, w.lambda_re)), 1.0);
  }
  if (w.lambda_re > 0.0 || w.lambda_gau > 0.0) s.f.backward(tape_fx, grad_fx);
  s.g.backward(tape_gz, grad_gz);
  return r;
}

}  // namespace

std::string dataset_name(Dataset d) { return d == Dataset::Ring ? "ring" : "grid"; }

Dataset parse_dataset(std::string_view name) {
  if (name == "ring") return Dataset::Ring;
  if (name == "grid") return Dataset::Grid;
  throw ConfigError("unknown dataset '" + std::string(name) + "'");
}

LossWeights TrainConfig::weights() const {
  return make_loss_weights(lambda_re, lambda_gau, target_dim, latent_dim);
}

GaussianMixture TrainConfig::mixture() const {
  if (dataset == Dataset::Ring) return dataset_std ? ring_mixture(*dataset_std) : ring_mixture();
  return dataset_std ? grid_mixture(*dataset_std) : grid_mixture();
}

TrainConfig validated(TrainConfig cfg) {
  if (cfg.latent_dim == 0) throw ConfigError("latent_dim must be > 0");
  if (cfg.target_dim != 2) throw ConfigError("target_dim must be 2 for the Ring/Grid mixtures");
  if (cfg.batch_size < 2) throw ConfigError("batch_size must be >= 2");
  if (cfg.eval_every == 0) throw ConfigError("eval_every must be > 0");
  if (cfg.d_steps == 0) throw ConfigError("d_steps must be > 0");
  if (!(cfg.lambda_re >= 0.0) || !(cfg.lambda_gau >= 0.0))
    throw ConfigError("loss weights must be >= 0");
  if (cfg.gau_variant == GauVariant::PNorm && !(cfg.pnorm_p >= 1.0))
    throw ConfigError("pnorm_p must be >= 1");
  if (!(cfg.adam.learning_rate > 0.0) || !(cfg.adam.beta1 >= 0.0 && cfg.adam.beta1 < 1.0) ||
      !(cfg.adam.beta2 >= 0.0 && cfg.adam.beta2 < 1.0) || !(cfg.adam.epsilon > 0.0))
    throw ConfigError("invalid optimizer parameters");
  if (cfg.dataset_std && !(*cfg.dataset_std > 0.0)) throw ConfigError("dataset_std must be > 0");
  if (cfg.gau_variant == GauVariant::None) cfg.lambda_gau = 0.0;
  return cfg;
}

json train_config_to_json(const TrainConfig& cfg) {
  json j{{"latent_dim", cfg.latent_dim},
         {"target_dim", cfg.target_dim},
         {"batch_size", cfg.batch_size},
         {"steps", cfg.steps},
         {"eval_every", cfg.eval_every},
         {"d_steps", cfg.d_steps},
         {"lambda_re", cfg.lambda_re},
         {"lambda_gau", cfg.lambda_gau},
         {"gau_variant", gau_variant_name(cfg.gau_variant)},
         {"pnorm_p", cfg.pnorm_p},
         {"lr", cfg.adam.learning_rate},
         {"beta1", cfg.adam.beta1},
         {"beta2", cfg.adam.beta2},
         {"adam_epsilon", cfg.adam.epsilon},
         {"seed", cfg.seed},
         {"dataset", dataset_name(cfg.dataset)}};
  if (cfg.dataset_std) j["dataset_std"] = *cfg.dataset_std;
  return j;
}

TrainConfig train_config_from_json(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  TrainConfig cfg;
  cfg.latent_dim = count(doc, "latent_dim", cfg.latent_dim);
  cfg.target_dim = count(doc, "target_dim", cfg.target_dim);
  cfg.batch_size = count(doc, "batch_size", cfg.batch_size);
  cfg.steps = count(doc, "steps", cfg.steps);
  cfg.eval_every = count(doc, "eval_every", cfg.eval_every);
  cfg.d_steps = count(doc, "d_steps", cfg.d_steps);
  cfg.lambda_re = field(doc, "lambda_re", cfg.lambda_re);
  cfg.lambda_gau = field(doc, "lambda_gau", cfg.lambda_gau);
  try {
    cfg.gau_variant = parse_gau_variant(field<std::string>(doc, "gau_variant", "w2_md"));
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  cfg.pnorm_p = field(doc, "pnorm_p", cfg.pnorm_p);
  cfg.adam.learning_rate = field(doc, "lr", cfg.adam.learning_rate);
  cfg.adam.beta1 = field(doc, "beta1", cfg.adam.beta1);
  cfg.adam.beta2 = field(doc, "beta2", cfg.adam.beta2);
  cfg.adam.epsilon = field(doc, "adam_epsilon", cfg.adam.epsilon);
  cfg.seed = field<std::uint64_t>(doc, "seed", cfg.seed);
  cfg.dataset = parse_dataset(field<std::string>(doc, "dataset", "ring"));
  if (doc.contains("dataset_std") && !doc.at("dataset_std").is_null())
    cfg.dataset_std = field(doc, "dataset_std", 0.0);
  return validated(cfg);
}

TrainingDiverged::TrainingDiverged(std::uint64_t step, const std::string& what)
    : NonFiniteError("training diverged at step " + std::to_string(step) + ": " + what),
      step_(step) {}

TrainerState trainer_new(const TrainConfig& raw) {
  const TrainConfig cfg = validated(raw);
  TrainerState s;
  Rng init = Rng::derive(cfg.seed, 0);
  s.g = four_layer_mlp(cfg.latent_dim, cfg.target_dim, Activation::identity(), init);
  s.f = four_layer_mlp(cfg.target_dim, cfg.latent_dim, Activation::identity(), init);
  s.d = four_layer_mlp(cfg.target_dim, 1, Activation::sigmoid(), init);
  if (cfg.gau_variant == GauVariant::ZDisc) {
    s.dz = four_layer_mlp(cfg.latent_dim, 1, Activation::sigmoid(), init);
    s.adam_dz = AdamState(*s.dz, cfg.adam);
  }
  s.adam_g = AdamState(s.g, cfg.adam);
  s.adam_f = AdamState(s.f, cfg.adam);
  s.adam_d = AdamState(s.d, cfg.adam);
  s.rng = Rng::derive(cfg.seed, 1);
  return s;
}

StepReport generator_backward(TrainerState& s, const TrainConfig& cfg, const Matrix& z,
                              const Matrix& x) {
  if (z.cols() != cfg.latent_dim || x.cols() != cfg.target_dim || z.rows() != x.rows() ||
      x.rows() < 2)
    throw ShapeError("generator_backward: z and x must be n×latent_dim and n×target_dim");
  Tape tape_gz;
  const Matrix gz = s.g.forward(z, tape_gz);
  Tape tape_fx;
  const Matrix fx = s.f.forward(x, tape_fx);
  return generator_backward_taped(s, cfg, z, x, gz, tape_gz, fx, tape_fx);
}

StepReport train_step(TrainerState& s, const TrainConfig& cfg, const Matrix& x) {
  if (x.cols() != cfg.target_dim || x.rows() < 2)
    throw ShapeError("train_step: real batch must be n×target_dim with n >= 2");
  const std::uint64_t next = s.step + 1;
  const std::size_t n = x.rows();
  StepReport r;

  try {
    // Discriminator. The last fake batch and its tape feed the generator
    // update as well.
    Tape tape_gz;
    Matrix z;
    Matrix gz;
    for (std::size_t k = 0; k < cfg.d_steps; ++k) {
      z = sample_standard_normal(n, cfg.latent_dim, s.rng);
      gz = s.g.forward(z, tape_gz);
      Tape tape_real;
      Tape tape_fake;
      const Matrix p_real = s.d.forward(x, tape_real);
      const Matrix p_fake = s.d.forward(gz, tape_fake);
      const BinaryLoss dl = d_loss(p_real.values(), p_fake.values());
      check_finite(dl.value, next, "discriminator loss");
      s.d.backward(tape_real, as_column(dl.grad_real));
      s.d.backward(tape_fake, as_column(dl.grad_fake));
      adam_step(s.d, s.adam_d);
      r.d_loss = dl.value;
    }

    Tape tape_fx;
    const Matrix fx = s.f.forward(x, tape_fx);

    const bool zdisc = cfg.gau_variant == GauVariant::ZDisc;
    if (zdisc) {
      if (!s.dz || !s.adam_dz) throw ConfigError("zdisc variant needs a latent discriminator");
      const Matrix zt = sample_standard_normal(n, cfg.latent_dim, s.rng);
      Tape tape_zr;
      Tape tape_zf;
      const Matrix q_real = s.dz->forward(zt, tape_zr);
      const Matrix q_fake = s.dz->forward(fx, tape_zf);
      const BinaryLoss zl = d_loss(q_real.values(), q_fake.values());
      check_finite(zl.value, next, "latent discriminator loss");
      s.dz->backward(tape_zr, as_column(zl.grad_real));
      s.dz->backward(tape_zf, as_column(zl.grad_fake));
      adam_step(*s.dz, *s.adam_dz);
      r.dz_loss = zl.value;
    }

    const StepReport gr = generator_backward_taped(s, cfg, z, x, gz, tape_gz, fx, tape_fx);
    r.g_adv = gr.g_adv;
    r.recon = gr.recon;
    r.gau = gr.gau;
    r.total = gr.total;
    check_finite(r.total, next, "generator objective");

    adam_step(s.g, s.adam_g);
    adam_step(s.f, s.adam_f);
  } catch (const TrainingDiverged&) {
    throw;
  } catch (const NonFiniteError& e) {
    throw TrainingDiverged(next, e.what());
  }

  s.step = next;
  r.step = next;
  return r;
}

void train_from(TrainerState& state, const TrainConfig& raw, const TrainSink& sink,
                const std::function<void(const StepReport&)>& on_step) {
  const TrainConfig cfg = validated(raw);
  const GaussianMixture mix = cfg.mixture();
  if (state.step == 0 && sink) sink(state);
  while (state.step < cfg.steps) {
    const Matrix batch = sample_mixture(mix, cfg.batch_size, state.rng);
    const StepReport rep = train_step(state, cfg, batch);
    if (on_step) on_step(rep);
    if (sink && (state.step % cfg.eval_every == 0 || state.step == cfg.steps)) sink(state);
  }
}

TrainerState train(const TrainConfig& cfg, const TrainSink& sink) {
  TrainerState state = trainer_new(cfg);
  train_from(state, cfg, sink);
  return state;
}

std::filesystem::path save_checkpoint(const std::filesystem::path& dir, const TrainerState& s,
                                      const TrainConfig& cfg) {
  std::filesystem::create_directories(dir);
  json networks{{"G", "G.json"}, {"F", "F.json"}, {"D", "D.json"}};
  json optimizers{{"G", "G.adam.json"}, {"F", "F.adam.json"}, {"D", "D.adam.json"}};
  save_mlp(dir / "G.json", s.g);
  save_mlp(dir / "F.json", s.f);
  save_mlp(dir / "D.json", s.d);
  write_json_file(dir / "G.adam.json", adam_to_json(s.adam_g));
  write_json_file(dir / "F.adam.json", adam_to_json(s.adam_f));
  write_json_file(dir / "D.adam.json", adam_to_json(s.adam_d));
  if (s.dz && s.adam_dz) {
    networks["Dz"] = "Dz.json";
    optimizers["Dz"] = "Dz.adam.json";
    save_mlp(dir / "Dz.json", *s.dz);
    write_json_file(dir / "Dz.adam.json", adam_to_json(*s.adam_dz));
  }
  const auto& st = s.rng.state();
  json manifest{{"schema_version", kCheckpointSchema},
                {"step", s.step},
                {"config", train_config_to_json(cfg)},
                {"rng_state", json::array({st[0], st[1], st[2], st[3]})},
                {"networks", networks},
                {"optimizers", optimizers}};
  const auto path = dir / "manifest.json";
  write_json_file(path, manifest);
  return path;
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& manifest_path) {
  const json m = read_json_file(manifest_path);
  const auto dir = manifest_path.parent_path();
  if (!m.is_object() || m.value("schema_version", -1) != kCheckpointSchema)
    throw CheckpointError("manifest: unsupported or missing schema_version");
  LoadedCheckpoint out;
  try {
    out.config = train_config_from_json(m.at("config"));
  } catch (const ConfigError& e) {
    throw CheckpointError(std::string("manifest config: ") + e.what());
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("manifest: ") + e.what());
  }
  auto& s = out.state;
  try {
    s.step = m.at("step").get<std::uint64_t>();
    const auto& rs = m.at("rng_state");
    if (!rs.is_array() || rs.size() != 4) throw CheckpointError("manifest: rng_state needs 4 words");
    Rng::State st{};
    for (std::size_t i = 0; i < 4; ++i) st[i] = rs[i].get<std::uint64_t>();
    s.rng = Rng::from_state(st);
    const auto& nets = m.at("networks");
    const auto& opts = m.at("optimizers");
    auto load_pair = [&](const char* key, Mlp& net, AdamState& opt) {
      net = load_mlp(dir / nets.at(key).get<std::string>());
      opt = adam_from_json(read_json_file(dir / opts.at(key).get<std::string>()), net);
    };
    load_pair("G", s.g, s.adam_g);
    load_pair("F", s.f, s.adam_f);
    load_pair("D", s.d, s.adam_d);
    if (nets.contains("Dz")) {
      s.dz.emplace();
      s.adam_dz.emplace();
      load_pair("Dz", *s.dz, *s.adam_dz);
    }
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("manifest: ") + e.what());
  }
  const auto& cfg = out.config;
  if (s.g.input_size() != cfg.latent_dim || s.g.output_size() != cfg.target_dim ||
      s.f.input_size() != cfg.target_dim || s.f.output_size() != cfg.latent_dim ||
      s.d.input_size() != cfg.target_dim || s.d.output_size() != 1)
    throw CheckpointError("checkpoint networks do not match the configured dimensions");
  if ((cfg.gau_variant == GauVariant::ZDisc) != s.dz.has_value())
    throw CheckpointError("latent discriminator presence does not match gau_variant");
  return out;
}

}  // namespace iidgan
