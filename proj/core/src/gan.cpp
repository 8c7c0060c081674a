#include "shillsim/gan.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "shillsim/errors.hpp"
#include "shillsim/format.hpp"

namespace shillsim {

namespace {

using nlohmann::json;

constexpr Activation kL = Activation::kLeakyRelu;
constexpr Activation kS = Activation::kSigmoid;

Eigen::MatrixXd as_column(const Eigen::VectorXd& v) {
  return Eigen::Map<const Eigen::MatrixXd>(v.data(), v.size(), 1);
}

}  // namespace

GeneratorParams GeneratorParams::standard(bool conditional, int condition_cap,
                                          Rng& rng) {
  GeneratorParams g;
  int in = conditional ? 2 : 1;
  g.embed = Mlp::xavier({in, 128, 256, 64}, {kL, kL, kL}, rng);
  g.link = Mlp::xavier({in, 128, 256, 32}, {kL, kL, kL}, rng);
  g.out = Mlp::xavier({64, 128}, {kL}, rng);
  g.conditional = conditional;
  g.condition_cap = condition_cap;
  return g;
}

DiscriminatorParams DiscriminatorParams::standard(Rng& rng) {
  DiscriminatorParams d;
  d.critic = Mlp::xavier({1, 1024, 512, 256, 1}, {kS, kS, kS, kL}, rng);
  return d;
}

GanBatch make_gan_batch(const SampledProfileItems& sampled,
                        const RatingsDataset& data, bool conditional, int cap,
                        Rng& rng) {
  int k = sampled.size();
  if (k <= 0) throw UsageError("empty profile skeleton");
  GanBatch batch;
  batch.noise.resize(k);
  batch.real.resize(k);
  int slot = 0;
  for (const auto* part : {&sampled.selected, &sampled.filler}) {
    for (int item : *part) {
      batch.noise(slot) = rng.normal();
      batch.real(slot) = data.per_item_mean(item);
      ++slot;
    }
  }
  if (conditional) {
    if (cap <= 0) throw UsageError("conditional batches need a positive cap");
    batch.condition = static_cast<double>(k) / cap;
  }
  return batch;
}

Eigen::MatrixXd link_normalize(const Eigen::MatrixXd& L) {
  Eigen::MatrixXd out(L.rows(), L.cols());
  for (int i = 0; i < L.rows(); ++i) {
    double top = L.row(i).maxCoeff();
    Eigen::RowVectorXd e = (L.row(i).array() - top).exp();
    out.row(i) = e / e.sum();
  }
  return out;
}

GeneratorTrace generator_forward(const GeneratorParams& gen,
                                 const GanBatch& batch) {
  int k = static_cast<int>(batch.noise.size());
  if (k <= 0) throw UsageError("empty generator batch");
  int in = gen.conditional ? 2 : 1;
  if (gen.embed.input_dim() != in || gen.link.input_dim() != in) {
    throw UsageError("generator input width does not match conditionality");
  }

  GeneratorTrace t;
  t.order.resize(k);
  std::iota(t.order.begin(), t.order.end(), 0);
  std::stable_sort(t.order.begin(), t.order.end(), [&](int a, int b) {
    return batch.noise(a) < batch.noise(b);
  });

  t.input.resize(k, in);
  for (int p = 0; p < k; ++p) {
    t.input(p, 0) = batch.noise(t.order[p]);
    if (gen.conditional) t.input(p, 1) = batch.condition;
  }

  t.H = mlp_forward(gen.embed, t.input, &t.embed_trace);
  t.Lt = mlp_forward(gen.link, t.input, &t.link_trace);
  t.L = t.Lt * t.Lt.transpose();
  t.A = link_normalize(t.L);
  t.M = t.A * t.H;
  t.R1 = t.M + t.A * t.M;
  t.R2 = mlp_forward(gen.out, t.R1, &t.out_trace);

  t.ratings.resize(k);
  for (int p = 0; p < k; ++p) {
    t.ratings(t.order[p]) = t.R2.row(p).mean();
  }
  return t;
}

CriticEval discriminator_forward(const DiscriminatorParams& disc,
                                 const Eigen::VectorXd& ratings) {
  CriticEval eval;
  eval.per_rating = mlp_forward(disc.critic, as_column(ratings)).col(0);
  eval.mean = eval.per_rating.mean();
  return eval;
}

namespace {

// Per-slot forward trace of the shared critic together with its forward-mode
// tangent chain: U_l = T_{l-1} W_l and T_l = f'(z_l) o U_l, seeded with
// T_0 = 1.  The final T is the derivative of each slot's score w.r.t. its
// input rating.
struct CriticTangent {
  MlpTrace trace;
  std::vector<Eigen::MatrixXd> U;
  std::vector<Eigen::MatrixXd> D1;  // f'(z_l)
  std::vector<Eigen::MatrixXd> T;
};

CriticTangent critic_tangent(const Mlp& critic, const Eigen::VectorXd& x) {
  CriticTangent ct;
  mlp_forward(critic, as_column(x), &ct.trace);
  Eigen::MatrixXd t = Eigen::MatrixXd::Ones(x.size(), 1);
  for (std::size_t l = 0; l < critic.layers.size(); ++l) {
    ct.U.push_back(t * critic.layers[l].W);
    ct.D1.push_back(
        act_deriv(critic.layers[l].act, ct.trace.z[l], ct.trace.a[l]));
    t = ct.D1[l].cwiseProduct(ct.U[l]);
    ct.T.push_back(t);
  }
  return ct;
}

// Reverse sweep of the tangent chain.  tbar is the cotangent of the final
// per-slot tangents; weight gradients pick up both the direct W terms and,
// through the stored z seeds, the curvature of the activations.  Returns
// nothing useful through the input, so that cotangent is dropped.
void critic_tangent_backward(const Mlp& critic, const CriticTangent& ct,
                             const Eigen::MatrixXd& tbar_top,
                             MlpGrads* grads) {
  int layers = static_cast<int>(critic.layers.size());
  std::vector<Eigen::MatrixXd> zbar(layers);
  Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(ct.trace.input.rows(), 1);
  Eigen::MatrixXd tbar = tbar_top;
  for (int l = layers - 1; l >= 0; --l) {
    const auto& layer = critic.layers[l];
    Eigen::MatrixXd ubar = tbar.cwiseProduct(ct.D1[l]);
    zbar[l] = tbar.cwiseProduct(ct.U[l]).cwiseProduct(
        act_second(layer.act, ct.trace.z[l], ct.trace.a[l]));
    const Eigen::MatrixXd& t_below = l == 0 ? ones : ct.T[l - 1];
    grads->W[l] += t_below.transpose() * ubar;
    tbar = ubar * layer.W.transpose();
  }
  Eigen::MatrixXd abar;
  for (int l = layers - 1; l >= 0; --l) {
    const auto& layer = critic.layers[l];
    Eigen::MatrixXd zb = zbar[l];
    if (abar.size()) {
      zb += abar.cwiseProduct(ct.D1[l]);
    }
    const Eigen::MatrixXd& below =
        l == 0 ? ct.trace.input : ct.trace.a[l - 1];
    grads->W[l] += below.transpose() * zb;
    grads->b[l] += zb.colwise().sum();
    abar = zb * layer.W.transpose();
  }
}

}  // namespace

Eigen::VectorXd critic_input_gradient(const DiscriminatorParams& disc,
                                      const Eigen::VectorXd& ratings) {
  auto ct = critic_tangent(disc.critic, ratings);
  return ct.T.back().col(0) / static_cast<double>(ratings.size());
}

double loss_discriminator_grad(const GeneratorParams& gen,
                               const DiscriminatorParams& disc,
                               const GanBatch& batch, double eps,
                               const GanLossConfig& cfg, MlpGrads* critic) {
  if (batch.noise.size() != batch.real.size()) {
    throw UsageError("noise and real vectors differ in length");
  }
  auto gen_trace = generator_forward(gen, batch);
  const Eigen::VectorXd& fake = gen_trace.ratings;
  int k = static_cast<int>(fake.size());

  MlpTrace fake_trace, real_trace;
  double d_fake =
      mlp_forward(disc.critic, as_column(fake), &fake_trace).col(0).mean();
  double d_real =
      mlp_forward(disc.critic, as_column(batch.real), &real_trace)
          .col(0)
          .mean();
  if (critic) {
    Eigen::MatrixXd unit = Eigen::MatrixXd::Constant(k, 1, 1.0 / k);
    mlp_backward(disc.critic, fake_trace, unit, critic);
    mlp_backward(disc.critic, real_trace, -unit, critic);
  }

  Eigen::VectorXd interp = eps * batch.real + (1.0 - eps) * fake;
  auto ct = critic_tangent(disc.critic, interp);
  const Eigen::MatrixXd& tangents = ct.T.back();
  double norm = tangents.norm() / k;
  double lambda = cfg.gradient_penalty_weight;
  double loss = d_fake - d_real + lambda * (norm - 1.0) * (norm - 1.0);

  if (critic && norm > 1e-12 && lambda != 0.0) {
    double scale = 2.0 * lambda * (norm - 1.0) / (norm * double(k) * k);
    critic_tangent_backward(disc.critic, ct, scale * tangents, critic);
  }
  return loss;
}

double loss_discriminator(const GeneratorParams& gen,
                          const DiscriminatorParams& disc,
                          const GanBatch& batch, double eps,
                          const GanLossConfig& cfg) {
  return loss_discriminator_grad(gen, disc, batch, eps, cfg, nullptr);
}

double loss_generator_grad(const GeneratorParams& gen,
                           const DiscriminatorParams& disc,
                           const GanBatch& batch, const GanLossConfig& cfg,
                           MlpGrads* embed, MlpGrads* link, MlpGrads* out) {
  if (batch.noise.size() != batch.real.size()) {
    throw UsageError("noise and real vectors differ in length");
  }
  auto t = generator_forward(gen, batch);
  const Eigen::VectorXd& fake = t.ratings;
  int k = static_cast<int>(fake.size());
  double psi = cfg.rating_penalty_weight;

  auto ct = critic_tangent(disc.critic, fake);
  double d_fake = ct.trace.a.back().col(0).mean();
  Eigen::VectorXd diff = fake - batch.real;
  double loss = -d_fake + psi / k * diff.squaredNorm();
  if (!embed && !link && !out) return loss;

  // d loss / d rating, caller slot order: the adversarial term through the
  // shared critic tangent plus the anchoring pull toward the item means.
  Eigen::VectorXd dfake =
      -ct.T.back().col(0) / k + (2.0 * psi / k) * diff;

  int width = static_cast<int>(t.R2.cols());
  Eigen::MatrixXd dR2(k, width);
  for (int p = 0; p < k; ++p) {
    dR2.row(p).setConstant(dfake(t.order[p]) / width);
  }
  Eigen::MatrixXd dR1 = mlp_backward(gen.out, t.out_trace, dR2, out);

  Eigen::MatrixXd dM = dR1 + t.A.transpose() * dR1;
  Eigen::MatrixXd dA = dR1 * t.M.transpose() + dM * t.H.transpose();
  Eigen::MatrixXd dH = t.A.transpose() * dM;

  // Row softmax backward: lbar_i = a_i o (abar_i - <abar_i, a_i>).
  Eigen::MatrixXd dL(k, k);
  for (int i = 0; i < k; ++i) {
    double inner = dA.row(i).dot(t.A.row(i));
    dL.row(i) =
        t.A.row(i).cwiseProduct(dA.row(i) - Eigen::RowVectorXd::Constant(
                                                k, inner));
  }
  Eigen::MatrixXd dLt = (dL + dL.transpose()) * t.Lt;

  mlp_backward(gen.embed, t.embed_trace, dH, embed);
  mlp_backward(gen.link, t.link_trace, dLt, link);
  return loss;
}

double loss_generator(const GeneratorParams& gen,
                      const DiscriminatorParams& disc, const GanBatch& batch,
                      const GanLossConfig& cfg) {
  return loss_generator_grad(gen, disc, batch, cfg, nullptr, nullptr, nullptr);
}

int effective_max_ratings(int epoch, int total_epochs, int cap,
                          int min_ratings) {
  int eff;
  if (epoch * 2 <= total_epochs) {
    eff = cap / 2;
  } else if (epoch * 10 <= total_epochs * 7) {
    eff = cap * 7 / 10;
  } else {
    eff = cap;
  }
  return std::max(eff, min_ratings);
}

GanTrainResult train_gan(const RatingsDataset& train,
                         const ItemItemGraph& graph,
                         const GanTrainConfig& config) {
  if (config.thresholds.max_ratings <= 0) {
    throw UsageError("training needs a resolved max_ratings cap");
  }
  if (config.epochs < 1 || config.critic_steps < 1) {
    throw UsageError("epochs and critic steps must be positive");
  }
  int cap = config.thresholds.max_ratings;

  Rng init_rng(derive_seed(config.seed, "gan.init"));
  GanTrainResult result;
  result.generator =
      GeneratorParams::standard(config.conditional, cap, init_rng);
  auto disc = DiscriminatorParams::standard(init_rng);

  AdamConfig adam;
  adam.learning_rate = config.learning_rate;
  auto s_embed = AdamState::zeros_like(result.generator.embed);
  auto s_link = AdamState::zeros_like(result.generator.link);
  auto s_out = AdamState::zeros_like(result.generator.out);
  auto s_critic = AdamState::zeros_like(disc.critic);

  Rng batch_rng(derive_seed(config.seed, "gan.batch"));
  Rng eps_rng(derive_seed(config.seed, "gan.eps"));

  auto draw_batch = [&](int cap_effective) {
    auto sampled = sample_profile_items(graph, train, config.thresholds,
                                        cap_effective, batch_rng);
    return make_gan_batch(sampled, train, config.conditional, cap, batch_rng);
  };

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    int cap_effective = effective_max_ratings(epoch, config.epochs, cap,
                                              config.thresholds.min_ratings);
    double loss_d_sum = 0.0;
    for (int step = 0; step < config.critic_steps; ++step) {
      auto batch = draw_batch(cap_effective);
      auto grads = MlpGrads::zeros_like(disc.critic);
      loss_d_sum += loss_discriminator_grad(result.generator, disc, batch,
                                            eps_rng.uniform(), config.loss,
                                            &grads);
      adam_step(disc.critic, grads, s_critic, adam);
    }

    auto batch = draw_batch(cap_effective);
    auto ge = MlpGrads::zeros_like(result.generator.embed);
    auto gl = MlpGrads::zeros_like(result.generator.link);
    auto go = MlpGrads::zeros_like(result.generator.out);
    double loss_g = loss_generator_grad(result.generator, disc, batch,
                                        config.loss, &ge, &gl, &go);
    adam_step(result.generator.embed, ge, s_embed, adam);
    adam_step(result.generator.link, gl, s_link, adam);
    adam_step(result.generator.out, go, s_out, adam);

    result.history.push_back(
        {epoch, loss_d_sum / config.critic_steps, loss_g, cap_effective});
  }
  return result;
}

Eigen::VectorXd generate_ratings(const GeneratorParams& gen,
                                 const SampledProfileItems& sampled,
                                 const RatingsDataset& data,
                                 std::uint64_t seed) {
  Rng rng(derive_seed(seed, "gan.generate"));
  auto batch =
      make_gan_batch(sampled, data, gen.conditional, gen.condition_cap, rng);
  return generator_forward(gen, batch).ratings;
}

namespace {

const char* act_name(Activation act) {
  switch (act) {
    case Activation::kLeakyRelu:
      return "leaky_relu";
    case Activation::kSigmoid:
      return "sigmoid";
    case Activation::kIdentity:
      return "identity";
  }
  throw NumericError("unknown activation");
}

Activation act_from_name(const std::string& name) {
  if (name == "leaky_relu") return Activation::kLeakyRelu;
  if (name == "sigmoid") return Activation::kSigmoid;
  if (name == "identity") return Activation::kIdentity;
  throw DataError("unknown activation name: " + name);
}

json net_to_json(const Mlp& net) {
  json j;
  j["widths"] = json::array();
  j["widths"].push_back(net.input_dim());
  for (const auto& layer : net.layers) {
    j["widths"].push_back(static_cast<int>(layer.W.cols()));
  }
  j["activations"] = json::array();
  for (const auto& layer : net.layers) {
    j["activations"].push_back(act_name(layer.act));
  }
  j["values"] = flatten(net);
  return j;
}

Mlp net_from_json(const json& j) {
  auto widths = j.at("widths").get<std::vector<int>>();
  auto acts = j.at("activations").get<std::vector<std::string>>();
  if (widths.size() < 2 || acts.size() != widths.size() - 1) {
    throw DataError("inconsistent network shape in checkpoint");
  }
  Mlp net;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    AffineLayer layer;
    layer.W = Eigen::MatrixXd::Zero(widths[l], widths[l + 1]);
    layer.b = Eigen::RowVectorXd::Zero(widths[l + 1]);
    layer.act = act_from_name(acts[l]);
    net.layers.push_back(std::move(layer));
  }
  auto values = j.at("values").get<std::vector<double>>();
  try {
    unflatten(net, values);
  } catch (const UsageError& e) {
    throw DataError(std::string("checkpoint parameter block: ") + e.what());
  }
  return net;
}

}  // namespace

void save_generator(const std::string& path, const GeneratorParams& gen,
                    const std::map<std::string, std::string>& config,
                    std::uint64_t seed) {
  json j;
  j["format"] = "shillsim-generator";
  j["version"] = 1;
  j["seed"] = seed;
  j["conditional"] = gen.conditional;
  j["condition_cap"] = gen.condition_cap;
  j["config"] = config;
  j["networks"]["embed"] = net_to_json(gen.embed);
  j["networks"]["link"] = net_to_json(gen.link);
  j["networks"]["out"] = net_to_json(gen.out);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(path + ": cannot open for writing");
  out << j.dump(2) << "\n";
  if (!out) throw DataError(path + ": write failed");
}

GeneratorCheckpoint load_generator(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path + ": cannot open");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
  try {
    if (j.at("format") != "shillsim-generator") {
      throw DataError(path + ": not a generator checkpoint");
    }
    GeneratorCheckpoint cp;
    cp.seed = j.at("seed").get<std::uint64_t>();
    cp.params.conditional = j.at("conditional").get<bool>();
    cp.params.condition_cap = j.at("condition_cap").get<int>();
    cp.config =
        j.at("config").get<std::map<std::string, std::string>>();
    cp.params.embed = net_from_json(j.at("networks").at("embed"));
    cp.params.link = net_from_json(j.at("networks").at("link"));
    cp.params.out = net_from_json(j.at("networks").at("out"));
    return cp;
  } catch (const json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
}

void write_history_csv(const std::string& path,
                       const std::vector<GanEpochStats>& history) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(path + ": cannot open for writing");
  out << "epoch,loss_D,loss_G,og_effective\n";
  for (const auto& row : history) {
    out << row.epoch << ',' << format_double(row.loss_d) << ','
        << format_double(row.loss_g) << ',' << row.cap_effective << "\n";
  }
  if (!out) throw DataError(path + ": write failed");
}

}  // namespace shillsim
