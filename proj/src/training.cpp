#include "hyperalign/training.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>

#include "hyperalign/error.hpp"
#include "hyperalign/simd/kernels.hpp"

namespace hyperalign {

// ---------------------------------------------------------------------------
// ParameterSet

ParameterSet ParameterSet::initialize(std::size_t dim, std::uint64_t seed,
                                      std::size_t modnet_hidden) {
  if (dim == 0) throw InvalidInput("parameter set: dimension must be positive");
  std::mt19937_64 rng(seed);
  ParameterSet p;
  p.image_adapter = AdapterParams::initialize(dim, rng);
  p.text_adapter = AdapterParams::initialize(dim, rng);
  p.modnet = ModulationNetParams::initialize(rng, modnet_hidden);
  return p;
}

ParameterSet ParameterSet::zeros_like(const ParameterSet& like) {
  ParameterSet z = like;
  for (auto& t : z.tensors()) std::fill(t.values.begin(), t.values.end(), 0.0);
  return z;
}

std::vector<TensorRef> ParameterSet::tensors() {
  const std::size_t d = image_adapter.dim;
  const std::size_t ha = image_adapter.hidden;
  const std::size_t hm = modnet.hidden;
  constexpr std::size_t in = ModulationNetParams::kInputs;
  constexpr std::size_t out = ModulationNetParams::kOutputs;
  return {
      {"image_scaler.raw", {1}, std::span<double>(&image_scaler.raw, 1)},
      {"text_scaler.raw", {1}, std::span<double>(&text_scaler.raw, 1)},
      {"image_adapter.down", {ha, d}, image_adapter.down},
      {"image_adapter.up", {d, ha}, image_adapter.up},
      {"image_adapter.gate_raw", {1}, std::span<double>(&image_adapter.gate_raw, 1)},
      {"text_adapter.down", {text_adapter.hidden, text_adapter.dim}, text_adapter.down},
      {"text_adapter.up", {text_adapter.dim, text_adapter.hidden}, text_adapter.up},
      {"text_adapter.gate_raw", {1}, std::span<double>(&text_adapter.gate_raw, 1)},
      {"modnet.w1", {hm, in}, modnet.w1},
      {"modnet.b1", {hm}, modnet.b1},
      {"modnet.w2", {hm, hm}, modnet.w2},
      {"modnet.b2", {hm}, modnet.b2},
      {"modnet.w3", {out, hm}, modnet.w3},
      {"modnet.b3", {out}, modnet.b3},
  };
}

std::vector<ConstTensorRef> ParameterSet::tensors() const {
  auto mutable_refs = const_cast<ParameterSet*>(this)->tensors();
  std::vector<ConstTensorRef> out;
  out.reserve(mutable_refs.size());
  for (auto& t : mutable_refs) out.push_back({std::move(t.name), std::move(t.shape), t.values});
  return out;
}

std::size_t ParameterSet::size() const {
  std::size_t n = 0;
  for (const auto& t : tensors()) n += t.values.size();
  return n;
}

std::vector<double> ParameterSet::flatten() const {
  std::vector<double> flat;
  flat.reserve(size());
  for (const auto& t : tensors()) flat.insert(flat.end(), t.values.begin(), t.values.end());
  return flat;
}

void ParameterSet::unflatten(std::span<const double> flat) {
  if (flat.size() != size()) {
    throw InvalidInput("unflatten: expected " + std::to_string(size()) + " values, got " +
                       std::to_string(flat.size()));
  }
  std::size_t off = 0;
  for (auto& t : tensors()) {
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(off), t.values.size(), t.values.begin());
    off += t.values.size();
  }
}

void ParameterSet::validate() const {
  image_adapter.validate();
  text_adapter.validate();
  modnet.validate();
  if (image_adapter.dim != text_adapter.dim) {
    throw InvalidInput("parameter set: image and text adapters disagree on dimension");
  }
}

void TrainConfig::validate() const {
  manifold.validate();
  entailment.validate();
  if (!(lambda >= 0.0)) throw InvalidInput("lambda must be non-negative");
  if (!(lr >= 0.0) || !(weight_decay >= 0.0)) {
    throw InvalidInput("learning rate and weight decay must be non-negative");
  }
  if (batch_size == 0) throw InvalidInput("batch size must be positive");
  if (max_epochs <= 0 || lr_step <= 0 || patience <= 0) {
    throw InvalidInput("epochs, lr step and patience must be positive");
  }
  if (patience > max_epochs) throw InvalidInput("patience must not exceed max epochs");
  if (!(lr_gamma > 0.0)) throw InvalidInput("lr gamma must be positive");
  if (modnet_hidden == 0) throw InvalidInput("modulation net width must be positive");
}

// ---------------------------------------------------------------------------
// Forward / backward tape for the fixed per-sample pipeline.

namespace {

// (t cosh t - sinh t) / t^3, with its series near zero.
double exp_map_curvature_term(double t) {
  if (t < 1e-3) {
    const double t2 = t * t;
    return 1.0 / 3.0 + t2 / 30.0 + t2 * t2 / 840.0;
  }
  return (t * std::cosh(t) - std::sinh(t)) / (t * t * t);
}

struct StreamTape {
  std::vector<double> x;
  std::vector<double> pre;
  std::vector<double> act;
  std::vector<double> branch;
  std::vector<double> f;
  double gate = 0.0;
  double alpha = 0.0;
  std::vector<double> u;
  double r = 0.0;
  double t = 0.0;
  double ratio = 1.0;  // sinh(t) / t
  LorentzPoint point;
};

struct SampleTape {
  StreamTape img, txt;
  double norm_i = 0.0, norm_t = 0.0, s_base = 0.0;
  bool cos_clamped = false;
  double eta = 0.0;
  double dist_arg = 1.0;
  GeometricPrimitives z;
  double text_space_norm = 0.0;
  double aperture_base = 1.0;
  double aperture_arg = 1.0;
  double c_eta = 0.0, numer = 0.0, w = 0.0, sq = 0.0, denom = 0.0, phi_ratio = 0.0;
  std::array<double, 3> zin{};
  std::vector<double> h1, h2;
  std::array<double, 3> out{};
  ModulationParams mod;
  double prediction = 0.0;
  double gamma = 1.0;
  double hinge = 0.0;
};

void forward_stream(std::span<const float> emb, const AdapterParams& ad, const AdaptiveScaler& sc,
                    const ManifoldConfig& mcfg, StreamTape& s) {
  const std::size_t d = ad.dim;
  s.x.assign(emb.begin(), emb.end());
  s.pre.resize(ad.hidden);
  simd::gemv(ad.down, ad.hidden, d, s.x, s.pre);
  s.act.resize(ad.hidden);
  for (std::size_t j = 0; j < ad.hidden; ++j) s.act[j] = std::max(0.0, s.pre[j]);
  s.branch.resize(d);
  simd::gemv(ad.up, d, ad.hidden, s.act, s.branch);
  s.gate = ad.gate();
  s.f.resize(d);
  for (std::size_t i = 0; i < d; ++i) s.f[i] = s.gate * s.branch[i] + (1.0 - s.gate) * s.x[i];

  s.alpha = sc.alpha();
  s.u.resize(d);
  for (std::size_t i = 0; i < d; ++i) s.u[i] = s.alpha * s.f[i];
  s.point = exp_map_origin(TangentAtOrigin{s.u}, mcfg);
  s.r = std::sqrt(simd::squared_norm(s.u));
  s.t = std::sqrt(mcfg.curvature) * s.r;
  s.ratio = s.t > 0.0 ? std::sinh(s.t) / s.t : 1.0;
}

void forward_sample(const Sample& sample, const ParameterSet& p, const ManifoldConfig& mcfg,
                    const EntailmentConfig& ecfg, std::optional<double> score, SampleTape& tp) {
  if (sample.image_emb.size() != p.dim() || sample.text_emb.size() != p.dim()) {
    throw InvalidInput("embedding dimension " + std::to_string(sample.image_emb.size()) +
                       " does not match model dimension " + std::to_string(p.dim()));
  }
  forward_stream(sample.image_emb, p.image_adapter, p.image_scaler, mcfg, tp.img);
  forward_stream(sample.text_emb, p.text_adapter, p.text_scaler, mcfg, tp.txt);

  // Euclidean branch.
  tp.norm_i = std::sqrt(simd::squared_norm(tp.img.f));
  tp.norm_t = std::sqrt(simd::squared_norm(tp.txt.f));
  if (tp.norm_i == 0.0 || tp.norm_t == 0.0) {
    throw InvalidInput("cosine_similarity: zero-norm adapted feature");
  }
  const double raw_cos = simd::dot(tp.img.f, tp.txt.f) / (tp.norm_i * tp.norm_t);
  tp.cos_clamped = raw_cos > 1.0 || raw_cos < -1.0;
  tp.s_base = std::clamp(raw_cos, -1.0, 1.0);

  // Hyperbolic primitives.
  const double c = mcfg.curvature;
  const double sqrt_c = std::sqrt(c);
  const LorentzPoint& T = tp.txt.point;
  const LorentzPoint& I = tp.img.point;
  tp.eta = lorentz_inner(T, I);
  tp.dist_arg = -c * tp.eta;
  tp.z.distance = std::acosh(std::max(1.0, tp.dist_arg)) / sqrt_c;

  tp.text_space_norm = std::sqrt(simd::squared_norm(T.space));
  if (tp.text_space_norm < ecfg.eps) {
    throw DegenerateGeometry("exterior_angle: text point at the origin has no cone axis");
  }
  tp.aperture_base = std::max(sqrt_c * tp.text_space_norm, ecfg.eps);
  tp.aperture_arg = 2.0 * ecfg.k / tp.aperture_base;
  tp.z.aperture = std::asin(std::min(1.0, tp.aperture_arg));

  tp.c_eta = c * tp.eta;
  tp.numer = I.time + T.time * tp.c_eta;
  tp.w = tp.c_eta * tp.c_eta - 1.0;
  tp.sq = std::sqrt(std::max(ecfg.eps, tp.w));
  tp.denom = tp.text_space_norm * tp.sq;
  tp.phi_ratio = tp.numer / tp.denom;
  tp.z.exterior_angle = std::acos(std::clamp(tp.phi_ratio, -1.0, 1.0));

  tp.gamma = score ? contraction_factor(*score, ecfg) : 1.0;
  tp.z.dynamic_aperture = tp.gamma * tp.z.aperture;
  tp.hinge = std::max(0.0, tp.z.exterior_angle - tp.z.dynamic_aperture);

  // ModulationNet.
  const ModulationNetParams& net = p.modnet;
  const std::size_t h = net.hidden;
  tp.zin = standardize(tp.z);
  tp.h1.resize(h);
  simd::gemv(net.w1, h, ModulationNetParams::kInputs, tp.zin, tp.h1);
  for (std::size_t j = 0; j < h; ++j) tp.h1[j] = std::tanh(tp.h1[j] + net.b1[j]);
  tp.h2.resize(h);
  simd::gemv(net.w2, h, h, tp.h1, tp.h2);
  for (std::size_t j = 0; j < h; ++j) tp.h2[j] = std::tanh(tp.h2[j] + net.b2[j]);
  simd::gemv(net.w3, ModulationNetParams::kOutputs, h, tp.h2, tp.out);
  for (std::size_t j = 0; j < tp.out.size(); ++j) tp.out[j] += net.b3[j];
  tp.mod = modulation_from_outputs(tp.out);
  tp.prediction = calibrate(tp.s_base, tp.mod);
}

// Gradient of the loss w.r.t. the Lorentz point (time, space) -> tangent u.
void backward_exp_map(const StreamTape& s, double g_time, std::span<const double> g_space,
                      const ManifoldConfig& mcfg, std::vector<double>& g_u) {
  const std::size_t d = s.u.size();
  g_u.assign(d, 0.0);
  if (s.r < 1e-12) {
    // First-order branch: point = (1/sqrt(c), u).
    for (std::size_t i = 0; i < d; ++i) g_u[i] = g_space[i];
    return;
  }
  const double c = mcfg.curvature;
  const double sqrt_c = std::sqrt(c);
  const double u_dot_g = simd::dot(s.u, g_space);
  const double radial = c * exp_map_curvature_term(s.t) * u_dot_g + g_time * sqrt_c * s.ratio;
  for (std::size_t i = 0; i < d; ++i) g_u[i] = s.ratio * g_space[i] + radial * s.u[i];
}

// Backprop through lift and adapter; g_f is the total gradient w.r.t. the
// adapted feature (Euclidean branch included), g_u w.r.t. the tangent.
void backward_stream(const StreamTape& s, std::vector<double> g_f, std::span<const double> g_u,
                     const AdapterParams& ad, AdapterParams& g_ad, AdaptiveScaler& g_sc,
                     const AdaptiveScaler& sc) {
  const std::size_t d = ad.dim;
  // u = alpha * f, alpha = logistic(raw) * alpha_max.
  const double g_alpha = simd::dot(s.f, g_u);
  const double sig = logistic(sc.raw);
  g_sc.raw += g_alpha * sc.alpha_max * sig * (1.0 - sig);
  simd::axpy(s.alpha, g_u, g_f);

  // f = gate * branch + (1 - gate) * x.
  double g_gate = 0.0;
  for (std::size_t i = 0; i < d; ++i) g_gate += g_f[i] * (s.branch[i] - s.x[i]);
  g_ad.gate_raw += g_gate * s.gate * (1.0 - s.gate);

  std::vector<double> g_branch(d);
  for (std::size_t i = 0; i < d; ++i) g_branch[i] = s.gate * g_f[i];
  simd::ger(1.0, g_branch, s.act, g_ad.up);
  std::vector<double> g_act(ad.hidden, 0.0);
  simd::gemv_t_acc(ad.up, d, ad.hidden, g_branch, g_act);
  for (std::size_t j = 0; j < ad.hidden; ++j) {
    if (!(s.pre[j] > 0.0)) g_act[j] = 0.0;
  }
  simd::ger(1.0, g_act, s.x, g_ad.down);
}

void backward_sample(const SampleTape& tp, double g_pred, double g_hinge, const ParameterSet& p,
                     const ManifoldConfig& mcfg, const EntailmentConfig& ecfg, ParameterSet& g) {
  const ModulationNetParams& net = p.modnet;
  const std::size_t h = net.hidden;
  const double c = mcfg.curvature;
  const double sqrt_c = std::sqrt(c);

  // prediction = conf * (scale * s + bias)
  const ModulationParams& m = tp.mod;
  std::array<double, 3> g_out{};
  g_out[0] = g_pred * m.confidence * tp.s_base;
  g_out[1] = g_pred * m.confidence;
  g_out[2] = g_pred * (m.scale * tp.s_base + m.bias) * m.confidence * (1.0 - m.confidence);
  const double g_s = tp.cos_clamped ? 0.0 : g_pred * m.confidence * m.scale;

  // ModulationNet backward.
  simd::ger(1.0, g_out, tp.h2, g.modnet.w3);
  for (std::size_t j = 0; j < 3; ++j) g.modnet.b3[j] += g_out[j];
  std::vector<double> g_a2(h, 0.0);
  simd::gemv_t_acc(net.w3, ModulationNetParams::kOutputs, h, g_out, g_a2);
  for (std::size_t j = 0; j < h; ++j) g_a2[j] *= 1.0 - tp.h2[j] * tp.h2[j];
  simd::ger(1.0, g_a2, tp.h1, g.modnet.w2);
  simd::axpy(1.0, g_a2, g.modnet.b2);
  std::vector<double> g_a1(h, 0.0);
  simd::gemv_t_acc(net.w2, h, h, g_a2, g_a1);
  for (std::size_t j = 0; j < h; ++j) g_a1[j] *= 1.0 - tp.h1[j] * tp.h1[j];
  simd::ger(1.0, g_a1, tp.zin, g.modnet.w1);
  simd::axpy(1.0, g_a1, g.modnet.b1);
  std::array<double, 3> g_zin{};
  simd::gemv_t_acc(net.w1, h, ModulationNetParams::kInputs, g_a1, g_zin);

  // Primitives.
  const double g_dist = g_zin[0] / 2.0;
  const double g_phi = g_zin[1] / std::numbers::pi + g_hinge;
  const double g_aperture = g_zin[2] / (std::numbers::pi / 2.0) - g_hinge * tp.gamma;

  const LorentzPoint& T = tp.txt.point;
  const LorentzPoint& I = tp.img.point;
  double g_eta = 0.0, g_text_norm = 0.0, g_t0 = 0.0, g_i0 = 0.0;

  if (tp.dist_arg > 1.0 && g_dist != 0.0) {
    g_eta += -sqrt_c * g_dist / std::sqrt(tp.dist_arg * tp.dist_arg - 1.0);
  }
  if (tp.aperture_arg < 1.0 && g_aperture != 0.0 && tp.aperture_base > ecfg.eps) {
    const double base = tp.aperture_base;
    const double g_q = g_aperture / std::sqrt(1.0 - tp.aperture_arg * tp.aperture_arg);
    g_text_norm += g_q * (-2.0 * ecfg.k * sqrt_c / (base * base));
  }
  if (tp.phi_ratio > -1.0 && tp.phi_ratio < 1.0 && g_phi != 0.0) {
    const double g_ratio = -g_phi / std::sqrt(1.0 - tp.phi_ratio * tp.phi_ratio);
    const double g_numer = g_ratio / tp.denom;
    const double g_denom = -g_ratio * tp.phi_ratio / tp.denom;
    g_i0 += g_numer;
    g_t0 += g_numer * tp.c_eta;
    double g_c_eta = g_numer * T.time;
    g_text_norm += g_denom * tp.sq;
    if (tp.w > ecfg.eps) {
      const double g_w = g_denom * tp.text_space_norm / (2.0 * tp.sq);
      g_c_eta += g_w * 2.0 * tp.c_eta;
    }
    g_eta += c * g_c_eta;
  }

  // eta = -T0 I0 + Ts . Is
  g_t0 += -I.time * g_eta;
  g_i0 += -T.time * g_eta;
  std::vector<double> g_ts(T.space.size(), 0.0), g_is(I.space.size(), 0.0);
  simd::axpy(g_eta, I.space, g_ts);
  simd::axpy(g_eta, T.space, g_is);
  simd::axpy(g_text_norm / tp.text_space_norm, T.space, g_ts);

  std::vector<double> g_ui, g_ut;
  backward_exp_map(tp.img, g_i0, g_is, mcfg, g_ui);
  backward_exp_map(tp.txt, g_t0, g_ts, mcfg, g_ut);

  // s = dot(fi, ft) / (|fi| |ft|)
  const std::size_t d = p.dim();
  std::vector<double> g_fi(d, 0.0), g_ft(d, 0.0);
  if (g_s != 0.0) {
    const double inv = 1.0 / (tp.norm_i * tp.norm_t);
    const double ci = tp.s_base / (tp.norm_i * tp.norm_i);
    const double ct = tp.s_base / (tp.norm_t * tp.norm_t);
    for (std::size_t i = 0; i < d; ++i) {
      g_fi[i] = g_s * (tp.txt.f[i] * inv - ci * tp.img.f[i]);
      g_ft[i] = g_s * (tp.img.f[i] * inv - ct * tp.txt.f[i]);
    }
  }
  backward_stream(tp.img, std::move(g_fi), g_ui, p.image_adapter, g.image_adapter, g.image_scaler,
                  p.image_scaler);
  backward_stream(tp.txt, std::move(g_ft), g_ut, p.text_adapter, g.text_adapter, g.text_scaler,
                  p.text_scaler);
}

double sign(double x) { return (x > 0.0) - (x < 0.0); }

void check_batch(std::span<const Sample> batch, const ParameterSet& params,
                 const TrainConfig& cfg) {
  if (batch.empty()) throw InvalidInput("batch must be non-empty");
  params.validate();
  cfg.validate();
}

LossAndGradient run_batch(std::span<const Sample> batch, const ParameterSet& params,
                          const TrainConfig& cfg, bool with_gradient) {
  check_batch(batch, params, cfg);
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  LossAndGradient result;
  result.loss.predictions.resize(batch.size());

  std::vector<SampleTape> tapes(batch.size());
  double reg_sum = 0.0, entail_sum = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    try {
      forward_sample(batch[i], params, cfg.manifold, cfg.entailment, batch[i].score, tapes[i]);
    } catch (const Error& e) {
      throw SampleError(e.what(), i);
    }
    result.loss.predictions[i] = tapes[i].prediction;
    reg_sum += std::abs(tapes[i].prediction - batch[i].score);
    entail_sum += tapes[i].hinge;
  }
  result.loss.reg = reg_sum * inv_b;
  result.loss.entail = entail_sum * inv_b;
  result.loss.total = result.loss.reg + cfg.lambda * result.loss.entail;

  if (with_gradient) {
    ParameterSet g = ParameterSet::zeros_like(params);
    for (std::size_t i = 0; i < batch.size(); ++i) {
      const double g_pred = sign(tapes[i].prediction - batch[i].score) * inv_b;
      const double g_hinge = tapes[i].hinge > 0.0 ? cfg.lambda * inv_b : 0.0;
      backward_sample(tapes[i], g_pred, g_hinge, params, cfg.manifold, cfg.entailment, g);
    }
    result.gradient = g.flatten();
  }
  return result;
}

}  // namespace

BatchLoss forward_batch(std::span<const Sample> batch, const ParameterSet& params,
                        const TrainConfig& cfg) {
  return run_batch(batch, params, cfg, false).loss;
}

std::vector<double> gradients(std::span<const Sample> batch, const ParameterSet& params,
                              const TrainConfig& cfg) {
  return run_batch(batch, params, cfg, true).gradient;
}

LossAndGradient loss_and_gradients(std::span<const Sample> batch, const ParameterSet& params,
                                   const TrainConfig& cfg) {
  return run_batch(batch, params, cfg, true);
}

// ---------------------------------------------------------------------------
// Optimizer and schedule

OptimizerState OptimizerState::zeros(std::size_t n) {
  OptimizerState s;
  s.m.assign(n, 0.0);
  s.v.assign(n, 0.0);
  return s;
}

void adamw_step(std::span<double> params, std::span<const double> grads, OptimizerState& state,
                double lr, double weight_decay) {
  if (grads.size() != params.size() || state.m.size() != params.size() ||
      state.v.size() != params.size()) {
    throw InvalidInput("adamw_step: parameter, gradient and moment sizes differ");
  }
  ++state.step;
  simd::AdamWArgs args;
  args.lr = lr;
  args.weight_decay = weight_decay;
  args.beta1 = state.beta1;
  args.beta2 = state.beta2;
  args.eps = state.eps;
  const double t = static_cast<double>(state.step);
  args.bias_correction1 = 1.0 - std::pow(state.beta1, t);
  args.bias_correction2 = 1.0 - std::pow(state.beta2, t);
  simd::kernels().adamw(args, grads.data(), params.data(), state.m.data(), state.v.data(),
                        params.size());
}

double lr_at_epoch(int epoch, const TrainConfig& cfg) {
  if (epoch < 0) throw InvalidInput("epoch must be non-negative");
  return cfg.lr * std::pow(cfg.lr_gamma, epoch / cfg.lr_step);
}

EarlyStopping::EarlyStopping(int patience, double min_improvement)
    : patience_(patience),
      min_improvement_(min_improvement),
      best_(-std::numeric_limits<double>::infinity()) {}

bool EarlyStopping::update(double metric) {
  const int epoch = seen_++;
  const bool improved =
      std::isfinite(metric) && (best_epoch_ < 0 || metric > best_ + min_improvement_);
  if (improved) {
    best_ = metric;
    best_epoch_ = epoch;
    stale_ = 0;
  } else {
    ++stale_;
  }
  return improved;
}

// ---------------------------------------------------------------------------
// Inference and the training loop

Inference infer(const Sample& sample, const ParameterSet& params, const ManifoldConfig& mcfg,
                const EntailmentConfig& ecfg) {
  SampleTape tp;
  forward_sample(sample, params, mcfg, ecfg, std::nullopt, tp);
  Inference out;
  out.prediction = tp.prediction;
  out.s_base = tp.s_base;
  out.primitives = tp.z;
  out.modulation = tp.mod;
  out.image_space_norm = std::sqrt(simd::squared_norm(tp.img.point.space));
  out.text_space_norm = tp.text_space_norm;
  return out;
}

std::vector<double> predict(const Dataset& ds, const ParameterSet& params,
                            const ManifoldConfig& mcfg, const EntailmentConfig& ecfg) {
  params.validate();
  if (ds.dim != params.dim()) {
    throw InvalidInput("dataset dimension " + std::to_string(ds.dim) +
                       " does not match model dimension " + std::to_string(params.dim()));
  }
  std::vector<double> preds(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    try {
      preds[i] = infer(ds.samples[i], params, mcfg, ecfg).prediction;
    } catch (const SampleError&) {
      throw;
    } catch (const Error& e) {
      throw SampleError(e.what(), i);
    }
  }
  return preds;
}

Evaluation evaluate(const Dataset& ds, const ParameterSet& params, const ManifoldConfig& mcfg,
                    const EntailmentConfig& ecfg) {
  if (ds.size() < 2) throw UndefinedMetric("evaluation needs at least 2 samples");
  Evaluation ev;
  ev.predictions = predict(ds, params, mcfg, ecfg);
  std::vector<double> gt(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) gt[i] = ds.samples[i].score;
  ev.metrics = evaluate_metrics(ev.predictions, gt);
  return ev;
}

TrainResult train(const Dataset& train_set, const Dataset& val_set, const TrainConfig& cfg) {
  cfg.validate();
  if (train_set.empty()) throw InvalidInput("training set is empty");
  if (val_set.size() < 2) throw InvalidInput("validation set needs at least 2 samples");
  if (train_set.dim != val_set.dim) {
    throw InvalidInput("training and validation sets disagree on dimension");
  }
  train_set.validate();
  val_set.validate();

  ParameterSet params = ParameterSet::initialize(train_set.dim, cfg.seed, cfg.modnet_hidden);
  std::vector<double> flat = params.flatten();
  OptimizerState opt = OptimizerState::zeros(flat.size());
  std::mt19937_64 shuffle_rng(cfg.seed ^ 0x9E3779B97F4A7C15ULL);
  EarlyStopping stopper(cfg.patience, cfg.min_improvement);

  TrainResult result{params, {}};
  std::vector<std::size_t> order(train_set.size());
  std::vector<Sample> batch;
  batch.reserve(cfg.batch_size);

  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    const double lr = lr_at_epoch(epoch, cfg);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    double total = 0.0, reg = 0.0, entail = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      batch.clear();
      for (std::size_t i = start; i < end; ++i) batch.push_back(train_set.samples[order[i]]);
      const LossAndGradient lg = loss_and_gradients(batch, params, cfg);
      const double w = static_cast<double>(batch.size());
      total += lg.loss.total * w;
      reg += lg.loss.reg * w;
      entail += lg.loss.entail * w;
      adamw_step(flat, lg.gradient, opt, lr, cfg.weight_decay);
      params.unflatten(flat);
    }

    const double n = static_cast<double>(train_set.size());
    EpochRecord rec{epoch, lr, total / n, reg / n, entail / n, 0.0, 0.0};
    try {
      const Evaluation ev = evaluate(val_set, params, cfg.manifold, cfg.entailment);
      rec.val_srcc = ev.metrics.srcc;
      rec.val_plcc = ev.metrics.plcc;
    } catch (const UndefinedMetric&) {
      rec.val_srcc = std::nan("");
      rec.val_plcc = std::nan("");
    }
    result.history.epochs.push_back(rec);

    if (stopper.update(rec.val_srcc)) result.params = params;
    if (stopper.should_stop()) {
      result.history.stopped_early = epoch + 1 < cfg.max_epochs;
      break;
    }
  }
  result.history.best_epoch = stopper.best_epoch();
  result.history.best_val_srcc = stopper.best_epoch() >= 0 ? stopper.best() : std::nan("");
  return result;
}

}  // namespace hyperalign
