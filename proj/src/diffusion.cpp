#include "gadiff/diffusion.hpp"

#include <cmath>
#include <stdexcept>

#include "gadiff/checkpoint.hpp"

namespace gadiff {

DmLossResult dm_loss(const DenoiserNet& net, const Matrix& z0, const NoiseSchedule& sched,
                     Rng& rng, const std::vector<double>& c) {
  sched.validate();
  const std::size_t n = z0.rows(), k = z0.cols();
  if (k != net.config().latent_dim) throw std::invalid_argument("dm_loss: latent width mismatch");

  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i)
    t[i] = 1.0 + static_cast<double>(rng.index(static_cast<std::size_t>(sched.t_steps)));

  Matrix eps(n, k), z_t(n, k);
  for (std::size_t i = 0; i < n; ++i) {
    const double dw = sched.data_weight(t[i]);
    const double nw = sched.noise_weight(t[i]);
    for (std::size_t j = 0; j < k; ++j) {
      const double e = rng.normal();
      eps(i, j) = e;
      z_t(i, j) = dw * z0(i, j) + nw * e;
    }
  }

  DmLossResult out;
  Matrix eps_hat = net.forward(z_t, t, sched, c, &out.cache);
  out.d_eps_hat = Matrix(n, k);
  double loss = 0.0;
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < eps_hat.size(); ++i) {
    const double diff = eps_hat.data()[i] - eps.data()[i];
    loss += diff * diff;
    out.d_eps_hat.data()[i] = 2.0 * diff * inv_n;
  }
  out.value = loss * inv_n;
  return out;
}

Matrix standardize_rows(const Matrix& z, const std::vector<double>& mu,
                        const std::vector<double>& sd) {
  Matrix out(z.rows(), z.cols());
  for (std::size_t i = 0; i < z.rows(); ++i)
    for (std::size_t j = 0; j < z.cols(); ++j) out(i, j) = (z(i, j) - mu[j]) / sd[j];
  return out;
}

Matrix destandardize_rows(const Matrix& z, const std::vector<double>& mu,
                          const std::vector<double>& sd) {
  Matrix out(z.rows(), z.cols());
  for (std::size_t i = 0; i < z.rows(); ++i)
    for (std::size_t j = 0; j < z.cols(); ++j) out(i, j) = z(i, j) * sd[j] + mu[j];
  return out;
}

void latent_moments(const Matrix& z, std::vector<double>* mu, std::vector<double>* sd) {
  *mu = column_means(z);
  *sd = column_stddevs(z, *mu);
  for (double& s : *sd)
    if (s == 0.0) s = 1.0;  // collapsed dimensions stay constant at zero
}

namespace {

// cond weights from uncond ones: conditioning columns of the input layer
// start at zero so the padded network computes the same function
DenoiserNet widen_for_conditioning(const DenoiserNet& uncond, const DenoiserConfig& dc) {
  DenoiserNet net(dc);
  const std::size_t k = dc.latent_dim;
  for (std::size_t i = 0; i < uncond.params().count(); ++i) {
    const std::string& name = uncond.params().names()[i];
    if (name == "l0.w") {
      auto& wc = net.params().at("l0.w");  // (2k, h), row-major
      const auto& wu = uncond.params().at("l0.w");
      std::fill(wc.v.begin(), wc.v.end(), 0.0);
      std::copy(wu.v.begin(), wu.v.begin() + k * dc.hidden, wc.v.begin());
    } else {
      net.params().at(name).v = uncond.params().at(i).v;
    }
  }
  return net;
}

TrainedDenoiser train_dm_impl(const Matrix& z_raw, const NoiseSchedule& sched, const DmConfig& cfg,
                              bool conditioned, const CommonFeature* cf_in,
                              const DenoiserNet* warm_start) {
  sched.validate();
  if (!z_raw.all_finite()) throw std::invalid_argument("train_dm: non-finite latents");
  if (z_raw.rows() == 0) throw std::invalid_argument("train_dm: empty latents");

  DenoiserConfig dc;
  dc.latent_dim = z_raw.cols();
  dc.hidden = cfg.hidden;
  dc.depth = cfg.depth;
  dc.conditioned = conditioned;
  dc.seed = cfg.seed;

  if (warm_start) {
    if (!conditioned) throw std::invalid_argument("train_dm: warm start is for the conditional run");
    const auto& wc = warm_start->config();
    if (wc.conditioned || wc.latent_dim != dc.latent_dim || wc.hidden != dc.hidden ||
        wc.depth != dc.depth)
      throw std::invalid_argument("train_dm: warm-start network shape mismatch");
  }

  TrainedDenoiser out{warm_start ? widen_for_conditioning(*warm_start, dc) : DenoiserNet(dc),
                      sched, {}, {}, {}, {}};
  latent_moments(z_raw, &out.lat_mu, &out.lat_sd);
  const Matrix z = standardize_rows(z_raw, out.lat_mu, out.lat_sd);

  std::vector<double> c;
  if (conditioned) {
    if (!cf_in) throw std::invalid_argument("train_dm: conditional run needs a common feature");
    out.cf = *cf_in;
    c = out.cf.value();
  } else {
    out.cf = CommonFeature::init_from(z, cfg.tau);
  }

  Rng rng(Rng(cfg.seed).derive(conditioned ? 0xd202 : 0xd201));
  const double mid_step = static_cast<double>(sched.t_steps) / 2.0;

  double best = std::numeric_limits<double>::infinity();
  std::size_t stall = 0;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    DmLossResult lr = dm_loss(out.net, z, sched, rng, c);
    if (!std::isfinite(lr.value))
      throw std::runtime_error("dm training diverged (non-finite loss) at epoch " +
                               std::to_string(epoch));
    auto grads = out.net.backward(lr.cache, lr.d_eps_hat);
    const AdamResult ar = adam_step(out.net.params(), grads, cfg.lr);
    if (!ar.applied)
      throw std::runtime_error("dm training: non-finite gradients at epoch " +
                               std::to_string(epoch));
    out.epoch_loss.push_back(lr.value);

    if (!conditioned) {
      // refine the common feature from a one-shot mid-schedule reconstruction
      ForwardNoise fn = forward_noise(z, mid_step, sched, rng);
      const Matrix eps_hat = out.net.forward(fn.z_t, mid_step, sched, {});
      const Matrix z_hat = one_shot_estimate(fn.z_t, mid_step, eps_hat, sched);
      out.cf.update(z_hat);
    }

    if (lr.value < best - cfg.min_delta) {
      best = lr.value;
      stall = 0;
    } else if (++stall >= cfg.patience) {
      break;
    }
  }
  return out;
}

}  // namespace

TrainedDenoiser train_dm_uncond(const Matrix& z_raw, const NoiseSchedule& sched,
                                const DmConfig& cfg) {
  return train_dm_impl(z_raw, sched, cfg, false, nullptr, nullptr);
}

TrainedDenoiser train_dm_cond(const Matrix& z_raw, const NoiseSchedule& sched, const DmConfig& cfg,
                              const CommonFeature& cf, const DenoiserNet* warm_start) {
  return train_dm_impl(z_raw, sched, cfg, true, &cf, warm_start);
}

SampleMode sample_mode_from_string(const std::string& s) {
  if (s == "ode") return SampleMode::Ode;
  if (s == "sde") return SampleMode::Sde;
  throw std::invalid_argument("unknown sample mode: " + s);
}

std::string to_string(SampleMode m) { return m == SampleMode::Ode ? "ode" : "sde"; }

Matrix reverse_sample(const Matrix& z_start, double start_step, const EpsFn& eps,
                      const NoiseSchedule& sched, int steps, std::uint64_t seed, SampleMode mode) {
  sched.validate();
  if (steps < 1) throw std::invalid_argument("reverse_sample: steps must be >= 1");
  if (start_step < 0.0 || start_step > static_cast<double>(sched.t_steps))
    throw std::invalid_argument("reverse_sample: start_step out of range");

  const double sigma_start = sched.sampler_sigma(start_step);
  if (sigma_start <= 0.0) return z_start;

  // Karras-spaced ladder sigma_0 = sigma_start > ... > sigma_{steps} = 0
  const double rho = 7.0;
  const double sigma_min = std::min(0.002, 0.5 * sigma_start);
  std::vector<double> ladder(steps + 1);
  const double a = std::pow(sigma_start, 1.0 / rho);
  const double b = std::pow(sigma_min, 1.0 / rho);
  for (int i = 0; i < steps; ++i) {
    const double f = static_cast<double>(i) / std::max(1, steps - 1);
    ladder[i] = std::pow(a + f * (b - a), rho);
  }
  ladder[steps] = 0.0;

  Rng rng(Rng(seed).derive(0x5de5));

  // integrate in the de-scaled frame y = z / scale
  const double scale0 = sched.scale_of_step(start_step);
  Matrix y = z_start;
  y *= 1.0 / scale0;

  auto query = [&](const Matrix& yv, double sigma) -> Matrix {
    const double t = sched.step_of_sigma(sigma);
    Matrix z = yv;
    z *= sched.scale_of_step(t);
    Matrix d = eps(z, t);
    if (!d.all_finite())
      throw std::runtime_error("reverse_sample: non-finite noise estimate at sigma=" +
                               std::to_string(sigma));
    return d;
  };

  for (int i = 0; i < steps; ++i) {
    const double s_cur = ladder[i], s_next = ladder[i + 1];
    const double dt = s_next - s_cur;
    if (mode == SampleMode::Ode) {
      // probability flow: dy = eps_hat dsigma; Heun correction except into 0
      Matrix d = query(y, s_cur);
      Matrix y_next = y;
      for (std::size_t j = 0; j < y.size(); ++j) y_next.data()[j] += dt * d.data()[j];
      if (s_next > 0.0) {
        Matrix d2 = query(y_next, s_next);
        for (std::size_t j = 0; j < y.size(); ++j)
          y.data()[j] += dt * 0.5 * (d.data()[j] + d2.data()[j]);
      } else {
        y = std::move(y_next);
      }
    } else {
      // Euler-Maruyama on the reverse SDE: drift 2 eps_hat, diffusion sqrt(2 sigma)
      Matrix d = query(y, s_cur);
      const double g = std::sqrt(2.0 * s_cur * std::abs(dt));
      for (std::size_t j = 0; j < y.size(); ++j)
        y.data()[j] += 2.0 * dt * d.data()[j] + g * rng.normal();
    }
    if (!y.all_finite())
      throw std::runtime_error("reverse_sample: non-finite state after sub-step " +
                               std::to_string(i));
  }
  return y;  // sigma = 0: scale is 1 in both kernels
}

void save_denoiser(const std::string& path, const TrainedDenoiser& dn) {
  ParamStore all = dn.net.params();
  const std::size_t k = dn.net.config().latent_dim;
  {
    const std::size_t i = all.add("aux.lat_mu", {k});
    all.at(i).v = dn.lat_mu;
  }
  {
    const std::size_t i = all.add("aux.lat_sd", {k});
    all.at(i).v = dn.lat_sd;
  }
  {
    const std::size_t i = all.add("aux.c", {dn.cf.value().size()});
    all.at(i).v = dn.cf.value();
  }
  {
    const auto& hist = dn.cf.history();
    const std::size_t cols = hist.empty() ? 0 : hist[0].size();
    const std::size_t i = all.add("aux.c_history", {hist.size(), cols});
    auto& v = all.at(i).v;
    v.clear();
    for (const auto& row : hist) v.insert(v.end(), row.begin(), row.end());
  }

  std::map<std::string, std::string> hp;
  hp["kind"] = "denoiser";
  hp["conditioned"] = dn.net.config().conditioned ? "1" : "0";
  hp["latent_dim"] = std::to_string(k);
  hp["hidden"] = std::to_string(dn.net.config().hidden);
  hp["depth"] = std::to_string(dn.net.config().depth);
  hp["seed"] = std::to_string(dn.net.config().seed);
  hp["t_steps"] = std::to_string(dn.sched.t_steps);
  hp["kernel"] = to_string(dn.sched.kernel);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", dn.sched.sigma_max);
  hp["sigma_max"] = buf;
  std::snprintf(buf, sizeof(buf), "%.17g", dn.sched.sigma_cap);
  hp["sigma_cap"] = buf;
  std::snprintf(buf, sizeof(buf), "%.17g", dn.cf.tau());
  hp["tau"] = buf;
  hp["c_frozen"] = dn.cf.frozen() ? "1" : "0";
  save_checkpoint(path, all, hp);
}

TrainedDenoiser load_denoiser(const std::string& path) {
  Checkpoint ck = load_checkpoint(path);
  if (ck.hparams.at("kind") != "denoiser")
    throw std::runtime_error("not a denoiser checkpoint: " + path);

  DenoiserConfig dc;
  dc.latent_dim = std::stoul(ck.hparams.at("latent_dim"));
  dc.hidden = std::stoul(ck.hparams.at("hidden"));
  dc.depth = std::stoul(ck.hparams.at("depth"));
  dc.conditioned = ck.hparams.at("conditioned") == "1";
  dc.seed = std::stoull(ck.hparams.at("seed"));

  NoiseSchedule sched;
  sched.t_steps = std::stoi(ck.hparams.at("t_steps"));
  sched.kernel = kernel_from_string(ck.hparams.at("kernel"));
  sched.sigma_max = std::stod(ck.hparams.at("sigma_max"));
  sched.sigma_cap = std::stod(ck.hparams.at("sigma_cap"));

  ParamStore net_params;
  net_params.seed = ck.params.seed;
  std::vector<double> mu, sd, c;
  std::vector<std::vector<double>> hist;
  for (std::size_t i = 0; i < ck.params.count(); ++i) {
    const std::string& name = ck.params.names()[i];
    const Tensor& t = ck.params.at(i);
    if (name == "aux.lat_mu") {
      mu = t.v;
    } else if (name == "aux.lat_sd") {
      sd = t.v;
    } else if (name == "aux.c") {
      c = t.v;
    } else if (name == "aux.c_history") {
      const std::size_t rows = t.shape[0], cols = t.shape.size() > 1 ? t.shape[1] : 0;
      for (std::size_t r = 0; r < rows; ++r)
        hist.emplace_back(t.v.begin() + r * cols, t.v.begin() + (r + 1) * cols);
    } else {
      const std::size_t idx = net_params.add(name, t.shape);
      net_params.at(idx) = t;
      net_params.adam_m(idx) = ck.params.adam_m(i);
      net_params.adam_v(idx) = ck.params.adam_v(i);
      net_params.adam_step(idx) = ck.params.adam_step(i);
    }
  }

  TrainedDenoiser dn{DenoiserNet(dc, std::move(net_params)), sched, std::move(mu), std::move(sd),
                     {}, CommonFeature::restore(std::move(c), std::stod(ck.hparams.at("tau")),
                                                ck.hparams.at("c_frozen") == "1", std::move(hist))};
  return dn;
}

}  // namespace gadiff
