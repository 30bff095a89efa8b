// Acceptance suite: prints one pass/fail line per criterion and exits with
// the number of failures. Pass criterion numbers as arguments to run a
// subset, e.g. `gadiff_acceptance 1 4 6`.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "gadiff/cli_commands.hpp"
#include "gadiff/detector.hpp"
#include "gradcheck.hpp"
#include "metric_oracles.hpp"

using namespace gadiff;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int g_failures = 0;

void run_criterion(const std::set<int>& selected, int id, const std::string& name,
                   const std::function<Outcome()>& fn) {
  if (!selected.empty() && !selected.count(id)) return;
  const auto t0 = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = fn();
  } catch (const std::exception& e) {
    out.pass = false;
    out.detail = std::string("exception: ") + e.what();
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("[%s] criterion %d (%s): %s (%.1fs)\n", out.pass ? "PASS" : "FAIL", id,
              name.c_str(), out.detail.c_str(), secs);
  std::fflush(stdout);
  if (!out.pass) ++g_failures;
}

Matrix randn(std::size_t r, std::size_t c, Rng& rng) {
  Matrix m(r, c);
  for (double& v : m.data()) v = rng.normal();
  return m;
}

fs::path work_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("gadiff_accept_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// ---------------------------------------------------------------- criterion 1

Outcome criterion_gradients() {
  double worst = 0.0;
  std::size_t shapes = 0;
  Rng seeds(20240808);
  std::map<std::string, double> family_worst;
  auto track = [&](const char* family, double err) {
    family_worst[family] = std::max(family_worst[family], err);
    worst = std::max(worst, err);
  };

  // affine / silu / relu chains
  for (int trial = 0; trial < 35; ++trial, ++shapes) {
    Rng rng(seeds.next_u64());
    const std::size_t n = 1 + rng.index(7), fi = 1 + rng.index(8), fo = 1 + rng.index(8);
    Matrix x = randn(n, fi, rng), w = randn(fi, fo, rng), r = randn(n, fo, rng);
    std::vector<double> b(fo);
    for (double& v : b) v = rng.normal();
    const bool use_silu = trial % 2 == 0;
    auto loss = [&] {
      Matrix pre = affine_forward(x, w, b);
      Matrix y = use_silu ? silu(pre) : relu(pre);
      double s = 0.0;
      for (std::size_t i = 0; i < y.size(); ++i) s += r.data()[i] * y.data()[i];
      return s;
    };
    Matrix pre = affine_forward(x, w, b);
    Matrix dy = use_silu ? silu_backward(pre, r) : relu_backward(pre, r);
    Matrix dx, dw;
    std::vector<double> db;
    affine_backward(x, w, dy, &dx, &dw, &db);
    track("affine", gradcheck::worst_matrix_rel_err(x, dx, loss));
    track("affine", gradcheck::worst_matrix_rel_err(w, dw, loss));
    for (std::size_t j = 0; j < fo; ++j)
      track("affine", gradcheck::checked_rel_err(loss, &b[j], db[j]));
  }

  // graph convolutions over random propagation matrices
  for (int trial = 0; trial < 25; ++trial, ++shapes) {
    Rng rng(seeds.next_u64());
    SynthConfig sc;
    sc.nodes = 3 + rng.index(6);
    sc.dim = 2;
    sc.communities = 1 + rng.index(2);
    sc.avg_degree = 3;
    sc.seed = rng.next_u64();
    const AttributedGraph g = synth_graph(sc);
    const SparseMatrix prop = normalize_adjacency(g);
    const std::size_t fi = 1 + rng.index(6), fo = 1 + rng.index(6);
    Matrix x = randn(g.n, fi, rng), w = randn(fi, fo, rng), r = randn(g.n, fo, rng);
    std::vector<double> b(fo);
    for (double& v : b) v = rng.normal();
    auto loss = [&] {
      Matrix y = relu(gcn_forward(prop, x, w, b));
      double s = 0.0;
      for (std::size_t i = 0; i < y.size(); ++i) s += r.data()[i] * y.data()[i];
      return s;
    };
    Matrix pre = gcn_forward(prop, x, w, b);
    Matrix dy = relu_backward(pre, r);
    Matrix dx, dw;
    std::vector<double> db;
    gcn_backward(prop, x, w, dy, &dx, &dw, &db);
    track("gcn", gradcheck::worst_matrix_rel_err(x, dx, loss));
    track("gcn", gradcheck::worst_matrix_rel_err(w, dw, loss));
  }

  // loss heads: plain/squared Frobenius and the dot-product structure head
  for (int trial = 0; trial < 20; ++trial, ++shapes) {
    Rng rng(seeds.next_u64());
    const std::size_t n = 2 + rng.index(6), d = 1 + rng.index(6);
    Matrix x = randn(n, d, rng), xhat = randn(n, d, rng);
    const bool squared = trial % 2 == 0;
    auto loss = [&] { return frobenius_loss(x, xhat, squared).value; };
    const NormLoss nl = frobenius_loss(x, xhat, squared);
    track("frobenius", gradcheck::worst_matrix_rel_err(xhat, nl.d_xhat, loss));

    Matrix z = randn(n, d, rng), r = randn(n, n, rng);
    auto sloss = [&] {
      Matrix ahat = matmul_nt(z, z);
      double s = 0.0;
      for (std::size_t i = 0; i < ahat.size(); ++i) s += r.data()[i] * ahat.data()[i];
      return s;
    };
    Matrix rsym(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) rsym(i, j) = r(i, j) + r(j, i);
    Matrix dz = matmul(rsym, z);
    track("structure-head", gradcheck::worst_matrix_rel_err(z, dz, sloss));
  }

  // denoiser MLPs end to end through the score-matching loss
  for (int trial = 0; trial < 16; ++trial, ++shapes) {
    Rng rng(seeds.next_u64());
    DenoiserConfig dc;
    dc.latent_dim = 1 + rng.index(4);
    dc.hidden = 4 + 2 * rng.index(3);
    dc.depth = 2 + rng.index(3);
    dc.conditioned = trial % 2 == 1;
    dc.seed = rng.next_u64();
    DenoiserNet net(dc);
    NoiseSchedule sched;
    sched.kernel = trial % 4 < 2 ? Kernel::Interp : Kernel::EdmAdditive;
    sched.sigma_max = 10.0;
    const Matrix z0 = randn(6 + rng.index(6), dc.latent_dim, rng);
    std::vector<double> c;
    if (dc.conditioned) {
      c.resize(dc.latent_dim);
      for (double& v : c) v = rng.normal();
    }
    const std::uint64_t probe = rng.next_u64();
    Rng lr(probe);
    DmLossResult res = dm_loss(net, z0, sched, lr, c);
    auto grads = net.backward(res.cache, res.d_eps_hat);
    auto loss = [&] {
      Rng rr(probe);
      return dm_loss(net, z0, sched, rr, c).value;
    };
    track("denoiser", gradcheck::worst_param_rel_err(net.params(), grads, loss));
  }

  // the full autoencoder objective, all alpha regimes
  for (int trial = 0; trial < 12; ++trial, ++shapes) {
    Rng rng(seeds.next_u64());
    SynthConfig sc;
    sc.nodes = 5 + rng.index(4);
    sc.dim = 2 + rng.index(3);
    sc.communities = 2;
    sc.seed = rng.next_u64();
    AttributedGraph g = synth_graph(sc);
    standardize_features(g);
    const SparseMatrix prop = normalize_adjacency(g);
    AeConfig cfg;
    cfg.latent_dim = 1 + rng.index(3);
    cfg.alpha = (trial % 3 == 0) ? 1.0 : (trial % 3 == 1 ? 0.0 : 0.6);
    cfg.squared_norm = trial % 2 == 0;
    cfg.seed = rng.next_u64();
    GraphAutoencoder ae(cfg, g.d);
    const auto step = ae.loss_and_grads(g, prop, nullptr);
    auto loss = [&] { return ae.loss_and_grads(g, prop, nullptr).loss; };
    track("autoencoder", gradcheck::worst_param_rel_err(ae.params(), step.grads, loss));
  }

  std::ostringstream d;
  d << "worst rel err " << worst << " over " << shapes << " random shapes (";
  bool first = true;
  for (const auto& [fam, err] : family_worst) {
    d << (first ? "" : ", ") << fam << " " << err;
    first = false;
  }
  d << ")";
  return {worst <= 1e-4 && shapes >= 100, d.str()};
}

// ---------------------------------------------------------------- criterion 2

Outcome criterion_kernel_moments() {
  NoiseSchedule sched;
  sched.kernel = Kernel::EdmAdditive;
  sched.sigma_max = 80.0;
  const std::size_t n = 100000;
  const Matrix z0(n, 1, 0.75);
  bool ok = true;
  std::ostringstream d;
  int point = 0;
  for (double step : {10.0, 50.0, 125.0, 250.0, 500.0}) {
    Rng rng(1000 + point++);
    const double sigma = sched.sampler_sigma(step);
    const ForwardNoise fn = forward_noise(z0, step, sched, rng);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double diff = fn.z_t(i, 0) - z0(i, 0);
      var += diff * diff;
    }
    var /= static_cast<double>(n);
    const double want = sigma * sigma;
    const double se = want * std::sqrt(2.0 / static_cast<double>(n));
    const bool point_ok = std::abs(var - want) <= 3.0 * se;
    ok = ok && point_ok;
    d << (point > 1 ? ", " : "") << "sigma=" << sigma << " var_err=" << (var - want) / se
      << "se";
  }
  return {ok, d.str()};
}

// ---------------------------------------------------------------- criterion 3

Outcome criterion_score_oracle() {
  NoiseSchedule sched;
  sched.kernel = Kernel::EdmAdditive;
  sched.sigma_max = 10.0;

  Rng data_rng(77);
  const Matrix z_raw = randn(4096, 1, data_rng);

  DmConfig cfg;
  cfg.hidden = 32;
  cfg.depth = 4;
  cfg.epochs = 800;
  cfg.lr = 0.005;
  cfg.patience = 100;
  cfg.seed = 7;
  const TrainedDenoiser dn = train_dm_uncond(z_raw, sched, cfg);

  // perturbed-score check at sigma = 1: the standardized training sample has
  // unit variance, so the convolved density N(0, 1 + sigma^2) has score
  // -z / (1 + sigma^2) = -z / 2
  const double t1 = sched.step_of_sigma(1.0);
  double mae = 0.0;
  int points = 0;
  Matrix grid(81, 1);
  for (int i = 0; i < 81; ++i) grid(i, 0) = -2.0 + 0.05 * i;
  const Matrix eps_hat = dn.net.forward(grid, t1, sched, {});
  for (int i = 0; i < 81; ++i, ++points) {
    const double got_score = -eps_hat(i, 0) / 1.0;
    const double want_score = -grid(i, 0) / 2.0;
    mae += std::abs(got_score - want_score);
  }
  mae /= points;

  // generation from pure noise: moments of the reconstruction match the data
  Rng noise_rng(99);
  Matrix start = randn(10000, 1, noise_rng);
  start *= sched.sigma_max;
  EpsFn eps = [&](const Matrix& z, double t) { return dn.net.forward(z, t, sched, {}); };
  const Matrix gen_std = reverse_sample(start, 500.0, eps, sched, 50, 3, SampleMode::Ode);
  double mean = 0.0, var = 0.0;
  for (double v : gen_std.data()) mean += v;
  mean /= static_cast<double>(gen_std.size());
  for (double v : gen_std.data()) var += (v - mean) * (v - mean);
  var /= static_cast<double>(gen_std.size());
  const double sd = std::sqrt(var);
  // standardized data has mean 0 and unit std by construction
  const bool moments_ok = std::abs(mean) <= 0.05 && std::abs(sd - 1.0) <= 0.05;

  std::ostringstream d;
  d << "score MAE at sigma=1: " << mae << " (<= 0.1), generated mean " << mean << " std " << sd
    << " (within 5%)";
  return {mae <= 0.1 && moments_ok, d.str()};
}

// ---------------------------------------------------------------- criterion 4

Outcome criterion_guidance_identities() {
  SynthConfig sc;
  sc.nodes = 150;
  sc.dim = 8;
  sc.communities = 3;
  sc.seed = 818;
  AttributedGraph g = inject_outliers(synth_graph(sc), 1, 6, 5, 1, 819);
  standardize_features(g);
  const SparseMatrix prop = normalize_adjacency(g);

  AeConfig ac;
  ac.latent_dim = 4;
  ac.epochs = 80;
  ac.alpha = 0.6;
  ac.seed = 5;
  GraphAutoencoder ae(ac, g.d);
  const auto tr = ae.train(g, prop);

  NoiseSchedule sched;
  DmConfig dc;
  dc.hidden = 8;
  dc.epochs = 120;
  dc.seed = 5;
  TrainedDenoiser uncond = train_dm_uncond(tr.embedding.z, sched, dc);
  uncond.cf.freeze();
  const TrainedDenoiser cond = train_dm_cond(tr.embedding.z, sched, dc, uncond.cf, &uncond.net);

  bool ok = true;
  std::ostringstream d;
  for (double t_detect : {100.0, 500.0}) {
    DetectConfig cfg;
    cfg.t_detect = t_detect;
    cfg.trials = 4;
    cfg.sample_steps = 20;
    cfg.seed = 31;

    DetectConfig lam0 = cfg;
    lam0.lambda = 0.0;
    const auto guided0 = detect(g, prop, ae, uncond, cond, lam0, EpsSource::Guided);
    const auto uroute = detect(g, prop, ae, uncond, cond, cfg, EpsSource::Uncond);
    const bool e0 = guided0.scores == uroute.scores && guided0.ranking == uroute.ranking;

    DetectConfig lamm1 = cfg;
    lamm1.lambda = -1.0;
    const auto guided1 = detect(g, prop, ae, uncond, cond, lamm1, EpsSource::Guided);
    const auto croute = detect(g, prop, ae, uncond, cond, cfg, EpsSource::Cond);
    const bool e1 = guided1.scores == croute.scores && guided1.ranking == croute.ranking;

    ok = ok && e0 && e1;
    d << "t=" << t_detect << ": lambda=0 " << (e0 ? "==" : "!=") << " uncond, lambda=-1 "
      << (e1 ? "==" : "!=") << " cond; ";
  }
  d << "(bit-exact score vectors)";
  return {ok, d.str()};
}

// ---------------------------------------------------------------- criterion 5

Outcome criterion_common_feature() {
  // hand-computed two-node softmax
  const Matrix zhat = Matrix::from_rows({{1.0, 0.0}, {0.0, 1.0}});
  const WeightResult wr = compute_weights(zhat, {1.0, 0.0}, 1.0);
  const double e = std::exp(1.0);
  const bool hand_ok = std::abs(wr.w[0] - e / (e + 1.0)) <= 1e-6 &&
                       std::abs(wr.w[1] - 1.0 / (e + 1.0)) <= 1e-6;

  Rng rng(5150);
  std::size_t hull_fail = 0, weight_fail = 0, down_fail = 0;
  const int instances = 1000;
  for (int trial = 0; trial < instances; ++trial) {
    const std::size_t n = 2 + rng.index(10), k = 1 + rng.index(5);
    Matrix z(n, k);
    for (double& v : z.data()) v = rng.normal();
    std::vector<double> c(k);
    for (double& v : c) v = rng.normal();
    const double tau = 0.05 + rng.uniform() * 2.0;

    const WeightResult w = compute_weights(z, c, tau);
    double sum = 0.0;
    bool nonneg = true;
    for (double x : w.w) {
      nonneg = nonneg && x >= 0.0;
      sum += x;
    }
    if (!nonneg || std::abs(sum - 1.0) > 1e-9) ++weight_fail;

    CommonFeature cf = CommonFeature::restore(c, tau, false, {});
    cf.update(z);
    for (std::size_t j = 0; j < k; ++j) {
      double lo = z(0, j), hi = z(0, j);
      for (std::size_t i = 1; i < n; ++i) {
        lo = std::min(lo, z(i, j));
        hi = std::max(hi, z(i, j));
      }
      if (cf.value()[j] < lo - 1e-12 || cf.value()[j] > hi + 1e-12) {
        ++hull_fail;
        break;
      }
    }

    // outlier down-weighting: cluster along a random unit direction plus one
    // orthogonal vector; the orthogonal one stays below uniform weight
    const std::size_t m = 3 + rng.index(28);
    std::vector<double> u = {rng.normal(), rng.normal()};
    const double nu = std::sqrt(u[0] * u[0] + u[1] * u[1]);
    u[0] /= nu;
    u[1] /= nu;
    const std::vector<double> v = {-u[1], u[0]};
    Matrix cluster(m, 2);
    for (std::size_t i = 0; i + 1 < m; ++i) {
      const double s = 0.5 + rng.uniform() * 2.0;
      cluster(i, 0) = s * u[0];
      cluster(i, 1) = s * u[1];
    }
    const double sv = 0.5 + rng.uniform() * 2.0;
    cluster(m - 1, 0) = sv * v[0];
    cluster(m - 1, 1) = sv * v[1];
    const double tau2 = 0.05 + rng.uniform() * 0.95;  // any tau <= 1
    const WeightResult wd = compute_weights(cluster, u, tau2);
    if (!(wd.w[m - 1] < 1.0 / static_cast<double>(m))) ++down_fail;
  }

  std::ostringstream d;
  d << "hand softmax " << (hand_ok ? "ok" : "BAD") << "; over " << instances
    << " instances: weight-simplex fails " << weight_fail << ", hull fails " << hull_fail
    << ", down-weighting fails " << down_fail;
  return {hand_ok && weight_fail == 0 && hull_fail == 0 && down_fail == 0, d.str()};
}

// ---------------------------------------------------------------- criterion 6

Outcome criterion_metric_oracles() {
  Rng rng(6006);
  std::size_t fails = 0;
  const int instances = 1000;
  for (int trial = 0; trial < instances; ++trial) {
    const std::size_t n = 2 + rng.index(49);
    LabeledScores ls;
    ls.scores.resize(n);
    ls.labels.assign(n, 0);
    const bool discrete = trial % 3 == 0;
    for (double& s : ls.scores) s = discrete ? static_cast<double>(rng.index(5)) : rng.normal();
    std::size_t np = 0;
    while (np == 0 || np == n) {
      np = 0;
      for (auto& l : ls.labels) {
        l = rng.uniform() < 0.25 ? 1 : 0;
        np += l;
      }
    }
    const std::size_t k = 1 + rng.index(n);
    if (roc_auc(ls) != metric_oracles::roc_auc(ls)) ++fails;
    if (average_precision(ls) != metric_oracles::average_precision(ls)) ++fails;
    if (recall_at_k(ls, k) != metric_oracles::recall_at_k(ls, k)) ++fails;
    if (auprc(ls) != metric_oracles::auprc(ls)) ++fails;
  }
  std::ostringstream d;
  d << "4 metrics x " << instances << " instances (n <= 50), mismatches: " << fails;
  return {fails == 0, d.str()};
}

// ---------------------------------------------------------- criteria 7 and 8

struct SuiteRun {
  double ae = 0.0;
  double diff_at_T = 0.0;        // unconditional route, pure-noise start (t = T)
  double cond_at_T = 0.0;        // conditional route, pure-noise start
  double guided = 0.0;           // tuned (lambda*, t*) = (0.2, 250)
  double guided_at_T = 0.0;      // lambda* with preservation off (t = T)
  double guided2_at_T = 0.0;     // guided lambda = 2 at t = T (lambda-shape check)
};

// One (graph, seed) evaluation of every component on the synthetic suite:
// 5-community planted partition, camouflaged feature swaps (each outlier
// wears a random other node's features) plus two planted cliques.
SuiteRun suite_run(std::uint64_t graph_seed, std::uint64_t train_seed) {
  SynthConfig sc;
  sc.nodes = 1000;
  sc.dim = 20;
  sc.communities = 5;
  sc.avg_degree = 8.0;
  sc.spread = 2.0;
  sc.noise = 1.0;
  sc.seed = graph_seed;
  AttributedGraph g = inject_outliers(synth_graph(sc), 2, 40, 10, 1, graph_seed + 7);
  standardize_features(g);
  const SparseMatrix prop = normalize_adjacency(g);

  AeConfig ac;
  ac.latent_dim = 8;
  ac.epochs = 300;
  ac.lr = 0.01;
  ac.dropout = 0.3;
  ac.alpha = 0.6;
  ac.seed = train_seed;
  GraphAutoencoder ae(ac, g.d);
  const auto tr = ae.train(g, prop);

  NoiseSchedule sched;  // interp kernel, T = 500
  DmConfig dc;
  dc.hidden = 16;
  dc.epochs = 800;
  dc.lr = 0.005;
  dc.seed = train_seed;
  TrainedDenoiser uncond = train_dm_uncond(tr.embedding.z, sched, dc);
  uncond.cf.freeze();
  const TrainedDenoiser cond = train_dm_cond(tr.embedding.z, sched, dc, uncond.cf, &uncond.net);

  // (lambda*, t*) for this dataset family come from the lambda/t ablation
  // sweep, the same way the per-dataset values in the presets were chosen
  DetectConfig cfg;
  cfg.lambda = 0.2;
  cfg.t_detect = 250.0;
  cfg.sample_steps = 50;
  cfg.trials = 20;
  cfg.seed = train_seed;
  DetectConfig at_T = cfg;
  at_T.t_detect = 500.0;
  DetectConfig strong_at_T = at_T;
  strong_at_T.lambda = 2.0;

  auto auc_of = [&](const std::vector<double>& scores) {
    return roc_auc(LabeledScores{scores, g.labels});
  };

  SuiteRun run;
  run.ae = auc_of(detect_ae_only(g, prop, ae).scores);
  run.diff_at_T = auc_of(detect(g, prop, ae, uncond, cond, at_T, EpsSource::Uncond).scores);
  run.cond_at_T = auc_of(detect(g, prop, ae, uncond, cond, at_T, EpsSource::Cond).scores);
  run.guided = auc_of(detect(g, prop, ae, uncond, cond, cfg, EpsSource::Guided).scores);
  run.guided_at_T = auc_of(detect(g, prop, ae, uncond, cond, at_T, EpsSource::Guided).scores);
  run.guided2_at_T = auc_of(detect(g, prop, ae, uncond, cond, strong_at_T, EpsSource::Guided).scores);
  return run;
}

struct SuiteResult {
  std::vector<SuiteRun> runs;
};

const SuiteResult& suite() {
  static SuiteResult result = [] {
    SuiteResult r;
    for (std::uint64_t graph = 0; graph < 5; ++graph)
      for (std::uint64_t seed = 1; seed <= 4; ++seed) {
        r.runs.push_back(suite_run(3000 + graph, seed));
        const SuiteRun& x = r.runs.back();
        std::printf("  suite graph %llu seed %llu: ae %.4f diff@T %.4f cond@T %.4f "
                    "guided %.4f guided@T %.4f lam2@T %.4f\n",
                    static_cast<unsigned long long>(graph),
                    static_cast<unsigned long long>(seed), x.ae, x.diff_at_T, x.cond_at_T,
                    x.guided, x.guided_at_T, x.guided2_at_T);
        std::fflush(stdout);
      }
    return r;
  }();
  return result;
}

Outcome criterion_component_ordering() {
  const SuiteResult& s = suite();
  std::vector<double> ae, diff, cond, gad;
  for (const auto& r : s.runs) {
    ae.push_back(r.ae);
    diff.push_back(r.diff_at_T);
    cond.push_back(r.cond_at_T);
    gad.push_back(r.guided);
  }
  const double m_ae = mean_of(ae), m_diff = mean_of(diff), m_cond = mean_of(cond),
               m_gad = mean_of(gad);
  const double best_other = std::max({m_ae, m_diff, m_cond});
  std::ostringstream d;
  d << "mean ROC-AUC over " << s.runs.size() << " runs: guided " << m_gad << " vs ae " << m_ae
    << ", diff " << m_diff << ", cond-diff " << m_cond;
  return {m_gad > best_other, d.str()};
}

Outcome criterion_real_or_sweep() {
  // Books/Disney reproduction when the datasets are available; otherwise the
  // documented replacement: the lambda and t sweep shape on the synthetic
  // suite (lambda = 2 beats lambda = 0; some t < T beats t = T).
  const char* env = std::getenv("GADIFF_DATA");
  const fs::path data_root = env ? fs::path(env) : fs::path("data");
  const bool have_real =
      fs::exists(data_root / "books" / "edges.tsv") && fs::exists(data_root / "disney" / "edges.tsv");

  if (have_real) {
    std::ostringstream d;
    bool all_ok = true;
    const struct {
      const char* name;
      double target;
    } sets[] = {{"books", 0.664}, {"disney", 0.545}};
    for (const auto& setinfo : sets) {
      RunConfig cfg;
      cfg.apply_preset(setinfo.name);
      cfg.set("data.dir", (data_root / setinfo.name).string());
      cfg.set("seeds", "20");
      const auto run = work_dir(std::string("real_") + setinfo.name);
      const PipelineResult res = cmd_pipeline(cfg, run.string(), false, "guided");
      std::vector<double> aucs;
      for (const auto& m : res.per_seed) aucs.push_back(m.roc_auc);
      const double mean = mean_of(aucs);
      const bool ok = std::abs(mean - setinfo.target) <= 0.05;
      all_ok = all_ok && ok;
      d << setinfo.name << " mean AUC " << mean << " target " << setinfo.target << "+-0.05; ";
    }
    return {all_ok, d.str()};
  }

  const SuiteResult& s = suite();
  std::vector<double> lam0, lam2, at_t, at_T;
  for (const auto& r : s.runs) {
    lam0.push_back(r.diff_at_T);     // lambda = 0 (the unconditional route)
    lam2.push_back(r.guided2_at_T);  // lambda = 2, same start
    at_t.push_back(r.guided);
    at_T.push_back(r.guided_at_T);
  }
  const double m0 = mean_of(lam0), m2 = mean_of(lam2), mt = mean_of(at_t), mT = mean_of(at_T);
  std::ostringstream d;
  d << "datasets not present; sweep shape: lambda=2 " << m2 << " vs lambda=0 " << m0
    << " (pure-noise start, where guidance acts); t=250 " << mt << " vs t=T " << mT
    << " (at the operating lambda)";
  return {m2 > m0 && mt > mT, d.str()};
}

// ---------------------------------------------------------------- criterion 9

Outcome criterion_scaling() {
  RunConfig cfg;
  cfg.set("ae.latent_dim", "8");
  cfg.set("dm.hidden", "16");
  const auto out = work_dir("bench");
  const BenchResult b = cmd_bench(cfg, {100, 500, 1000, 5000}, out.string());

  double sample_1000 = 0.0;
  bool alpha1_clean = true;
  for (const auto& r : b.rows) {
    if (r.nodes == 1000) sample_1000 = r.sample_s;
    alpha1_clean = alpha1_clean && r.alpha1_struct_rows == 0;
  }
  std::ostringstream d;
  d << "dm train+sample ~ n^" << b.dm_fit_exponent << " (<= 1.2), 50-step sampling at n=1000: "
    << sample_1000 << "s (< 2s), alpha=1 structure rows: " << (alpha1_clean ? "0" : "NONZERO");
  return {b.dm_fit_exponent <= 1.2 && sample_1000 < 2.0 && alpha1_clean, d.str()};
}

// --------------------------------------------------------------- criterion 10

Outcome criterion_determinism() {
  const auto data = work_dir("det_data");
  GenOptions gen;
  gen.base.nodes = 300;
  gen.base.dim = 10;
  gen.base.communities = 3;
  gen.base.seed = 41;
  gen.n_struct = 1;
  gen.clique = 6;
  gen.n_ctx = 12;
  gen.swap_pool = 1;
  gen.out_dir = data.string();
  cmd_gen(gen);

  RunConfig cfg;
  cfg.set("data.dir", data.string());
  cfg.set("ae.latent_dim", "4");
  cfg.set("ae.epochs", "100");
  cfg.set("ae.alpha", "0.6");
  cfg.set("dm.hidden", "8");
  cfg.set("dm.epochs", "150");
  cfg.set("detect.trials", "5");
  cfg.set("detect.sample_steps", "20");
  cfg.set("seed", "17");

  const auto run1 = work_dir("det_run1");
  const auto run2 = work_dir("det_run2");
  cmd_pipeline(cfg, run1.string(), false, "guided");
  cmd_pipeline(cfg, run2.string(), false, "guided");

  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  const std::string s1 = slurp(run1 / "seed_17" / "scores.csv");
  const std::string s2 = slurp(run2 / "seed_17" / "scores.csv");
  const bool ok = !s1.empty() && s1 == s2;
  std::ostringstream d;
  d << "scores.csv " << (ok ? "byte-identical" : "DIFFERS") << " across full pipeline reruns ("
    << s1.size() << " bytes)";
  return {ok, d.str()};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  run_criterion(selected, 1, "gradient-correctness", criterion_gradients);
  run_criterion(selected, 2, "diffusion-kernel-moments", criterion_kernel_moments);
  run_criterion(selected, 3, "analytic-score-oracle", criterion_score_oracle);
  run_criterion(selected, 4, "guidance-identities", criterion_guidance_identities);
  run_criterion(selected, 5, "common-feature-mechanics", criterion_common_feature);
  run_criterion(selected, 6, "metric-oracles", criterion_metric_oracles);
  run_criterion(selected, 7, "component-ablation-ordering", criterion_component_ordering);
  run_criterion(selected, 8, "real-data-or-sweep-shape", criterion_real_or_sweep);
  run_criterion(selected, 9, "performance-scaling", criterion_scaling);
  run_criterion(selected, 10, "pipeline-determinism", criterion_determinism);

  if (g_failures == 0)
    std::printf("acceptance: all criteria passed\n");
  else
    std::printf("acceptance: %d criterion(s) FAILED\n", g_failures);
  return g_failures;
}
