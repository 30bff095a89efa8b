#include <doctest.h>

#include <cmath>
#include <numeric>

#include "gadiff/detector.hpp"

using namespace gadiff;

namespace {

struct Fixture {
  AttributedGraph g;
  SparseMatrix prop;
  GraphAutoencoder ae;
  TrainedDenoiser uncond;
  TrainedDenoiser cond;
};

Fixture build_fixture() {
  SynthConfig sc;
  sc.nodes = 60;
  sc.dim = 6;
  sc.communities = 3;
  sc.seed = 404;
  AttributedGraph g = inject_outliers(synth_graph(sc), 1, 3, 4, 30, 505);
  standardize_features(g);
  SparseMatrix prop = normalize_adjacency(g);

  AeConfig ac;
  ac.latent_dim = 4;
  ac.epochs = 60;
  ac.alpha = 0.6;
  ac.dropout = 0.1;
  ac.seed = 3;
  GraphAutoencoder ae(ac, g.d);
  auto tr = ae.train(g, prop);

  NoiseSchedule sched;
  sched.kernel = Kernel::Interp;
  DmConfig dc;
  dc.hidden = 8;
  dc.epochs = 80;
  dc.seed = 3;
  TrainedDenoiser uncond = train_dm_uncond(tr.embedding.z, sched, dc);
  uncond.cf.freeze();
  TrainedDenoiser cond = train_dm_cond(tr.embedding.z, sched, dc, uncond.cf, &uncond.net);

  return Fixture{std::move(g), std::move(prop), std::move(ae), std::move(uncond),
                 std::move(cond)};
}

const Fixture& fixture() {
  static Fixture f = build_fixture();
  return f;
}

DenoiserNet constant_net(std::size_t k, bool conditioned, double value) {
  DenoiserConfig dc;
  dc.latent_dim = k;
  dc.hidden = 4;
  dc.conditioned = conditioned;
  DenoiserNet net(dc);
  for (std::size_t i = 0; i < net.params().count(); ++i)
    for (double& v : net.params().at(i).v) v = 0.0;
  const std::string last_bias = "l" + std::to_string(dc.depth - 1) + ".b";
  for (double& v : net.params().at(last_bias).v) v = value;
  return net;
}

}  // namespace

TEST_CASE("guided_eps: scalar arithmetic with constant networks") {
  NoiseSchedule sched;
  TrainedDenoiser u{constant_net(1, false, 1.0), sched, {0.0}, {1.0}, {}, {}};
  TrainedDenoiser c{constant_net(1, true, 0.4), sched, {0.0}, {1.0}, {}, {}};
  c.cf = CommonFeature::restore({0.0}, 1.0, true, {});
  const Matrix z_t(3, 1, 0.5);
  const Matrix out = guided_eps(z_t, 100.0, c.cf.value(), 2.0, u, c);
  for (std::size_t i = 0; i < out.size(); ++i)
    CHECK(out.data()[i] == doctest::Approx(3.0 * 1.0 - 2.0 * 0.4));  // 2.2
}

TEST_CASE("guided_eps: lambda endpoints collapse bit-exactly") {
  const Fixture& f = fixture();
  Rng rng(17);
  Matrix z_t(f.g.n, 4);
  for (double& v : z_t.data()) v = rng.normal();
  const double t = 250.0;
  const auto& c = f.cond.cf.value();

  const Matrix eu = f.uncond.net.forward(z_t, t, f.uncond.sched, {});
  const Matrix ec = f.cond.net.forward(z_t, t, f.cond.sched, c);
  const Matrix lam0 = guided_eps(z_t, t, c, 0.0, f.uncond, f.cond);
  const Matrix lamm1 = guided_eps(z_t, t, c, -1.0, f.uncond, f.cond);
  CHECK(lam0.data() == eu.data());    // bitwise
  CHECK(lamm1.data() == ec.data());   // bitwise
}

TEST_CASE("guided_eps rejects mismatched denoisers") {
  const Fixture& f = fixture();
  CHECK_THROWS(guided_eps(Matrix(2, 4), 10.0, f.cond.cf.value(), 1.0, f.cond, f.cond));

  NoiseSchedule other = f.cond.sched;
  other.t_steps = 100;
  TrainedDenoiser wrong = f.cond;
  wrong.sched = other;
  CHECK_THROWS(guided_eps(Matrix(2, 4), 10.0, f.cond.cf.value(), 1.0, f.uncond, wrong));
}

TEST_CASE("detect at t_detect=0 equals the plain autoencoder detector bit-for-bit") {
  const Fixture& f = fixture();
  DetectConfig cfg;
  cfg.t_detect = 0;
  cfg.trials = 3;
  cfg.seed = 11;
  const ScoreReport diff = detect(f.g, f.prop, f.ae, f.uncond, f.cond, cfg);
  const ScoreReport plain = detect_ae_only(f.g, f.prop, f.ae);
  CHECK(diff.scores == plain.scores);
  CHECK(diff.ranking == plain.ranking);
}

TEST_CASE("detect: lambda endpoints equal the single-model routes") {
  const Fixture& f = fixture();
  DetectConfig cfg;
  cfg.trials = 2;
  cfg.seed = 21;
  cfg.sample_steps = 12;

  DetectConfig lam0 = cfg;
  lam0.lambda = 0.0;
  const auto a = detect(f.g, f.prop, f.ae, f.uncond, f.cond, lam0, EpsSource::Guided);
  const auto b = detect(f.g, f.prop, f.ae, f.uncond, f.cond, cfg, EpsSource::Uncond);
  CHECK(a.scores == b.scores);

  DetectConfig lamm1 = cfg;
  lamm1.lambda = -1.0;
  const auto c = detect(f.g, f.prop, f.ae, f.uncond, f.cond, lamm1, EpsSource::Guided);
  const auto d = detect(f.g, f.prop, f.ae, f.uncond, f.cond, cfg, EpsSource::Cond);
  CHECK(c.scores == d.scores);
}

TEST_CASE("detect validates inputs") {
  const Fixture& f = fixture();
  DetectConfig cfg;
  cfg.t_detect = 1e9;
  CHECK_THROWS(detect(f.g, f.prop, f.ae, f.uncond, f.cond, cfg));
  cfg = DetectConfig{};
  cfg.trials = 0;
  CHECK_THROWS(detect(f.g, f.prop, f.ae, f.uncond, f.cond, cfg));

  TrainedDenoiser unfrozen = f.uncond;
  unfrozen.cf = CommonFeature::restore(f.uncond.cf.value(), 1.0, false, {});
  CHECK_THROWS(detect(f.g, f.prop, f.ae, unfrozen, f.cond, DetectConfig{}));
}

TEST_CASE("detect produces a valid ranking and reproducible scores") {
  const Fixture& f = fixture();
  DetectConfig cfg;
  cfg.trials = 4;
  cfg.sample_steps = 12;
  cfg.seed = 31;
  const ScoreReport r1 = detect(f.g, f.prop, f.ae, f.uncond, f.cond, cfg);
  const ScoreReport r2 = detect(f.g, f.prop, f.ae, f.uncond, f.cond, cfg);
  CHECK(r1.scores == r2.scores);  // same seed, bitwise

  std::vector<std::uint32_t> sorted_ids = r1.ranking;
  std::sort(sorted_ids.begin(), sorted_ids.end());
  for (std::size_t i = 0; i < sorted_ids.size(); ++i) CHECK(sorted_ids[i] == i);
  for (std::size_t i = 1; i < r1.ranking.size(); ++i)
    CHECK(r1.scores[r1.ranking[i - 1]] >= r1.scores[r1.ranking[i]]);
  for (double s : r1.scores) {
    CHECK(std::isfinite(s));
    CHECK(s >= 0.0);
  }
}

TEST_CASE("ranking depends only on score order") {
  std::vector<double> scores{0.3, 1.7, 0.3, 2.2, 0.0};
  const auto base = ranking_of(scores);
  std::vector<double> scaled = scores;
  for (double& s : scaled) s *= 37.5;
  CHECK(ranking_of(scaled) == base);
  // ties break by node id
  CHECK(base == std::vector<std::uint32_t>{3, 1, 0, 2, 4});
}

TEST_CASE("averaging more trials shrinks the spread between disjoint halves") {
  const Fixture& f = fixture();
  DetectConfig cfg;
  cfg.trials = 16;
  cfg.sample_steps = 10;
  cfg.seed = 41;
  cfg.mode = SampleMode::Sde;  // trial noise matters in sde mode
  const ScoreReport r = detect(f.g, f.prop, f.ae, f.uncond, f.cond, cfg);

  auto mean_rows = [&](int lo, int hi) {
    std::vector<double> m(f.g.n, 0.0);
    for (int t = lo; t < hi; ++t)
      for (std::size_t i = 0; i < f.g.n; ++i) m[i] += r.per_trial(t, i);
    for (double& v : m) v /= static_cast<double>(hi - lo);
    return m;
  };
  auto gap = [&](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return s / static_cast<double>(a.size());
  };
  const double single = gap(mean_rows(0, 1), mean_rows(1, 2));
  const double eights = gap(mean_rows(0, 8), mean_rows(8, 16));
  CHECK(eights < single);
}

TEST_CASE("score pipeline is permutation-equivariant given mapped noise") {
  const Fixture& f = fixture();
  const double t_detect = 100.0;
  const NoiseSchedule& sched = f.uncond.sched;

  // base run with explicit noise
  const Matrix z = standardize_rows(f.ae.encode(f.prop, f.g.features), f.uncond.lat_mu,
                                    f.uncond.lat_sd);
  Rng rng(61);
  Matrix eps(z.rows(), z.cols());
  for (double& v : eps.data()) v = rng.normal();
  const double dw = sched.data_weight(t_detect), nw = sched.noise_weight(t_detect);
  Matrix z_t(z.rows(), z.cols());
  for (std::size_t i = 0; i < z.size(); ++i)
    z_t.data()[i] = dw * z.data()[i] + nw * eps.data()[i];
  const auto& c = f.cond.cf.value();
  EpsFn guided = [&](const Matrix& zz, double t) {
    return guided_eps(zz, t, c, 1.5, f.uncond, f.cond);
  };
  const Matrix z0 = destandardize_rows(
      reverse_sample(z_t, t_detect, guided, sched, 10, 0, SampleMode::Ode), f.uncond.lat_mu,
      f.uncond.lat_sd);
  const auto base_scores = f.ae.score_nodes(f.g, f.prop, z0).per_node;

  // permuted run: same models, permuted graph, noise mapped through perm
  std::vector<std::uint32_t> perm(f.g.n);
  std::iota(perm.begin(), perm.end(), 0u);
  Rng prng(71);
  for (std::size_t i = f.g.n; i > 1; --i) std::swap(perm[i - 1], perm[prng.index(i)]);
  const AttributedGraph gp = permute_graph(f.g, perm);
  const SparseMatrix prop_p = normalize_adjacency(gp);

  const Matrix zp = standardize_rows(f.ae.encode(prop_p, gp.features), f.uncond.lat_mu,
                                     f.uncond.lat_sd);
  Matrix zp_t(zp.rows(), zp.cols());
  for (std::size_t i = 0; i < f.g.n; ++i)
    for (std::size_t j = 0; j < zp.cols(); ++j)
      zp_t(perm[i], j) = dw * zp(perm[i], j) + nw * eps(i, j);
  const Matrix zp0 = destandardize_rows(
      reverse_sample(zp_t, t_detect, guided, sched, 10, 0, SampleMode::Ode), f.uncond.lat_mu,
      f.uncond.lat_sd);
  const auto perm_scores = f.ae.score_nodes(gp, prop_p, zp0).per_node;

  for (std::size_t i = 0; i < f.g.n; ++i)
    CHECK(perm_scores[perm[i]] == doctest::Approx(base_scores[i]).epsilon(1e-7));
}

TEST_CASE("ablate emits consistent component and sweep rows") {
  const Fixture& f = fixture();
  DetectConfig cfg;
  cfg.trials = 2;
  cfg.sample_steps = 8;
  cfg.seed = 51;
  cfg.lambda = 1.5;
  const auto rows = ablate(f.g, f.prop, f.ae, f.uncond, f.cond, cfg, {0.0, -1.0, 1.5},
                           {100.0, 500.0});
  REQUIRE(rows.size() == 4 + 3 + 2);

  auto find = [&](const std::string& kind, const std::string& label,
                  double lam) -> const AblationRow& {
    for (const auto& r : rows)
      if (r.kind == kind && r.label == label && r.lambda == lam) return r;
    REQUIRE(false);
    return rows[0];
  };
  // sweep endpoints coincide with the single-model component rows exactly
  CHECK(find("lambda", "lambda", 0.0).scores == find("component", "diff", 0.0).scores);
  CHECK(find("lambda", "lambda", -1.0).scores ==
        find("component", "cond-diff", -1.0).scores);
  // the swept lambda equal to the configured one reproduces the guided row
  CHECK(find("lambda", "lambda", 1.5).scores == find("component", "guided", 1.5).scores);
}
