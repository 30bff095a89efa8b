#include "gadiff/cli_commands.hpp"

#include <sys/resource.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace gadiff {

namespace fs = std::filesystem;

namespace {

double now_s() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

double peak_rss_mb() {
  rusage ru{};
  getrusage(RUSAGE_SELF, &ru);
  return static_cast<double>(ru.ru_maxrss) / 1024.0;  // ru_maxrss is KiB on Linux
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

AeConfig ae_config_of(const RunConfig& cfg) {
  AeConfig ac;
  ac.latent_dim = static_cast<std::size_t>(cfg.get_i("ae.latent_dim"));
  ac.hidden_dim = static_cast<std::size_t>(cfg.get_i("ae.hidden_dim"));
  ac.epochs = static_cast<std::size_t>(cfg.get_i("ae.epochs"));
  ac.dropout = cfg.get_f("ae.dropout");
  ac.lr = cfg.get_f("ae.lr");
  ac.alpha = cfg.get_f("ae.alpha");
  ac.squared_norm = cfg.get_b("ae.squared_norm");
  ac.seed = static_cast<std::uint64_t>(cfg.get_i("seed"));
  return ac;
}

NoiseSchedule schedule_of(const RunConfig& cfg) {
  NoiseSchedule s;
  s.t_steps = static_cast<int>(cfg.get_i("dm.t_steps"));
  s.kernel = kernel_from_string(cfg.get("dm.kernel"));
  s.sigma_max = cfg.get_f("dm.sigma_max");
  return s;
}

DmConfig dm_config_of(const RunConfig& cfg) {
  DmConfig dc;
  dc.hidden = static_cast<std::size_t>(cfg.get_i("dm.hidden"));
  dc.depth = static_cast<std::size_t>(cfg.get_i("dm.depth"));
  dc.epochs = static_cast<std::size_t>(cfg.get_i("dm.epochs"));
  dc.lr = cfg.get_f("dm.lr");
  dc.patience = static_cast<std::size_t>(cfg.get_i("dm.patience"));
  dc.min_delta = cfg.get_f("dm.min_delta");
  dc.tau = cfg.get_f("dm.tau");
  dc.seed = static_cast<std::uint64_t>(cfg.get_i("seed"));
  return dc;
}

DetectConfig detect_config_of(const RunConfig& cfg) {
  DetectConfig dc;
  dc.lambda = cfg.get_f("detect.lambda");
  dc.t_detect = cfg.get_f("detect.t_detect");
  dc.sample_steps = static_cast<int>(cfg.get_i("detect.sample_steps"));
  dc.mode = sample_mode_from_string(cfg.get("detect.mode"));
  dc.seed = static_cast<std::uint64_t>(cfg.get_i("seed"));
  dc.trials = static_cast<int>(cfg.get_i("detect.trials"));
  return dc;
}

AttributedGraph load_data(const RunConfig& cfg) {
  const std::string dir = cfg.get("data.dir");
  if (dir.empty()) throw std::invalid_argument("data.dir is not set");
  return load_graph(dir, cfg.get_b("data.standardize"));
}

void write_metrics_files(const std::string& out_dir, const std::string& dataset,
                         const std::string& method, std::uint64_t seed, const MetricSummary& m) {
  fs::create_directories(out_dir);
  {
    std::ofstream out(fs::path(out_dir) / "metrics.txt");
    out << "roc_auc = " << fmt(m.roc_auc) << "\n"
        << "average_precision = " << fmt(m.average_precision) << "\n"
        << "recall_at_k = " << fmt(m.recall_at_k) << "\n"
        << "auprc = " << fmt(m.auprc) << "\n";
  }
  const fs::path csv = fs::path(out_dir) / "metrics.csv";
  const bool fresh = !fs::exists(csv);
  std::ofstream out(csv, std::ios::app);
  if (fresh) out << "dataset,method,seed,roc_auc,average_precision,recall_at_k,auprc\n";
  out << dataset << ',' << method << ',' << seed << ',' << fmt(m.roc_auc) << ','
      << fmt(m.average_precision) << ',' << fmt(m.recall_at_k) << ',' << fmt(m.auprc) << "\n";
}

}  // namespace

void write_scores_csv(const std::string& path, const ScoreReport& rep) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "node_id,score,rank\n";
  std::vector<std::size_t> rank(rep.scores.size());
  for (std::size_t r = 0; r < rep.ranking.size(); ++r) rank[rep.ranking[r]] = r + 1;
  for (std::size_t i = 0; i < rep.scores.size(); ++i)
    out << i << ',' << fmt(rep.scores[i]) << ',' << rank[i] << "\n";
}

std::vector<double> read_scores_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::string line;
  std::getline(in, line);  // header
  std::vector<double> scores;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 + 1);
    scores.push_back(std::stod(line.substr(c1 + 1, c2 - c1 - 1)));
  }
  return scores;
}

std::uint64_t file_content_hash(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot hash " + path);
  std::uint64_t h = 14695981039346656037ULL;
  char buf[4096];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ULL;
    }
  }
  return h;
}

GenSummary cmd_gen(const GenOptions& opt) {
  if (opt.out_dir.empty()) throw std::invalid_argument("gen: output directory required");
  AttributedGraph base = synth_graph(opt.base);
  AttributedGraph g =
      inject_outliers(base, opt.n_struct, opt.n_ctx, opt.clique, opt.swap_pool, opt.base.seed);
  save_graph(g, opt.out_dir);

  GenSummary s;
  s.nodes = g.n;
  s.edges = g.edges.size();
  s.dim = g.d;
  s.outliers = g.num_outliers();
  s.ratio = static_cast<double>(s.outliers) / static_cast<double>(g.n);

  std::ofstream meta(fs::path(opt.out_dir) / "gen_meta.txt");
  meta << "seed = " << opt.base.seed << "\n"
       << "nodes = " << s.nodes << "\n"
       << "edges = " << s.edges << "\n"
       << "dim = " << s.dim << "\n"
       << "communities = " << opt.base.communities << "\n"
       << "avg_degree = " << fmt(opt.base.avg_degree) << "\n"
       << "mix = " << fmt(opt.base.mix) << "\n"
       << "spread = " << fmt(opt.base.spread) << "\n"
       << "noise = " << fmt(opt.base.noise) << "\n"
       << "n_struct = " << opt.n_struct << "\n"
       << "clique = " << opt.clique << "\n"
       << "n_ctx = " << opt.n_ctx << "\n"
       << "swap_pool = " << opt.swap_pool << "\n"
       << "outliers = " << s.outliers << "\n"
       << "ratio = " << fmt(s.ratio) << "\n";

  std::cout << "gen: n=" << s.nodes << " m=" << s.edges << " d=" << s.dim
            << " ratio=" << s.ratio << "\n";
  return s;
}

std::string cmd_train_ae(const RunConfig& cfg, const std::string& out_path) {
  const AttributedGraph g = load_data(cfg);
  const SparseMatrix prop = normalize_adjacency(g);
  GraphAutoencoder ae(ae_config_of(cfg), g.d);
  auto res = ae.train(g, prop);
  std::cout << "train-ae: epochs=" << res.epoch_loss.size() << " loss_first="
            << res.epoch_loss.front() << " loss_last=" << res.epoch_loss.back() << "\n";
  ae.save(out_path);
  return out_path;
}

std::string cmd_train_dm(const RunConfig& cfg, const std::string& ae_path,
                         const std::string& kind, const std::string& uncond_path,
                         const std::string& out_path) {
  const AttributedGraph g = load_data(cfg);
  const SparseMatrix prop = normalize_adjacency(g);
  GraphAutoencoder ae = GraphAutoencoder::load(ae_path);
  const Matrix z = ae.encode(prop, g.features);
  const NoiseSchedule sched = schedule_of(cfg);
  const DmConfig dc = dm_config_of(cfg);

  TrainedDenoiser dn = [&] {
    if (kind == "uncond") {
      TrainedDenoiser d = train_dm_uncond(z, sched, dc);
      d.cf.freeze();
      return d;
    }
    if (kind == "cond") {
      if (uncond_path.empty())
        throw std::invalid_argument("train-dm cond requires the unconditional checkpoint");
      TrainedDenoiser u = load_denoiser(uncond_path);
      if (!u.cf.frozen()) throw std::runtime_error("unconditional common feature is not frozen");
      return train_dm_cond(z, sched, dc, u.cf, &u.net);
    }
    throw std::invalid_argument("train-dm kind must be uncond or cond");
  }();

  std::cout << "train-dm(" << kind << "): epochs=" << dn.epoch_loss.size()
            << " loss_first=" << dn.epoch_loss.front() << " loss_last=" << dn.epoch_loss.back()
            << "\n";
  save_denoiser(out_path, dn);
  return out_path;
}

DetectOutput cmd_detect(const RunConfig& cfg, const std::string& ae_path,
                        const std::string& uncond_path, const std::string& cond_path,
                        const std::string& component, const std::string& out_dir) {
  const AttributedGraph g = load_data(cfg);
  const SparseMatrix prop = normalize_adjacency(g);
  GraphAutoencoder ae = GraphAutoencoder::load(ae_path);
  fs::create_directories(out_dir);

  DetectOutput out;
  if (component == "ae") {
    out.report = detect_ae_only(g, prop, ae);
  } else {
    TrainedDenoiser uncond = load_denoiser(uncond_path);
    TrainedDenoiser cond = load_denoiser(cond_path);
    const DetectConfig dc = detect_config_of(cfg);
    out.report = detect(g, prop, ae, uncond, cond, dc, eps_source_from_string(component));
  }
  out.scores_path = (fs::path(out_dir) / "scores.csv").string();
  write_scores_csv(out.scores_path, out.report);
  return out;
}

std::optional<MetricSummary> cmd_eval(const std::string& scores_path, const std::string& data_dir,
                                      const std::string& out_dir, const std::string& dataset,
                                      const std::string& method, std::uint64_t seed) {
  if (!fs::exists(fs::path(data_dir) / "labels.csv")) return std::nullopt;
  const AttributedGraph g = load_graph(data_dir, false);
  LabeledScores ls;
  ls.scores = read_scores_csv(scores_path);
  ls.labels = g.labels;
  const MetricSummary m = all_metrics(ls);
  write_metrics_files(out_dir, dataset, method, seed, m);
  return m;
}

PipelineResult cmd_pipeline(const RunConfig& cfg, const std::string& run_dir, bool resume,
                            const std::string& component) {
  fs::create_directories(run_dir);
  const std::string data_dir = cfg.get("data.dir");
  const std::uint64_t cfg_hash = cfg.hash();
  const std::uint64_t data_hash = file_content_hash((fs::path(data_dir) / "edges.tsv").string()) ^
                                  file_content_hash((fs::path(data_dir) / "features.csv").string());

  const fs::path manifest = fs::path(run_dir) / "manifest.txt";
  if (resume && fs::exists(manifest)) {
    std::ifstream in(manifest);
    std::string line;
    while (std::getline(in, line)) {
      std::stringstream ss(line);
      std::string key, eq, val;
      ss >> key >> eq >> val;
      if (key == "config_hash" && val != std::to_string(cfg_hash))
        throw std::runtime_error("resume: config changed; delete the run directory");
      if (key == "data_hash" && val != std::to_string(data_hash))
        throw std::runtime_error("resume: dataset changed; delete the run directory");
    }
  }

  PipelineResult result;
  std::map<std::string, double> stage_total;
  const long n_seeds = cfg.get_i("seeds");
  const long base_seed = cfg.get_i("seed");
  const bool need_dm = component != "ae";

  for (long s = 0; s < n_seeds; ++s) {
    RunConfig scfg = cfg;
    scfg.set("seed", std::to_string(base_seed + s));
    const fs::path sdir = fs::path(run_dir) / ("seed_" + std::to_string(base_seed + s));
    fs::create_directories(sdir);

    auto stage = [&](const std::string& name, const std::string& product,
                     const std::function<void()>& fn) {
      if (resume && !product.empty() && fs::exists(product)) {
        std::cout << "pipeline[" << name << "]: reusing " << product << "\n";
        return;
      }
      const double t0 = now_s();
      fn();
      stage_total[name] += now_s() - t0;
    };

    const std::string ae_path = (sdir / "ae.ckpt").string();
    const std::string un_path = (sdir / "dm_uncond.ckpt").string();
    const std::string co_path = (sdir / "dm_cond.ckpt").string();
    const std::string scores_path = (sdir / "scores.csv").string();

    stage("train_ae", ae_path, [&] { cmd_train_ae(scfg, ae_path); });
    if (need_dm) {
      stage("train_dm_uncond", un_path, [&] { cmd_train_dm(scfg, ae_path, "uncond", "", un_path); });
      stage("train_dm_cond", co_path, [&] { cmd_train_dm(scfg, ae_path, "cond", un_path, co_path); });
    }
    stage("detect", scores_path,
          [&] { cmd_detect(scfg, ae_path, un_path, co_path, component, sdir.string()); });

    double t0 = now_s();
    auto metrics = cmd_eval(scores_path, data_dir, sdir.string(), data_dir, component,
                            static_cast<std::uint64_t>(base_seed + s));
    stage_total["eval"] += now_s() - t0;
    if (metrics) result.per_seed.push_back(*metrics);
    result.scores_paths.push_back(scores_path);
  }

  {
    std::ofstream out(manifest);
    out << "config_hash = " << cfg_hash << "\n";
    out << "data_hash = " << data_hash << "\n";
    out << "component = " << component << "\n";
    out << "seeds = " << n_seeds << "\n";
    for (const auto& [k, v] : stage_total) out << "stage_seconds." << k << " = " << fmt(v) << "\n";
  }
  cfg.write((fs::path(run_dir) / "config.txt").string());

  for (const auto& [k, v] : stage_total) result.stage_seconds.emplace_back(k, v);

  if (!result.per_seed.empty()) {
    auto mean_std = [&](auto get) {
      double m = 0.0, v = 0.0;
      for (const auto& x : result.per_seed) m += get(x);
      m /= static_cast<double>(result.per_seed.size());
      for (const auto& x : result.per_seed) v += (get(x) - m) * (get(x) - m);
      v = result.per_seed.size() > 1 ? std::sqrt(v / (result.per_seed.size() - 1.0)) : 0.0;
      return std::make_pair(m, v);
    };
    const auto auc = mean_std([](const MetricSummary& m) { return m.roc_auc; });
    const auto ap = mean_std([](const MetricSummary& m) { return m.average_precision; });
    const auto rk = mean_std([](const MetricSummary& m) { return m.recall_at_k; });
    const auto pr = mean_std([](const MetricSummary& m) { return m.auprc; });
    std::ofstream out(fs::path(run_dir) / "metrics_summary.txt");
    out << "seeds = " << result.per_seed.size() << "\n"
        << "roc_auc_mean = " << fmt(auc.first) << "\nroc_auc_std = " << fmt(auc.second) << "\n"
        << "average_precision_mean = " << fmt(ap.first) << "\naverage_precision_std = "
        << fmt(ap.second) << "\n"
        << "recall_at_k_mean = " << fmt(rk.first) << "\nrecall_at_k_std = " << fmt(rk.second)
        << "\n"
        << "auprc_mean = " << fmt(pr.first) << "\nauprc_std = " << fmt(pr.second) << "\n";
    std::cout << "pipeline: roc_auc=" << auc.first << " +- " << auc.second << " over "
              << result.per_seed.size() << " seeds\n";
  }
  return result;
}

void cmd_ablate(const RunConfig& cfg, const std::string& run_dir,
                const std::vector<double>& lambda_grid, const std::vector<double>& t_grid) {
  const AttributedGraph g = load_data(cfg);
  const SparseMatrix prop = normalize_adjacency(g);
  const fs::path sdir = fs::path(run_dir) / ("seed_" + cfg.get("seed"));
  GraphAutoencoder ae = GraphAutoencoder::load((sdir / "ae.ckpt").string());
  TrainedDenoiser uncond = load_denoiser((sdir / "dm_uncond.ckpt").string());
  TrainedDenoiser cond = load_denoiser((sdir / "dm_cond.ckpt").string());

  const auto rows =
      ablate(g, prop, ae, uncond, cond, detect_config_of(cfg), lambda_grid, t_grid);

  std::ofstream out(fs::path(run_dir) / "ablation.csv");
  out << "kind,label,lambda,t_detect,roc_auc,average_precision,recall_at_k,auprc\n";
  for (const auto& r : rows) {
    std::string metrics_cols = ",,,";
    if (g.has_labels()) {
      LabeledScores ls{r.scores, g.labels};
      const MetricSummary m = all_metrics(ls);
      metrics_cols = fmt(m.roc_auc) + "," + fmt(m.average_precision) + "," +
                     fmt(m.recall_at_k) + "," + fmt(m.auprc);
    }
    out << r.kind << ',' << r.label << ',' << fmt(r.lambda) << ',' << fmt(r.t_detect) << ','
        << metrics_cols << "\n";
  }
  std::cout << "ablate: " << rows.size() << " rows -> " << (fs::path(run_dir) / "ablation.csv")
            << "\n";
}

BenchResult cmd_bench(const RunConfig& cfg, const std::vector<std::size_t>& sizes,
                      const std::string& out_dir) {
  fs::create_directories(out_dir);
  BenchResult res;

  for (std::size_t n : sizes) {
    SynthConfig sc;
    sc.nodes = n;
    sc.dim = 20;
    sc.seed = 7;
    AttributedGraph base = synth_graph(sc);
    AttributedGraph g = inject_outliers(base, 2, n / 50, 5, 50, 7);
    standardize_features(g);
    const SparseMatrix prop = normalize_adjacency(g);

    BenchRow row;
    row.nodes = n;

    AeConfig ac = ae_config_of(cfg);
    ac.epochs = 20;

    {  // alpha = 1: no structure term at all
      AeConfig a1 = ac;
      a1.alpha = 1.0;
      GraphAutoencoder ae(a1, g.d);
      const double t0 = now_s();
      ae.train(g, prop);
      row.ae_alpha1_s = now_s() - t0;
      row.alpha1_struct_rows = ae.structure_rows_computed();
    }

    Matrix z;
    {  // alpha < 1: same epochs, the difference is the n^2 structure path
      AeConfig a2 = ac;
      a2.alpha = 0.5;
      GraphAutoencoder ae(a2, g.d);
      const double t0 = now_s();
      auto r = ae.train(g, prop);
      row.ae_struct_s = (now_s() - t0) - row.ae_alpha1_s;
      z = std::move(r.embedding.z);
    }

    const NoiseSchedule sched = schedule_of(cfg);
    DmConfig dc = dm_config_of(cfg);
    dc.epochs = 100;
    dc.patience = 100;  // time a fixed number of epochs

    const double t0 = now_s();
    TrainedDenoiser uncond = train_dm_uncond(z, sched, dc);
    uncond.cf.freeze();
    TrainedDenoiser cond = train_dm_cond(z, sched, dc, uncond.cf, &uncond.net);
    row.dm_train_s = now_s() - t0;

    {  // one guided 50-step sampling pass over all nodes
      const Matrix zs = standardize_rows(z, uncond.lat_mu, uncond.lat_sd);
      Rng rng(99);
      ForwardNoise fn = forward_noise(zs, sched.t_steps / 5.0, sched, rng);
      const std::vector<double>& c = cond.cf.value();
      EpsFn eps = [&](const Matrix& zz, double t) {
        return guided_eps(zz, t, c, cfg.get_f("detect.lambda"), uncond, cond);
      };
      const double t1 = now_s();
      reverse_sample(fn.z_t, sched.t_steps / 5.0, eps, sched, 50, 99, SampleMode::Ode);
      row.sample_s = now_s() - t1;
    }

    row.peak_rss_mb = peak_rss_mb();
    res.rows.push_back(row);
    std::cout << "bench n=" << n << " ae(a=1)=" << row.ae_alpha1_s << "s"
              << " ae_struct=" << row.ae_struct_s << "s dm_train=" << row.dm_train_s
              << "s sample=" << row.sample_s << "s rss=" << row.peak_rss_mb << "MB\n";
  }

  // least-squares slope of log(dm time) on log(n)
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double m = static_cast<double>(res.rows.size());
  for (const auto& r : res.rows) {
    const double x = std::log(static_cast<double>(r.nodes));
    const double y = std::log(r.dm_train_s + r.sample_s);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  res.dm_fit_exponent = (m * sxy - sx * sy) / (m * sxx - sx * sx);

  std::ofstream out(fs::path(out_dir) / "bench.csv");
  out << "nodes,ae_alpha1_s,ae_struct_s,dm_train_s,sample_s,peak_rss_mb\n";
  for (const auto& r : res.rows)
    out << r.nodes << ',' << fmt(r.ae_alpha1_s) << ',' << fmt(r.ae_struct_s) << ','
        << fmt(r.dm_train_s) << ',' << fmt(r.sample_s) << ',' << fmt(r.peak_rss_mb) << "\n";
  std::cout << "bench: dm time ~ n^" << res.dm_fit_exponent << "\n";
  return res;
}

}  // namespace gadiff
