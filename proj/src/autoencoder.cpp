#include "gadiff/autoencoder.hpp"

#include <cmath>
#include <sstream>

#include "gadiff/checkpoint.hpp"

namespace gadiff {

void AeConfig::validate() const {
  if (alpha < 0.0 || alpha > 1.0) throw std::invalid_argument("alpha must be in [0,1]");
  if (latent_dim < 1) throw std::invalid_argument("latent_dim must be >= 1");
  if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (dropout < 0.0 || dropout >= 1.0) throw std::invalid_argument("dropout must be in [0,1)");
}

AeLoss ae_loss(const Matrix& x, const SparseMatrix& a, const Matrix& xhat, const Matrix& ahat,
               double alpha, bool squared) {
  if (alpha < 0.0 || alpha > 1.0) throw std::invalid_argument("alpha must be in [0,1]");
  const std::size_t n = x.rows();
  AeLoss out;
  out.per_node.assign(n, 0.0);

  double feat_sq = 0.0;
  std::vector<double> feat_row(n, 0.0);
  if (alpha > 0.0) {
    if (!x.same_shape(xhat)) throw std::invalid_argument("ae_loss: feature shape mismatch");
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < x.cols(); ++j) {
        const double dx = x(i, j) - xhat(i, j);
        s += dx * dx;
      }
      feat_row[i] = std::sqrt(s);
      feat_sq += s;
    }
  }

  double stru_sq = 0.0;
  std::vector<double> stru_row(n, 0.0);
  if (alpha < 1.0) {
    if (ahat.rows() != n || ahat.cols() != n) throw std::invalid_argument("ae_loss: ahat shape");
    Matrix adense = to_dense(a);
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double dx = adense(i, j) - ahat(i, j);
        s += dx * dx;
      }
      stru_row[i] = std::sqrt(s);
      stru_sq += s;
    }
  }

  out.feat_term = squared ? feat_sq : std::sqrt(feat_sq);
  out.stru_term = squared ? stru_sq : std::sqrt(stru_sq);
  out.value = alpha * out.feat_term + (1.0 - alpha) * out.stru_term;
  for (std::size_t i = 0; i < n; ++i)
    out.per_node[i] = alpha * feat_row[i] + (1.0 - alpha) * stru_row[i];
  return out;
}

namespace {

// parameter names, fixed order
constexpr const char* kEnc1W = "enc1.w";
constexpr const char* kEnc1B = "enc1.b";
constexpr const char* kEnc2W = "enc2.w";
constexpr const char* kEnc2B = "enc2.b";
constexpr const char* kDec1W = "dec1.w";
constexpr const char* kDec1B = "dec1.b";
constexpr const char* kDec2W = "dec2.w";
constexpr const char* kDec2B = "dec2.b";
constexpr const char* kStruW = "stru.w";
constexpr const char* kStruB = "stru.b";

std::vector<double> bias_of(const ParamStore& p, const char* name) { return p.at(name).v; }

// structure loss over rows of A - z_s z_s^T without materializing Ahat.
// Optionally accumulates the unscaled E*z_s product for the backward pass.
struct StruPass {
  double sq_sum = 0.0;
  std::vector<double> row_norm;
  Matrix ezs;  // (Ahat - A) * z_s, row-streamed; empty when not requested
};

StruPass structure_pass(const SparseMatrix& a, const Matrix& zs, std::uint64_t* row_counter,
                        bool want_grad) {
  const std::size_t n = zs.rows(), w = zs.cols();
  StruPass out;
  out.row_norm.assign(n, 0.0);
  if (want_grad) out.ezs = Matrix(n, w);
  std::vector<double> arow(n);
  std::vector<double> erow(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (row_counter) ++(*row_counter);
    std::fill(arow.begin(), arow.end(), 0.0);
    for (std::size_t e = a.row_ptr[i]; e < a.row_ptr[i + 1]; ++e) arow[a.col[e]] = a.val[e];
    const double* zi = zs.row(i);
    double sq = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double* zj = zs.row(j);
      double dot = 0.0;
      for (std::size_t c = 0; c < w; ++c) dot += zi[c] * zj[c];
      const double e = dot - arow[j];
      erow[j] = e;
      sq += e * e;
    }
    out.sq_sum += sq;
    out.row_norm[i] = std::sqrt(sq);
    if (!want_grad) continue;
    double* gi = out.ezs.row(i);
    for (std::size_t j = 0; j < n; ++j) {
      if (erow[j] == 0.0) continue;
      const double* zj = zs.row(j);
      for (std::size_t c = 0; c < w; ++c) gi[c] += erow[j] * zj[c];
    }
  }
  return out;
}

}  // namespace

GraphAutoencoder::GraphAutoencoder(const AeConfig& cfg, std::size_t feat_dim)
    : cfg_(cfg), d_(feat_dim) {
  cfg_.validate();
  const std::size_t k = cfg_.latent_dim, h = cfg_.hidden();
  Rng rng(Rng(cfg_.seed).derive(0xae01));
  params_.seed = cfg_.seed;
  auto add = [&](const char* name, std::size_t fi, std::size_t fo) {
    const std::size_t i = params_.add(name, {fi, fo});
    glorot_init(params_.at(i), fi, fo, rng);
  };
  add(kEnc1W, d_, h);
  params_.add(kEnc1B, {h});
  add(kEnc2W, h, k);
  params_.add(kEnc2B, {k});
  add(kDec1W, k, h);
  params_.add(kDec1B, {h});
  add(kDec2W, h, d_);
  params_.add(kDec2B, {d_});
  add(kStruW, k, h);
  params_.add(kStruB, {h});
}

GraphAutoencoder::GraphAutoencoder(const AeConfig& cfg, std::size_t feat_dim, ParamStore params)
    : cfg_(cfg), d_(feat_dim), params_(std::move(params)) {
  cfg_.validate();
}

Matrix GraphAutoencoder::encode(const SparseMatrix& prop, const Matrix& x, bool training,
                                Rng* rng) const {
  if (x.cols() != d_) throw std::invalid_argument("encode: feature dim mismatch");
  Matrix h1 = gcn_forward(prop, x, params_.at(kEnc1W).as_matrix(), bias_of(params_, kEnc1B));
  Matrix a1 = relu(h1);
  if (training && cfg_.dropout > 0.0) {
    if (!rng) throw std::invalid_argument("encode: training mode needs an rng");
    a1 = elementwise_mul(a1, dropout_mask(a1.rows(), a1.cols(), cfg_.dropout, *rng, true));
  }
  return gcn_forward(prop, a1, params_.at(kEnc2W).as_matrix(), bias_of(params_, kEnc2B));
}

Matrix GraphAutoencoder::decode_features(const SparseMatrix& prop, const Matrix& z, bool training,
                                         Rng* rng) const {
  Matrix g1 = gcn_forward(prop, z, params_.at(kDec1W).as_matrix(), bias_of(params_, kDec1B));
  Matrix b1 = relu(g1);
  if (training && cfg_.dropout > 0.0) {
    if (!rng) throw std::invalid_argument("decode: training mode needs an rng");
    b1 = elementwise_mul(b1, dropout_mask(b1.rows(), b1.cols(), cfg_.dropout, *rng, true));
  }
  return gcn_forward(prop, b1, params_.at(kDec2W).as_matrix(), bias_of(params_, kDec2B));
}

Matrix GraphAutoencoder::decode_structure_embedding(const SparseMatrix& prop,
                                                    const Matrix& z) const {
  return gcn_forward(prop, z, params_.at(kStruW).as_matrix(), bias_of(params_, kStruB));
}

std::pair<Matrix, Matrix> GraphAutoencoder::decode(const SparseMatrix& prop,
                                                   const Matrix& z) const {
  Matrix xhat = decode_features(prop, z);
  Matrix ahat;
  if (cfg_.alpha < 1.0) {
    const Matrix zs = decode_structure_embedding(prop, z);
    stru_rows_ += zs.rows();
    ahat = matmul_nt(zs, zs);
  }
  return {std::move(xhat), std::move(ahat)};
}

GraphAutoencoder::Step GraphAutoencoder::loss_and_grads(const AttributedGraph& g,
                                                        const SparseMatrix& prop,
                                                        Rng* dropout_rng) {
  const std::size_t n = g.n;
  const double alpha = cfg_.alpha;
  const bool sq = cfg_.squared_norm;
  const SparseMatrix a = adjacency_csr(g);

  const Matrix w_e1 = params_.at(kEnc1W).as_matrix();
  const Matrix w_e2 = params_.at(kEnc2W).as_matrix();
  const Matrix w_d1 = params_.at(kDec1W).as_matrix();
  const Matrix w_d2 = params_.at(kDec2W).as_matrix();
  const Matrix w_s = params_.at(kStruW).as_matrix();

  // ---- forward, caching intermediates ----
  Matrix h1 = gcn_forward(prop, g.features, w_e1, bias_of(params_, kEnc1B));
  Matrix a1 = relu(h1);
  Matrix m_enc = dropout_rng
                     ? dropout_mask(a1.rows(), a1.cols(), cfg_.dropout, *dropout_rng, true)
                     : Matrix(a1.rows(), a1.cols(), 1.0);
  Matrix a1d = elementwise_mul(a1, m_enc);
  Matrix z = gcn_forward(prop, a1d, w_e2, bias_of(params_, kEnc2B));

  Matrix g1 = gcn_forward(prop, z, w_d1, bias_of(params_, kDec1B));
  Matrix b1 = relu(g1);
  Matrix m_dec = dropout_rng
                     ? dropout_mask(b1.rows(), b1.cols(), cfg_.dropout, *dropout_rng, true)
                     : Matrix(b1.rows(), b1.cols(), 1.0);
  Matrix b1d = elementwise_mul(b1, m_dec);
  Matrix xhat = gcn_forward(prop, b1d, w_d2, bias_of(params_, kDec2B));

  // ---- loss and head gradients ----
  Step step;
  NormLoss feat = frobenius_loss(g.features, xhat, sq);
  step.loss += alpha * feat.value;
  Matrix d_xhat = feat.d_xhat;
  d_xhat *= alpha;

  Matrix zs, d_zs;
  if (alpha < 1.0) {
    zs = gcn_forward(prop, z, w_s, bias_of(params_, kStruB));
    StruPass sp = structure_pass(a, zs, &stru_rows_, true);
    double term, gscale;
    if (sq) {
      term = sp.sq_sum;
      gscale = 4.0;  // d||E||^2/dZs = (2E + 2E^T) Zs = 4 E Zs
    } else {
      term = std::sqrt(sp.sq_sum);
      gscale = term > 0.0 ? 2.0 / term : 0.0;
    }
    step.loss += (1.0 - alpha) * term;
    d_zs = sp.ezs;
    d_zs *= gscale * (1.0 - alpha);
  }

  // ---- backward ----
  step.grads = params_.zero_grads();
  Matrix dz(n, cfg_.latent_dim);

  {  // feature decoder
    Matrix d_b1d, dw;
    std::vector<double> db;
    gcn_backward(prop, b1d, w_d2, d_xhat, &d_b1d, &dw, &db);
    step.grads[params_.index_of(kDec2W)].v = dw.data();
    step.grads[params_.index_of(kDec2B)].v = db;
    Matrix d_b1 = elementwise_mul(d_b1d, m_dec);
    Matrix d_g1 = relu_backward(g1, d_b1);
    Matrix d_z_feat;
    gcn_backward(prop, z, w_d1, d_g1, &d_z_feat, &dw, &db);
    step.grads[params_.index_of(kDec1W)].v = dw.data();
    step.grads[params_.index_of(kDec1B)].v = db;
    dz += d_z_feat;
  }

  if (alpha < 1.0) {  // structure decoder
    Matrix d_z_stru, dw;
    std::vector<double> db;
    gcn_backward(prop, z, w_s, d_zs, &d_z_stru, &dw, &db);
    step.grads[params_.index_of(kStruW)].v = dw.data();
    step.grads[params_.index_of(kStruB)].v = db;
    dz += d_z_stru;
  }

  {  // encoder
    Matrix d_a1d, dw;
    std::vector<double> db;
    gcn_backward(prop, a1d, w_e2, dz, &d_a1d, &dw, &db);
    step.grads[params_.index_of(kEnc2W)].v = dw.data();
    step.grads[params_.index_of(kEnc2B)].v = db;
    Matrix d_a1 = elementwise_mul(d_a1d, m_enc);
    Matrix d_h1 = relu_backward(h1, d_a1);
    gcn_backward(prop, g.features, w_e1, d_h1, nullptr, &dw, &db);
    step.grads[params_.index_of(kEnc1W)].v = dw.data();
    step.grads[params_.index_of(kEnc1B)].v = db;
  }
  return step;
}

GraphAutoencoder::TrainResult GraphAutoencoder::train(const AttributedGraph& g,
                                                      const SparseMatrix& prop) {
  Rng rng(Rng(cfg_.seed).derive(0xae02));
  TrainResult res;
  res.epoch_loss.reserve(cfg_.epochs);

  for (std::size_t epoch = 1; epoch <= cfg_.epochs; ++epoch) {
    Step step = loss_and_grads(g, prop, cfg_.dropout > 0.0 ? &rng : nullptr);
    if (!std::isfinite(step.loss))
      throw std::runtime_error("ae training diverged (non-finite loss) at epoch " +
                               std::to_string(epoch));
    res.epoch_loss.push_back(step.loss);
    const AdamResult ar = adam_step(params_, step.grads, cfg_.lr);
    if (!ar.applied)
      throw std::runtime_error("ae training: non-finite gradients at epoch " +
                               std::to_string(epoch));
  }

  res.embedding.z = encode(prop, g.features, false, nullptr);
  std::ostringstream src;
  src << "ae(seed=" << cfg_.seed << ",k=" << cfg_.latent_dim << ")";
  res.embedding.source = src.str();
  return res;
}

AeLoss GraphAutoencoder::score_nodes(const AttributedGraph& g, const SparseMatrix& prop,
                                     const Matrix& z) const {
  const double alpha = cfg_.alpha;
  const std::size_t n = g.n;
  AeLoss out;
  out.per_node.assign(n, 0.0);

  double feat_sq = 0.0;
  std::vector<double> feat_row(n, 0.0);
  if (alpha > 0.0) {
    const Matrix xhat = decode_features(prop, z);
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < d_; ++j) {
        const double dx = g.features(i, j) - xhat(i, j);
        s += dx * dx;
      }
      feat_row[i] = std::sqrt(s);
      feat_sq += s;
    }
  }

  double stru_sq = 0.0;
  std::vector<double> stru_row(n, 0.0);
  if (alpha < 1.0) {
    const SparseMatrix a = adjacency_csr(g);
    const Matrix zs = decode_structure_embedding(prop, z);
    StruPass sp = structure_pass(a, zs, &stru_rows_, false);
    stru_sq = sp.sq_sum;
    stru_row = sp.row_norm;
  }

  out.feat_term = std::sqrt(feat_sq);
  out.stru_term = std::sqrt(stru_sq);
  out.value = alpha * out.feat_term + (1.0 - alpha) * out.stru_term;
  for (std::size_t i = 0; i < n; ++i)
    out.per_node[i] = alpha * feat_row[i] + (1.0 - alpha) * stru_row[i];
  return out;
}

void GraphAutoencoder::save(const std::string& path) const {
  std::map<std::string, std::string> hp;
  hp["kind"] = "graph_autoencoder";
  hp["latent_dim"] = std::to_string(cfg_.latent_dim);
  hp["hidden_dim"] = std::to_string(cfg_.hidden());
  hp["feat_dim"] = std::to_string(d_);
  hp["epochs"] = std::to_string(cfg_.epochs);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", cfg_.dropout);
  hp["dropout"] = buf;
  std::snprintf(buf, sizeof(buf), "%.17g", cfg_.lr);
  hp["lr"] = buf;
  std::snprintf(buf, sizeof(buf), "%.17g", cfg_.alpha);
  hp["alpha"] = buf;
  hp["squared_norm"] = cfg_.squared_norm ? "1" : "0";
  hp["seed"] = std::to_string(cfg_.seed);
  save_checkpoint(path, params_, hp);
}

GraphAutoencoder GraphAutoencoder::load(const std::string& path) {
  Checkpoint ck = load_checkpoint(path);
  if (ck.hparams.at("kind") != "graph_autoencoder")
    throw std::runtime_error("not an autoencoder checkpoint: " + path);
  AeConfig cfg;
  cfg.latent_dim = std::stoul(ck.hparams.at("latent_dim"));
  cfg.hidden_dim = std::stoul(ck.hparams.at("hidden_dim"));
  cfg.epochs = std::stoul(ck.hparams.at("epochs"));
  cfg.dropout = std::stod(ck.hparams.at("dropout"));
  cfg.lr = std::stod(ck.hparams.at("lr"));
  cfg.alpha = std::stod(ck.hparams.at("alpha"));
  cfg.squared_norm = ck.hparams.at("squared_norm") == "1";
  cfg.seed = std::stoull(ck.hparams.at("seed"));
  const std::size_t d = std::stoul(ck.hparams.at("feat_dim"));
  return GraphAutoencoder(cfg, d, std::move(ck.params));
}

}  // namespace gadiff
