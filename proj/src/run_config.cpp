#include "gadiff/run_config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace gadiff {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

const std::map<std::string, std::string> kDefaults = {
    {"data.dir", ""},
    {"data.standardize", "1"},
    {"ae.latent_dim", "8"},
    {"ae.hidden_dim", "0"},  // 0 = 2 * latent_dim
    {"ae.dropout", "0.3"},
    {"ae.lr", "0.01"},
    {"ae.epochs", "300"},
    {"ae.alpha", "0.8"},
    {"ae.squared_norm", "0"},
    {"dm.t_steps", "500"},
    {"dm.kernel", "interp"},
    {"dm.sigma_max", "80"},
    {"dm.hidden", "16"},
    {"dm.depth", "4"},
    {"dm.epochs", "800"},
    {"dm.lr", "0.005"},
    {"dm.patience", "50"},
    {"dm.min_delta", "0.0001"},
    {"dm.tau", "1"},
    {"detect.lambda", "1"},
    {"detect.t_detect", "-1"},  // -1 = t_steps / 5
    {"detect.sample_steps", "50"},
    {"detect.mode", "ode"},
    {"detect.trials", "20"},
    {"seed", "42"},
    {"seeds", "1"},  // number of seeded repetitions in pipeline/eval
};

// per-dataset values: ae dropout / lr / alpha / latent dim, dm hidden, lambda
struct Preset {
  const char* name;
  const char* dropout;
  const char* lr;
  const char* alpha;
  const char* dim;
  const char* dm_dim;
  const char* lambda;
};

const Preset kPresets[] = {
    {"weibo", "0.3", "0.01", "0.8", "128", "256", "1.0"},
    {"reddit", "0.3", "0.05", "0.8", "32", "64", "0.8"},
    {"disney", "0.3", "0.01", "1.0", "8", "16", "2.0"},
    {"books", "0.1", "0.1", "0.5", "8", "16", "2.0"},
    {"enron", "0.1", "0.01", "0.0", "8", "16", "2.0"},
};

}  // namespace

RunConfig::RunConfig() : kv_(kDefaults) {}

const std::map<std::string, std::string>& RunConfig::defaults() { return kDefaults; }

const std::vector<std::string>& RunConfig::preset_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& p : kPresets) v.push_back(p.name);
    return v;
  }();
  return names;
}

void RunConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config: " + path);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected key = value");
    set(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
}

void RunConfig::apply_preset(const std::string& name) {
  for (const auto& p : kPresets) {
    if (name == p.name) {
      kv_["ae.dropout"] = p.dropout;
      kv_["ae.lr"] = p.lr;
      kv_["ae.alpha"] = p.alpha;
      kv_["ae.latent_dim"] = p.dim;
      kv_["dm.hidden"] = p.dm_dim;
      kv_["detect.lambda"] = p.lambda;
      return;
    }
  }
  throw std::invalid_argument("unknown preset: " + name);
}

void RunConfig::set(const std::string& key, const std::string& value) {
  if (!kDefaults.count(key)) throw std::invalid_argument("unknown config key: " + key);
  kv_[key] = value;
}

const std::string& RunConfig::get(const std::string& key) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) throw std::invalid_argument("unknown config key: " + key);
  return it->second;
}

double RunConfig::get_f(const std::string& key) const { return std::stod(get(key)); }
long RunConfig::get_i(const std::string& key) const { return std::stol(get(key)); }

bool RunConfig::get_b(const std::string& key) const {
  const std::string& v = get(key);
  if (v == "1" || v == "true" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "no") return false;
  throw std::invalid_argument("bad boolean for " + key + ": " + v);
}

std::string RunConfig::canonical() const {
  std::ostringstream out;
  for (const auto& [k, v] : kv_) out << k << " = " << v << "\n";
  return out.str();
}

std::uint64_t RunConfig::hash() const {
  std::uint64_t h = 14695981039346656037ULL;
  for (const char c : canonical()) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

void RunConfig::write(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write config: " + path);
  out << canonical();
}

}  // namespace gadiff
