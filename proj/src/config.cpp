#include "bkb/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "bkb/rng.hpp"

namespace bkb {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& value) {
  if (value == "inf" || value == "infinity") return std::numeric_limits<double>::infinity();
  std::size_t pos = 0;
  double out;
  try {
    out = std::stod(value, &pos);
  } catch (const std::exception&) {
    throw ConfigError(key, "expected a number, got '" + value + "'");
  }
  if (pos != value.size()) throw ConfigError(key, "expected a number, got '" + value + "'");
  return out;
}

std::uint64_t parse_uint(const std::string& key, const std::string& value) {
  std::uint64_t out = 0;
  const auto* end = value.data() + value.size();
  const auto res = std::from_chars(value.data(), end, out);
  if (res.ec != std::errc() || res.ptr != end || value.empty())
    throw ConfigError(key, "expected a nonnegative integer, got '" + value + "'");
  return out;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

AlgorithmSpec parse_algorithm(const std::string& name) {
  AlgorithmSpec a;
  if (name == "bkb") {
    a.kind = AlgorithmSpec::Kind::Bkb;
  } else if (name == "gpucb") {
    a.kind = AlgorithmSpec::Kind::Gpucb;
  } else if (name == "sor_ablation") {
    a.kind = AlgorithmSpec::Kind::SorAblation;
  } else if (name.rfind("fixed_dict(", 0) == 0 && name.back() == ')') {
    a.kind = AlgorithmSpec::Kind::FixedDict;
    a.dict_size = parse_uint("run.algorithms", name.substr(11, name.size() - 12));
    if (a.dict_size == 0) throw ConfigError("run.algorithms", "fixed_dict size must be positive");
  } else {
    throw ConfigError("run.algorithms", "unknown algorithm '" + name + "'");
  }
  return a;
}

BetaMode parse_beta_mode(const std::string& key, const std::string& v) {
  if (v == "adaptive") return BetaMode::Adaptive;
  if (v == "fixed") return BetaMode::Fixed;
  if (v == "exact") return BetaMode::Exact;
  throw ConfigError(key, "expected adaptive, fixed or exact");
}

Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("arms.file", "cannot open '" + path.string() + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> row;
    for (const auto& cell : split(line, ',')) row.push_back(parse_double("arms.file", cell));
    if (!rows.empty() && row.size() != rows.front().size())
      throw ConfigError("arms.file", "rows have differing column counts");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ConfigError("arms.file", "no arms in '" + path.string() + "'");
  Eigen::MatrixXd X(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return X;
}

}  // namespace

std::string AlgorithmSpec::name() const {
  switch (kind) {
    case Kind::Bkb: return "bkb";
    case Kind::Gpucb: return "gpucb";
    case Kind::SorAblation: return "sor_ablation";
    case Kind::FixedDict: return "fixed_dict" + std::to_string(dict_size);
  }
  return "unknown";
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> out;
  for (const auto& item : split(text, ',')) {
    const auto dots = item.find("..");
    if (dots != std::string::npos) {
      const auto lo = parse_uint("run.seeds", trim(item.substr(0, dots)));
      const auto hi = parse_uint("run.seeds", trim(item.substr(dots + 2)));
      if (hi < lo) throw ConfigError("run.seeds", "range '" + item + "' is empty");
      for (auto s = lo; s <= hi; ++s) out.push_back(s);
    } else {
      out.push_back(parse_uint("run.seeds", item));
    }
  }
  if (out.empty()) throw ConfigError("run.seeds", "at least one seed is required");
  return out;
}

double ExperimentConfig::qbar() const {
  switch (qbar_mode) {
    case QbarMode::Theorem: return qbar_floor(eps, delta, horizon);
    case QbarMode::Override: return qbar_override;
    case QbarMode::Infinite: return std::numeric_limits<double>::infinity();
  }
  return qbar_override;
}

BkbParams ExperimentConfig::params_for(const AlgorithmSpec& alg, std::uint64_t seed) const {
  BkbParams p;
  p.sampling = SamplingParams{eps, delta, horizon, qbar(), seed};
  p.lambda = lambda;
  p.xi = xi;
  p.F = F;
  p.sum_var_mode = sum_var_mode;
  if (alg.kind == AlgorithmSpec::Kind::Gpucb) {
    p.beta_mode = gpucb_beta_mode;
    p.fixed_beta = gpucb_beta;
  } else {
    p.beta_mode = bkb_beta_mode;
    p.fixed_beta = bkb_beta;
  }
  if (alg.kind == AlgorithmSpec::Kind::SorAblation) p.variance_form = VarianceForm::Sor;
  if (alg.kind == AlgorithmSpec::Kind::FixedDict) p.fixed_dictionary = alg.dict_size;
  return p;
}

Environment ExperimentConfig::make_environment(std::uint64_t seed) const {
  ArmSet arms;
  switch (arms_kind) {
    case ArmsKind::Grid:
      arms = grid_arms(arms_count, arms_low, arms_high);
      break;
    case ArmsKind::Uniform: {
      CounterRng rng = CounterRng::stream(arms_seed.value_or(seed), Stream::Arms);
      arms = uniform_arms(arms_count, arms_dim, arms_low, arms_high, rng);
      break;
    }
    case ArmsKind::File:
      arms = ArmSet(read_matrix_csv(arms_file));
      break;
  }
  Eigen::VectorXd f;
  if (env_kind == EnvKind::Gp) {
    CounterRng rng = CounterRng::stream(seed, Stream::Function);
    f = sample_gp_function(kernel, arms, env_jitter, rng);
  } else {
    const Eigen::VectorXd center = Eigen::VectorXd::Constant(arms.dim(), 0.5 * (arms_low + arms_high));
    f = bump_function(arms, center, env_bump_width);
  }
  return Environment(std::move(arms), std::move(f), env_noise);
}

void ExperimentConfig::validate() const {
  try {
    kernel.validate();
  } catch (const std::invalid_argument& ex) {
    const std::string msg = ex.what();
    const auto colon = msg.find(' ');
    throw ConfigError(msg.substr(0, colon), msg);
  }
  if (arms_kind != ArmsKind::File) {
    if (arms_count < 1) throw ConfigError("arms.count", "must be at least 1");
    if (arms_dim < 1) throw ConfigError("arms.dim", "must be at least 1");
    if (!(arms_high >= arms_low)) throw ConfigError("arms.high", "must not be below arms.low");
    if (arms_kind == ArmsKind::Grid && arms_dim != 1) throw ConfigError("arms.dim", "grid arms are one-dimensional");
  } else if (arms_file.empty()) {
    throw ConfigError("arms.file", "required when arms.kind = file");
  }
  if (!(env_noise >= 0.0) || !std::isfinite(env_noise)) throw ConfigError("env.noise", "must be nonnegative");
  if (!(env_jitter >= 0.0)) throw ConfigError("env.jitter", "must be nonnegative");
  if (!(env_bump_width > 0.0)) throw ConfigError("env.bump_width", "must be positive");
  if (horizon < 1) throw ConfigError("run.horizon", "must be at least 1");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ConfigError("model.lambda", "must be positive");
  if (!(xi > 0.0) || !std::isfinite(xi)) throw ConfigError("model.xi", "must be positive");
  if (!(F > 0.0) || !std::isfinite(F)) throw ConfigError("model.F", "must be positive");
  if (!(eps > 0.0 && eps < 1.0)) throw ConfigError("sampling.eps", "must lie in (0,1), got " + std::to_string(eps));
  if (!(delta > 0.0 && delta < 1.0))
    throw ConfigError("sampling.delta", "must lie in (0,1), got " + std::to_string(delta));
  if (qbar_mode == QbarMode::Override && !(qbar_override > 0.0)) throw ConfigError("sampling.qbar", "must be positive");
  if (!(bkb_beta >= 0.0)) throw ConfigError("bkb.beta", "must be nonnegative");
  if (!(gpucb_beta >= 0.0)) throw ConfigError("gpucb.beta", "must be nonnegative");
  if (gpucb_beta_mode == BetaMode::Adaptive) throw ConfigError("gpucb.beta_mode", "expected exact or fixed");
  if (algorithms.empty()) throw ConfigError("run.algorithms", "at least one algorithm is required");
  if (seeds.empty()) throw ConfigError("run.seeds", "at least one seed is required");
  if (starvation_grid < 2) throw ConfigError("starvation.grid", "must be at least 2");
  if (!(starvation_noise > 0.0)) throw ConfigError("starvation.noise", "must be positive");
  if (!(starvation_qbar > 0.0)) throw ConfigError("starvation.qbar", "must be positive");
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig c;
  bool lambda_set = false;
  bool env_noise_set = false;
  std::map<std::string, int> seen;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno), "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string v = trim(line.substr(eq + 1));
    if (seen[key]++ > 0) throw ConfigError(key, "given more than once");
    if (v.empty()) throw ConfigError(key, "empty value");

    if (key == "kernel.family") {
      try {
        c.kernel.family = parse_kernel_family(v);
      } catch (const std::invalid_argument& ex) {
        throw ConfigError(key, ex.what());
      }
    } else if (key == "kernel.gamma") {
      c.kernel.gamma = parse_double(key, v);
    } else if (key == "kernel.nu") {
      c.kernel.nu = parse_double(key, v);
    } else if (key == "kernel.lengthscale") {
      c.kernel.lengthscale = parse_double(key, v);
    } else if (key == "arms.kind") {
      if (v == "grid") c.arms_kind = ArmsKind::Grid;
      else if (v == "uniform") c.arms_kind = ArmsKind::Uniform;
      else if (v == "file") c.arms_kind = ArmsKind::File;
      else throw ConfigError(key, "expected grid, uniform or file");
    } else if (key == "arms.count") {
      c.arms_count = parse_uint(key, v);
    } else if (key == "arms.dim") {
      c.arms_dim = parse_uint(key, v);
    } else if (key == "arms.low") {
      c.arms_low = parse_double(key, v);
    } else if (key == "arms.high") {
      c.arms_high = parse_double(key, v);
    } else if (key == "arms.file") {
      c.arms_file = v;
    } else if (key == "arms.seed") {
      c.arms_seed = parse_uint(key, v);
    } else if (key == "env.kind") {
      if (v == "gp") c.env_kind = EnvKind::Gp;
      else if (v == "bump") c.env_kind = EnvKind::Bump;
      else throw ConfigError(key, "expected gp or bump");
    } else if (key == "env.noise") {
      c.env_noise = parse_double(key, v);
      env_noise_set = true;
    } else if (key == "env.jitter") {
      c.env_jitter = parse_double(key, v);
    } else if (key == "env.bump_width") {
      c.env_bump_width = parse_double(key, v);
    } else if (key == "run.horizon") {
      c.horizon = parse_uint(key, v);
    } else if (key == "run.algorithms") {
      c.algorithms.clear();
      for (const auto& name : split(v, ',')) c.algorithms.push_back(parse_algorithm(name));
    } else if (key == "run.seeds") {
      c.seeds = parse_seeds(v);
    } else if (key == "run.output_dir") {
      c.output_dir = v;
    } else if (key == "model.lambda") {
      c.lambda = parse_double(key, v);
      lambda_set = true;
    } else if (key == "model.xi") {
      c.xi = parse_double(key, v);
    } else if (key == "model.F") {
      c.F = parse_double(key, v);
    } else if (key == "sampling.eps") {
      c.eps = parse_double(key, v);
    } else if (key == "sampling.delta") {
      c.delta = parse_double(key, v);
    } else if (key == "sampling.qbar_mode") {
      if (v == "theorem") c.qbar_mode = QbarMode::Theorem;
      else if (v == "override") c.qbar_mode = QbarMode::Override;
      else if (v == "infinite") c.qbar_mode = QbarMode::Infinite;
      else throw ConfigError(key, "expected theorem, override or infinite");
    } else if (key == "sampling.qbar") {
      c.qbar_override = parse_double(key, v);
    } else if (key == "bkb.beta_mode") {
      c.bkb_beta_mode = parse_beta_mode(key, v);
    } else if (key == "bkb.beta") {
      c.bkb_beta = parse_double(key, v);
    } else if (key == "bkb.sum_var_mode") {
      if (v == "cached") c.sum_var_mode = SumVarMode::Cached;
      else if (v == "strict") c.sum_var_mode = SumVarMode::Strict;
      else throw ConfigError(key, "expected cached or strict");
    } else if (key == "gpucb.beta_mode") {
      c.gpucb_beta_mode = parse_beta_mode(key, v);
    } else if (key == "gpucb.beta") {
      c.gpucb_beta = parse_double(key, v);
    } else if (key == "starvation.grid") {
      c.starvation_grid = parse_uint(key, v);
    } else if (key == "starvation.noise") {
      c.starvation_noise = parse_double(key, v);
    } else if (key == "starvation.qbar") {
      c.starvation_qbar = parse_double(key, v);
    } else {
      throw ConfigError(key, "unknown key");
    }
  }
  if (!lambda_set) c.lambda = c.xi * c.xi;
  if (!env_noise_set) c.env_noise = c.xi;
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot read '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace bkb
