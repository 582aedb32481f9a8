#include "entlab/experiment.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "entlab/error.hpp"
#include "entlab/report_io.hpp"

namespace entlab {
namespace {

using Json = nlohmann::ordered_json;

class Parser {
 public:
  explicit Parser(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const YAML::Node& node, const std::string& message) const {
    const YAML::Mark mark = node.Mark();
    std::ostringstream out;
    out << source_;
    if (mark.line >= 0) out << ':' << mark.line + 1 << ':' << mark.column + 1;
    out << ": " << message;
    throw ConfigError(out.str());
  }

  [[nodiscard]] std::string where(const YAML::Node& node) const {
    const YAML::Mark mark = node.Mark();
    return source_ + ':' + std::to_string(mark.line + 1) + ':' + std::to_string(mark.column + 1);
  }

  template <typename T>
  T as(const YAML::Node& node, const std::string& what) const {
    try {
      return node.as<T>();
    } catch (const YAML::Exception&) {
      fail(node, "bad value for '" + what + "'");
    }
  }

  void only_keys(const YAML::Node& node, std::initializer_list<const char*> allowed) const {
    if (!node.IsMap()) fail(node, "expected a mapping");
    for (const auto& kv : node) {
      const auto key = kv.first.as<std::string>();
      if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
        fail(kv.first, "unknown key '" + key + "'");
    }
  }

  Vector vector(const YAML::Node& node, const std::string& what) const {
    if (!node.IsSequence()) fail(node, "'" + what + "' must be a list of numbers");
    Vector v(static_cast<Eigen::Index>(node.size()));
    for (std::size_t i = 0; i < node.size(); ++i) v(static_cast<Eigen::Index>(i)) = as<double>(node[i], what);
    return v;
  }

  Matrix matrix(const YAML::Node& node, const std::string& what) const {
    if (!node.IsSequence() || node.size() == 0) fail(node, "'" + what + "' must be a list of rows");
    const auto rows = static_cast<Eigen::Index>(node.size());
    Matrix out;
    for (Eigen::Index i = 0; i < rows; ++i) {
      const Vector row = vector(node[static_cast<std::size_t>(i)], what);
      if (i == 0) out.resize(rows, row.size());
      if (row.size() != out.cols()) fail(node, "'" + what + "' rows differ in length");
      out.row(i) = row.transpose();
    }
    return out;
  }

  ConvexBody body(const YAML::Node& node, const std::map<std::string, ConvexBody>& named) const {
    if (node.IsScalar()) {
      const auto name = node.as<std::string>();
      const auto it = named.find(name);
      if (it == named.end()) fail(node, "unknown body '" + name + "'");
      return it->second;
    }
    only_keys(node, {"name", "kind", "center", "radius", "dim", "lower", "upper", "side", "vertices", "shape"});
    if (!node["kind"]) fail(node, "body needs a 'kind'");
    const auto kind = as<std::string>(node["kind"], "kind");
    try {
      if (kind == "ball") {
        const Vector center =
            node["center"] ? vector(node["center"], "center") : Vector::Zero(as<int>(require(node, "dim"), "dim"));
        return ConvexBody(Ball{center, node["radius"] ? as<double>(node["radius"], "radius") : 1.0});
      }
      if (kind == "unit-volume-ball") return unit_volume_ball(as<int>(require(node, "dim"), "dim"));
      if (kind == "box")
        return ConvexBody(Box{vector(require(node, "lower"), "lower"), vector(require(node, "upper"), "upper")});
      if (kind == "cube") {
        const int n = as<int>(require(node, "dim"), "dim");
        const double side = node["side"] ? as<double>(node["side"], "side") : 1.0;
        return ConvexBody(Box{Vector::Zero(n), Vector::Constant(n, side)});
      }
      if (kind == "simplex") {
        if (node["vertices"]) return ConvexBody(Simplex{matrix(node["vertices"], "vertices").transpose()});
        const int n = as<int>(require(node, "dim"), "dim");
        Matrix v = Matrix::Zero(n, n + 1);
        v.rightCols(n) = Matrix::Identity(n, n);
        return ConvexBody(Simplex{v});
      }
      if (kind == "ellipsoid")
        return ConvexBody(
            Ellipsoid{vector(require(node, "center"), "center"), matrix(require(node, "shape"), "shape")});
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      fail(node, e.what());
    }
    fail(node["kind"], "unknown body kind '" + kind + "'");
  }

  YAML::Node require(const YAML::Node& node, const char* key) const {
    if (!node[key]) fail(node, std::string("missing key '") + key + "'");
    return node[key];
  }

 private:
  std::string source_;
};

class ModelBuilder {
 public:
  ModelBuilder(const Parser& parser, const std::map<std::string, YAML::Node>& declared,
               const std::map<std::string, ConvexBody>& bodies)
      : parser_(parser), declared_(declared), bodies_(bodies) {}

  DensityModel named(const std::string& name, const YAML::Node& at) {
    if (const auto it = built_.find(name); it != built_.end()) return it->second;
    const auto it = declared_.find(name);
    if (it == declared_.end()) parser_.fail(at, "unknown model '" + name + "'");
    if (!active_.insert(name).second) parser_.fail(at, "model '" + name + "' refers to itself");
    DensityModel model = build(it->second);
    model.name = name;
    active_.erase(name);
    built_.emplace(name, model);
    return model;
  }

  DensityModel build(const YAML::Node& node) {
    if (node.IsScalar()) return named(node.as<std::string>(), node);
    if (!node.IsMap()) parser_.fail(node, "expected a model name or a model mapping");
    try {
      if (node["family"]) return family(node);
      if (node["product"]) {
        parser_.only_keys(node, {"name", "product"});
        const YAML::Node list = node["product"];
        if (!list.IsSequence() || list.size() == 0) parser_.fail(list, "'product' must be a non-empty list");
        std::vector<DensityModel> factors;
        for (const auto& item : list) factors.push_back(build(item));
        return make_product(factors);
      }
      if (node["affine"]) {
        parser_.only_keys(node, {"name", "affine"});
        return affine(node["affine"]);
      }
      if (node["convolve"]) {
        parser_.only_keys(node, {"name", "convolve"});
        const YAML::Node list = node["convolve"];
        if (!list.IsSequence() || list.size() < 2) parser_.fail(list, "'convolve' needs at least two models");
        DensityModel sum = build(list[0]);
        for (std::size_t i = 1; i < list.size(); ++i) sum = convolve(sum, build(list[i])).model();
        return sum;
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      parser_.fail(node, e.what());
    }
    parser_.fail(node, "model needs one of 'family', 'product', 'affine', 'convolve'");
  }

 private:
  DensityModel family(const YAML::Node& node) {
    parser_.only_keys(node, {"name", "family", "dim", "mean", "covariance", "variance", "variances", "rate", "scale",
                             "shape", "lower", "upper", "body", "power"});
    const auto fam = parser_.as<std::string>(node["family"], "family");
    DensityModel model;
    if (fam == "gaussian") {
      model = gaussian(node);
    } else if (fam == "exponential") {
      model = make_exponential(node["rate"] ? parser_.as<double>(node["rate"], "rate") : 1.0);
    } else if (fam == "laplace") {
      model = make_laplace(node["scale"] ? parser_.as<double>(node["scale"], "scale") : 1.0);
    } else if (fam == "gamma") {
      model = make_gamma(parser_.as<double>(parser_.require(node, "shape"), "shape"),
                         node["scale"] ? parser_.as<double>(node["scale"], "scale") : 1.0);
    } else if (fam == "uniform") {
      if (node["body"]) {
        model = uniform_body_model(parser_.body(node["body"], bodies_));
      } else {
        model = make_uniform_interval(node["lower"] ? parser_.as<double>(node["lower"], "lower") : 0.0,
                                      node["upper"] ? parser_.as<double>(node["upper"], "upper") : 1.0);
      }
    } else {
      parser_.fail(node["family"], "unknown family '" + fam + "'");
    }
    if (node["power"]) {
      const int copies = parser_.as<int>(node["power"], "power");
      if (model.dim != 1) parser_.fail(node["power"], "'power' needs a one-dimensional family");
      model = make_power(model, copies);
    }
    return model;
  }

  DensityModel gaussian(const YAML::Node& node) {
    int n = node["dim"] ? parser_.as<int>(node["dim"], "dim") : 0;
    Matrix cov;
    if (node["covariance"]) {
      cov = parser_.matrix(node["covariance"], "covariance");
    } else if (node["variances"]) {
      cov = parser_.vector(node["variances"], "variances").asDiagonal();
    } else {
      if (n == 0) n = node["mean"] ? static_cast<int>(node["mean"].size()) : 1;
      const double v = node["variance"] ? parser_.as<double>(node["variance"], "variance") : 1.0;
      cov = v * Matrix::Identity(n, n);
    }
    if (n != 0 && cov.rows() != n) parser_.fail(node, "'dim' does not match the covariance");
    const Vector mean = node["mean"] ? parser_.vector(node["mean"], "mean") : Vector::Zero(cov.rows());
    return make_gaussian(mean, cov);
  }

  DensityModel affine(const YAML::Node& node) {
    parser_.only_keys(node, {"of", "linear", "diagonal", "scale", "shift"});
    const DensityModel base = build(parser_.require(node, "of"));
    const int n = base.dim;
    Matrix linear = Matrix::Identity(n, n);
    if (node["linear"]) linear = parser_.matrix(node["linear"], "linear");
    if (node["diagonal"]) linear = parser_.vector(node["diagonal"], "diagonal").asDiagonal();
    if (node["scale"]) linear *= parser_.as<double>(node["scale"], "scale");
    const Vector shift = node["shift"] ? parser_.vector(node["shift"], "shift") : Vector::Zero(n);
    return affine_image(base, AffineMap(linear, shift));
  }

  const Parser& parser_;
  const std::map<std::string, YAML::Node>& declared_;
  const std::map<std::string, ConvexBody>& bodies_;
  std::map<std::string, DensityModel> built_;
  std::set<std::string> active_;
};

struct CheckShape {
  const char* name;
  int models;  // -1: one or more
  int bodies;
};

constexpr CheckShape kCheckers[] = {
    {"entropy-sandwich", -1, 0}, {"gaussian-sandwich", -1, 0},  {"concentration", -1, 0},
    {"typical-set", -1, 0},      {"submodularity", 3, 0},       {"epi", 2, 0},
    {"reverse-epi", 2, 0},       {"kappa-entropy-lower", 1, 1}, {"reverse-bm", 0, 2},
    {"hyperplane", -1, 0},
};

EntropyOptions::Route parse_route(const Parser& p, const YAML::Node& node) {
  const auto s = p.as<std::string>(node, "route");
  if (s == "auto") return EntropyOptions::Route::automatic;
  if (s == "plugin") return EntropyOptions::Route::plugin;
  if (s == "knn") return EntropyOptions::Route::knn;
  if (s == "convolution") return EntropyOptions::Route::convolution;
  p.fail(node, "unknown route '" + s + "' (auto, plugin, knn, convolution)");
}

std::vector<std::string> names(const Parser& p, const YAML::Node& node, const char* what) {
  std::vector<std::string> out;
  if (node.IsScalar()) {
    out.push_back(node.as<std::string>());
  } else if (node.IsSequence()) {
    for (const auto& item : node) {
      if (!item.IsScalar()) p.fail(item, std::string("'") + what + "' entries must be declared names");
      out.push_back(item.as<std::string>());
    }
  } else {
    p.fail(node, std::string("'") + what + "' must be a name or a list of names");
  }
  return out;
}

CheckSpec parse_check(const Parser& p, const YAML::Node& node, const ExperimentConfig& config) {
  p.only_keys(node, {"checker", "model", "models", "body", "bodies", "eps_grid", "eps", "kappa", "m", "m_inner",
                     "m_outer", "knn_m", "k", "route", "marginal_route", "ceiling", "c", "m_cov"});
  CheckSpec spec;
  spec.location = p.where(node);
  spec.checker = p.as<std::string>(p.require(node, "checker"), "checker");
  const CheckShape* shape = nullptr;
  for (const auto& c : kCheckers)
    if (spec.checker == c.name) shape = &c;
  if (!shape) p.fail(node["checker"], "unknown checker '" + spec.checker + "'");

  for (const char* key : {"model", "models"})
    if (node[key]) {
      for (auto& n : names(p, node[key], key)) {
        if (!config.models.count(n)) p.fail(node[key], "unknown model '" + n + "'");
        spec.models.push_back(std::move(n));
      }
    }
  for (const char* key : {"body", "bodies"})
    if (node[key]) {
      for (auto& n : names(p, node[key], key)) {
        if (!config.bodies.count(n)) p.fail(node[key], "unknown body '" + n + "'");
        spec.bodies.push_back(std::move(n));
      }
    }
  const auto want_models = shape->models;
  if ((want_models < 0 && spec.models.empty()) ||
      (want_models >= 0 && static_cast<int>(spec.models.size()) != want_models))
    p.fail(node, spec.checker + " takes " + (want_models < 0 ? "one or more" : std::to_string(want_models)) +
                     " model reference(s), got " + std::to_string(spec.models.size()));
  if (static_cast<int>(spec.bodies.size()) != shape->bodies)
    p.fail(node, spec.checker + " takes " + std::to_string(shape->bodies) + " body reference(s), got " +
                     std::to_string(spec.bodies.size()));

  if (node["eps_grid"]) {
    const Vector grid = p.vector(node["eps_grid"], "eps_grid");
    spec.eps_grid.assign(grid.data(), grid.data() + grid.size());
  } else {
    for (int i = 1; i <= 8; ++i) spec.eps_grid.push_back(0.25 * i);
  }
  for (double e : spec.eps_grid)
    if (!(e >= 0.0 && e <= 2.0)) p.fail(node["eps_grid"], "eps_grid entries must lie in [0, 2]");
  if (node["eps"]) {
    spec.eps = p.as<double>(node["eps"], "eps");
    if (!(spec.eps >= 0.0 && spec.eps <= 2.0)) p.fail(node["eps"], "eps must lie in [0, 2]");
  } else if (spec.checker == "typical-set") {
    p.fail(node, "typical-set needs 'eps'");
  }
  if (spec.checker == "kappa-entropy-lower") spec.kappa = p.as<double>(p.require(node, "kappa"), "kappa");

  CheckOptions& o = spec.options;
  auto each_entropy = [&](const std::function<void(EntropyOptions&)>& f) {
    f(o.marginal);
    f(o.sum);
    f(o.intermediate);
  };
  if (node["m"]) {
    const auto m = p.as<std::size_t>(node["m"], "m");
    o.m = m;
    each_entropy([&](EntropyOptions& e) { e.m = m; });
  }
  if (node["m_inner"]) {
    const auto v = p.as<std::size_t>(node["m_inner"], "m_inner");
    each_entropy([&](EntropyOptions& e) { e.m_inner = v; });
  }
  if (node["m_outer"]) {
    const auto v = p.as<std::size_t>(node["m_outer"], "m_outer");
    each_entropy([&](EntropyOptions& e) { e.m_outer = v; });
  }
  if (node["knn_m"]) {
    const auto v = p.as<std::size_t>(node["knn_m"], "knn_m");
    each_entropy([&](EntropyOptions& e) { e.knn_m = v; });
  }
  if (node["k"]) {
    const int k = p.as<int>(node["k"], "k");
    if (k < 1) p.fail(node["k"], "k must be positive");
    each_entropy([&](EntropyOptions& e) { e.k = k; });
  }
  if (node["route"]) {
    o.sum.route = parse_route(p, node["route"]);
    if (spec.models.size() == 1 || spec.checker == "hyperplane" || spec.checker.find("sandwich") != std::string::npos)
      o.marginal.route = o.sum.route;
  }
  if (node["marginal_route"]) o.marginal.route = parse_route(p, node["marginal_route"]);
  if (node["ceiling"]) o.reverse_epi_ceiling = p.as<double>(node["ceiling"], "ceiling");
  if (node["c"]) o.hyperplane_c = p.as<double>(node["c"], "c");
  if (node["m_cov"]) o.m_cov = p.as<std::size_t>(node["m_cov"], "m_cov");
  return spec;
}

Json with_context(InequalityReport& r, std::uint64_t seed, std::size_t check) {
  r.params["seed"] = seed;
  r.params["check"] = check;
  return r.params;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
  const Parser p(source);
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(source + ':' + std::to_string(e.mark.line + 1) + ':' + std::to_string(e.mark.column + 1) + ": " +
                      e.msg);
  }
  if (!root.IsMap()) throw ConfigError(source + ": top level must be a mapping");
  p.only_keys(root, {"seed", "models", "bodies", "checks", "output"});

  ExperimentConfig config;
  if (root["seed"]) config.seed = p.as<std::uint64_t>(root["seed"], "seed");

  if (const YAML::Node bodies = root["bodies"]) {
    if (!bodies.IsSequence()) p.fail(bodies, "'bodies' must be a list");
    for (const auto& b : bodies) {
      const auto name = p.as<std::string>(p.require(b, "name"), "name");
      if (config.bodies.count(name)) p.fail(b, "duplicate body '" + name + "'");
      config.bodies.emplace(name, p.body(b, config.bodies));
    }
  }

  std::map<std::string, YAML::Node> declared;
  std::vector<std::pair<std::string, YAML::Node>> order;
  if (const YAML::Node models = root["models"]) {
    if (!models.IsSequence()) p.fail(models, "'models' must be a list");
    for (const auto& m : models) {
      if (!m.IsMap()) p.fail(m, "model entries must be mappings");
      const auto name = p.as<std::string>(p.require(m, "name"), "name");
      if (declared.count(name)) p.fail(m, "duplicate model '" + name + "'");
      declared.emplace(name, m);
      order.emplace_back(name, m);
    }
  }
  ModelBuilder builder(p, declared, config.bodies);
  for (const auto& [name, node] : order) config.models.emplace(name, builder.named(name, node));

  if (const YAML::Node checks = root["checks"]) {
    if (!checks.IsSequence()) p.fail(checks, "'checks' must be a list");
    for (const auto& c : checks) config.checks.push_back(parse_check(p, c, config));
  }

  if (const YAML::Node out = root["output"]) {
    p.only_keys(out, {"dir", "svg", "jsonl", "csv"});
    if (out["dir"]) config.output.dir = p.as<std::string>(out["dir"], "dir");
    if (out["svg"]) config.output.svg = p.as<bool>(out["svg"], "svg");
    if (out["jsonl"]) config.output.jsonl = p.as<bool>(out["jsonl"], "jsonl");
    if (out["csv"]) config.output.csv = p.as<bool>(out["csv"], "csv");
  }
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), path.string());
}

bool RunResult::all_satisfied() const {
  return std::all_of(reports.begin(), reports.end(), [](const InequalityReport& r) { return r.satisfied; });
}

RunResult run_checks(const ExperimentConfig& config) {
  RunResult result;
  for (std::size_t i = 0; i < config.checks.size(); ++i) {
    const CheckSpec& spec = config.checks[i];
    const RandomStream stream(config.seed, i + 1);
    const CheckOptions& o = spec.options;
    std::vector<DensityModel> models;
    for (const auto& name : spec.models) models.push_back(config.models.at(name));
    std::vector<InequalityReport> reports;

    if (spec.checker == "entropy-sandwich" || spec.checker == "gaussian-sandwich") {
      for (std::size_t j = 0; j < models.size(); ++j) {
        const TwoSidedReport r = spec.checker == "entropy-sandwich"
                                     ? check_entropy_sandwich(models[j], stream.child(j), o)
                                     : check_gaussian_sandwich(models[j], stream.child(j), o);
        reports.push_back(r.lower);
        reports.push_back(r.upper);
      }
    } else if (spec.checker == "concentration") {
      for (std::size_t j = 0; j < models.size(); ++j) {
        ConcentrationProfile profile = concentration_profile(models[j], stream.child(j), o.m, spec.eps_grid, o);
        for (auto& r : concentration_reports(profile)) reports.push_back(std::move(r));
        result.profiles.push_back(std::move(profile));
      }
    } else if (spec.checker == "typical-set") {
      for (std::size_t j = 0; j < models.size(); ++j) {
        const MassEstimate mass = typical_set_mass(models[j], stream.child(j), o.m, spec.eps, o);
        const int n = models[j].dim;
        reports.push_back(make_report("typical-set", 1.0 - 4.0 * std::exp(-spec.eps * spec.eps * n / 16.0), mass.value,
                                      0.0, mass.std_error,
                                      {{"model", models[j].name}, {"n", n}, {"m", o.m}, {"eps", spec.eps}}));
      }
    } else if (spec.checker == "submodularity") {
      reports.push_back(check_submodularity(models[0], models[1], models[2], stream, o));
    } else if (spec.checker == "epi") {
      reports.push_back(check_epi(models[0], models[1], stream, o));
    } else if (spec.checker == "reverse-epi") {
      ReverseEpiResult r = reverse_epi_pipeline(models[0], models[1], stream, o);
      reports.push_back(r.report);
      reports.push_back(r.epi_side);
      result.stages.emplace(i, std::move(r.stages));
    } else if (spec.checker == "kappa-entropy-lower") {
      reports.push_back(check_kappa_entropy_lower(models[0], config.bodies.at(spec.bodies[0]), spec.kappa, stream, o));
    } else if (spec.checker == "reverse-bm") {
      reports.push_back(
          check_reverse_bm(config.bodies.at(spec.bodies[0]), config.bodies.at(spec.bodies[1]), stream, o));
    } else if (spec.checker == "hyperplane") {
      for (const auto& row : hyperplane_scan(models, stream, o.m, o)) reports.push_back(to_report(row));
    }
    for (auto& r : reports) {
      with_context(r, config.seed, i);
      result.reports.push_back(std::move(r));
    }
  }
  return result;
}

void write_outputs(const RunResult& result, const std::filesystem::path& dir, const OutputSpec& output) {
  if (output.jsonl) write_text_file(dir / "reports.jsonl", to_jsonl(result.reports));
  if (output.csv) write_text_file(dir / "summary.csv", to_csv(result.reports));
  if (output.svg)
    for (std::size_t k = 0; k < result.profiles.size(); ++k)
      write_text_file(dir / ("profile-" + std::to_string(k) + ".svg"), profile_svg(result.profiles[k]));
  if (!result.stages.empty()) {
    Json stages = Json::object();
    for (const auto& [check, records] : result.stages) {
      Json list = Json::array();
      for (const auto& s : records) list.push_back(to_json(s));
      stages[std::to_string(check)] = std::move(list);
    }
    write_text_file(dir / "stages.json", stages.dump(2) + "\n");
  }
}

std::vector<std::pair<std::string, std::string>> suite_catalog() {
  return {
      {"sandwich", "log ||f||^{-1/n} <= h(X)/n <= 1 + log ||f||^{-1/n} for log-concave X"},
      {"concentration", "P{|h~(X)/n - h(X)/n| >= eps} <= 4 exp(-eps^2 n/16), 0 <= eps <= 2"},
      {"submodularity", "h(X+Y+Z) + h(Z) <= h(X+Z) + h(Y+Z)"},
      {"epi", "N(X+Y) >= N(X) + N(Y)"},
      {"reverse-epi", "N(X~+Y~) <= C (N(X~) + N(Y~)) after volume-preserving positioning"},
      {"positioning", "unit-volume-ball mass of positioned log-concave laws is at least c^n"},
      {"kappa", "1/kappa = 1/kappa' + 1/kappa''; h(X) >= log|A| + n log(kappa n)"},
      {"reverse-bm", "h(X1+X2) >= log|A1+A2| - n log 2 for uniform X_i on A_i"},
      {"hyperplane", "h(Z)/n - 1/2 <= h(X)/n <= h(Z)/n + 1/2; D(f)/n <= log(n)/4 + c"},
      {"estimators", "kNN and convolution plug-in entropy estimators agree within 3 SE"},
  };
}

std::string list_suites() {
  std::string out;
  for (const auto& [name, statement] : suite_catalog()) out += name + ": " + statement + "\n";
  return out;
}

}  // namespace entlab
