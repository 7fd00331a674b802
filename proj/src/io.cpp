#include "fairalloc/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace fairalloc::io {

namespace {

std::string fmt(double v) {
  char buf[40];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

double parse_double(const std::string& text, const std::string& where) {
  const char* begin = text.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0')
    throw std::runtime_error(where + ": cannot parse number '" + text + "'");
  return v;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

struct Rng {
  std::mt19937_64 eng;
  explicit Rng(std::uint64_t seed) : eng(seed ^ 0x9e3779b97f4a7c15ULL) {}

  double uniform() {
    return static_cast<double>(eng() >> 11) * 0x1.0p-53;
  }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }
  int uniform_int(int a, int b) {
    return a + static_cast<int>(eng() % static_cast<std::uint64_t>(b - a + 1));
  }
  bool bernoulli(double p) { return uniform() < p; }
  double normal(double mu, double sigma) {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return mu + sigma * std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }
  int categorical(const std::vector<double>& probs) {
    const double u = uniform();
    double acc = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      acc += probs[i];
      if (u < acc) return static_cast<int>(i);
    }
    return static_cast<int>(probs.size()) - 1;
  }
};

const std::vector<std::string> kRequiredColumns = {"id",    "lon",      "lat",    "counselors",
                                                   "ap_ib", "calculus", "outcome"};

std::vector<double> group_keyed_vector(const json& j, const GroupDomain& groups,
                                       const std::string& what) {
  std::vector<double> out(groups.size(), 0.0);
  if (j.is_null()) return out;
  if (j.is_array()) {
    if (j.size() != groups.size())
      throw std::runtime_error("model spec: '" + what + "' array length != group count");
    for (std::size_t a = 0; a < groups.size(); ++a) out[a] = j[a].get<double>();
    return out;
  }
  if (!j.is_object()) throw std::runtime_error("model spec: '" + what + "' must be array or object");
  for (const auto& [label, value] : j.items()) {
    const int a = groups.index_of(label);
    if (a < 0) throw std::runtime_error("model spec: '" + what + "' names unknown group '" + label + "'");
    out[static_cast<std::size_t>(a)] = value.get<double>();
  }
  return out;
}

int feature_index(const std::vector<std::string>& names, const std::string& name,
                  const std::string& what) {
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end())
    throw std::runtime_error("model spec: " + what + " names unknown feature '" + name + "'");
  return static_cast<int>(it - names.begin());
}

}  // namespace

LoadedUnits load_units_stream(std::istream& in, const std::string& group_column,
                              const std::vector<std::string>& prec_features) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("units file: empty file");
  const std::vector<std::string> header = split_csv_line(line);

  std::unordered_map<std::string, std::size_t> col;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (!col.emplace(header[c], c).second)
      throw std::runtime_error("units file: duplicate column '" + header[c] + "'");
  }
  for (const auto& name : kRequiredColumns) {
    if (!col.count(name)) throw std::runtime_error("units file: missing column '" + name + "'");
  }
  if (!col.count(group_column))
    throw std::runtime_error("units file: missing column '" + group_column + "'");

  std::vector<std::string> extra_columns;
  for (const auto& name : header) {
    if (name == group_column || name == "group") continue;
    if (std::find(kRequiredColumns.begin(), kRequiredColumns.end(), name) !=
        kRequiredColumns.end())
      continue;
    extra_columns.push_back(name);
  }

  LoadedUnits data;
  data.feature_names = {"counselors", "ap_ib"};
  data.feature_names.insert(data.feature_names.end(), extra_columns.begin(), extra_columns.end());

  std::vector<bool> prec_mask(data.feature_names.size(), false);
  for (const auto& name : prec_features) {
    prec_mask[static_cast<std::size_t>(
        feature_index(data.feature_names, name, "prec_feature_list"))] = true;
  }

  std::unordered_set<std::string> ids;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    const std::string where = "units file row " + std::to_string(row);
    const std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw std::runtime_error(where + ": expected " + std::to_string(header.size()) +
                               " cells, found " + std::to_string(cells.size()));
    auto cell = [&](const std::string& name) -> const std::string& { return cells[col.at(name)]; };

    Unit u;
    u.id = cell("id");
    if (u.id.empty()) throw std::runtime_error(where + ": empty id");
    if (!ids.insert(u.id).second) throw std::runtime_error(where + ": duplicate id '" + u.id + "'");

    const std::string& label = cell(group_column);
    if (label.empty()) throw std::runtime_error(where + ": empty group label");
    int g = data.groups.index_of(label);
    if (g < 0) {
      data.groups.labels.push_back(label);
      g = static_cast<int>(data.groups.labels.size()) - 1;
    }
    u.group = g;

    const double lon = parse_double(cell("lon"), where + " lon");
    const double lat = parse_double(cell("lat"), where + " lat");
    if (!std::isfinite(lon) || !std::isfinite(lat))
      throw std::runtime_error(where + ": non-finite coordinates");
    u.coords = {{lon, lat}};

    const double counselors = parse_double(cell("counselors"), where + " counselors");
    if (counselors < 0) throw std::runtime_error(where + ": counselors must be >= 0");
    const double ap_ib = parse_double(cell("ap_ib"), where + " ap_ib");
    if (ap_ib != 0.0 && ap_ib != 1.0)
      throw std::runtime_error(where + ": ap_ib indicator out of range");
    const double calculus = parse_double(cell("calculus"), where + " calculus");
    if (calculus != 0.0 && calculus != 1.0)
      throw std::runtime_error(where + ": calculus indicator out of range");
    const double outcome = parse_double(cell("outcome"), where + " outcome");
    if (!std::isfinite(outcome)) throw std::runtime_error(where + ": non-finite outcome");

    u.features = {counselors, ap_ib};
    for (const auto& name : extra_columns)
      u.features.push_back(parse_double(cell(name), where + " " + name));
    u.prec_mask.assign(prec_mask.begin(), prec_mask.end());

    data.units.push_back(std::move(u));
    data.counselors.push_back(counselors);
    data.ap_ib.push_back(ap_ib);
    data.calculus.push_back(calculus);
    data.outcome.push_back(outcome);
  }
  if (data.units.empty()) throw std::runtime_error("units file: no data rows");
  return data;
}

LoadedUnits load_units(const std::string& path, const std::string& group_column,
                       const std::vector<std::string>& prec_features) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open units file '" + path + "'");
  try {
    return load_units_stream(in, group_column, prec_features);
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

void write_units_csv(const LoadedUnits& data, std::ostream& out) {
  out << "id,group,lon,lat,counselors,ap_ib,calculus,outcome";
  for (std::size_t f = 2; f < data.feature_names.size(); ++f) out << ',' << data.feature_names[f];
  out << '\n';
  for (std::size_t i = 0; i < data.units.size(); ++i) {
    const Unit& u = data.units[i];
    out << u.id << ',' << data.groups.labels[static_cast<std::size_t>(u.group)] << ','
        << fmt((*u.coords)[0]) << ',' << fmt((*u.coords)[1]) << ',' << fmt(data.counselors[i])
        << ',' << fmt(data.ap_ib[i]) << ',' << fmt(data.calculus[i]) << ','
        << fmt(data.outcome[i]);
    for (std::size_t f = 2; f < u.features.size(); ++f) out << ',' << fmt(u.features[f]);
    out << '\n';
  }
}

double parse_tau(const std::string& text) {
  std::string low;
  for (char c : text) low.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (low == "inf" || low == "+inf" || low == "infinity") return infinity();
  const double v = parse_double(text, "tau");
  if (std::isnan(v) || v <= 0.0) throw std::runtime_error("tau must be positive or 'inf'");
  return v;
}

RunConfig RunConfig::from_json(const json& j) {
  RunConfig c;
  c.k = j.value("k", 5);
  c.include_self = j.value("include_self", true);
  c.budget = j.value("budget", 25);
  if (j.contains("tau_list")) {
    for (const auto& t : j.at("tau_list")) {
      if (t.is_string())
        c.tau_list.push_back(parse_tau(t.get<std::string>()));
      else
        c.tau_list.push_back(t.get<double>());
    }
  }
  c.group_column = j.value("group_column", std::string("group"));
  if (j.contains("prec_feature_list"))
    c.prec_feature_list = j.at("prec_feature_list").get<std::vector<std::string>>();
  c.model_kind = j.value("model", std::string("max_interference"));
  if (j.contains("model_params")) c.model_params = j.at("model_params");
  if (j.contains("privilege_params")) c.privilege_params = j.at("privilege_params");
  c.model_file = j.value("model_file", std::string());
  if (j.contains("solver")) {
    const auto& s = j.at("solver");
    c.solver.abs_gap_tol = s.value("abs_gap_tol", 1e-6);
    c.solver.node_limit = s.value("node_limit", static_cast<long>(10'000'000));
    c.solver.time_limit_seconds = s.value("time_limit_seconds", 0.0);
    c.solver.branch_rule = s.value("branch_rule", std::string("most-fractional"));
  }
  c.seed = j.value("seed", static_cast<std::uint64_t>(1));
  if (j.contains("self_similarity") && !j.at("self_similarity").is_null())
    c.self_similarity = j.at("self_similarity").get<double>();
  return c;
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
  return from_json(j);
}

json RunConfig::to_json() const {
  json j;
  j["k"] = k;
  j["include_self"] = include_self;
  j["budget"] = budget;
  json taus = json::array();
  for (double t : tau_list) {
    if (std::isfinite(t))
      taus.push_back(t);
    else
      taus.push_back("inf");
  }
  j["tau_list"] = taus;
  j["group_column"] = group_column;
  j["prec_feature_list"] = prec_feature_list;
  j["model"] = model_kind;
  if (!model_params.is_null()) j["model_params"] = model_params;
  if (!privilege_params.is_null()) j["privilege_params"] = privilege_params;
  if (!model_file.empty()) j["model_file"] = model_file;
  j["solver"] = {{"abs_gap_tol", solver.abs_gap_tol},
                 {"node_limit", solver.node_limit},
                 {"time_limit_seconds", solver.time_limit_seconds},
                 {"branch_rule", solver.branch_rule}};
  j["seed"] = seed;
  if (self_similarity) j["self_similarity"] = *self_similarity;
  return j;
}

std::shared_ptr<const StructuralOutcomeModel> model_from_json(
    const json& spec, const GroupDomain& groups, const std::vector<std::string>& feature_names) {
  const std::string kind = spec.value("kind", std::string("max_interference"));
  if (kind == "max_interference") {
    const json& p = spec.contains("params") ? spec.at("params") : spec;
    SEMParamsByGroup params;
    if (p.contains("groups")) {
      // Re-index parameter arrays given in the spec's own group order.
      const auto labels = p.at("groups").get<std::vector<std::string>>();
      auto pick = [&](const char* key) {
        const auto raw = p.at(key).get<std::vector<double>>();
        if (raw.size() != labels.size())
          throw std::runtime_error(std::string("model spec: '") + key + "' length mismatch");
        std::vector<double> out(groups.size(), 0.0);
        for (std::size_t a = 0; a < groups.size(); ++a) {
          const auto it = std::find(labels.begin(), labels.end(), groups.labels[a]);
          if (it == labels.end())
            throw std::runtime_error("model spec: no parameters for group '" + groups.labels[a] +
                                     "'");
          out[a] = raw[static_cast<std::size_t>(it - labels.begin())];
        }
        return out;
      };
      params.alpha = pick("alpha");
      params.beta = pick("beta");
      params.gamma = pick("gamma");
      params.theta = pick("theta");
    } else {
      params.alpha = group_keyed_vector(p.value("alpha", json()), groups, "alpha");
      params.beta = group_keyed_vector(p.value("beta", json()), groups, "beta");
      params.gamma = group_keyed_vector(p.value("gamma", json()), groups, "gamma");
      params.theta = group_keyed_vector(p.value("theta", json()), groups, "theta");
    }
    const int p_idx = feature_index(feature_names, spec.value("p_feature", std::string("ap_ib")),
                                    "p_feature");
    const int f_idx = feature_index(feature_names,
                                    spec.value("f_feature", std::string("counselors")),
                                    "f_feature");
    return std::make_shared<MaxInterferenceModel>(std::move(params), p_idx, f_idx);
  }
  if (kind == "linear_interference") {
    std::vector<double> weights(feature_names.size(), 0.0);
    if (spec.contains("feature_weights")) {
      for (const auto& [name, w] : spec.at("feature_weights").items())
        weights[static_cast<std::size_t>(feature_index(feature_names, name, "feature_weights"))] =
            w.get<double>();
    }
    return std::make_shared<LinearInterferenceModel>(
        std::move(weights), group_keyed_vector(spec.value("group_intercept", json()), groups, "group_intercept"),
        spec.value("z_coef", 0.0),
        group_keyed_vector(spec.value("z_group_bonus", json()), groups, "z_group_bonus"),
        group_keyed_vector(spec.value("idle_spillover", json()), groups, "idle_spillover"));
  }
  if (kind == "tabular") {
    auto values = spec.at("values").get<std::vector<std::vector<std::vector<double>>>>();
    return std::make_shared<TabularModel>(std::move(values), groups.size());
  }
  throw std::runtime_error("model spec: unknown kind '" + kind + "'");
}

AllocationProblem build_problem(const LoadedUnits& data, const RunConfig& config, double tau) {
  json model_spec = config.model_params;
  if (model_spec.is_null() && !config.model_file.empty()) {
    std::ifstream in(config.model_file);
    if (!in) throw std::runtime_error("cannot open model file '" + config.model_file + "'");
    in >> model_spec;
  }
  if (model_spec.is_null())
    throw std::runtime_error("config: no model_params or model_file for model '" +
                             config.model_kind + "'");
  if (!model_spec.contains("kind")) model_spec["kind"] = config.model_kind;

  AllocationProblem problem;
  problem.units = data.units;
  problem.groups = data.groups;
  KnnOptions opts{config.k, config.include_self, config.self_similarity};
  problem.graph = build_knn_graph(problem.units, opts);
  problem.objective_model = model_from_json(model_spec, data.groups, data.feature_names);
  if (!config.privilege_params.is_null()) {
    json priv_spec = config.privilege_params;
    if (!priv_spec.contains("kind")) priv_spec["kind"] = config.model_kind;
    problem.privilege_model = model_from_json(priv_spec, data.groups, data.feature_names);
  } else {
    problem.privilege_model = problem.objective_model;
  }
  problem.budget = config.budget;
  problem.tau = tau;
  problem.validate();
  return problem;
}

FitDataset build_fit_dataset(const LoadedUnits& data, const RunConfig& config) {
  FitDataset fit;
  fit.groups = data.groups;
  fit.ap_ib = data.ap_ib;
  fit.counselors = data.counselors;
  fit.calculus = data.calculus;
  fit.outcome = data.outcome;
  fit.group.reserve(data.units.size());
  for (const auto& u : data.units) fit.group.push_back(u.group);
  KnnOptions opts{config.k, config.include_self, config.self_similarity};
  fit.graph = build_knn_graph(data.units, opts);
  return fit;
}

namespace {

LoadedUnits assemble_units(const std::vector<std::string>& ids,
                           const std::vector<std::string>& labels_in_order,
                           const std::vector<int>& group,
                           const std::vector<std::array<double, 2>>& coords,
                           const std::vector<double>& counselors,
                           const std::vector<double>& ap_ib, const std::vector<double>& calculus,
                           const std::vector<double>& outcome,
                           const std::vector<std::string>& extra_names,
                           const std::vector<std::vector<double>>& extra_cols,
                           const std::vector<std::string>& prec_features) {
  LoadedUnits data;
  data.groups.labels = labels_in_order;
  data.feature_names = {"counselors", "ap_ib"};
  data.feature_names.insert(data.feature_names.end(), extra_names.begin(), extra_names.end());
  std::vector<bool> prec(data.feature_names.size(), false);
  for (const auto& name : prec_features)
    prec[static_cast<std::size_t>(feature_index(data.feature_names, name, "prec_feature_list"))] =
        true;

  const std::size_t n = ids.size();
  for (std::size_t i = 0; i < n; ++i) {
    Unit u;
    u.id = ids[i];
    u.group = group[i];
    u.coords = coords[i];
    u.features = {counselors[i], ap_ib[i]};
    for (const auto& column : extra_cols) u.features.push_back(column[i]);
    u.prec_mask.assign(prec.begin(), prec.end());
    data.units.push_back(std::move(u));
  }
  data.counselors = counselors;
  data.ap_ib = ap_ib;
  data.calculus = calculus;
  data.outcome = outcome;
  return data;
}

SyntheticInstance make_housing(const json& params, bool interference) {
  const double x1 = params.value("x1", 60.0);
  const double x2 = params.value("x2", 80.0);
  SyntheticInstance inst;
  inst.data = assemble_units({"1", "2"}, {"b", "w"}, {0, 1}, {{{0.0, 0.0}}, {{1.0, 0.0}}},
                             {0.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}, {x1, x2}, {"qualification"},
                             {{x1, x2}}, {"qualification"});
  inst.model_spec = {{"kind", "linear_interference"},
                     {"feature_weights", {{"qualification", 1.0}}},
                     {"group_intercept", json::object()},
                     {"z_coef", 100.0},
                     {"z_group_bonus", {{"w", 50.0}}},
                     {"idle_spillover", interference ? json{{"w", -10.0}} : json::object()}};
  inst.graph_options = {2, true, std::nullopt};
  inst.budget = params.value("budget", 1);
  inst.tau_list = {infinity()};
  return inst;
}

SyntheticInstance make_additive(const json& params) {
  const int n = params.value("n", 6);
  if (n < 2) throw std::runtime_error("additive_infeasible: n must be >= 2");
  std::vector<std::string> ids;
  std::vector<int> group;
  std::vector<std::array<double, 2>> coords;
  std::vector<double> zeros(static_cast<std::size_t>(n), 0.0);
  std::vector<double> outcome;
  for (int i = 0; i < n; ++i) {
    ids.push_back(std::to_string(i + 1));
    group.push_back(i % 2 == 0 ? 0 : 1);  // w, b, w, b, ...
    coords.push_back({static_cast<double>(i), 0.0});
    outcome.push_back(i % 2 == 0 ? 1.0 : 0.0);
  }
  SyntheticInstance inst;
  inst.data = assemble_units(ids, {"w", "b"}, group, coords, zeros, zeros, zeros, outcome, {}, {},
                             {"ap_ib", "counselors"});
  inst.model_spec = {{"kind", "linear_interference"},
                     {"feature_weights", json::object()},
                     {"group_intercept", {{"w", 1.0}}},
                     {"z_coef", 1.0},
                     {"z_group_bonus", json::object()},
                     {"idle_spillover", json::object()}};
  inst.graph_options = {std::min(2, n - 1) + 1, true, std::nullopt};  // self + nearest others
  inst.budget = params.value("budget", 2);
  inst.tau_list = {1.0, 2.0};
  return inst;
}

SyntheticInstance make_nyc_like(const json& params, std::uint64_t seed) {
  Rng rng(seed);
  const int n = params.value("n", 345);
  const int k = params.value("k", 5);
  const auto labels =
      params.value("groups", std::vector<std::string>{"black", "Hispanic", "white"});
  const auto probs = params.value("group_probs", std::vector<double>{0.42, 0.33, 0.25});
  if (labels.size() != probs.size())
    throw std::runtime_error("nyc_like: groups/group_probs length mismatch");
  auto per_group = [&](const char* key, std::vector<double> fallback) {
    std::vector<double> v = params.value(key, fallback);
    if (v.size() != labels.size())
      throw std::runtime_error(std::string("nyc_like: '") + key + "' length mismatch");
    return v;
  };
  const auto alpha = per_group("alpha", {0.0002, 0.0003, 0.0005});
  const auto beta = per_group("beta", {0.00015, 0.0002, 0.0003});
  const auto gamma = per_group("gamma", {0.010, 0.012, 0.015});
  const auto theta = per_group("theta", {0.30, 0.34, 0.42});
  const double sigma = params.value("noise_sigma", 0.02);
  const auto bbox = params.value("bbox", std::vector<double>{-74.25, 40.50, -73.70, 40.95});

  // Schools come in tight clusters far apart, like neighborhoods: with
  // cluster size k the nearest k-1 schools plus self are the own cluster,
  // so the interference neighborhoods line up with the clusters and
  // inverse-distance similarities stay bounded.
  const int cluster_size = std::max(1, k);
  const int n_clusters = (n + cluster_size - 1) / cluster_size;
  const int grid = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n_clusters))));
  const double cell_x = (bbox[2] - bbox[0]) / grid;
  const double cell_y = (bbox[3] - bbox[1]) / grid;
  const double radius = params.value("cluster_radius", 0.12) * std::min(cell_x, cell_y) / 2.0;

  std::vector<std::array<double, 2>> centers;
  for (int c = 0; c < n_clusters; ++c) {
    const int cx = c % grid;
    const int cy = c / grid;
    centers.push_back({bbox[0] + (cx + 0.5 + rng.uniform(-0.25, 0.25)) * cell_x,
                       bbox[1] + (cy + 0.5 + rng.uniform(-0.25, 0.25)) * cell_y});
  }

  std::vector<std::string> ids;
  std::vector<int> group;
  std::vector<std::array<double, 2>> coords;
  std::vector<double> counselors, ap_ib, calculus, outcome;
  for (int i = 0; i < n; ++i) {
    ids.push_back(std::to_string(i + 1));
    group.push_back(rng.categorical(probs));
    const int c = i / cluster_size;
    const int m = i % cluster_size;
    const double angle =
        6.283185307179586 * (m + rng.uniform(-0.2, 0.2)) / static_cast<double>(cluster_size);
    const double r = radius * (1.0 + rng.uniform(-0.2, 0.2));
    coords.push_back(
        {centers[static_cast<std::size_t>(c)][0] + r * std::cos(angle),
         centers[static_cast<std::size_t>(c)][1] + r * std::sin(angle)});
    counselors.push_back(std::max(0.0, std::round(rng.normal(2.0, 1.0) * 2.0) / 2.0));
    ap_ib.push_back(rng.bernoulli(0.55) ? 1.0 : 0.0);
    calculus.push_back(rng.bernoulli(0.45) ? 1.0 : 0.0);
    outcome.push_back(0.0);  // filled below, needs the graph
  }

  SyntheticInstance inst;
  inst.data = assemble_units(ids, labels, group, coords, counselors, ap_ib, calculus, outcome, {},
                             {}, {"ap_ib", "counselors"});
  inst.graph_options = {k, true, std::nullopt};
  if (params.contains("self_similarity"))
    inst.graph_options.zero_distance_similarity = params.at("self_similarity").get<double>();
  const InterferenceGraph graph = build_knn_graph(inst.data.units, inst.graph_options);

  for (int i = 0; i < n; ++i) {
    const auto ii = static_cast<std::size_t>(i);
    const auto a = static_cast<std::size_t>(group[ii]);
    double calc_max = 0.0, apib_max = 0.0;
    for (std::size_t s = 0; s < graph.degree(ii); ++s) {
      const auto j = static_cast<std::size_t>(graph.neighbors[ii][s]);
      if (calculus[j] == 1.0) calc_max = std::max(calc_max, graph.sims[ii][s]);
      apib_max = std::max(apib_max, graph.sims[ii][s] * ap_ib[j]);
    }
    const double mu =
        alpha[a] * calc_max + beta[a] * apib_max + gamma[a] * counselors[ii] + theta[a];
    inst.data.outcome[ii] = mu + (sigma > 0.0 ? rng.normal(0.0, sigma) : 0.0);
  }

  inst.model_spec = {{"kind", "max_interference"},
                     {"p_feature", "ap_ib"},
                     {"f_feature", "counselors"},
                     {"params",
                      {{"groups", labels},
                       {"alpha", alpha},
                       {"beta", beta},
                       {"gamma", gamma},
                       {"theta", theta}}}};
  inst.budget = params.value("budget", 25);
  return inst;
}

SyntheticInstance make_random(const json& params, std::uint64_t seed) {
  Rng rng(seed);
  const int n = rng.uniform_int(4, 12);
  const bool linear = rng.bernoulli(0.5);
  const int k = rng.uniform_int(1, std::min(3, n - 1));
  const bool include_self = linear ? true : rng.bernoulli(0.5);
  const int n_groups = rng.uniform_int(2, 3);
  std::vector<std::string> labels;
  for (int g = 0; g < n_groups; ++g) labels.push_back("g" + std::to_string(g));

  std::vector<std::string> ids;
  std::vector<int> group;
  std::vector<std::array<double, 2>> coords;
  std::vector<double> counselors, ap_ib, calculus, outcome, x0;
  for (int i = 0; i < n; ++i) {
    ids.push_back(std::to_string(i + 1));
    group.push_back(rng.uniform_int(0, n_groups - 1));
    coords.push_back({rng.uniform(0.0, 10.0), rng.uniform(0.0, 10.0)});
    counselors.push_back(rng.uniform(0.0, 4.0));
    ap_ib.push_back(rng.bernoulli(0.5) ? 1.0 : 0.0);
    calculus.push_back(rng.bernoulli(0.4) ? 1.0 : 0.0);
    outcome.push_back(0.0);
    x0.push_back(rng.uniform(0.0, 5.0));
  }

  json model_spec;
  std::vector<std::string> extra_names;
  std::vector<std::vector<double>> extra_cols;
  if (linear) {
    extra_names = {"x0"};
    extra_cols = {x0};
    json intercept = json::object(), bonus = json::object(), spill = json::object();
    for (const auto& label : labels) {
      intercept[label] = rng.uniform(0.0, 2.0);
      bonus[label] = rng.uniform(-1.5, 1.5);
      spill[label] = rng.bernoulli(0.5) ? rng.uniform(-1.0, 0.3) : 0.0;
    }
    model_spec = {{"kind", "linear_interference"},
                  {"feature_weights", {{"x0", rng.uniform(0.2, 1.5)}}},
                  {"group_intercept", intercept},
                  {"z_coef", rng.uniform(0.5, 3.0)},
                  {"z_group_bonus", bonus},
                  {"idle_spillover", spill}};
  } else {
    json alpha = json::array(), beta = json::array(), gamma = json::array(), theta = json::array();
    for (int g = 0; g < n_groups; ++g) {
      alpha.push_back(rng.uniform(0.0, 1.2));
      beta.push_back(rng.uniform(0.0, 0.8));
      gamma.push_back(rng.uniform(0.0, 0.5));
      theta.push_back(rng.uniform(0.0, 1.0));
    }
    model_spec = {{"kind", "max_interference"},
                  {"p_feature", "ap_ib"},
                  {"f_feature", "counselors"},
                  {"params",
                   {{"groups", labels},
                    {"alpha", alpha},
                    {"beta", beta},
                    {"gamma", gamma},
                    {"theta", theta}}}};
  }

  SyntheticInstance inst;
  std::vector<std::string> prec = {"ap_ib", "counselors"};
  for (const auto& name : extra_names) prec.push_back(name);
  inst.data = assemble_units(ids, labels, group, coords, counselors, ap_ib, calculus, outcome,
                             extra_names, extra_cols, prec);
  inst.graph_options = {k, include_self, std::nullopt};
  inst.budget = rng.uniform_int(0, std::min(4, n));

  // Populate the observed outcome and scale tau off the idle-regime gaps so
  // seeds land in both feasible and infeasible regimes.
  const InterferenceGraph graph = build_knn_graph(inst.data.units, inst.graph_options);
  const auto model = model_from_json(model_spec, inst.data.groups, inst.data.feature_names);
  double max_gap = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto ii = static_cast<std::size_t>(i);
    NeighborPattern idle;
    idle.bits.assign(graph.degree(ii), 0);
    const double factual =
        model->expected_outcome(inst.data.units, ii, group[ii], idle, graph);
    inst.data.outcome[ii] = factual;
    for (int a = 0; a < n_groups; ++a) {
      const double gap =
          factual - model->expected_outcome(inst.data.units, ii, a, idle, graph);
      max_gap = std::max(max_gap, gap);
    }
  }
  inst.model_spec = model_spec;
  const double scale[3] = {0.35, 1.05, 2.5};
  inst.tau_list = {max_gap > 1e-12 ? scale[seed % 3] * max_gap : 0.5};
  return inst;
}

}  // namespace

SyntheticInstance generate_synthetic(const std::string& kind, const json& params,
                                     std::uint64_t seed) {
  const json p = params.is_null() ? json::object() : params;
  if (kind == "housing") return make_housing(p, false);
  if (kind == "housing_interference") return make_housing(p, true);
  if (kind == "additive_infeasible") return make_additive(p);
  if (kind == "nyc_like") return make_nyc_like(p, seed);
  if (kind == "random") return make_random(p, seed);
  throw std::runtime_error("generate_synthetic: unknown kind '" + kind + "'");
}

json synthetic_config(const SyntheticInstance& instance, std::uint64_t seed) {
  RunConfig config;
  config.k = instance.graph_options.k;
  config.include_self = instance.graph_options.include_self;
  config.budget = instance.budget;
  config.tau_list = instance.tau_list;
  config.model_kind = instance.model_spec.value("kind", std::string("max_interference"));
  config.model_params = instance.model_spec;
  config.seed = seed;
  config.self_similarity = instance.graph_options.zero_distance_similarity;
  std::vector<std::string> prec;
  for (std::size_t f = 0; f < instance.data.feature_names.size(); ++f) {
    const auto& name = instance.data.feature_names[f];
    if (!instance.data.units.empty() && instance.data.units.front().prec_mask[f])
      prec.push_back(name);
  }
  config.prec_feature_list = prec;
  return config.to_json();
}

json solution_to_json(const AllocationProblem& problem, double tau, const Solution& solution) {
  json j;
  j["status"] = to_string(solution.status);
  j["tau"] = std::isfinite(tau) ? json(tau) : json("inf");
  j["budget"] = problem.budget;
  j["nodes_explored"] = solution.nodes_explored;
  j["groups"] = problem.groups.labels;
  json ids = json::array();
  for (const auto& u : problem.units) ids.push_back(u.id);
  j["unit_ids"] = ids;

  json z = json::array();
  int used = 0;
  if (solution.has_incumbent()) {
    for (std::size_t i = 0; i < solution.z.size(); ++i) {
      if (solution.z[i]) {
        z.push_back(problem.units[i].id);
        ++used;
      }
    }
  }
  j["z"] = z;
  j["budget_used"] = used;
  j["objective"] = solution.has_incumbent() ? json(solution.objective) : json(nullptr);
  j["bound"] = std::isfinite(solution.bound) ? json(solution.bound) : json(nullptr);
  json gaps = json::array();
  for (const auto& row : solution.per_unit_gaps) gaps.push_back(row);
  j["per_unit_gaps"] = gaps;
  return j;
}

json summary_to_json(const AllocationProblem& problem, const Solution& solution,
                     const GroupAllocationSummary& summary) {
  json j;
  j["objective"] = solution.objective;
  j["objective_recomputed"] = summary.objective;
  int used = 0;
  for (int c : summary.treated_per_group) used += c;
  j["budget_used"] = used;
  json per_group = json::array();
  for (std::size_t a = 0; a < problem.groups.size(); ++a) {
    per_group.push_back({{"group", problem.groups.labels[a]},
                         {"treated", summary.treated_per_group[a]},
                         {"outcome_total", summary.outcome_total_per_group[a]}});
  }
  j["per_group"] = per_group;
  json treated = json::array();
  for (std::size_t idx : summary.treated_units) {
    const Unit& u = problem.units[idx];
    treated.push_back({{"id", u.id},
                       {"group", problem.groups.labels[static_cast<std::size_t>(u.group)]},
                       {"lon", (*u.coords)[0]},
                       {"lat", (*u.coords)[1]}});
  }
  j["treated"] = treated;
  return j;
}

json fit_to_json(const GroupDomain& groups, const FitResult& result) {
  json j;
  j["kind"] = "max_interference";
  j["p_feature"] = "ap_ib";
  j["f_feature"] = "counselors";
  j["params"] = {{"groups", groups.labels},
                 {"alpha", result.params.alpha},
                 {"beta", result.params.beta},
                 {"gamma", result.params.gamma},
                 {"theta", result.params.theta}};
  j["residual_variance"] = result.residual_variance;
  j["n_per_group"] = result.n_per_group;
  j["std_errors"] = {{"alpha", result.std_errors.alpha},
                     {"beta", result.std_errors.beta},
                     {"gamma", result.std_errors.gamma},
                     {"theta", result.std_errors.theta}};
  return j;
}

void write_path_csv(const AllocationProblem& problem, const SolutionPath& path,
                    std::ostream& out) {
  out << "tau,status,objective";
  for (const auto& label : problem.groups.labels) out << ",treated_" << label;
  out << '\n';
  for (const auto& [tau, solution] : path.points) {
    out << (std::isfinite(tau) ? fmt(tau) : "inf") << ',' << to_string(solution.status) << ',';
    if (solution.has_incumbent()) out << fmt(solution.objective);
    std::vector<int> counts(problem.groups.size(), 0);
    if (solution.has_incumbent()) {
      for (std::size_t i = 0; i < solution.z.size(); ++i)
        if (solution.z[i]) counts[static_cast<std::size_t>(problem.units[i].group)] += 1;
    }
    for (int c : counts) out << ',' << c;
    out << '\n';
  }
}

}  // namespace fairalloc::io
