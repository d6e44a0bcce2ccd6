#include "ccsusy/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "ccsusy/errors.hpp"
#include "ccsusy/models.hpp"
#include "json.hpp"

namespace ccsusy {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& field, const std::string& what) {
  throw ConfigError(field + ": " + what);
}

RealMatrix parse_matrix(const json& j, const std::string& field) {
  if (!j.is_array() || j.empty()) fail(field, "expected a non-empty array of rows");
  const auto rows = static_cast<int>(j.size());
  int cols = -1;
  for (const auto& row : j) {
    if (!row.is_array()) fail(field, "expected an array of rows");
    if (cols < 0) cols = static_cast<int>(row.size());
    if (static_cast<int>(row.size()) != cols) fail(field, "ragged rows");
  }
  RealMatrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int c = 0; c < cols; ++c) {
      const auto& v = j[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)];
      if (!v.is_number()) fail(field, "entries must be numbers");
      m(i, c) = v.get<double>();
    }
  return m;
}

json matrix_to_json(const RealMatrix& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j2 = 0; j2 < m.cols(); ++j2) row.push_back(m(i, j2));
    rows.push_back(row);
  }
  return rows;
}

std::vector<double> parse_number_list(const json& j, const std::string& field) {
  if (!j.is_array() || j.empty()) fail(field, "expected a non-empty array of numbers");
  std::vector<double> out;
  for (const auto& v : j) {
    if (!v.is_number()) fail(field, "entries must be numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

}  // namespace

RunConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config: top level must be an object");

  RunConfig cfg;

  if (j.contains("channels")) {
    const auto& ch = j.at("channels");
    if (!ch.is_object() || !ch.contains("thresholds"))
      fail("channels", "expected an object with a 'thresholds' array");
    cfg.thresholds = parse_number_list(ch.at("thresholds"), "channels.thresholds");
  }

  if (j.contains("factorization")) {
    const auto& f = j.at("factorization");
    if (!f.is_object()) fail("factorization", "expected an object");
    const bool has_e = f.contains("energy");
    const bool has_k = f.contains("kappa");
    if (has_e == has_k) fail("factorization", "exactly one of 'energy' or 'kappa' required");
    if (has_e) {
      if (!f.at("energy").is_number()) fail("factorization.energy", "must be a number");
      cfg.factorization_energy = f.at("energy").get<double>();
    } else {
      cfg.factorization_kappa = parse_number_list(f.at("kappa"), "factorization.kappa");
    }
  }

  if (!j.contains("parametrization")) fail("parametrization", "required");
  {
    const auto& p = j.at("parametrization");
    if (!p.is_object() || !p.contains("mode")) fail("parametrization", "object with 'mode' required");
    const std::string mode = p.at("mode").get<std::string>();
    if (mode == "u0") {
      if (!p.contains("matrix")) fail("parametrization.matrix", "required in u0 mode");
      U0Config u;
      u.matrix = parse_matrix(p.at("matrix"), "parametrization.matrix");
      if (u.matrix.rows() != u.matrix.cols())
        fail("parametrization.matrix", "must be square");
      cfg.parametrization = std::move(u);
    } else if (mode == "canonical") {
      CanonicalConfig c;
      if (!p.contains("rank") || !p.at("rank").is_number_integer())
        fail("parametrization.rank", "integer required in canonical mode");
      c.rank = p.at("rank").get<int>();
      if (p.contains("primed")) {
        for (const auto& v : p.at("primed")) {
          if (!v.is_number_integer()) fail("parametrization.primed", "channel indices required");
          c.primed.push_back(v.get<int>());
        }
      }
      c.q0 = p.contains("q0") ? parse_matrix(p.at("q0"), "parametrization.q0") : RealMatrix(0, 0);
      c.x0 = p.contains("x0") ? parse_matrix(p.at("x0"), "parametrization.x0") : RealMatrix(0, 0);
      cfg.parametrization = std::move(c);
    } else if (mode == "preset") {
      if (!p.contains("name")) fail("parametrization.name", "required in preset mode");
      cfg.parametrization = PresetConfig{p.at("name").get<std::string>()};
    } else {
      fail("parametrization.mode", "must be one of 'u0', 'canonical', 'preset'");
    }
  }

  if (j.contains("r_grid")) {
    const auto& g = j.at("r_grid");
    RadialGrid rg;
    if (!g.is_object() || !g.contains("r_max") || !g.contains("n_points"))
      fail("r_grid", "object with 'r_max' and 'n_points' required");
    rg.r_max = g.at("r_max").get<double>();
    rg.n_points = g.at("n_points").get<int>();
    if (!(rg.r_max > 0.0)) fail("r_grid.r_max", "must be positive");
    if (rg.n_points < 2) fail("r_grid.n_points", "must be at least 2");
    cfg.r_grid = rg;
  }

  if (j.contains("e_grid")) {
    const auto& g = j.at("e_grid");
    EnergyGrid eg;
    if (!g.is_object() || !g.contains("e_min") || !g.contains("e_max") ||
        !g.contains("n_points"))
      fail("e_grid", "object with 'e_min', 'e_max', 'n_points' required");
    eg.e_min = g.at("e_min").get<double>();
    eg.e_max = g.at("e_max").get<double>();
    eg.n_points = g.at("n_points").get<int>();
    if (!(eg.e_max > eg.e_min)) fail("e_grid", "e_max must exceed e_min");
    if (eg.n_points < 2) fail("e_grid.n_points", "must be at least 2");
    cfg.e_grid = eg;
  }

  if (j.contains("bound_states")) {
    const auto& b = j.at("bound_states");
    if (!b.is_object()) fail("bound_states", "expected an object");
    if (b.contains("e_min")) cfg.bound_scan.e_min = b.at("e_min").get<double>();
    if (b.contains("e_max")) cfg.bound_scan.e_max = b.at("e_max").get<double>();
    if (b.contains("n_grid")) {
      cfg.bound_scan.n_grid = b.at("n_grid").get<int>();
      if (cfg.bound_scan.n_grid < 2) fail("bound_states.n_grid", "must be at least 2");
    }
  }

  if (j.contains("outputs")) {
    const auto& o = j.at("outputs");
    if (!o.is_object()) fail("outputs", "expected an object");
    if (o.contains("directory")) cfg.out_directory = o.at("directory").get<std::string>();
    if (o.contains("formats")) {
      cfg.formats.clear();
      for (const auto& f : o.at("formats")) {
        const std::string s = f.get<std::string>();
        if (s != "csv" && s != "json") fail("outputs.formats", "must contain only 'csv' or 'json'");
        cfg.formats.push_back(s);
      }
      if (cfg.formats.empty()) fail("outputs.formats", "at least one format required");
    }
  }

  return cfg;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config: cannot open file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::vector<std::string> preset_names() { return {"fig1", "fig2", "fig3"}; }

RunConfig make_preset_config(const std::string& name) {
  RunConfig cfg;
  cfg.thresholds = std::vector<double>{10.0, 0.0};
  cfg.r_grid = RadialGrid{8.0, 401};
  cfg.e_grid = EnergyGrid{0.0, 20.0, 801};

  const double alpha = -2.0;
  const double beta = 0.6;
  RealMatrix u0(2, 2);
  u0 << alpha, beta, beta, alpha;

  if (name == "fig1" || name == "fig2") {
    const double kappa2 = (name == "fig1") ? 3.0 : 2.2;
    cfg.factorization_energy = -kappa2 * kappa2;
    cfg.parametrization = U0Config{u0};
    return cfg;
  }
  if (name == "fig3") {
    // boundary value where the coupled model drops to a single growing
    // direction; recomputed here rather than hard-coded
    const double kappa2 = rank1_kappa2_root(10.0, alpha, alpha, beta);
    cfg.factorization_energy = -kappa2 * kappa2;
    ChannelSet channels(*cfg.thresholds);
    FactorizationSpec spec(channels, *cfg.factorization_energy);
    const RankOneModel2x2 model = RankOneModel2x2::from_u0(spec, alpha, alpha, beta);
    CanonicalConfig c;
    c.rank = 1;
    c.primed = {0};
    c.q0 = RealMatrix(1, 1);
    c.q0(0, 0) = model.q0();
    c.x0 = RealMatrix(1, 1);
    c.x0(0, 0) = model.x0();
    cfg.parametrization = std::move(c);
    return cfg;
  }
  throw ConfigError("parametrization.name: unknown preset '" + name +
                    "' (available: fig1, fig2, fig3)");
}

RunConfig resolve_config(const RunConfig& cfg) {
  RunConfig out = cfg;
  if (const auto* preset = std::get_if<PresetConfig>(&cfg.parametrization)) {
    if (cfg.thresholds || cfg.factorization_energy || cfg.factorization_kappa)
      throw ConfigError(
          "config: preset mode defines channels and factorization; remove those sections");
    RunConfig base = make_preset_config(preset->name);
    base.bound_scan = cfg.bound_scan;
    base.out_directory = cfg.out_directory;
    base.formats = cfg.formats;
    if (cfg.r_grid) base.r_grid = cfg.r_grid;
    if (cfg.e_grid) base.e_grid = cfg.e_grid;
    out = std::move(base);
  }
  if (!out.thresholds) throw ConfigError("channels.thresholds: required");
  if (!out.factorization_energy && !out.factorization_kappa)
    throw ConfigError("factorization: required");
  if (!out.r_grid) out.r_grid = RadialGrid{};
  if (!out.e_grid) out.e_grid = EnergyGrid{};
  return out;
}

std::string serialize_config(const RunConfig& cfg) {
  json j;
  if (cfg.thresholds) j["channels"]["thresholds"] = *cfg.thresholds;
  if (cfg.factorization_energy) j["factorization"]["energy"] = *cfg.factorization_energy;
  if (cfg.factorization_kappa) j["factorization"]["kappa"] = *cfg.factorization_kappa;

  if (const auto* u = std::get_if<U0Config>(&cfg.parametrization)) {
    j["parametrization"]["mode"] = "u0";
    j["parametrization"]["matrix"] = matrix_to_json(u->matrix);
  } else if (const auto* c = std::get_if<CanonicalConfig>(&cfg.parametrization)) {
    j["parametrization"]["mode"] = "canonical";
    j["parametrization"]["rank"] = c->rank;
    j["parametrization"]["primed"] = c->primed;
    j["parametrization"]["q0"] = matrix_to_json(c->q0);
    j["parametrization"]["x0"] = matrix_to_json(c->x0);
  } else if (const auto* p = std::get_if<PresetConfig>(&cfg.parametrization)) {
    j["parametrization"]["mode"] = "preset";
    j["parametrization"]["name"] = p->name;
  }

  if (cfg.r_grid) {
    j["r_grid"]["r_max"] = cfg.r_grid->r_max;
    j["r_grid"]["n_points"] = cfg.r_grid->n_points;
  }
  if (cfg.e_grid) {
    j["e_grid"]["e_min"] = cfg.e_grid->e_min;
    j["e_grid"]["e_max"] = cfg.e_grid->e_max;
    j["e_grid"]["n_points"] = cfg.e_grid->n_points;
  }
  if (cfg.bound_scan.e_min) j["bound_states"]["e_min"] = *cfg.bound_scan.e_min;
  if (cfg.bound_scan.e_max) j["bound_states"]["e_max"] = *cfg.bound_scan.e_max;
  j["bound_states"]["n_grid"] = cfg.bound_scan.n_grid;
  j["outputs"]["directory"] = cfg.out_directory;
  j["outputs"]["formats"] = cfg.formats;
  return j.dump(2) + "\n";
}

BuiltTransform build_transform(const RunConfig& resolved) {
  if (!resolved.thresholds) throw ConfigError("channels.thresholds: required");
  ChannelSet channels(*resolved.thresholds);
  FactorizationSpec spec =
      resolved.factorization_energy
          ? FactorizationSpec(channels, *resolved.factorization_energy)
          : FactorizationSpec::from_kappa(channels, *resolved.factorization_kappa);

  if (const auto* u = std::get_if<U0Config>(&resolved.parametrization)) {
    if (u->matrix.rows() != channels.size())
      throw ConfigError("parametrization.matrix: order must match the channel count");
    return BuiltTransform{spec, make_transform(spec, U0Parametrization(u->matrix))};
  }
  if (const auto* c = std::get_if<CanonicalConfig>(&resolved.parametrization)) {
    if (c->rank < 0 || c->rank > channels.size())
      throw ConfigError("parametrization.rank: out of range");
    std::vector<int> primed = c->primed;
    if (primed.empty() && c->rank > 0) {
      primed.resize(static_cast<std::size_t>(channels.size()));
      std::iota(primed.begin(), primed.end(), 0);
      std::sort(primed.begin(), primed.end(), [&](int a, int b) {
        return channels.threshold(a) > channels.threshold(b);
      });
      primed.resize(static_cast<std::size_t>(c->rank));
    }
    if (static_cast<int>(primed.size()) != c->rank)
      throw ConfigError("parametrization.primed: length must equal rank");
    RealMatrix q0 = c->q0;
    if (q0.size() == 0) q0 = RealMatrix::Zero(channels.size() - c->rank, c->rank);
    RealMatrix x0 = c->x0;
    if (x0.size() == 0) x0 = RealMatrix::Zero(c->rank, c->rank);
    try {
      CanonicalParametrization param(spec, primed, q0, x0);
      return BuiltTransform{spec, make_transform(spec, param)};
    } catch (const DimensionMismatch& e) {
      throw ConfigError(std::string("parametrization: ") + e.what());
    }
  }
  throw ConfigError("config: unresolved preset; call resolve_config first");
}

}  // namespace ccsusy
