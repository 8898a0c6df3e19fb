#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hmflow/artifacts.hpp"
#include "hmflow/quad_diff.hpp"
#include "hmflow/surface.hpp"

namespace hmflow {

struct TriangulationConfig {
  std::string preset = "once-punctured-torus";  // or "one-holed-torus", "custom"
  int boundary_marked = 1;                      // one-holed-torus only
  std::vector<std::array<int, 3>> sides;        // custom only
  std::vector<std::string> names;
};

struct PrincipalPartConfig {
  int end = 0;
  PrincipalPart pp;
  double boundary_length = 0.0;
  bool request_residue = false;
};

struct PerturbationConfig {
  cplx center{2.5, 1.7};
  double radius = 0.5;
  double amplitude = 0.3;
  std::array<double, 3> direction{1.0, 1.0, 1.0};
};

struct MetricConfig {
  std::optional<ModelDifferential> differential;
  std::vector<double> eps;  // per modification feature; empty keeps defaults
  double y_trunc = 3.0;     // modular torus cusp truncation
  double r_in = 3.0, r_out = 8.0;  // crown annulus in |zeta|
};

struct FlowSettings {
  std::string domain = "modular-torus";  // "flat-strip", "crown-end"
  int refinement = 1;
  double cfl = 0.2;
  double dt = 0.0;
  double tol_tau = 1e-5;
  double t_max = 200.0;
  long max_steps = 2000000;
  double energy_tol = 1e-8;
  double growth_tol = 1e-3;
  PerturbationConfig perturbation;
  double collar_lo = 1.5, collar_hi = 2.2;
  double strip_t0 = 0.5;  // flat-strip initial height
};

struct OutputConfig {
  std::string directory = "hmflow-out";
  int cadence = 100;
  bool plots = true;
};

struct RunConfig {
  MarkedBorderedSurface surface;
  std::vector<std::string> puncture_kinds;  // "cusp" or "cylinder" per interior puncture
  TriangulationConfig triangulation;
  std::vector<cplx> coordinates;  // per edge id
  std::map<std::string, cplx> named_coordinates;
  Signing signing;
  std::vector<PrincipalPartConfig> principal_parts;
  MetricConfig metric;
  FlowSettings flow;
  OutputConfig output;
  std::uint64_t seed = 1;
};

namespace detail {

class Reader {
 public:
  explicit Reader(std::vector<std::string>* errors) : errors_(errors) {}

  void fail(const std::string& path, const std::string& what) { errors_->push_back(path + ": " + what); }

  bool number(const Json& j, const std::string& path, double& out)
  {
    if (!j.is_number()) {
      fail(path, "expected a number");
      return false;
    }
    out = j.get<double>();
    return true;
  }

  bool integer(const Json& j, const std::string& path, long& out)
  {
    if (!j.is_number_integer()) {
      fail(path, "expected an integer");
      return false;
    }
    out = j.get<long>();
    return true;
  }

  bool complex(const Json& j, const std::string& path, cplx& out)
  {
    if (j.is_number()) {
      out = j.get<double>();
      return true;
    }
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
      fail(path, "expected a complex number [re, im]");
      return false;
    }
    out = {j[0].get<double>(), j[1].get<double>()};
    return true;
  }

  template <class F>
  void field(const Json& obj, const std::string& path, const char* key, F&& f)
  {
    if (obj.contains(key)) f(obj.at(key), path + "/" + key);
  }

  void opt_number(const Json& obj, const std::string& path, const char* key, double& out)
  {
    field(obj, path, key, [&](const Json& j, const std::string& p) { number(j, p, out); });
  }

  template <class I>
  void opt_int(const Json& obj, const std::string& path, const char* key, I& out)
  {
    field(obj, path, key, [&](const Json& j, const std::string& p) {
      long v = 0;
      if (integer(j, p, v)) out = I(v);
    });
  }

  void opt_bool(const Json& obj, const std::string& path, const char* key, bool& out)
  {
    field(obj, path, key, [&](const Json& j, const std::string& p) {
      if (j.is_boolean()) out = j.get<bool>();
      else if (j.is_string() && (j == "on" || j == "off")) out = j == "on";
      else fail(p, "expected a boolean or \"on\"/\"off\"");
    });
  }

  void opt_string(const Json& obj, const std::string& path, const char* key, std::string& out,
                  std::initializer_list<const char*> allowed = {})
  {
    field(obj, path, key, [&](const Json& j, const std::string& p) {
      if (!j.is_string()) return fail(p, "expected a string");
      out = j.get<std::string>();
      if (allowed.size() == 0) return;
      for (const char* a : allowed)
        if (out == a) return;
      std::string list;
      for (const char* a : allowed) list += std::string(list.empty() ? "" : ", ") + a;
      fail(p, "must be one of " + list);
    });
  }

  bool object(const Json& j, const std::string& path)
  {
    if (j.is_object()) return true;
    fail(path, "expected an object");
    return false;
  }

  bool array(const Json& j, const std::string& path)
  {
    if (j.is_array()) return true;
    fail(path, "expected an array");
    return false;
  }

  void unknown_keys(const Json& obj, const std::string& path, std::initializer_list<const char*> known)
  {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      bool ok = false;
      for (const char* k : known) ok = ok || it.key() == k;
      if (!ok) fail(path + "/" + it.key(), "unknown key");
    }
  }

 private:
  std::vector<std::string>* errors_;
};

inline void read_principal_part(Reader& rd, const Json& j, const std::string& path, PrincipalPartConfig& out)
{
  if (!rd.object(j, path)) return;
  rd.unknown_keys(j, path, {"end", "order", "coeffs", "leading", "boundary_length", "request_residue"});
  rd.opt_int(j, path, "end", out.end);
  rd.opt_int(j, path, "order", out.pp.order);
  rd.field(j, path, "coeffs", [&](const Json& a, const std::string& p) {
    if (!rd.array(a, p)) return;
    out.pp.coeffs.resize(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) rd.complex(a[i], p + "/" + std::to_string(i), out.pp.coeffs[i]);
  });
  rd.field(j, path, "leading", [&](const Json& a, const std::string& p) { rd.complex(a, p, out.pp.leading); });
  rd.opt_number(j, path, "boundary_length", out.boundary_length);
  rd.opt_bool(j, path, "request_residue", out.request_residue);
  if (out.pp.order < 1) rd.fail(path + "/order", "pole order must be >= 1");
  else if (out.pp.order >= 3 && int(out.pp.coeffs.size()) != out.pp.r())
    rd.fail(path + "/coeffs", "order " + std::to_string(out.pp.order) + " needs " + std::to_string(out.pp.r()) +
                                  " coefficients");
  else if (out.pp.order >= 3 && std::abs(out.pp.coeffs.back()) == 0.0)
    rd.fail(path + "/coeffs", "leading coefficient is zero");
}

inline void read_differential(Reader& rd, const Json& j, const std::string& path, ModelDifferential& q)
{
  if (!rd.object(j, path)) return;
  rd.unknown_keys(j, path, {"genus", "scale", "zeros", "poles"});
  rd.opt_int(j, path, "genus", q.genus);
  rd.field(j, path, "scale", [&](const Json& a, const std::string& p) { rd.complex(a, p, q.scale); });
  rd.field(j, path, "zeros", [&](const Json& a, const std::string& p) {
    if (!rd.array(a, p)) return;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const std::string pi = p + "/" + std::to_string(i);
      ModelDifferential::Zero z{0.0, 1};
      if (!rd.object(a[i], pi)) continue;
      rd.field(a[i], pi, "position", [&](const Json& v, const std::string& pp) { rd.complex(v, pp, z.position); });
      rd.opt_int(a[i], pi, "order", z.order);
      q.zeros.push_back(z);
    }
  });
  rd.field(j, path, "poles", [&](const Json& a, const std::string& p) {
    if (!rd.array(a, p)) return;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const std::string pi = p + "/" + std::to_string(i);
      ModelDifferential::Pole pole{1, {cplx(1.0)}, std::nullopt};
      if (!rd.object(a[i], pi)) continue;
      rd.opt_int(a[i], pi, "order", pole.order);
      rd.field(a[i], pi, "laurent", [&](const Json& v, const std::string& pp) {
        if (!rd.array(v, pp)) return;
        pole.laurent.resize(v.size());
        for (std::size_t k = 0; k < v.size(); ++k) rd.complex(v[k], pp + "/" + std::to_string(k), pole.laurent[k]);
      });
      rd.field(a[i], pi, "position", [&](const Json& v, const std::string& pp) {
        cplx z;
        if (rd.complex(v, pp, z)) pole.position = z;
      });
      q.poles.push_back(pole);
    }
  });
}

}  // namespace detail

/// Parses and schema-checks a run configuration; every problem is reported
/// with its JSON path in a single Stage::config error.
inline RunConfig parse_config(const Json& j)
{
  std::vector<std::string> errors;
  detail::Reader rd(&errors);
  RunConfig c;
  if (!rd.object(j, "")) throw Error(Stage::config, "config root must be an object");
  rd.unknown_keys(j, "", {"surface", "triangulation", "coordinates", "signing", "principal_parts", "metric", "flow",
                          "output", "seed"});

  rd.field(j, "", "surface", [&](const Json& s, const std::string& p) {
    if (!rd.object(s, p)) return;
    rd.unknown_keys(s, p, {"genus", "boundary_marked", "punctures", "puncture_kinds"});
    rd.opt_int(s, p, "genus", c.surface.genus);
    rd.opt_int(s, p, "punctures", c.surface.punctures);
    rd.field(s, p, "boundary_marked", [&](const Json& a, const std::string& pp) {
      if (!rd.array(a, pp)) return;
      for (std::size_t i = 0; i < a.size(); ++i) {
        long n = 0;
        if (rd.integer(a[i], pp + "/" + std::to_string(i), n)) c.surface.boundary_marked.push_back(int(n));
      }
    });
    rd.field(s, p, "puncture_kinds", [&](const Json& a, const std::string& pp) {
      if (!rd.array(a, pp)) return;
      for (std::size_t i = 0; i < a.size(); ++i) {
        const std::string pi = pp + "/" + std::to_string(i);
        if (!a[i].is_string() || (a[i] != "cusp" && a[i] != "cylinder")) rd.fail(pi, "must be \"cusp\" or \"cylinder\"");
        else c.puncture_kinds.push_back(a[i].get<std::string>());
      }
    });
  });

  rd.field(j, "", "triangulation", [&](const Json& t, const std::string& p) {
    if (!rd.object(t, p)) return;
    rd.unknown_keys(t, p, {"preset", "boundary_marked", "sides", "names"});
    rd.opt_string(t, p, "preset", c.triangulation.preset, {"once-punctured-torus", "one-holed-torus", "custom"});
    rd.opt_int(t, p, "boundary_marked", c.triangulation.boundary_marked);
    rd.field(t, p, "sides", [&](const Json& a, const std::string& pp) {
      if (!rd.array(a, pp)) return;
      for (std::size_t i = 0; i < a.size(); ++i) {
        const std::string pi = pp + "/" + std::to_string(i);
        if (!a[i].is_array() || a[i].size() != 3) {
          rd.fail(pi, "expected three edge ids");
          continue;
        }
        std::array<int, 3> tri{};
        for (int k = 0; k < 3; ++k) {
          long e = 0;
          if (rd.integer(a[i][k], pi + "/" + std::to_string(k), e)) tri[k] = int(e);
        }
        c.triangulation.sides.push_back(tri);
      }
    });
    rd.field(t, p, "names", [&](const Json& a, const std::string& pp) {
      if (!rd.array(a, pp)) return;
      for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].is_string()) c.triangulation.names.push_back(a[i].get<std::string>());
        else rd.fail(pp + "/" + std::to_string(i), "expected a string");
      }
    });
    if (c.triangulation.preset == "custom" && c.triangulation.sides.empty())
      rd.fail(p + "/sides", "custom triangulation needs sides");
  });

  rd.field(j, "", "coordinates", [&](const Json& a, const std::string& p) {
    if (a.is_array()) {
      c.coordinates.resize(a.size());
      for (std::size_t i = 0; i < a.size(); ++i) rd.complex(a[i], p + "/" + std::to_string(i), c.coordinates[i]);
    } else if (a.is_object()) {
      for (auto it = a.begin(); it != a.end(); ++it) {
        cplx z;
        if (rd.complex(it.value(), p + "/" + it.key(), z)) c.named_coordinates[it.key()] = z;
      }
    } else {
      rd.fail(p, "expected an array of [re, im] or an object keyed by edge name");
    }
  });

  rd.field(j, "", "signing", [&](const Json& a, const std::string& p) {
    if (!rd.array(a, p)) return;
    for (std::size_t i = 0; i < a.size(); ++i) {
      long s = 0;
      if (rd.integer(a[i], p + "/" + std::to_string(i), s)) {
        if (s != 1 && s != -1) rd.fail(p + "/" + std::to_string(i), "sign must be +1 or -1");
        c.signing.sign.push_back(int(s));
      }
    }
  });

  rd.field(j, "", "principal_parts", [&](const Json& a, const std::string& p) {
    if (!rd.array(a, p)) return;
    c.principal_parts.resize(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
      detail::read_principal_part(rd, a[i], p + "/" + std::to_string(i), c.principal_parts[i]);
  });

  rd.field(j, "", "metric", [&](const Json& m, const std::string& p) {
    if (!rd.object(m, p)) return;
    rd.unknown_keys(m, p, {"differential", "eps", "y_trunc", "r_in", "r_out"});
    rd.field(m, p, "differential", [&](const Json& d, const std::string& pp) {
      ModelDifferential q;
      detail::read_differential(rd, d, pp, q);
      c.metric.differential = q;
    });
    rd.field(m, p, "eps", [&](const Json& a, const std::string& pp) {
      if (!rd.array(a, pp)) return;
      for (std::size_t i = 0; i < a.size(); ++i) {
        double e = 0.0;
        if (rd.number(a[i], pp + "/" + std::to_string(i), e)) {
          if (!(e > 0.0 && e < 1.0)) rd.fail(pp + "/" + std::to_string(i), "eps must lie in (0, 1)");
          c.metric.eps.push_back(e);
        }
      }
    });
    rd.opt_number(m, p, "y_trunc", c.metric.y_trunc);
    rd.opt_number(m, p, "r_in", c.metric.r_in);
    rd.opt_number(m, p, "r_out", c.metric.r_out);
  });

  rd.field(j, "", "flow", [&](const Json& f, const std::string& p) {
    if (!rd.object(f, p)) return;
    rd.unknown_keys(f, p, {"domain", "refinement", "cfl", "dt", "tol_tau", "t_max", "max_steps", "energy_tol",
                           "growth_tol", "perturbation", "collar", "strip_t0"});
    auto& s = c.flow;
    rd.opt_string(f, p, "domain", s.domain, {"modular-torus", "flat-strip", "crown-end"});
    rd.opt_int(f, p, "refinement", s.refinement);
    rd.opt_number(f, p, "cfl", s.cfl);
    rd.opt_number(f, p, "dt", s.dt);
    rd.opt_number(f, p, "tol_tau", s.tol_tau);
    rd.opt_number(f, p, "t_max", s.t_max);
    rd.opt_int(f, p, "max_steps", s.max_steps);
    rd.opt_number(f, p, "energy_tol", s.energy_tol);
    rd.opt_number(f, p, "growth_tol", s.growth_tol);
    rd.opt_number(f, p, "strip_t0", s.strip_t0);
    rd.field(f, p, "perturbation", [&](const Json& q, const std::string& pp) {
      if (!rd.object(q, pp)) return;
      rd.unknown_keys(q, pp, {"center", "radius", "amplitude", "direction"});
      rd.field(q, pp, "center", [&](const Json& v, const std::string& ppp) { rd.complex(v, ppp, s.perturbation.center); });
      rd.opt_number(q, pp, "radius", s.perturbation.radius);
      rd.opt_number(q, pp, "amplitude", s.perturbation.amplitude);
      rd.field(q, pp, "direction", [&](const Json& v, const std::string& ppp) {
        if (!v.is_array() || v.size() != 3) return rd.fail(ppp, "expected three numbers");
        for (int k = 0; k < 3; ++k) rd.number(v[k], ppp + "/" + std::to_string(k), s.perturbation.direction[k]);
      });
    });
    rd.field(f, p, "collar", [&](const Json& v, const std::string& pp) {
      if (!v.is_array() || v.size() != 2) return rd.fail(pp, "expected [lo, hi]");
      rd.number(v[0], pp + "/0", s.collar_lo);
      rd.number(v[1], pp + "/1", s.collar_hi);
    });
    if (s.refinement < 0 || s.refinement > 5) rd.fail(p + "/refinement", "must lie in 0..5");
    if (!(s.cfl > 0.0 && s.cfl <= 0.25)) rd.fail(p + "/cfl", "must lie in (0, 0.25]");
    if (s.dt < 0.0) rd.fail(p + "/dt", "must be >= 0");
    if (!(s.tol_tau > 0.0)) rd.fail(p + "/tol_tau", "must be > 0");
    if (!(s.t_max > 0.0)) rd.fail(p + "/t_max", "must be > 0");
    if (!(s.collar_lo < s.collar_hi)) rd.fail(p + "/collar", "needs lo < hi");
    if (!(s.perturbation.amplitude >= 0.0 && s.perturbation.amplitude <= 0.3))
      rd.fail(p + "/perturbation/amplitude", "must lie in [0, 0.3]");
  });

  rd.field(j, "", "output", [&](const Json& o, const std::string& p) {
    if (!rd.object(o, p)) return;
    rd.unknown_keys(o, p, {"directory", "cadence", "plots"});
    rd.opt_string(o, p, "directory", c.output.directory);
    rd.opt_int(o, p, "cadence", c.output.cadence);
    rd.opt_bool(o, p, "plots", c.output.plots);
    if (c.output.cadence < 1) rd.fail(p + "/cadence", "must be >= 1");
  });

  rd.opt_int(j, "", "seed", c.seed);

  if (!errors.empty()) {
    std::string msg = "invalid config";
    for (const auto& e : errors) msg += "\n  " + (e.front() == ':' ? "/" + e : e);
    throw Error(Stage::config, msg);
  }
  return c;
}

inline RunConfig load_config(const std::filesystem::path& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Stage::config, "cannot read config " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Stage::config, path.string() + ": " + e.what());
  }
  return parse_config(j);
}

inline IdealTriangulation make_triangulation(const RunConfig& c)
{
  const auto& t = c.triangulation;
  if (t.preset == "once-punctured-torus") return once_punctured_torus();
  if (t.preset == "one-holed-torus") return one_holed_torus(t.boundary_marked);
  return IdealTriangulation(t.sides, t.names);
}

/// Coordinates by edge id; named entries override positional ones, unset edges default to 1.
inline FGCoords make_coordinates(const RunConfig& c, const IdealTriangulation& tri)
{
  FGCoords z{std::vector<cplx>(tri.num_edges(), cplx(1.0))};
  if (!c.coordinates.empty() && int(c.coordinates.size()) != tri.num_edges())
    throw Error(Stage::config, "/coordinates: expected " + std::to_string(tri.num_edges()) + " entries, got " +
                                   std::to_string(c.coordinates.size()));
  for (std::size_t e = 0; e < c.coordinates.size(); ++e) z.z[e] = c.coordinates[e];
  for (const auto& [name, v] : c.named_coordinates) {
    int id = -1;
    for (int e = 0; e < tri.num_edges(); ++e)
      if (tri.edge_name(e) == name) id = e;
    if (id < 0) throw Error(Stage::config, "/coordinates/" + name + ": no edge with this name");
    z.z[id] = v;
  }
  return z;
}

inline std::vector<EndKind> make_puncture_kinds(const RunConfig& c)
{
  std::vector<EndKind> k;
  for (const auto& s : c.puncture_kinds) k.push_back(s == "cylinder" ? EndKind::cylinder : EndKind::cusp);
  return k;
}

}  // namespace hmflow
