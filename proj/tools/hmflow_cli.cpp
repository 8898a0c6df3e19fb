#include <CLI11.hpp>

#include <chrono>
#include <iostream>

#include "hmflow/pipeline.hpp"

using namespace hmflow;
namespace fs = std::filesystem;

namespace {

enum Exit { ok = 0, validation = 2, nonconvergence = 3, internal = 4 };

struct Options {
  std::string config;
  std::string out;
  int refine = -1;
  long seed = -1;
  std::string plots = "on";
};

RunConfig load(const Options& o)
{
  if (o.config.empty()) throw Error(Stage::config, "--config is required for this command");
  RunConfig c = load_config(o.config);
  if (o.refine >= 0) {
    if (o.refine > 5) throw Error(Stage::config, "--refine must lie in 0..5");
    c.flow.refinement = o.refine;
  }
  if (o.seed >= 0) c.seed = std::uint64_t(o.seed);
  if (o.plots == "off") c.output.plots = false;
  return c;
}

fs::path out_dir(const Options& o, const RunConfig* c)
{
  if (!o.out.empty()) return o.out;
  return c ? fs::path(c->output.directory) : fs::path("hmflow-out");
}

void print(const Json& j) { std::cout << j.dump(2) << "\n"; }

/// Library self-checks that need no config.
Json validate_suite()
{
  Json items = Json::array();
  auto item = [&](const std::string& name, bool pass, double value) {
    items.push_back({{"name", name}, {"ok", pass}, {"value", value}});
  };
  {
    const auto z = zero_interp_coeffs(1, 0.1);
    item("zero interpolation coefficients for n = 1, eps = 0.1",
         std::abs(z.a + 125.0) < 1e-9 && std::abs(z.b - 7.5) < 1e-12 && std::abs(z.c - 0.0375) < 1e-14, z.a);
  }
  for (const auto& [name, tri] :
       std::vector<std::pair<std::string, IdealTriangulation>>{{"once-punctured torus", once_punctured_torus()},
                                                                {"one-holed torus", one_holed_torus(1)}}) {
    FGCoords z{std::vector<cplx>(tri.num_edges(), cplx(1.3, 0.2))};
    BuiltRep b{tri, z, holonomy(develop(tri, z)), ends(tri)};
    const double rel = relator_residual(b.rep, tri);
    const double rt = fg_round_trip_error(b);
    item(name + " relator residual", rel < 1e-9, rel);
    item(name + " coordinate round trip", rt < 1e-9, rt);
  }
  {
    const auto tri = once_punctured_torus();
    FGCoords z{std::vector<cplx>(tri.num_edges(), cplx(1.0))};
    const auto rep = holonomy(develop(tri, z));
    bool found = true;
    try {
      modular_target(rep);
    } catch (const Error&) {
      found = false;
    }
    item("unit coordinates conjugate to the modular torus group", found, found ? 0.0 : 1.0);
  }
  {
    const MobiusMap A{2.0, 1.0, 1.0, 1.0};
    const double L = translation_length(A);
    const double want = 2.0 * std::acosh(1.5);
    item("translation length of [[2,1],[1,1]]", std::abs(L - want) < 1e-12, L);
  }
  bool all = true;
  for (const auto& i : items) all = all && i["ok"].get<bool>();
  return {{"ok", all}, {"items", items}};
}

}  // namespace

int main(int argc, char** argv)
{
  CLI::App app{"harmonic map heat flow into hyperbolic space from Fock-Goncharov coordinates"};
  app.require_subcommand(1);
  Options o;
  auto common = [&](CLI::App* sub, bool needs_config) {
    auto* opt = sub->add_option("--config", o.config, "JSON run configuration");
    if (needs_config) opt->required();
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--refine", o.refine, "mesh refinement level (overrides the config)");
    sub->add_option("--seed", o.seed, "seed recorded with the run");
    sub->add_option("--plots", o.plots, "write SVG plots")->check(CLI::IsMember({"on", "off"}));
  };
  auto* check = app.add_subcommand("check", "validate the surface, coordinates and principal parts");
  auto* build = app.add_subcommand("build-rep", "build the framed representation");
  auto* metric = app.add_subcommand("make-metric", "assemble and audit the domain metric");
  auto* init = app.add_subcommand("init-map", "assemble the initial map and audit its tension");
  auto* flowc = app.add_subcommand("flow", "run the heat flow and write artifacts");
  auto* report = app.add_subcommand("report", "summarise a finished run directory");
  auto* interp = app.add_subcommand("interp-demo", "zero interpolation coefficients and profile");
  auto* validate = app.add_subcommand("validate", "library self-checks");
  for (auto* s : {check, build, metric, init, flowc}) common(s, true);
  std::string run_dir;
  report->add_option("dir", run_dir, "run directory")->required();
  int interp_n = 1;
  double interp_eps = 0.1;
  interp->add_option("n", interp_n, "zero order")->required()->check(CLI::PositiveNumber);
  interp->add_option("eps", interp_eps, "interpolation radius")->required()->check(CLI::Range(0.0, 1.0));
  interp->add_option("--out", o.out, "output directory");
  interp->add_option("--plots", o.plots, "write SVG plots")->check(CLI::IsMember({"on", "off"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? Exit::ok : Exit::validation;
  }

  const auto t0 = std::chrono::steady_clock::now();
  int code = Exit::ok;
  try {
    if (*check) {
      const RunConfig c = load(o);
      const auto r = run_check(c);
      const Json j = r.to_json();
      if (!o.out.empty()) write_json(fs::path(o.out) / "check.json", j);
      print(j);
      for (const auto& i : r.items)
        if (!i.ok) std::cerr << "violated: " << i.requirement << " (" << i.name << ": " << i.detail << ")\n";
      for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
      code = r.ok() ? Exit::ok : Exit::validation;
    } else if (*build) {
      const RunConfig c = load(o);
      const auto r = run_check(c);
      if (!r.ok()) {
        print(r.to_json());
        return Exit::validation;
      }
      const Json j = rep_json(build_representation(c));
      write_json(out_dir(o, &c) / "representation.json", j);
      print(j);
    } else if (*metric) {
      const RunConfig c = load(o);
      print(run_make_metric(c, out_dir(o, &c), c.output.plots));
    } else if (*init) {
      const RunConfig c = load(o);
      std::optional<BuiltRep> b;
      if (c.flow.domain != "flat-strip") b = build_representation(c);
      auto s = run_init(c, b ? &*b : nullptr);
      write_json(out_dir(o, &c) / "init.json", s.info);
      print(s.info);
    } else if (*flowc) {
      const RunConfig c = load(o);
      std::optional<BuiltRep> b;
      if (c.flow.domain != "flat-strip") {
        const auto r = run_check(c);
        if (!r.ok()) {
          print(r.to_json());
          return Exit::validation;
        }
        b = build_representation(c);
      }
      const fs::path dir = out_dir(o, &c);
      auto st = run_flow(c, b ? &*b : nullptr, dir, c.output.plots);
      Json j = st.summary;
      j["seed"] = c.seed;
      write_json(dir / "summary.json", j);
      print(j);
      code = st.result.diag.converged ? Exit::ok : Exit::nonconvergence;
    } else if (*report) {
      const Json j = run_report(run_dir);
      print(j);
      code = j["summary"].value("converged", false) ? Exit::ok : Exit::nonconvergence;
    } else if (*interp) {
      const Json j = run_interp_demo(interp_n, interp_eps, out_dir(o, nullptr), o.plots != "off");
      print(j);
      code = j["ok"].get<bool>() ? Exit::ok : Exit::validation;
    } else if (*validate) {
      const Json j = validate_suite();
      print(j);
      code = j["ok"].get<bool>() ? Exit::ok : Exit::internal;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    code = e.stage() == Stage::flow ? Exit::nonconvergence : Exit::validation;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    code = Exit::internal;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::cerr << "runtime " << secs << " s\n";
  return code;
}
