#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "bijmap/degree.hpp"
#include "bijmap/pipeline.hpp"

namespace {

using namespace bijmap;

struct Common {
  std::string problem;
  std::optional<std::string> mode;
  std::optional<double> K;
  std::optional<std::uint64_t> seed;
  std::optional<double> tolerance;
  std::string out_dir;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("problem", c.problem, "problem file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--mode", c.mode, "feasibility, free or fixed-uniform (overrides the problem file)");
  cmd->add_option("--K", c.K, "condition-number bound (overrides the problem file)");
  cmd->add_option("--seed", c.seed, "seed for randomized queries");
  cmd->add_option("--tolerance", c.tolerance, "constraint tolerance relative to the polygon diameter");
}

Problem load(const Common& c) {
  ProblemFile pf = parse_problem_text(read_text(c.problem), std::filesystem::path(c.problem).parent_path());
  if (c.mode) pf.mode = parse_mode(*c.mode);
  if (c.K) {
    if (!(*c.K > 1.0)) throw ParameterError("--K must be > 1");
    pf.K = *c.K;
  }
  if (c.seed) pf.seed = *c.seed;
  if (c.tolerance) {
    if (!(*c.tolerance > 0.0)) throw ParameterError("--tolerance must be positive");
    pf.eps_con_rel = *c.tolerance;
  }
  return resolve_problem(pf);
}

CertifyOptions certify_options(const Problem& p) {
  CertifyOptions o;
  o.eps_con_rel = p.file.eps_con_rel;
  return o;
}

void print_certificates(const std::vector<Certificate>& cs) {
  for (const auto& c : cs) std::printf("%s\n", describe(c).c_str());
}

int cmd_solve(const Common& c) {
  const Problem p = load(c);
  const RunReport r = run(p);
  for (const auto& n : r.notes) std::printf("note: %s\n", n.c_str());
  for (const auto& t : r.feasibility) std::printf("feasibility t = %.9g (%s)\n", t.value, to_string(t.solver_status));
  for (const auto& t : r.energy) {
    std::printf("energy %.12g (%s)%s\n", t.value, to_string(t.solver_status), t.accepted ? "" : " rejected");
  }
  if (!std::isnan(r.final_energy)) std::printf("dirichlet energy %.12g\n", r.final_energy);
  print_certificates(r.certificates);
  if (!c.out_dir.empty()) write_artifacts(r, p.polygon, c.out_dir);
  if (!r.ok) std::fprintf(stderr, "failed at %s: %s\n", r.stage.c_str(), r.message.c_str());
  return r.ok ? 0 : 1;
}

int cmd_certify(const Common& c, const std::string& mapped, const std::string& theorem) {
  const Problem p = load(c);
  const SimplicialMap map = load_mapped_obj(mapped, p.mesh);
  const auto certs = certify_all(map, p.polygon, p.assignment, certify_options(p));
  print_certificates(certs);
  const Theorem want = parse_theorem(theorem);
  for (const auto& cert : certs) {
    if (cert.theorem == want) return cert.certified() ? 0 : 1;
  }
  return 1;
}

int cmd_degree(const Common& c, const std::string& mapped, const std::vector<double>& q) {
  const Problem p = load(c);
  const SimplicialMap map = load_mapped_obj(mapped, p.mesh);
  if (q.size() != 2) throw InputError("--q takes two coordinates");
  DegreeOptions o;
  o.seed = p.file.seed;
  const PreimageCheck r = theorem4_check(map, Eigen::Vector2d(q[0], q[1]), o);
  std::printf("degree %d\npreimages %d\ninequality %s\n", r.degree, r.preimages, r.inequality_holds ? "holds" : "fails");
  if (r.equality_expected) {
    std::printf("equality %s\n", r.equality_holds ? "holds" : "fails");
  } else {
    std::printf("equality not expected (q lies on the image of an edge)\n");
  }
  return r.inequality_holds && (!r.equality_expected || r.equality_holds) ? 0 : 1;
}

int cmd_render(const Common& c, const std::string& mapped) {
  const Problem p = load(c);
  const SimplicialMap map = load_mapped_obj(mapped, p.mesh);
  const std::filesystem::path dir = c.out_dir.empty() ? "." : c.out_dir;
  std::filesystem::create_directories(dir);
  write_text(dir / "map.svg", render_svg(map, p.polygon, Coloring::none));
  write_text(dir / "gradient.svg", render_svg(map, p.polygon, Coloring::gradient_norm));
  std::printf("wrote %s and %s\n", (dir / "map.svg").string().c_str(), (dir / "gradient.svg").string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bijective simplicial maps onto planar polygons"};
  app.require_subcommand(1);

  Common solve_c, cert_c, deg_c, render_c;
  std::string cert_map, cert_theorem = "T2", deg_map, render_map;
  std::vector<double> q;

  auto* solve = app.add_subcommand("solve", "optimize a map for a problem file and certify it");
  add_common(solve, solve_c);
  solve->add_option("--out-dir", solve_c.out_dir, "write mapped.obj, report.txt and SVGs here");

  auto* certify = app.add_subcommand("certify", "certify a mapped OBJ against a problem");
  add_common(certify, cert_c);
  certify->add_option("mapped", cert_map, "mapped OBJ")->required()->check(CLI::ExistingFile);
  certify->add_option("--theorem", cert_theorem, "certificate that decides the exit code")
      ->check(CLI::IsMember({"necessary", "T1", "T2", "T3"}));

  auto* degree = app.add_subcommand("degree", "boundary degree and pre-image count at a point");
  add_common(degree, deg_c);
  degree->add_option("mapped", deg_map, "mapped OBJ")->required()->check(CLI::ExistingFile);
  degree->add_option("--q", q, "query point x y")->required()->expected(2);

  auto* render = app.add_subcommand("render", "write map.svg and gradient.svg for a mapped OBJ");
  add_common(render, render_c);
  render->add_option("mapped", render_map, "mapped OBJ")->required()->check(CLI::ExistingFile);
  render->add_option("--out-dir", render_c.out_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }
  try {
    if (*solve) return cmd_solve(solve_c);
    if (*certify) return cmd_certify(cert_c, cert_map, cert_theorem);
    if (*degree) return cmd_degree(deg_c, deg_map, q);
    if (*render) return cmd_render(render_c, render_map);
  } catch (const LoadError& e) {
    if (e.line() > 0) {
      std::fprintf(stderr, "error (line %d): %s\n", e.line(), e.what());
    } else {
      std::fprintf(stderr, "error: %s\n", e.what());
    }
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 2;
}
