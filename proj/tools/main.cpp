#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "flowtrace/experiments.hpp"
#include "flowtrace/flow.hpp"
#include "flowtrace/norms.hpp"
#include "flowtrace/straighten.hpp"
#include "flowtrace/traceops.hpp"

using namespace flowtrace;

namespace {

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<double> p;
  std::optional<int> grid;
  std::optional<double> delta;
};

Manifest load_manifest(const std::string& path, const Overrides& o) {
  Manifest m = Manifest::load(path);
  if (o.seed) m.experiment.seed = *o.seed;
  if (o.p) m.norms.p = *o.p;
  if (o.grid) m.domain.grid_res = *o.grid;
  if (o.delta) {
    m.norms.delta = *o.delta;
    m.norms_delta_auto = false;
  }
  m.domain.validate();
  m.norms.validate();
  return m;
}

void write_or_print(const std::string& text, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(out, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write '" + out + "'");
  f << text;
}

Point parse_point(const std::string& text, int dim) {
  Point p(dim);
  std::stringstream ss(text);
  std::string item;
  int i = 0;
  while (std::getline(ss, item, ',')) {
    if (i >= dim) throw std::runtime_error("point has too many coordinates");
    p[i++] = std::stod(item);
  }
  if (i != dim) throw std::runtime_error("point needs " + std::to_string(dim) + " coordinates");
  return p;
}

int run_experiment(const std::string& kind, const Manifest& m, const std::string& out,
                   bool verbose) {
  ExperimentReport rep;
  if (kind == "restriction") {
    rep = verify_restriction(m, verbose);
  } else if (kind == "extension") {
    rep = verify_extension(m, verbose);
  } else if (kind == "basis") {
    rep = verify_basis_equivalence(m, verbose);
  } else if (kind == "singular") {
    rep = singular_gain_experiment(m, verbose);
  } else if (kind == "residuals") {
    rep = verify_residuals(m, verbose);
  } else {
    throw std::runtime_error("unknown experiment '" + kind + "'");
  }
  write_or_print(rep.to_csv(), out);
  std::cerr << rep.experiment << ": " << (rep.pass ? "PASS" : "FAIL") << " (maxmin "
            << format_double(rep.maxmin) << ", " << format_double(rep.wall_seconds) << " s)\n";
  return rep.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"flowtrace: trace and extension operators for step-2 vector-field geometries"};
  app.require_subcommand(1);

  std::string config;
  std::string out;
  bool verbose = false;
  Overrides over;
  app.add_option("--config", config, "manifest path")->required();
  app.add_option("--out", out, "output CSV path (default stdout)");
  app.add_flag("--verbose", verbose, "stream per-sample progress to stderr");
  std::uint64_t seed_value = 0;
  double p_value = 0, delta_value = 0;
  int grid_value = 0;
  auto* seed_opt = app.add_option("--seed", seed_value, "experiment seed override");
  auto* p_opt = app.add_option("--p", p_value, "L^p exponent override");
  auto* grid_opt = app.add_option("--grid", grid_value, "grid_res override");
  auto* delta_opt = app.add_option("--delta", delta_value, "norm delta override");

  auto* cmd_check = app.add_subcommand("check", "step-2 bracket condition report");

  auto* cmd_flow = app.add_subcommand("flow", "evaluate e^{tau Z} x for a named field");
  std::string flow_field, flow_point;
  double flow_tau = 0;
  cmd_flow->add_option("--field", flow_field, "field name from the manifest")->required();
  cmd_flow->add_option("--point", flow_point, "start point 'x1,x2,...'")->required();
  cmd_flow->add_option("--tau", flow_tau, "flow time")->required();

  auto* cmd_modulus = app.add_subcommand("modulus", "flow modulus of a corpus member");
  int mod_member = 0, mod_field = 0;
  double mod_t = 0.1;
  cmd_modulus->add_option("--member", mod_member, "corpus member index");
  cmd_modulus->add_option("--field-index", mod_field, "first-layer field index");
  cmd_modulus->add_option("--t", mod_t, "modulus window t")->required();

  auto* cmd_norm = app.add_subcommand("norm", "norm table of the corpus");

  auto* cmd_extend = app.add_subcommand("extend", "export a full extension on the U grid");
  int ext_member = 0;
  cmd_extend->add_option("--member", ext_member, "corpus member index");

  auto* cmd_verify = app.add_subcommand("verify", "run an experiment and write its CSV report");
  std::string verify_kind;
  cmd_verify->add_option("kind", verify_kind, "restriction|extension|basis|singular|residuals")
      ->required();

  auto* cmd_report = app.add_subcommand("report", "run every experiment listed in the manifest");
  std::string out_dir = ".";
  cmd_report->add_option("--out-dir", out_dir, "directory for the CSV reports");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (*seed_opt) over.seed = seed_value;
  if (*p_opt) over.p = p_value;
  if (*grid_opt) over.grid = grid_value;
  if (*delta_opt) over.delta = delta_value;

  try {
    Manifest m = load_manifest(config, over);

    if (*cmd_check) {
      ResolvedGeometry g = resolve_geometry(m);
      Point origin(m.domain.n());
      auto r = check_step2(g.slice, origin);
      std::cout << "rank " << r.rank << " of " << m.domain.n() << ", step-2 "
                << (r.satisfied ? "satisfied" : "NOT satisfied") << "\n";
      for (size_t i = 0; i < r.spanning_set.provenance.size(); ++i) {
        auto [l, mm] = r.spanning_set.provenance[i];
        std::cout << "Z" << (r.spanning_set.first_layer + i + 1) << " = [Z" << (l + 1) << ", Z"
                  << (mm + 1) << "] = "
                  << r.spanning_set.fields[static_cast<size_t>(r.spanning_set.first_layer) + i].str()
                  << "\n";
      }
      return r.satisfied ? 0 : 1;
    }

    if (*cmd_flow) {
      const VectorField* field = nullptr;
      for (const auto& nf : m.fields)
        if (nf.name == flow_field) field = &nf.field;
      if (!field) throw std::runtime_error("no field named '" + flow_field + "'");
      FlowSolverConfig cfg;
      cfg.max_step = 0.1;
      Point x = parse_point(flow_point, field->dim());
      Point y = flow(*field, x, flow_tau, cfg);
      for (int i = 0; i < y.dim(); ++i) std::cout << (i ? "," : "") << format_double(y[i]);
      std::cout << "\n";
      return 0;
    }

    if (*cmd_modulus) {
      ResolvedGeometry g = resolve_geometry(m);
      auto corpus = test_corpus(g.domain, std::max(m.experiment.corpus, mod_member + 1));
      if (mod_field < 0 || mod_field >= static_cast<int>(g.slice.size()))
        throw std::runtime_error("field index out of range");
      double w = flow_modulus(mod_t, corpus[static_cast<size_t>(mod_member)],
                              g.slice[static_cast<size_t>(mod_field)], g.domain.V1, g.domain.V,
                              g.norms, g.domain.grid_res, g.ode);
      std::cout << format_double(w) << "\n";
      return 0;
    }

    if (*cmd_norm) {
      ResolvedGeometry g = resolve_geometry(m);
      auto corpus = test_corpus(g.domain, m.experiment.corpus);
      std::ostringstream csv;
      csv << "id,lp,flow_besov,classical_besov\n";
      for (const auto& psi : corpus) {
        double lp = lp_norm(psi, g.domain.V, g.norms.p, g.domain.grid_res);
        double fb =
            flow_besov_norm(psi, g.slice, g.domain.V1, g.domain.V, g.norms, g.domain.grid_res, g.ode);
        double cb = classical_besov_seminorm(psi, g.domain.V, g.norms, g.domain.grid_res);
        csv << psi.id() << ',' << format_double(lp) << ',' << format_double(fb) << ','
            << format_double(cb) << "\n";
        if (verbose) std::cerr << "  " << psi.id() << "\n";
      }
      write_or_print(csv.str(), out);
      return 0;
    }

    if (*cmd_extend) {
      ResolvedGeometry g = resolve_geometry(m);
      ExtensionConfig cfg;
      cfg.basis = g.completed;
      cfg.quad_order = m.extension.quad_order;
      cfg.seeley = m.extension.seeley;
      cfg.V = g.domain.V;
      cfg.V1 = g.domain.V1;
      cfg.V2 = g.domain.V2;
      cfg.ode = g.ode;
      cfg.delta = m.extension.delta_auto ? 0.45 * g.admissible : m.extension.delta;
      auto corpus = test_corpus(g.domain, std::max(m.experiment.corpus, ext_member + 1));
      auto ext = full_extension(corpus[static_cast<size_t>(ext_member)], cfg);

      int n = g.domain.n();
      std::vector<int> res(static_cast<size_t>(n), m.experiment.ext_grid_res);
      res.push_back(m.experiment.ext_t_res);
      Box grid_box = ext.support() ? ext.support()->intersect(g.domain.U()) : g.domain.U();
      TensorGrid grid(grid_box, res);
      std::ostringstream csv;
      for (int i = 0; i < n; ++i) csv << "x" << (i + 1) << ',';
      csv << "t,value\n";
      for (std::int64_t i = 0; i < grid.size(); ++i) {
        Point q = grid.point(i);
        for (int j = 0; j <= n; ++j) csv << format_double(q[j]) << ',';
        csv << format_double(ext(q.view())) << "\n";
      }
      write_or_print(csv.str(), out);
      return 0;
    }

    if (*cmd_verify) {
      std::string path = out.empty() ? verify_kind + ".csv" : out;
      return run_experiment(verify_kind, m, path, verbose);
    }

    if (*cmd_report) {
      std::vector<std::string> kinds = m.experiment.run;
      if (kinds.empty()) throw std::runtime_error("manifest has no 'experiment: run = ...' list");
      int worst = 0;
      for (const auto& kind : kinds) {
        std::string path = (std::filesystem::path(out_dir) / (kind + ".csv")).string();
        worst = std::max(worst, run_experiment(kind, m, path, verbose));
      }
      return worst;
    }
  } catch (const ManifestError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
