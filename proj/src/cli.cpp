#include "goafem/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace goafem {

double desk_tolerance(int setup) {
  switch (setup) {
    case 1: return 3e-5;
    case 2: return 5e-4;
    case 3: return 6e-5;
    case 4: return 4e-3;
    default: throw ConfigError("unknown setup id " + std::to_string(setup));
  }
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double x = 0.0;
  try {
    x = std::stod(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != v.size()) throw ConfigError("invalid number for " + key + ": '" + v + "'");
  return x;
}

int parse_int(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  int x = 0;
  try {
    x = std::stoi(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != v.size()) throw ConfigError("invalid integer for " + key + ": '" + v + "'");
  return x;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "no") return false;
  throw ConfigError("invalid boolean for " + key + ": '" + v + "'");
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

void apply_config_file(std::istream& in, RunConfig& cfg) {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key == "setup") cfg.setup = parse_int(key, val);
    else if (key == "theta") cfg.theta = parse_double(key, val);
    else if (key == "tol") cfg.tol = parse_double(key, val);
    else if (key == "ref_tol") cfg.ref_tol = parse_double(key, val);
    else if (key == "max_iter") cfg.max_iter = parse_int(key, val);
    else if (key == "solver_tol") cfg.solver_tol = parse_double(key, val);
    else if (key == "output_dir") cfg.output_dir = val;
    else if (key == "threads") cfg.threads = parse_int(key, val);
    else if (key == "dump_meshes") cfg.dump_meshes = parse_bool(key, val);
    else if (key == "dump_indicators") cfg.dump_indicators = parse_bool(key, val);
    else throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
  }
}

void validate(const RunConfig& cfg) {
  if (cfg.setup < 1 || cfg.setup > 4) throw ConfigError("setup must be 1, 2, 3 or 4");
  if (!(cfg.theta > 0.0 && cfg.theta <= 1.0)) throw ConfigError("theta must lie in (0, 1]");
  if (!(cfg.tol > 0.0)) throw ConfigError("tol must be positive");
  if (cfg.ref_tol && !(*cfg.ref_tol > 0.0 && *cfg.ref_tol < cfg.tol)) {
    throw ConfigError("ref_tol must lie in (0, tol)");
  }
  if (cfg.max_iter < 0) throw ConfigError("max_iter must be nonnegative");
  if (!(cfg.solver_tol > 0.0)) throw ConfigError("solver_tol must be positive");
  if (cfg.threads < 1) throw ConfigError("threads must be at least 1");
}

void write_csv_header(std::ostream& os, bool with_reference) {
  os << kCsvVersion << '\n' << kCsvColumns << (with_reference ? ",ref_error" : "") << '\n';
}

void write_csv_row(std::ostream& os, const IterationRecord& r, std::optional<double> ref_error) {
  char secs[32];
  std::snprintf(secs, sizeof secs, "%.3f", r.seconds);
  os << r.iter << ',' << r.dofs << ',' << fmt(r.mu) << ',' << fmt(r.zeta) << ',' << fmt(r.product)
     << ',' << fmt(r.goal_value) << ',' << r.n_indices << ',' << r.max_param << ',' << secs;
  if (ref_error) os << ',' << fmt(*ref_error);
  os << '\n';
}

int CsvTable::column(const std::string& name) const {
  auto it = std::find(columns.begin(), columns.end(), name);
  return it == columns.end() ? -1 : static_cast<int>(it - columns.begin());
}

CsvTable read_csv(std::istream& in) {
  CsvTable t;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
    if (t.columns.empty()) {
      t.columns = cells;
      continue;
    }
    if (cells.size() != t.columns.size()) {
      throw ConfigError("CSV line " + std::to_string(lineno) + ": expected " +
                        std::to_string(t.columns.size()) + " fields");
    }
    std::vector<double> row;
    for (const auto& c : cells) row.push_back(parse_double("CSV line " + std::to_string(lineno), c));
    t.rows.push_back(std::move(row));
  }
  if (t.columns.empty()) throw ConfigError("CSV has no header");
  return t;
}

double loglog_slope(std::span<const double> x, std::span<const double> y, std::size_t last) {
  const std::size_t n = std::min({x.size(), y.size(), last});
  if (n < 2) return std::nan("");
  const std::size_t off = std::min(x.size(), y.size()) - n;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = off; i < off + n; ++i) {
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double dn = static_cast<double>(n);
  const double den = dn * sxx - sx * sx;
  return den == 0.0 ? std::nan("") : (dn * sxy - sx * sy) / den;
}

namespace {

namespace fs = std::filesystem;

fs::path csv_path(const RunConfig& cfg, const char* kind) {
  return fs::path(cfg.output_dir) / ("setup" + std::to_string(cfg.setup) + "_" + kind + ".csv");
}

void dump_iteration(const RunConfig& cfg, const AdaptiveLoop& loop, int iter) {
  const fs::path dir(cfg.output_dir);
  const std::string stem = "setup" + std::to_string(cfg.setup) + "_iter" + std::to_string(iter);
  const AdaptiveState& st = loop.state();
  if (cfg.dump_meshes) {
    std::ofstream os(dir / (stem + "_mesh.txt"));
    write_mesh(os, st.structure.mesh(0));
  }
  if (cfg.dump_indicators) {
    std::ofstream os(dir / (stem + "_indicators.txt"));
    auto items = mark_items(st.mu, &st.zeta);
    std::vector<int> order(items.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    const std::size_t top = std::min<std::size_t>(20, order.size());
    std::partial_sort(order.begin(), order.begin() + top, order.end(),
                      [&](int a, int b) { return items[a].value_sq > items[b].value_sq; });
    os << "# kind where mu^2+zeta^2\n";
    for (std::size_t i = 0; i < top; ++i) {
      const auto& it = items[order[i]];
      if (it.kind == MarkItem::Kind::spatial) {
        os << "spatial " << st.structure.index(it.block).to_string() << '@' << fmt(it.vertex.x.x)
           << ':' << fmt(it.vertex.x.y) << ' ' << fmt(it.value_sq) << '\n';
      } else {
        os << "parametric " << it.index.to_string() << ' ' << fmt(it.value_sq) << '\n';
      }
    }
  }
}

AdaptiveOptions options_from(const RunConfig& cfg) {
  AdaptiveOptions o;
  o.theta = cfg.theta;
  o.tol = cfg.tol;
  o.max_iter = cfg.max_iter;
  o.solver.tol = cfg.solver_tol;
  return o;
}

int do_run(const RunConfig& cfg) {
  fs::create_directories(cfg.output_dir);
  std::ofstream csv(csv_path(cfg, "convergence"));
  if (!csv) throw ConfigError("cannot write to " + cfg.output_dir);
  write_csv_header(csv, false);
  csv.flush();
  const AdaptiveProblem problem = AdaptiveProblem::for_setup(cfg.setup);
  const ConvergenceLog log = run(problem, options_from(cfg), [&](const AdaptiveLoop& loop, const IterationRecord& r) {
    write_csv_row(csv, r);
    csv.flush();
    dump_iteration(cfg, loop, r.iter);
    std::fprintf(stderr, "iter %3d  dofs %8d  mu %.3e  zeta %.3e  product %.3e  |P| %d\n", r.iter,
                 r.dofs, r.mu, r.zeta, r.product, r.n_indices);
  });
  const auto& last = log.rows.back();
  std::printf("setup %d: %zu iterations, dofs %d, product %.6e, goal %.10g, %s\n", cfg.setup,
              log.rows.size(), last.dofs, last.product, last.goal_value,
              log.converged ? "converged" : "max_iter reached");
  return 0;
}

int do_reference(const RunConfig& cfg) {
  fs::create_directories(cfg.output_dir);
  const double ref_tol = cfg.ref_tol.value_or(cfg.tol / 10.0);
  std::ofstream csv(csv_path(cfg, "convergence"));
  if (!csv) throw ConfigError("cannot write to " + cfg.output_dir);
  write_csv_header(csv, false);
  csv.flush();

  // The run is deterministic, so the tol-run is the prefix of the ref_tol-run
  // that ends at the first product below tol (or at max_iter).
  AdaptiveOptions ref = options_from(cfg);
  ref.tol = ref_tol;
  ref.max_iter = std::max(cfg.max_iter, 1000);
  bool in_prefix = true;
  std::size_t prefix = 0;
  const AdaptiveProblem problem = AdaptiveProblem::for_setup(cfg.setup);
  const ConvergenceLog log = run(problem, ref, [&](const AdaptiveLoop& loop, const IterationRecord& r) {
    if (in_prefix) {
      write_csv_row(csv, r);
      csv.flush();
      dump_iteration(cfg, loop, r.iter);
      ++prefix;
      if (r.product < cfg.tol || r.iter >= cfg.max_iter) in_prefix = false;
    }
    std::fprintf(stderr, "iter %3d  dofs %8d  product %.3e\n", r.iter, r.dofs, r.product);
  });
  const double g_ref = log.rows.back().goal_value;
  std::ofstream rcsv(csv_path(cfg, "reference"));
  write_csv_header(rcsv, true);
  for (std::size_t i = 0; i < prefix; ++i) {
    write_csv_row(rcsv, log.rows[i], std::abs(g_ref - log.rows[i].goal_value));
  }
  std::printf("setup %d: reference goal %.12g at product %.3e (dofs %d); %zu logged iterations\n",
              cfg.setup, g_ref, log.rows.back().product, log.rows.back().dofs, prefix);
  return 0;
}

int do_report(const std::vector<std::string>& files) {
  std::printf("%-40s %6s %10s %12s %12s %8s %8s\n", "file", "iters", "dofs", "product", "ref_error",
              "slope", "ref_slp");
  for (const auto& f : files) {
    std::ifstream in(f);
    if (!in) throw ConfigError("cannot open " + f);
    const CsvTable t = read_csv(in);
    const int cd = t.column("dofs"), cp = t.column("product"), cr = t.column("ref_error");
    if (cd < 0 || cp < 0) throw ConfigError(f + ": missing dofs/product columns");
    if (t.rows.empty()) throw ConfigError(f + ": no data rows");
    std::vector<double> n, p, e;
    for (const auto& r : t.rows) {
      n.push_back(r[cd]);
      p.push_back(r[cp]);
      if (cr >= 0) e.push_back(r[cr]);
    }
    const double slope = loglog_slope(n, p);
    double ref_slope = std::nan("");
    if (cr >= 0) {
      // Drop the final rows that coincide with the reference resolution.
      std::vector<double> ne, ee;
      for (std::size_t i = 0; i < e.size(); ++i) {
        if (e[i] > 0.0) ne.push_back(n[i]), ee.push_back(e[i]);
      }
      ref_slope = loglog_slope(ne, ee);
    }
    std::printf("%-40s %6zu %10.0f %12.4e %12.4e %8.4f %8.4f\n", f.c_str(), t.rows.size(), n.back(),
                p.back(), cr >= 0 ? e.back() : std::nan(""), slope, ref_slope);
  }
  return 0;
}

}  // namespace

int cli_main(int argc, char** argv) {
  CLI::App app{"Goal-oriented adaptive multilevel stochastic Galerkin FEM"};
  app.require_subcommand(1);

  RunConfig flags;
  std::string config_file;
  double ref_tol = 0.0;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_file, "key = value configuration file");
    sub->add_option("--setup", flags.setup, "experiment 1..4");
    sub->add_option("--theta", flags.theta, "Doerfler parameter in (0, 1]");
    sub->add_option("--tol", flags.tol, "stopping tolerance for mu*sqrt(mu^2+zeta^2)");
    sub->add_option("--ref-tol", ref_tol, "tolerance of the reference run");
    sub->add_option("--max-iter", flags.max_iter, "iteration cap");
    sub->add_option("--solver-tol", flags.solver_tol, "relative PCG tolerance");
    sub->add_option("--out", flags.output_dir, "output directory");
    sub->add_option("--threads", flags.threads, "worker threads (execution is sequential)");
    sub->add_flag("--dump-meshes", flags.dump_meshes, "write the zero-index mesh per iteration");
    sub->add_flag("--dump-indicators", flags.dump_indicators, "write the top-20 indicators per iteration");
  };
  CLI::App* run_cmd = app.add_subcommand("run", "adaptive run, writes setup<k>_convergence.csv");
  CLI::App* ref_cmd = app.add_subcommand("reference", "run plus reference run, adds ref_error");
  CLI::App* rep_cmd = app.add_subcommand("report", "final estimates and fitted slopes of CSV logs");
  add_common(run_cmd);
  add_common(ref_cmd);
  std::vector<std::string> report_files;
  int report_setup = 0;
  std::string report_dir = ".";
  rep_cmd->add_option("files", report_files, "CSV files");
  rep_cmd->add_option("--setup", report_setup, "report <out>/setup<k>_*.csv");
  rep_cmd->add_option("--out", report_dir, "directory holding the CSV logs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (rep_cmd->parsed()) {
      if (report_files.empty()) {
        if (report_setup < 1) throw ConfigError("report needs CSV files or --setup");
        const fs::path dir(report_dir);
        const std::string stem = "setup" + std::to_string(report_setup);
        for (const char* kind : {"_convergence.csv", "_reference.csv"}) {
          if (fs::exists(dir / (stem + kind))) report_files.push_back((dir / (stem + kind)).string());
        }
        if (report_files.empty()) throw ConfigError("no logs found for " + stem + " in " + report_dir);
      }
      return do_report(report_files);
    }

    CLI::App* sub = run_cmd->parsed() ? run_cmd : ref_cmd;
    RunConfig cfg;
    if (!config_file.empty()) {
      std::ifstream in(config_file);
      if (!in) throw ConfigError("cannot open config file " + config_file);
      apply_config_file(in, cfg);
    }
    auto given = [&](const char* name) { return sub->count(name) > 0; };
    if (given("--setup")) cfg.setup = flags.setup;
    if (given("--theta")) cfg.theta = flags.theta;
    if (given("--tol")) cfg.tol = flags.tol;
    if (given("--ref-tol")) cfg.ref_tol = ref_tol;
    if (given("--max-iter")) cfg.max_iter = flags.max_iter;
    if (given("--solver-tol")) cfg.solver_tol = flags.solver_tol;
    if (given("--out")) cfg.output_dir = flags.output_dir;
    if (given("--threads")) cfg.threads = flags.threads;
    if (given("--dump-meshes")) cfg.dump_meshes = true;
    if (given("--dump-indicators")) cfg.dump_indicators = true;
    if (cfg.setup >= 1 && cfg.setup <= 4 && cfg.tol == 0.0) cfg.tol = desk_tolerance(cfg.setup);
    validate(cfg);
    return run_cmd->parsed() ? do_run(cfg) : do_reference(cfg);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const NonConvergenceError& e) {
    std::fprintf(stderr, "error: %s (iterations %d, relative residual %.3e)\n", e.what(),
                 e.report().iterations, e.report().relative_residual);
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}

}  // namespace goafem
