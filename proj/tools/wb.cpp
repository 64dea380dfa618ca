// wb: command-line front end for the barycenter library.

#include <wbary/bounds.hpp>
#include <wbary/datasets.hpp>
#include <wbary/io.hpp>
#include <wbary/lp.hpp>
#include <wbary/measures.hpp>
#include <wbary/ot.hpp>
#include <wbary/pipeline.hpp>
#include <wbary/sua.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace wbary;

namespace {

/// Usage errors detected after parsing.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<DiscreteMeasure> load_all(const std::vector<std::string>& paths) {
  std::vector<DiscreteMeasure> out;
  for (const auto& p : paths) {
    if (fs::is_directory(p)) {
      std::vector<fs::path> files;
      for (const auto& e : fs::directory_iterator(p))
        if (e.path().extension() == ".csv") files.push_back(e.path());
      std::sort(files.begin(), files.end());
      for (const auto& f : files) out.push_back(load_measure(f.string()));
    } else {
      out.push_back(load_measure(p));
    }
  }
  if (out.empty()) throw UsageError("no input measures given");
  for (const auto& m : out)
    if (m.dim() != out.front().dim()) throw InvalidInput("input measures have different dimensions");
  return out;
}

void warn_mass(const std::vector<DiscreteMeasure>& ms) {
  for (std::size_t i = 0; i < ms.size(); ++i)
    if (ms[i].mass_flagged())
      std::cerr << "note: input " << i << " had total mass " << format_number(ms[i].input_mass)
                << "; renormalized\n";
}

template <typename F>
void write_to(const std::string& path, F&& emit) {
  if (path.empty() || path == "-") {
    emit(std::cout);
    return;
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InvalidInput("cannot write " + path);
  emit(os);
}

std::vector<std::size_t> parse_list(const std::string& text) {
  std::vector<std::size_t> out;
  for (auto part : split_commas(text)) {
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
    if (ec != std::errc{} || ptr != part.data() + part.size() || v == 0)
      throw UsageError("expected a comma-separated list of positive integers, got '" + text + "'");
    out.push_back(v);
  }
  return out;
}

struct FamilyOptions {
  std::string family;
  std::size_t N = 10;
  std::size_t M = 100;
  std::size_t D = 0;
  FamilyParams params;

  void add(CLI::App* app, bool required) {
    auto* f = app->add_option("--family", family, "dataset family")->check(CLI::IsMember(family_names()));
    if (required) f->required();
    app->add_option("--n", N, "number of measures")->check(CLI::PositiveNumber);
    app->add_option("--m", M, "atoms per measure (a perfect square for grid families)")->check(CLI::PositiveNumber);
    app->add_option("--dim", D, "dimension for gaussian and dirichlet-uniform");
    app->add_option("--axis-min", params.axis_min);
    app->add_option("--axis-max", params.axis_max);
    app->add_option("--nest-count", params.nest_count);
    app->add_option("--sigma-min", params.sigma_min);
    app->add_option("--sigma-max", params.sigma_max);
    app->add_option("--gamma-min", params.gamma_min);
    app->add_option("--gamma-max", params.gamma_max);
    app->add_option("--concentration", params.concentration, "Dirichlet concentration");
  }

  DatasetSpec spec(std::uint64_t seed) const {
    DatasetSpec s;
    s.family = family;
    s.N = N;
    s.M = M;
    s.D = D;
    s.params = params;
    s.seed = seed;
    return s;
  }
};

struct SuaOptions {
  std::size_t S = 0;
  std::size_t R = 1;
  std::size_t max_iter = 500;
  double tol = 1e-7;
  std::optional<std::size_t> warmstart;
  std::string step = "constant:0.5";
  std::size_t restarts = 1;

  void add(CLI::App* app) {
    app->add_option("--S,--s", S, "sample size per measure (default: largest input size)");
    app->add_option("--R,--r", R, "number of repeats")->check(CLI::PositiveNumber);
    app->add_option("--max-iter", max_iter, "iteration cap per solve");
    app->add_option("--tol", tol, "relative displacement tolerance")->check(CLI::PositiveNumber);
    app->add_option("--warmstart-steps", warmstart, "stochastic warmstart steps (default 2N)");
    app->add_option("--step", step, "step schedule: constant:A or harmonic:A,B");
    app->add_option("--restarts", restarts, "independent starts per solve")->check(CLI::PositiveNumber);
  }

  SuaConfig config(std::uint64_t seed) const {
    SuaConfig c;
    c.sample_size = S;
    c.repeats = R;
    c.max_iters = max_iter;
    c.tol = tol;
    c.warmstart_steps = warmstart;
    c.schedule = StepSchedule::parse(step);
    c.restarts = restarts;
    c.seed = seed;
    return c;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wasserstein barycenters: exact LP, resampling and SUA"};
  app.require_subcommand(1);
  app.fallthrough();
  std::uint64_t seed = 0;
  std::size_t threads = 0;
  app.add_option("--seed", seed, "master seed (default 0)");
  app.add_option("--threads", threads, "worker threads (default: $WB_THREADS or all cores)");

  // gen
  auto* gen = app.add_subcommand("gen", "generate a synthetic dataset, or convert a PGM image");
  FamilyOptions gen_family;
  gen_family.add(gen, false);
  std::string gen_out, gen_image;
  double gen_drop = 0.0;
  gen->add_option("--out", gen_out, "output directory (one CSV per measure), or CSV file for --image")->required();
  gen->add_option("--image", gen_image, "PGM image to convert into a measure");
  gen->add_option("--drop-below", gen_drop, "intensity threshold for --image");

  // sample
  auto* sample = app.add_subcommand("sample", "draw an empirical measure");
  std::string sample_in, sample_out;
  std::size_t sample_S = 0;
  sample->add_option("input", sample_in)->required();
  sample->add_option("--S,--s", sample_S, "sample size")->required()->check(CLI::PositiveNumber);
  sample->add_option("--out", sample_out, "output CSV (default stdout)");

  // ot
  auto* ot = app.add_subcommand("ot", "optimal transport between two measures");
  std::string ot_a, ot_b, ot_plan;
  double ot_p = 2.0;
  ot->add_option("a", ot_a)->required();
  ot->add_option("b", ot_b)->required();
  ot->add_option("--p", ot_p, "ground cost exponent")->check(CLI::PositiveNumber);
  ot->add_option("--plan", ot_plan, "write the plan as CSV source,target,mass");

  // bary
  auto* bary = app.add_subcommand("bary", "barycenter of measures");
  bary->require_subcommand(1);
  bary->fallthrough();
  auto* exact = bary->add_subcommand("exact", "exact LP barycenter");
  std::vector<std::string> exact_in;
  std::string exact_out, exact_support, exact_form = "explicit";
  double exact_p = 2.0;
  std::size_t exact_nnz = LpOptions{}.max_nonzeros;
  exact->add_option("inputs", exact_in, "measure CSVs or directories")->required();
  exact->add_option("--p", exact_p)->check(CLI::PositiveNumber);
  exact->add_option("--support", exact_support, "candidate support CSV (default: centroid set)");
  exact->add_option("--formulation", exact_form)->check(CLI::IsMember({"explicit", "multimarginal"}));
  exact->add_option("--max-nonzeros", exact_nnz, "LP size cap");
  exact->add_option("--out", exact_out, "output CSV (default stdout)");
  auto* sua = bary->add_subcommand("sua", "randomized barycenter: resample, SUA, average");
  std::vector<std::string> sua_in;
  std::string sua_out;
  SuaOptions sua_opts;
  bool sua_best = false;
  sua->add_option("inputs", sua_in, "measure CSVs or directories")->required();
  sua_opts.add(sua);
  sua->add_flag("--best-of", sua_best, "keep the best repeat instead of the linear average");
  sua->add_option("--out", sua_out, "output CSV (default stdout)");

  // frechet
  auto* frechet = app.add_subcommand("frechet", "Frechet functional (1/N) sum W_p^p(mu, mu_i)");
  std::string fr_mu;
  std::vector<std::string> fr_in;
  double fr_p = 2.0;
  frechet->add_option("mu", fr_mu)->required();
  frechet->add_option("inputs", fr_in)->required();
  frechet->add_option("--p", fr_p)->check(CLI::PositiveNumber);

  // bound
  auto* bound = app.add_subcommand("bound", "sampling error bounds");
  std::vector<std::string> bd_in;
  double bd_p = 2.0, bd_S = 1.0, bd_cube = 0.0, bd_M = 0.0;
  std::uint64_t bd_binomial = 0;
  bound->add_option("inputs", bd_in, "measure CSVs or directories");
  bound->add_option("--p", bd_p)->check(CLI::PositiveNumber);
  bound->add_option("--S,--s", bd_S, "sample size")->check(CLI::PositiveNumber);
  bound->add_option("--cube-dim", bd_cube, "report the unit-cube displays for this dimension");
  bound->add_option("--m", bd_M, "support size for --cube-dim");
  bound->add_option("--binomial", bd_binomial, "report the two-point binomial bound at this S");

  // sweep
  auto* sw = app.add_subcommand("sweep", "factorial experiment over S and R");
  std::vector<std::string> sw_in;
  FamilyOptions sw_family;
  std::string sw_S, sw_R = "1", sw_out, sw_summary, sw_solver = "sua";
  std::size_t sw_reps = 10;
  double sw_p = 2.0;
  std::optional<double> sw_ref;
  bool sw_timing = false, sw_best = false;
  sw->add_option("inputs", sw_in, "measure CSVs or directories (alternative to --family)");
  sw_family.add(sw, false);
  sw->add_option("--S,--s", sw_S, "comma-separated sample sizes")->required();
  sw->add_option("--R,--r", sw_R, "comma-separated repeat counts");
  sw->add_option("--reps", sw_reps, "repetitions per cell")->check(CLI::PositiveNumber);
  sw->add_option("--p", sw_p)->check(CLI::PositiveNumber);
  sw->add_option("--solver", sw_solver)->check(CLI::IsMember({"sua", "exact"}));
  sw->add_option("--reference", sw_ref, "known optimal Frechet value");
  sw->add_flag("--timing", sw_timing, "record wall-clock time (output no longer byte-reproducible)");
  sw->add_flag("--best-of", sw_best, "keep the best repeat instead of the linear average");
  sw->add_option("--out", sw_out, "records CSV (default stdout)");
  sw->add_option("--summary", sw_summary, "summary CSV");

  // render
  auto* render = app.add_subcommand("render", "draw measures as SVG scatter and/or PGM heatmap");
  std::vector<std::string> rd_in;
  std::string rd_svg, rd_pgm;
  Index rd_grid = 256;
  bool rd_ascii = false;
  render->add_option("inputs", rd_in)->required();
  render->add_option("--svg", rd_svg, "SVG scatter of all inputs");
  render->add_option("--pgm", rd_pgm, "PGM heatmap of the first input");
  render->add_option("--grid", rd_grid, "PGM side length")->check(CLI::PositiveNumber);
  render->add_flag("--ascii", rd_ascii, "write P2 instead of P5");

  // lpsize
  auto* lpsize = app.add_subcommand("lpsize", "size of the exact barycenter LP");
  std::size_t ls_n = 1;
  std::optional<std::uint64_t> ls_grid;
  std::string ls_m;
  double ls_p = 2.0;
  lpsize->add_option("--n", ls_n, "number of measures")->check(CLI::PositiveNumber);
  lpsize->add_option("--grid", ls_grid, "side s of a shared s x s grid");
  lpsize->add_option("--m", ls_m, "support size, or one per measure, comma-separated");
  lpsize->add_option("--p", ls_p)->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  std::cerr << "seed: " << seed << '\n';
  try {
    if (*gen) {
      if (!gen_image.empty()) {
        save_measure(gen_out, from_image(load_pgm(gen_image), gen_drop));
        return 0;
      }
      if (gen_family.family.empty()) throw UsageError("gen needs --family or --image");
      const auto ms = generate(gen_family.spec(seed), threads);
      fs::create_directories(gen_out);
      char name[32];
      for (std::size_t i = 0; i < ms.size(); ++i) {
        std::snprintf(name, sizeof name, "mu_%04zu.csv", i);
        save_measure((fs::path(gen_out) / name).string(), ms[i]);
      }
      std::cout << "wrote " << ms.size() << " measures to " << gen_out << '\n';
    } else if (*sample) {
      const auto mu = load_measure(sample_in);
      const auto e = sample_empirical(mu, sample_S, seed);
      write_to(sample_out, [&](std::ostream& os) { write_measure_csv(os, e.measure); });
    } else if (*ot) {
      const auto a = load_measure(ot_a), b = load_measure(ot_b);
      if (a.dim() != b.dim()) throw InvalidInput("measures have different dimensions");
      const auto r = solve_ot(a, b, ot_p);
      std::cout << "W_p^p " << format_number(r.value) << "\nW_p " << format_number(std::pow(r.value, 1.0 / ot_p))
                << '\n';
      if (!ot_plan.empty())
        write_to(ot_plan, [&](std::ostream& os) {
          os << "source,target,mass\n";
          for (const auto& e : r.plan.entries)
            if (e.mass > 0.0) os << e.source << ',' << e.target << ',' << format_number(e.mass) << '\n';
        });
    } else if (*exact) {
      auto ms = load_all(exact_in);
      warn_mass(ms);
      BarycenterOptions o;
      o.lp.max_nonzeros = exact_nnz;
      if (exact_form == "multimarginal") o.formulation = BarycenterFormulation::multimarginal;
      if (!exact_support.empty()) o.support = load_measure(exact_support).points;
      const auto res = exact_barycenter(ms, exact_p, o);
      std::cerr << "value " << format_number(res.value) << " (LP " << res.lp_variables << " variables, "
                << res.lp_constraints << " constraints, support " << res.barycenter.size() << ")\n";
      write_to(exact_out, [&](std::ostream& os) { write_measure_csv(os, res.barycenter); });
    } else if (*sua) {
      auto ms = load_all(sua_in);
      warn_mass(ms);
      RandomizedConfig rc;
      rc.sua = sua_opts.config(seed);
      rc.combine = sua_best ? Combine::best_of : Combine::linear_average;
      const auto res = randomized_barycenter(ms, rc, threads);
      write_to(sua_out, [&](std::ostream& os) { write_measure_csv(os, res.estimate); });
    } else if (*frechet) {
      const auto mu = load_measure(fr_mu);
      auto ms = load_all(fr_in);
      std::cout << format_number(frechet_value(mu, ms, fr_p, threads)) << '\n';
    } else if (*bound) {
      bool any = false;
      if (!bd_in.empty()) {
        any = true;
        auto ms = load_all(bd_in);
        const double diam = joint_diameter(ms);
        std::cout << "measure,diam,E,q,lmax,empirical_upper\n";
        std::vector<double> E1;
        for (std::size_t i = 0; i < ms.size(); ++i) {
          const auto E = constant_E(ms[i].points, bd_p);
          const double d = diameter(ms[i]);
          std::cout << i << ',' << format_number(d) << ',' << format_number(E.value) << ',' << format_number(E.q)
                    << ',' << E.lmax << ',' << format_number(std::pow(d, bd_p) * E.value / std::sqrt(bd_S)) << '\n';
          E1.push_back(constant_E(ms[i].points, 1.0).value);
        }
        std::vector<double> S(ms.size(), bd_S);
        std::cout << "frechet_gap_bound," << format_number(frechet_gap_bound(diam, E1, bd_p, S)) << '\n';
      }
      if (bd_cube > 0.0) {
        any = true;
        if (!(bd_M > 0.0)) throw UsageError("--cube-dim needs --m");
        std::cout << "eq_p2_verbatim," << format_number(eq_p2_bound(bd_cube, bd_M, bd_S)) << '\n'
                  << "composed," << format_number(unit_cube_gap_coefficient(bd_cube, bd_M, 2.0) / std::sqrt(bd_S))
                  << '\n';
      }
      if (bd_binomial > 0) {
        any = true;
        const auto b = binomial_lower_bound(bd_binomial);
        std::cout << "binomial_exact," << format_number(b.exact) << "\nbinomial_closed," << format_number(b.closed)
                  << '\n';
      }
      if (!any) throw UsageError("bound needs inputs, --cube-dim or --binomial");
    } else if (*sw) {
      std::vector<DiscreteMeasure> ms;
      if (!sw_family.family.empty()) {
        if (!sw_in.empty()) throw UsageError("give either input files or --family, not both");
        ms = generate(sw_family.spec(seed), threads);
      } else {
        ms = load_all(sw_in);
      }
      SweepConfig cfg;
      cfg.sample_sizes = parse_list(sw_S);
      cfg.repeat_counts = parse_list(sw_R);
      cfg.repetitions = sw_reps;
      cfg.seed = seed;
      cfg.p = sw_p;
      cfg.solver = sw_solver == "exact" ? BarycenterSolver::exact : BarycenterSolver::sua;
      cfg.combine = sw_best ? Combine::best_of : Combine::linear_average;
      cfg.timing = sw_timing;
      cfg.threads = threads;
      if (sw_ref) cfg.reference = ReferenceValue{*sw_ref, "given"};
      const auto res = sweep(ms, cfg);
      if (res.reference)
        std::cerr << "reference " << format_number(res.reference->value) << " (" << res.reference->label << ")\n";
      write_to(sw_out, [&](std::ostream& os) { write_records_csv(os, res.records); });
      if (!sw_summary.empty()) {
        const auto rows = summarize(res.records);
        write_to(sw_summary, [&](std::ostream& os) { write_summary_csv(os, rows); });
      }
    } else if (*render) {
      auto ms = load_all(rd_in);
      if (rd_svg.empty() && rd_pgm.empty()) throw UsageError("render needs --svg and/or --pgm");
      if (!rd_svg.empty()) write_to(rd_svg, [&](std::ostream& os) { write_svg_scatter(os, ms); });
      if (!rd_pgm.empty()) {
        const auto r = to_image(ms.front(), rd_grid);
        if (r.clamped > 0) std::cerr << "warning: " << r.clamped << " atoms outside [0,1]^2 were clamped\n";
        save_pgm(rd_pgm, r.image, rd_ascii);
      }
    } else if (*lpsize) {
      std::vector<std::uint64_t> sizes;
      if (!ls_m.empty())
        for (auto v : parse_list(ls_m)) sizes.push_back(v);
      if (!ls_grid && sizes.empty()) throw UsageError("lpsize needs --grid or --m");
      const auto est = lp_size_estimate(ls_n, sizes, ls_grid, ls_p);
      std::cout << "centroids " << est.centroids << " (10^" << decimal_exponent(est.centroids) << ")\n"
                << "variables " << est.variables << " (10^" << decimal_exponent(est.variables) << ")\n"
                << "constraints " << est.constraints << " (10^" << decimal_exponent(est.constraints) << ")\n";
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
