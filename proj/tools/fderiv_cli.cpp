#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fderiv/fderiv.hpp"

namespace fs = std::filesystem;
using namespace fderiv;

namespace {

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::EmptyNeighborhood:
    case ErrorKind::EmptyPairNeighborhood:
    case ErrorKind::DegenerateSpectrum: return 3;
    case ErrorKind::IoError: return 4;
    default: return 2;
  }
}

std::optional<double> auto_or_value(const std::string& s, const std::string& flag) {
  if (s == "auto") return std::nullopt;
  const double v = csv::parse_double(s, flag);
  require(v > 0.0, ErrorKind::InvalidArgument, flag + " must be positive");
  return v;
}

// "mean", "all" or a 1-based curve index
struct PointSelection {
  bool mean = false;
  bool all = false;
  std::size_t index = 0;
};

PointSelection parse_at(const std::string& s, std::size_t n, bool allow_all) {
  PointSelection out;
  if (s == "mean") {
    out.mean = true;
    return out;
  }
  if (s == "all") {
    require(allow_all, ErrorKind::InvalidArgument, "--at all is not supported here");
    out.all = true;
    return out;
  }
  const double v = csv::parse_double(s, "--at");
  require(v >= 1.0 && v <= static_cast<double>(n) && v == std::floor(v), ErrorKind::InvalidArgument,
          "--at must be 'mean', 'all' or a curve index in 1.." + std::to_string(n));
  out.index = static_cast<std::size_t>(v) - 1;
  return out;
}

Json bandwidth_summary(const DerivativeEstimate& est) {
  Json out = Json::array();
  for (const auto& bw : est.bandwidths) out.push_back({{"h1", bw.h1}, {"h2", bw.h2}});
  return out;
}

void write_json(const fs::path& path, const Json& j) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::IoError, "cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
  if (!out) fail(ErrorKind::IoError, "write failed on '" + path.string() + "'");
}

EigenSystem fpca_by_fve(const Sample& s, double fve, std::optional<std::size_t> components = std::nullopt) {
  EigenSystem full = fit_fpca(s, s.grid->size());
  const std::size_t k = components ? *components : select_components(full.eigenvalues, fve);
  require(k >= 1 && k <= full.components(), ErrorKind::InvalidArgument,
          "component count must lie in 1.." + std::to_string(full.components()));
  return truncate(std::move(full), k);
}

struct DeriveConfig {
  std::size_t components = 0;
  BandwidthPolicy policy;
  KernelSpec kernel;
};

// Gammas at the requested points plus a DGF per complete estimate.
void add_gammas(Report& report, const Sample& s, std::span<const double> y, const EigenSystem& eig,
                const DeriveConfig& cfg, const std::vector<std::pair<std::string, Curve>>& points) {
  report.gamma_components = cfg.components;
  Json bws = Json::object();
  for (const auto& [label, x] : points) {
    DerivativeEstimate est = gradient_at(x, s, y, eig, cfg.policy, cfg.kernel, cfg.components);
    bws[label] = bandwidth_summary(est);
    if (est.complete()) report.dgfs.emplace_back(label, derivative_generating_function(est, cfg.components));
    report.gammas.push_back({label, std::move(est)});
  }
  report.summary["bandwidths"] = std::move(bws);
}

bool any_estimate(const Report& report) {
  for (const auto& row : report.gammas)
    for (const auto& g : row.estimate.gammas)
      if (g) return true;
  return false;
}

FunctionalSpec parse_functional(const Json& j, const ProcessSpec& spec) {
  const std::string kind = j.value("kind", "linear");
  const double a = j.value("a", 0.0);
  const auto basis = spec.basis();
  auto slope_from = [&](const Json& coeffs) {
    require(coeffs.is_array() && coeffs.size() <= basis.size(), ErrorKind::InvalidArgument,
            "b_coeffs must be an array no longer than the process basis");
    Curve b = Curve::zero(spec.grid);
    for (std::size_t k = 0; k < coeffs.size(); ++k) b = axpy(coeffs[k].get<double>(), basis[k], b);
    return b;
  };
  if (kind == "linear") return FunctionalSpec::linear(a, slope_from(j.value("b_coeffs", Json::array())));
  if (kind == "quadratic") {
    const Json& w = j.at("w");
    const std::size_t k = w.size();
    require(k >= 1 && k <= basis.size(), ErrorKind::InvalidArgument, "w must be a nonempty square matrix");
    Eigen::MatrixXd mat(k, k);
    for (std::size_t r = 0; r < k; ++r) {
      require(w[r].size() == k, ErrorKind::InvalidArgument, "w must be square");
      for (std::size_t c = 0; c < k; ++c) mat(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = w[r][c].get<double>();
    }
    std::optional<Curve> slope;
    if (j.contains("b_coeffs")) slope = slope_from(j["b_coeffs"]);
    return FunctionalSpec::quadratic(mat, std::vector<Curve>(basis.begin(), basis.begin() + static_cast<std::ptrdiff_t>(k)),
                                     spec.mean, slope, a);
  }
  if (kind == "norm") {
    const std::string map = j.value("map", "identity");
    NormMap m = NormMap::identity;
    if (map == "sine") m = NormMap::sine;
    else if (map == "exp_decay") m = NormMap::exp_decay;
    else require(map == "identity", ErrorKind::InvalidArgument, "unknown norm map '" + map + "'");
    return FunctionalSpec::norm_nonlinear(m, spec.mean, j.value("scale", 1.0), a);
  }
  fail(ErrorKind::InvalidArgument, "unknown functional kind '" + kind + "'");
}

Json load_json_arg(const std::string& arg) {
  std::string text = arg;
  if (!arg.empty() && arg.front() != '{') {
    std::ifstream in(arg);
    if (!in) fail(ErrorKind::IoError, "cannot open '" + arg + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  try {
    return Json::parse(text);
  } catch (const Json::exception& e) {
    fail(ErrorKind::FormatError, std::string("functional spec: ") + e.what());
  }
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  for (const auto& field : csv::split(s)) out.push_back(csv::parse_double(field, "--u-grid"));
  require(!out.empty(), ErrorKind::InvalidArgument, "--u-grid is empty");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nonparametric functional regression and functional derivative estimation"};
  app.require_subcommand(1);

  std::string input, responses, out = "out", kernel_name = "quadratic";
  double fve = 0.995;

  auto* fpca_cmd = app.add_subcommand("fpca", "Functional principal components of a curve sample");
  fpca_cmd->add_option("--input", input, "curves CSV (t,id1,id2,...)")->required();
  fpca_cmd->add_option("--fve", fve, "fraction of variance explained");
  fpca_cmd->add_option("--out", out, "output directory");

  std::string bandwidth = "auto", at = "mean";
  auto* fit_cmd = app.add_subcommand("fit", "Nadaraya-Watson estimate of the regression functional");
  fit_cmd->add_option("--input", input)->required();
  fit_cmd->add_option("--responses", responses, "responses CSV (y or id,y)")->required();
  fit_cmd->add_option("--kernel", kernel_name, "uniform|triangular|quadratic");
  fit_cmd->add_option("--bandwidth", bandwidth, "auto (cross-validation) or a positive value");
  fit_cmd->add_option("--at", at, "mean or a 1-based curve index");
  fit_cmd->add_option("--out", out);

  std::optional<std::size_t> components;
  std::string h1 = "auto", h2 = "auto";
  double q1 = 0.5, q2 = 0.25;
  auto* derive_cmd = app.add_subcommand("derive", "Functional derivative estimates");
  derive_cmd->add_option("--input", input)->required();
  derive_cmd->add_option("--responses", responses)->required();
  derive_cmd->add_option("--components", components, "K; chosen by --fve when omitted");
  derive_cmd->add_option("--fve", fve);
  derive_cmd->add_option("--h1", h1, "auto or a positive value");
  derive_cmd->add_option("--h2", h2, "auto or a value in (0,1]");
  derive_cmd->add_option("--q1", q1, "quantile for automatic h1");
  derive_cmd->add_option("--q2", q2, "quantile for automatic h2");
  derive_cmd->add_option("--kernel", kernel_name);
  derive_cmd->add_option("--at", at, "all, mean or a 1-based curve index");
  derive_cmd->add_option("--out", out);

  std::string preset, functional = R"({"kind":"linear","b_coeffs":[1.5,-0.5]})";
  std::size_t n = 100, grid_size = 101, process_components = 21;
  double sigma = 0.0;
  std::uint64_t seed = 1;
  auto* sim_cmd = app.add_subcommand("simulate", "Simulate curves and responses");
  sim_cmd->add_option("--preset", preset, "expdecay-b<B>-beta<beta> or poly-a<a>")->required();
  sim_cmd->add_option("--n", n);
  sim_cmd->add_option("--sigma", sigma);
  sim_cmd->add_option("--functional", functional, "inline JSON or a path to a JSON file");
  sim_cmd->add_option("--seed", seed);
  sim_cmd->add_option("--grid-size", grid_size);
  sim_cmd->add_option("--process-components", process_components);
  sim_cmd->add_option("--out", out);

  SmallBallParams sb;
  std::string u_grid = "0.5,0.3,0.2,0.1";
  std::size_t n_mc = 1000000, truncation = 25;
  auto* sb_cmd = app.add_subcommand("smallball", "Small-ball law against Monte Carlo");
  sb_cmd->add_option("--B", sb.B);
  sb_cmd->add_option("--beta", sb.beta);
  sb_cmd->add_option("--b", sb.b);
  sb_cmd->add_option("--u-grid", u_grid);
  sb_cmd->add_option("--mc", n_mc);
  sb_cmd->add_option("--J", truncation, "number of eigenvalues");
  sb_cmd->add_option("--seed", seed);
  sb_cmd->add_option("--out", out);

  std::string heights, ages;
  double max_age = 10.0, response_age = 18.0;
  auto* growth_cmd = app.add_subcommand("growth-demo", "Growth-rate pipeline on longitudinal height data");
  growth_cmd->add_option("--heights", heights, "heights CSV (id,<one column per age>)")->required();
  growth_cmd->add_option("--ages", ages, "ages CSV (single column 'age')")->required();
  growth_cmd->add_option("--predictor-max-age", max_age);
  growth_cmd->add_option("--response-age", response_age);
  growth_cmd->add_option("--fve", fve);
  growth_cmd->add_option("--components", components, "K; chosen by --fve when omitted");
  growth_cmd->add_option("--out", out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  const auto config = [&](const CLI::App* cmd) {
    Json j = Json::object();
    for (const CLI::Option* opt : cmd->get_options()) {
      if (opt->get_name() == "--help") continue;
      const auto res = opt->results();
      if (!res.empty()) j[opt->get_name()] = res.back();
    }
    j["command"] = cmd->get_name();
    return j;
  };

  try {
    if (*fpca_cmd) {
      const Sample s = load_curves_csv(input);
      Report r;
      r.eig = fpca_by_fve(s, fve);
      r.score_ids = s.ids;
      r.summary["config"] = config(fpca_cmd);
      r.summary["time_origin"] = s.time_origin;
      r.summary["time_scale"] = s.time_scale;
      export_report(r, out);
      std::printf("K = %zu, FVE = %.4f\n", r.eig->components(), r.eig->fve.back());
    } else if (*fit_cmd) {
      const Sample s = load_curves_csv(input);
      const auto y = load_responses_csv(responses, s.size());
      const KernelSpec kernel{parse_kernel_family(kernel_name), 1.0};
      Json summary{{"config", config(fit_cmd)}};
      double h = 0.0;
      if (auto v = auto_or_value(bandwidth, "--bandwidth")) {
        h = *v;
      } else {
        const auto cv = cv_bandwidth_detail(s, y, kernel, default_bandwidth_candidates(s));
        h = cv.bandwidth;
        summary["cv"] = {{"candidates", cv.candidates}, {"scores", cv.scores}};
      }
      const RegressionFit fit{s, y, kernel, h};
      const PointSelection p = parse_at(at, s.size(), false);
      const Curve x = p.mean ? mean_function(s) : s.curves[p.index];
      summary["bandwidth"] = h;
      summary["point"] = p.mean ? std::string("mean") : s.ids[p.index];
      summary["estimate"] = nw_estimate(fit, x);

      fs::create_directories(out);
      csv::Writer w(fs::path(out) / "fitted.csv");
      w.row({"id", "y", "fitted"});
      for (std::size_t i = 0; i < s.size(); ++i)
        w.row({s.ids[i], csv::format_double(y[i]), csv::format_double(nw_estimate(fit, s.curves[i]))});
      write_json(fs::path(out) / "summary.json", summary);
      std::printf("g_hat = %.17g (h = %.6g)\n", summary["estimate"].get<double>(), h);
    } else if (*derive_cmd) {
      const Sample s = load_curves_csv(input);
      const auto y = load_responses_csv(responses, s.size());
      Report r;
      r.eig = fpca_by_fve(s, fve, components);
      r.score_ids = s.ids;
      DeriveConfig cfg{r.eig->components(), BandwidthPolicy{auto_or_value(h1, "--h1"), auto_or_value(h2, "--h2"), q1, q2},
                       KernelSpec{parse_kernel_family(kernel_name), 1.0}};
      const PointSelection p = parse_at(at, s.size(), true);
      std::vector<std::pair<std::string, Curve>> points;
      if (p.mean || p.all) points.emplace_back("mean", r.eig->mean);
      if (p.all)
        for (std::size_t i = 0; i < s.size(); ++i) points.emplace_back(s.ids[i], s.curves[i]);
      if (!p.mean && !p.all) points.emplace_back(s.ids[p.index], s.curves[p.index]);
      add_gammas(r, s, y, *r.eig, cfg, points);
      r.summary["config"] = config(derive_cmd);
      export_report(r, out);
      if (!any_estimate(r)) fail(ErrorKind::EmptyPairNeighborhood, "no derivative component could be estimated");
      std::printf("K = %zu, %zu evaluation point(s)\n", cfg.components, points.size());
    } else if (*sim_cmd) {
      const GridPtr grid = Grid::uniform(grid_size);
      const ProcessSpec spec = preset_process(preset, grid, process_components);
      const FunctionalSpec f = parse_functional(load_json_arg(functional), spec);
      const Sample s = sample_process(spec, n, seed);
      const auto y = gen_response(s, f, sigma, seed);
      fs::create_directories(out);
      write_sample_csv(fs::path(out) / "curves.csv", s);
      write_responses_csv(fs::path(out) / "responses.csv", s.ids, y);
      std::vector<double> truth;
      for (const Curve& x : s.curves) truth.push_back(evaluate(f, x));
      write_responses_csv(fs::path(out) / "truth.csv", s.ids, truth);
      std::vector<double> gamma_mean;
      for (std::size_t j = 1; j <= spec.components(); ++j) gamma_mean.push_back(true_gamma(f, spec.mean, spec, j));
      write_json(fs::path(out) / "summary.json", Json{{"config", config(sim_cmd)},
                                                      {"eigenvalues", spec.eigenvalues},
                                                      {"true_gamma_at_mean", gamma_mean}});
      std::printf("wrote %zu curves on %zu grid points\n", n, grid_size);
    } else if (*sb_cmd) {
      validate(sb);
      const auto us = parse_list(u_grid);
      const auto theta = exponential_eigenvalues(truncation, sb.B, sb.beta);
      fs::create_directories(out);
      csv::Writer w(fs::path(out) / "smallball.csv");
      w.row({"u", "pi_u", "log_pi_u", "p_hat", "log_ratio"});
      Json rows = Json::array();
      for (double u : us) {
        const double lp = log_pi_u(u, sb);
        const double p_hat = mc_small_ball(theta, n_mc, u, seed);
        const double ratio = p_hat > 0.0 ? std::log(p_hat) / lp : NAN;
        w.row({csv::format_double(u), csv::format_double(std::exp(lp)), csv::format_double(lp),
               csv::format_double(p_hat), p_hat > 0.0 ? csv::format_double(ratio) : ""});
        rows.push_back({{"u", u}, {"p_hat", p_hat}, {"log_pi_u", lp}});
        std::printf("u = %-6g P = %-10.6g ratio = %.4f\n", u, p_hat, ratio);
      }
      write_json(fs::path(out) / "summary.json", Json{{"config", config(sb_cmd)}, {"rows", rows}});
    } else if (*growth_cmd) {
      const LongitudinalTable table = load_longitudinal_csv(heights, ages);
      const auto col = table.column_of(response_age);
      require(col.has_value(), ErrorKind::FormatError, "no measurement at the response age");
      std::vector<double> y;
      for (const auto& row : table.heights) y.push_back(row[*col]);
      const LongitudinalTable predictors = table.up_to(max_age);
      const Sample s = growth_rates(predictors);

      Report r;
      r.eig = fpca_by_fve(s, fve, components);
      r.score_ids = s.ids;
      const DeriveConfig cfg{r.eig->components(), BandwidthPolicy{}, KernelSpec{}};
      std::vector<std::pair<std::string, Curve>> points{{"mean", r.eig->mean}};
      for (std::size_t i = 0; i < s.size(); ++i) points.emplace_back(s.ids[i], s.curves[i]);
      add_gammas(r, s, y, *r.eig, cfg, points);

      // <dgf, psi_k> = gamma_k for every complete estimate
      double worst = 0.0;
      std::size_t complete = 0;
      for (const auto& row : r.gammas) {
        if (!row.estimate.complete()) continue;
        ++complete;
        const Curve dgf = derivative_generating_function(row.estimate, cfg.components);
        for (std::size_t k = 0; k < cfg.components; ++k)
          worst = std::max(worst, std::abs(inner_product(dgf, r.eig->eigenfunctions[k]) - *row.estimate.gammas[k]));
      }
      r.summary["config"] = config(growth_cmd);
      r.summary["subjects"] = s.size();
      r.summary["rate_points"] = s.grid->size();
      r.summary["time_origin"] = s.time_origin;
      r.summary["time_scale"] = s.time_scale;
      r.summary["complete_estimates"] = complete;
      r.summary["identity_max_error"] = worst;
      export_report(r, out);
      write_sample_csv(fs::path(out) / "rates.csv", s);
      std::printf("K = %zu, FVE =", cfg.components);
      for (double v : r.eig->fve) std::printf(" %.4f", v);
      std::printf(", complete estimates %zu/%zu, identity error %.3g\n", complete, points.size(), worst);
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code(e.kind());
  } catch (const fs::filesystem_error& e) {
    std::fprintf(stderr, "error: IoError: %s\n", e.what());
    return 4;
  } catch (const Json::exception& e) {
    std::fprintf(stderr, "error: FormatError: %s\n", e.what());
    return 2;
  }
  return 0;
}
