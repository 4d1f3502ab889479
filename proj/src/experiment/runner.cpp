#include "stackseek/experiment/runner.hpp"

#include "stackseek/audit.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

namespace stackseek::experiment {

namespace fs = std::filesystem;

namespace {

std::string num(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_num(double v) {
  if (!std::isfinite(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string arr(const VecD& v) {
  std::string s = "[";
  for (Eigen::Index i = 0; i < v.size(); ++i) s += (i ? "," : "") + num(v(i));
  return s + "]";
}

std::string arr(const std::vector<double>& v) {
  return arr(VecD(VecD::Map(v.data(), static_cast<Eigen::Index>(v.size()))));
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out + "\"";
}

std::string inner_json(const ViSolveReport<double>& r) {
  return "{\"residual\":" + num(r.residual) + ",\"tol\":" + num(r.tol) +
         ",\"iterations\":" + std::to_string(r.iterations) +
         ",\"converged\":" + (r.converged ? "true" : "false") + ",\"step\":" + num(r.step) + "}";
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write '" + p.string() + "'");
  return f;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir))
    throw std::runtime_error("cannot create output directory '" + dir + "'");
}

bool profile_enabled(const ExperimentConfig& cfg) {
  if (cfg.profile) return *cfg.profile;
  return cfg.scenario == Scenario::kTestbed;
}

double now_seconds() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

/// Roots of the inexact-regime fixed-point equation on the grid, refined by
/// bisection.
std::vector<double> inexact_limits(const scenarios::Illustrative& p, double lo, double hi,
                                   double step) {
  const auto G = [&](double y) { return p.exogenous_gradient(y, p.selected_x1(y)); };
  std::vector<double> roots;
  double a = lo, ga = G(a);
  for (double b = lo + step; b <= hi; b += step) {
    const double gb = G(b);
    if (ga == 0) roots.push_back(a);
    else if ((ga < 0) != (gb < 0)) {
      double l = a, r = b, gl = ga;
      for (int it = 0; it < 200 && r - l > 1e-15; ++it) {
        const double mid = 0.5 * (l + r), gm = G(mid);
        if ((gm < 0) == (gl < 0)) {
          l = mid;
          gl = gm;
        } else {
          r = mid;
        }
      }
      roots.push_back(0.5 * (l + r));
    }
    a = b;
    ga = gb;
  }
  return roots;
}

}  // namespace

Instance make_instance(const ExperimentConfig& cfg) {
  switch (cfg.scenario) {
    case Scenario::kTestbed: {
      auto tb = scenarios::build_monotone_testbed(cfg.testbed);
      return {tb.problem(), [tb](const VecD& y) { return tb.selection(y(0)); }};
    }
    case Scenario::kEnergy: {
      auto ec = scenarios::build_energy_community(cfg.energy);
      TikhonovPathParams<double> path;
      path.inner = cfg.inner;
      path.inner_tol = {1e-9, 1.0, 1e-12};
      path.path_tol = 1e-7;
      return {ec.problem(), tikhonov_selection(ec.game(), ec.phi(), path)};
    }
    case Scenario::kIllustrative: {
      auto il = scenarios::build_illustrative(cfg.illustrative);
      return {il.problem(), [il](const VecD& y) { return il.selection(y(0)); }};
    }
  }
  throw std::logic_error("unknown scenario");
}

SeekOptions<double> seek_options(const ExperimentConfig& cfg) {
  SeekOptions<double> o;
  o.inner = cfg.inner;
  o.inner_tol = cfg.inner_tol;
  o.paper_sign = cfg.paper_sign;
  o.parallel_inner = cfg.parallel_inner;
  return o;
}

ScheduleParams<double> schedule_for(const ExperimentConfig& cfg, const Instance& inst) {
  auto s = cfg.schedule;
  s.m = inst.problem.m();
  return s;
}

Trace<double> run_seek(const ExperimentConfig& cfg, const Instance& inst, std::uint64_t seed) {
  if (cfg.scenario == Scenario::kIllustrative)
    throw std::invalid_argument("the illustrative scenario runs regimes, not Algorithm 1");
  Philox4x32 rng(seed);
  return seek(inst.problem, schedule_for(cfg, inst), cfg.iterations, rng, seek_options(cfg));
}

scenarios::RegimeTrace run_illustrative(const ExperimentConfig& cfg) {
  const auto il = scenarios::build_illustrative(cfg.illustrative);
  scenarios::Regime regime;
  switch (cfg.regime) {
    case scenarios::RegimeKind::kOscillating: regime = scenarios::Regime::oscillating(cfg.cycle); break;
    case scenarios::RegimeKind::kInexact: regime = scenarios::Regime::inexact(); break;
    case scenarios::RegimeKind::kExact: regime = scenarios::Regime::exact(); break;
  }
  return scenarios::run_regime(il, regime, cfg.regime_eta, cfg.iterations, cfg.illustrative.y0);
}

void write_trace_jsonl(std::ostream& out, const Trace<double>& trace) {
  for (const auto& r : trace.records) {
    out << "{\"k\":" << r.k << ",\"y\":" << arr(r.y) << ",\"v\":" << arr(r.v)
        << ",\"y_hat\":" << arr(r.y_hat) << ",\"x\":" << arr(r.x) << ",\"x_hat\":" << arr(r.x_hat)
        << ",\"eta\":" << num(r.eta) << ",\"delta\":" << num(r.delta) << ",\"beta\":" << num(r.beta)
        << ",\"J0\":" << num(r.J0) << ",\"J0_hat\":" << num(r.J0_hat) << ",\"g_hat\":" << arr(r.g_hat)
        << ",\"inner\":" << inner_json(r.inner) << ",\"inner_hat\":" << inner_json(r.inner_hat)
        << "}\n";
  }
  if (trace.fault) out << "{\"fault\":" << quote(*trace.fault) << "}\n";
}

void write_trace_jsonl(std::ostream& out, const scenarios::RegimeTrace& trace) {
  for (const auto& r : trace.records) {
    out << "{\"k\":" << r.k << ",\"y\":" << num(r.y) << ",\"x1\":" << num(r.x1)
        << ",\"x2\":" << num(r.x2) << ",\"grad\":" << num(r.grad) << ",\"J0\":" << num(r.J0)
        << "}\n";
  }
  if (trace.fault) out << "{\"fault\":" << quote(*trace.fault) << "}\n";
}

std::vector<double> best_so_far(const std::vector<double>& values) {
  std::vector<double> out(values.size());
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = best = std::min(best, values[i]);
  return out;
}

bool SummaryMetrics::ok() const {
  return std::none_of(replicates.begin(), replicates.end(),
                      [](const ReplicateResult& r) { return r.fault.has_value(); });
}

SummaryMetrics run_experiment(const ExperimentConfig& cfg) {
  validate(cfg);
  ensure_dir(cfg.out);
  const double t_start = now_seconds();
  SummaryMetrics sm;
  const fs::path dir(cfg.out);

  // rows[r][k] holds the CSV columns of replicate r at iteration k
  std::vector<std::vector<std::vector<double>>> rows;
  std::vector<std::string> header;

  if (cfg.scenario == Scenario::kIllustrative) {
    header = {"k", "y", "x1", "x2", "grad", "J0", "best_J0"};
    for (int rep = 0; rep < cfg.replicates; ++rep) {
      const double t0 = now_seconds();
      ReplicateResult rr;
      rr.seed = cfg.seed + static_cast<std::uint64_t>(rep);
      const auto tr = run_illustrative(cfg);
      rr.trace_path = (dir / (cfg.name + "_seed" + std::to_string(rr.seed) + ".jsonl")).string();
      {
        auto f = open_out(rr.trace_path);
        write_trace_jsonl(f, tr);
      }
      std::vector<double> j0;
      for (const auto& r : tr.records) j0.push_back(r.J0);
      rr.best_J0 = best_so_far(j0);
      rr.records = static_cast<long>(tr.records.size());
      rr.fault = tr.fault;
      rr.y_final = {tr.y_final};
      rr.final_J0 = j0.empty() ? std::nan("") : j0.back();
      std::vector<std::vector<double>> rep_rows;
      for (std::size_t k = 0; k < tr.records.size(); ++k) {
        const auto& r = tr.records[k];
        rep_rows.push_back({static_cast<double>(r.k), r.y, r.x1, r.x2, r.grad, r.J0, rr.best_J0[k]});
      }
      rows.push_back(std::move(rep_rows));
      rr.wall_seconds = now_seconds() - t0;
      sm.replicates.push_back(std::move(rr));
    }
  } else {
    const Instance inst = make_instance(cfg);
    const int m = inst.problem.m();
    header = {"k"};
    for (int i = 0; i < m; ++i) header.push_back(m == 1 ? "y" : "y" + std::to_string(i));
    for (const char* h : {"J0", "best_J0", "beta", "eta", "delta", "grad_norm", "residual",
                          "residual_hat", "tol"})
      header.push_back(h);
    const bool want_profile = profile_enabled(cfg);
    for (int rep = 0; rep < cfg.replicates; ++rep) {
      const double t0 = now_seconds();
      ReplicateResult rr;
      rr.seed = cfg.seed + static_cast<std::uint64_t>(rep);
      const auto tr = run_seek(cfg, inst, rr.seed);
      rr.trace_path = (dir / (cfg.name + "_seed" + std::to_string(rr.seed) + ".jsonl")).string();
      {
        auto f = open_out(rr.trace_path);
        write_trace_jsonl(f, tr);
      }
      std::vector<double> j0;
      for (const auto& r : tr.records) {
        j0.push_back(r.J0);
        rr.residuals.push_back(std::max(r.inner.residual, r.inner_hat.residual));
      }
      rr.best_J0 = best_so_far(j0);
      rr.records = static_cast<long>(tr.records.size());
      rr.fault = tr.fault;
      rr.y_final.assign(tr.y_final.data(), tr.y_final.data() + tr.y_final.size());
      rr.final_J0 = j0.empty() ? std::nan("") : j0.back();
      if (want_profile && !tr.records.empty()) {
        try {
          rr.stationarity =
              stationarity_profile(tr, inst.problem.J0, inst.selection, cfg.fd_step);
        } catch (const std::exception& e) {
          if (!rr.fault) rr.fault = std::string("stationarity profile: ") + e.what();
        }
      }
      std::vector<std::vector<double>> rep_rows;
      for (std::size_t k = 0; k < tr.records.size(); ++k) {
        const auto& r = tr.records[k];
        std::vector<double> row{static_cast<double>(r.k)};
        for (int i = 0; i < m; ++i) row.push_back(r.y(i));
        row.insert(row.end(), {r.J0, rr.best_J0[k], r.beta, r.eta, r.delta, r.g_hat.norm(),
                               r.inner.residual, r.inner_hat.residual, r.inner.tol});
        rep_rows.push_back(std::move(row));
      }
      rows.push_back(std::move(rep_rows));
      rr.wall_seconds = now_seconds() - t0;
      sm.replicates.push_back(std::move(rr));
    }
  }

  // Aggregate: column-wise mean over replicates on the rows every replicate reached.
  std::size_t common = rows.empty() ? 0 : rows.front().size();
  for (const auto& r : rows) common = std::min(common, r.size());
  sm.summary_csv = (dir / (cfg.name + ".csv")).string();
  {
    auto f = open_out(sm.summary_csv);
    for (std::size_t c = 0; c < header.size(); ++c) f << (c ? "," : "") << header[c];
    f << "\n";
    for (std::size_t k = 0; k < common; ++k) {
      for (std::size_t c = 0; c < header.size(); ++c) {
        double s = 0;
        for (const auto& r : rows) s += r[k][c];
        const double v = s / static_cast<double>(rows.size());
        f << (c ? "," : "") << (c == 0 ? std::to_string(k) : csv_num(v));
      }
      f << "\n";
    }
  }

  double fj = 0, st = 0;
  int st_count = 0;
  for (const auto& r : sm.replicates) {
    fj += r.final_J0;
    if (r.stationarity) {
      st += *r.stationarity;
      ++st_count;
    }
  }
  sm.final_J0 = fj / static_cast<double>(sm.replicates.size());
  if (st_count == static_cast<int>(sm.replicates.size()) && st_count > 0)
    sm.stationarity = st / st_count;
  sm.wall_seconds = now_seconds() - t_start;

  sm.summary_json = (dir / (cfg.name + "_summary.json")).string();
  {
    auto f = open_out(sm.summary_json);
    f << "{\n  \"scenario\": " << quote(to_string(cfg.scenario)) << ",\n";
    if (cfg.scenario == Scenario::kIllustrative)
      f << "  \"regime\": " << quote(scenarios::to_string(cfg.regime)) << ",\n";
    f << "  \"iterations\": " << cfg.iterations << ",\n"
      << "  \"final_J0\": " << num(sm.final_J0) << ",\n"
      << "  \"stationarity_profile\": " << (sm.stationarity ? num(*sm.stationarity) : "null")
      << ",\n  \"ok\": " << (sm.ok() ? "true" : "false") << ",\n"
      << "  \"wall_clock_seconds\": " << num(sm.wall_seconds) << ",\n"
      << "  \"summary_csv\": " << quote(fs::path(sm.summary_csv).filename().string()) << ",\n"
      << "  \"replicates\": [\n";
    for (std::size_t i = 0; i < sm.replicates.size(); ++i) {
      const auto& r = sm.replicates[i];
      const double max_res =
          r.residuals.empty() ? std::nan("") : *std::max_element(r.residuals.begin(), r.residuals.end());
      f << "    {\"seed\": " << r.seed
        << ", \"trace\": " << quote(fs::path(r.trace_path).filename().string())
        << ", \"records\": " << r.records << ", \"y_final\": " << arr(r.y_final)
        << ", \"final_J0\": " << num(r.final_J0)
        << ", \"best_J0\": " << (r.best_J0.empty() ? "null" : num(r.best_J0.back()))
        << ", \"max_inner_residual\": " << num(max_res)
        << ", \"stationarity_profile\": " << (r.stationarity ? num(*r.stationarity) : "null")
        << ", \"fault\": " << (r.fault ? quote(*r.fault) : "null")
        << ", \"wall_clock_seconds\": " << num(r.wall_seconds) << "}"
        << (i + 1 < sm.replicates.size() ? "," : "") << "\n";
    }
    f << "  ]\n}\n";
  }
  return sm;
}

std::string run_oracle(const ExperimentConfig& cfg) {
  validate(cfg);
  std::ostringstream o;
  o << "{\n  \"scenario\": " << quote(to_string(cfg.scenario)) << ",\n";
  switch (cfg.scenario) {
    case Scenario::kIllustrative: {
      const auto il = scenarios::build_illustrative(cfg.illustrative);
      const double eps = cfg.illustrative.epsilon;
      const double lo = -eps + cfg.grid_step;
      const auto [ystar, jstar] = scenarios::grid_argmin(
          [&](double y) { return il.induced_objective(y); }, lo, cfg.oracle_hi, cfg.grid_step);
      const auto roots = inexact_limits(il, lo, cfg.oracle_hi, cfg.grid_step);
      o << "  \"epsilon\": " << num(eps) << ",\n"
        << "  \"grid\": {\"lo\": " << num(lo) << ", \"hi\": " << num(cfg.oracle_hi)
        << ", \"step\": " << num(cfg.grid_step) << "},\n"
        << "  \"y_star\": " << num(ystar) << ",\n"
        << "  \"induced_J0_star\": " << num(jstar) << ",\n"
        << "  \"x_star\": " << arr(il.selection(ystar)) << ",\n"
        << "  \"exact_gradient_at_y_star\": " << num(il.exact_gradient(ystar)) << ",\n"
        << "  \"inexact_limits\": " << arr(roots) << ",\n"
        << "  \"exact_gradient_at_inexact_limits\": [";
      for (std::size_t i = 0; i < roots.size(); ++i)
        o << (i ? "," : "") << num(il.exact_gradient(roots[i]));
      o << "]\n";
      break;
    }
    case Scenario::kTestbed: {
      const auto tb = scenarios::build_monotone_testbed(cfg.testbed);
      const double ys = tb.induced_minimizer();
      o << "  \"y_star\": " << num(ys) << ",\n"
        << "  \"induced_J0_star\": " << num(tb.induced_objective(ys)) << ",\n"
        << "  \"x_star\": " << arr(tb.selection(ys)) << ",\n"
        << "  \"induced_smoothness\": " << num(*tb.leader().meta.induced_smoothness) << ",\n"
        << "  \"y0\": " << num(cfg.testbed.y0) << ",\n"
        << "  \"induced_gradient_at_y0\": " << num(tb.induced_gradient(cfg.testbed.y0)) << "\n";
      break;
    }
    case Scenario::kEnergy: {
      const auto inst = make_instance(cfg);
      const VecD& y0 = inst.problem.y0;
      const VecD yref = *inst.problem.J0.meta.reference;
      const VecD x0 = inst.selection(y0);
      const VecD xr = inst.selection(yref);
      o << "  \"y0\": " << arr(y0) << ",\n"
        << "  \"selected_x_at_y0\": " << arr(x0) << ",\n"
        << "  \"induced_J0_at_y0\": " << num(inst.problem.J0(y0, x0)) << ",\n"
        << "  \"price_ref\": " << arr(yref) << ",\n"
        << "  \"selected_x_at_price_ref\": " << arr(xr) << ",\n"
        << "  \"induced_J0_at_price_ref\": " << num(inst.problem.J0(yref, xr)) << ",\n"
        << "  \"induced_gradient_at_y0\": "
        << arr(induced_gradient(inst.problem.J0, inst.selection, y0)) << "\n";
      break;
    }
  }
  o << "}\n";
  ensure_dir(cfg.out);
  auto f = open_out(fs::path(cfg.out) / (cfg.name + "_oracle.json"));
  f << o.str();
  return o.str();
}

std::vector<CheckLine> run_checks(const ExperimentConfig& cfg, int samples) {
  validate(cfg);
  std::vector<CheckLine> out;
  const auto fmt = [](double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return std::string(buf);
  };
  const Instance inst = make_instance(cfg);
  const auto& game = inst.problem.game;
  const auto& region = game.region();

  const double viol = region.violation(region.feasible_point());
  out.push_back({"feasibility", viol <= 1e-7, "max row violation " + fmt(viol)});

  std::vector<VecD> ys{inst.problem.y0};
  if (cfg.scenario == Scenario::kEnergy) {
    Philox4x32 rng(cfg.seed, 0x70726963u);
    for (int s = 0; s < 4; ++s) {
      VecD y(inst.problem.m());
      for (Eigen::Index i = 0; i < y.size(); ++i) y(i) = rng.uniform(-2.0, 2.0);
      ys.push_back(y);
    }
  }
  for (std::size_t i = 0; i < ys.size(); ++i) {
    auto rep = check_monotonicity(game, ys[i], samples, cfg.seed + i);
    const bool declared = game.monotonicity().certified();
    std::string detail = std::string("declared ") + to_string(game.monotonicity().kind) +
                         ", min shifted inner product " + fmt(rep.min_inner) + " over " +
                         std::to_string(rep.samples) + " pairs";
    // An unverified game is reported but cannot fail the audit.
    out.push_back({"monotonicity y=" + arr(ys[i]), !declared || rep.passed, detail});
  }

  auto conv = check_strong_convexity(inst.problem.phi, inst.problem.phi.mu, game.dimension(),
                                     samples, cfg.seed);
  out.push_back({"selection strong convexity", conv.passed,
                 "mu " + fmt(inst.problem.phi.mu) + ", min relative gap " +
                     fmt(conv.min_relative_gap)});

  if (game.has_costs()) {
    Philox4x32 rng(cfg.seed, 0x66646368u);
    std::vector<VecD> pts;
    for (int s = 0; s < 20; ++s) pts.push_back(sample_feasible(region, rng));
    const double err = pseudogradient_fd_error(game, inst.problem.y0, pts);
    out.push_back({"pseudogradient vs costs", err <= 1e-6, "max relative fd error " + fmt(err)});
  }

  auto lip = check_leader_lipschitz(inst.problem.J0, region, inst.problem.y0,
                                    std::min(samples, 200), cfg.seed);
  out.push_back({"leader Lipschitz in x", lip.passed,
                 "max observed ratio " + fmt(lip.max_ratio) +
                     (inst.problem.J0.meta.lipschitz_x
                          ? ", declared " + fmt(*inst.problem.J0.meta.lipschitz_x)
                          : ", none declared")});
  return out;
}

}  // namespace stackseek::experiment
