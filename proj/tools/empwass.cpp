/* Copyright 2026 The empwass Authors.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// empwass: command-line front end.

#include <CLI11.hpp>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <nlohmann/json.hpp>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "empwass/errors.hpp"
#include "empwass/experiments.hpp"
#include "empwass/kernels.hpp"
#include "empwass/measures.hpp"
#include "empwass/multiscale.hpp"
#include "empwass/theory.hpp"
#include "empwass/transport.hpp"
#include "empwass/verify.hpp"

namespace {

using empwass::InputError;
using nlohmann::json;
namespace ex = empwass::experiments;
namespace th = empwass::theory;

struct Globals {
  std::uint64_t seed = 1;
  int threads = 0;
  bool json = false;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

empwass::EmpiricalMeasure read_points(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::vector<double> coords;
  std::size_t dim = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty()) continue;
    std::size_t fields = 0;
    std::stringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) {
      cell = trim(cell);
      double v = 0.0;
      const char* end = cell.data() + cell.size();
      auto [ptr, ec] = std::from_chars(cell.data(), end, v);
      if (cell.empty() || ec != std::errc() || ptr != end || !std::isfinite(v)) {
        throw InputError(path + ":" + std::to_string(lineno) + ": bad number '" + cell + "'");
      }
      coords.push_back(v);
      ++fields;
    }
    if (dim == 0) dim = fields;
    if (fields != dim) {
      throw InputError(path + ":" + std::to_string(lineno) + ": expected " +
                       std::to_string(dim) + " columns, found " + std::to_string(fields));
    }
  }
  if (dim == 0) throw InputError(path + ": no points");
  return empwass::EmpiricalMeasure(dim, std::move(coords));
}

std::string num(double v) {
  std::ostringstream out;
  out << std::setprecision(12) << v;
  return out.str();
}

json plan_json(const empwass::TransportPlan& plan) {
  json pairing = nullptr;
  if (const auto* perm = std::get_if<empwass::Permutation>(&plan.pairing)) {
    pairing = {{"kind", "permutation"}, {"target", *perm}};
  } else if (const auto* flows = std::get_if<std::vector<empwass::Flow>>(&plan.pairing)) {
    json rows = json::array();
    for (const auto& f : *flows) rows.push_back({f.source, f.target, f.mass});
    pairing = {{"kind", "flows"}, {"flows", rows}};
  } else if (const auto* dense = std::get_if<empwass::DenseCoupling>(&plan.pairing)) {
    pairing = {{"kind", "dense"},
               {"rows", dense->rows},
               {"cols", dense->cols},
               {"mass", dense->mass}};
  }
  return {{"method", empwass::to_string(plan.method)},
          {"cost", plan.cost},
          {"pairing", pairing}};
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  out << text;
}

void emit(const json& j) { std::cout << j.dump(2) << '\n'; }

int exit_for(ex::Verdict v) {
  return v == ex::Verdict::kInconsistent ? empwass::kExitInconsistent : empwass::kExitOk;
}

std::filesystem::path prepare_out(const std::string& dir) {
  std::filesystem::path out(dir);
  std::error_code ec;
  std::filesystem::create_directories(out, ec);
  if (ec || !std::filesystem::is_directory(out)) {
    throw InputError("output directory '" + dir + "' is not writable");
  }
  return out;
}

ex::ExperimentConfig load(const std::string& path, const Globals& g, bool seed_given,
                          bool threads_given) {
  ex::ExperimentConfig c = ex::load_config(path);
  if (seed_given) c.seed = g.seed;
  if (threads_given) c.threads = g.threads;
  return c;
}

void print_rate(const ex::RateReport& r) {
  std::cout << "estimator " << ex::to_string(r.config.estimator) << ", statistic "
            << th::to_string(r.config.statistic) << '\n';
  std::cout << std::setw(10) << "n" << std::setw(22) << "statistic" << std::setw(22)
            << "stderr" << '\n';
  for (const auto& s : r.per_n) {
    std::cout << std::setw(10) << s.n << std::setw(22) << num(s.statistic) << std::setw(22)
              << num(s.statistic_stderr) << '\n';
  }
  if (r.fit) {
    std::cout << "slope " << num(r.fit->slope) << " +- " << num(r.fit->stderr) << " (R^2 "
              << num(r.fit->r_squared) << ")\n";
  }
  std::cout << "predicted exponent " << th::to_string(r.prediction.exponent) << " ("
            << th::to_string(r.prediction.regime) << ", " << r.prediction.source
            << "), band " << num(r.band) << '\n';
  std::cout << "verdict " << ex::to_string(r.verdict);
  if (!r.reason.empty()) std::cout << " (" << r.reason << ")";
  std::cout << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Empirical Wasserstein convergence toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  auto* seed_opt = app.add_option("--seed", g.seed, "Random seed");
  auto* threads_opt = app.add_option("--threads", g.threads, "Worker threads (0 = auto)")
                          ->check(CLI::NonNegativeNumber);
  app.add_flag("--json", g.json, "Emit JSON");

  // distance
  auto* distance = app.add_subcommand("distance", "W_p^p between point files or a file and a measure");
  std::vector<std::string> files;
  std::string measure;
  double p = 1.0;
  std::string plan_path;
  std::size_t oversample = 4;
  empwass::SolverOptions solver;
  distance->add_option("files", files, "Point files (headerless CSV)")->required()->expected(1, 2);
  distance->add_option("--measure", measure, "Reference measure spec");
  distance->add_option("--p", p, "Order p >= 1");
  distance->add_option("--plan", plan_path, "Write the transport plan as JSON");
  distance->add_option("--oversample", oversample, "Reference draws per point");
  distance->add_option("--exact-threshold", solver.exact_threshold);
  distance->add_option("--assignment-cap", solver.assignment_cap);
  distance->add_option("--epsilon-factor", solver.epsilon_factor);

  // bound
  auto* bound = app.add_subcommand("bound", "Multiscale discrepancy profile of a sample");
  std::string sample_path;
  std::optional<int> mmax, lmax;
  std::optional<double> cube;
  bound->add_option("sample", sample_path, "Sample point file")->required();
  bound->add_option("--measure", measure, "Reference measure spec")->required();
  bound->add_option("--p", p, "Order p >= 1");
  bound->add_option("--mmax", mmax, "Largest block index");
  bound->add_option("--lmax", lmax, "Deepest partition level");
  bound->add_option("--M", cube, "Truncation cube half-width");

  // predict
  auto* predict = app.add_subcommand("predict", "Theoretical rate for (p, d, r)");
  double pp = 1.0, rr = 2.0, eps = 0.1;
  int dd = 1;
  std::string kind = "weak", statistic = "mean";
  bool sqrt_tail = false;
  std::optional<double> alpha, xval, nval;
  std::optional<int> dim_override;
  predict->add_option("--p", pp)->required();
  predict->add_option("--d", dd)->required();
  predict->add_option("--r", rr)->required();
  predict->add_option("--moment-kind", kind)->check(CLI::IsMember({"weak", "strong"}));
  predict->add_option("--statistic", statistic);
  predict->add_flag("--sqrt-tail", sqrt_tail, "int t^(p-1) sqrt(H) dt is finite");
  predict->add_option("--epsilon", eps);
  predict->add_option("--alpha", alpha, "Moderate deviation / Baum-Katz exponent");
  predict->add_option("--x", xval, "Deviation level for the envelope");
  predict->add_option("--n", nval, "Sample size for the envelope");
  predict->add_option("--dimension-override", dim_override);

  // experiments
  std::string config_path, out_dir = "results";
  auto add_experiment = [&](const std::string& name, const std::string& help) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("config", config_path, "Experiment config (JSON)")->required();
    sub->add_option("--out", out_dir, "Output directory");
    return sub;
  };
  auto* rates = add_experiment("rates", "Moment rate experiment");
  auto* deviations = add_experiment("deviations", "Deviation tail experiment");
  auto* trajectory = add_experiment("trajectory", "Running-max trajectory diagnostic");

  // verify
  auto* verify = app.add_subcommand("verify", "Cross-module invariant suite");
  std::string group, fault = "none";
  verify->add_option("--group", group, "Run one group only");
  verify->add_option("--inject-fault", fault, "Inject a fault (cell-boundary)");

  // export-table
  auto* export_table = app.add_subcommand("export-table", "Exponent table as JSON");
  std::string table_out;
  export_table->add_option("--out", table_out, "Write to a file instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : empwass::kExitInput;
  }

  try {
    if (g.threads > 0) empwass::kernels::set_threads(g.threads);
    solver.backend = empwass::kernels::Backend::kOpenMP;

    if (distance->parsed()) {
      const auto x = read_points(files[0]);
      empwass::TransportResult result;
      std::string method;
      if (files.size() == 2) {
        if (!measure.empty()) throw InputError("give either two point files or --measure");
        const auto y = read_points(files[1]);
        if (x.dim() != y.dim()) throw InputError("dimension mismatch");
        result = empwass::wasserstein(x, y, p, solver);
        method = empwass::to_string(result.plan.method);
      } else {
        if (measure.empty()) throw InputError("second point file or --measure required");
        const auto mu = empwass::parse_measure(measure);
        if (mu->dim() != x.dim()) throw InputError("dimension mismatch");
        const auto est = empwass::semidiscrete_wp(x, *mu, p, oversample, g.seed, solver);
        result.value = est.value;
        method = x.dim() == 1 && mu->has_quantile() ? "quantile" : "semidiscrete";
        if (!plan_path.empty()) throw InputError("--plan needs two point files");
      }
      if (!plan_path.empty()) write_file(plan_path, plan_json(result.plan).dump(2) + "\n");
      const double wp = std::pow(result.value, 1.0 / p);
      if (g.json) {
        emit({{"p", p}, {"wpp", result.value}, {"wp", wp}, {"method", method}});
      } else {
        std::cout << "W_p^p " << num(result.value) << "\nW_p " << num(wp) << "\nmethod "
                  << method << '\n';
      }
      return empwass::kExitOk;
    }

    if (bound->parsed()) {
      const auto x = read_points(sample_path);
      const auto mu = empwass::parse_measure(measure);
      if (mu->dim() != x.dim()) throw InputError("dimension mismatch");
      if (!mu->has_box_mass()) throw InputError(measure + " has no cell-mass oracle");
      const int m_max = mmax.value_or(empwass::default_m_max(*mu));
      const int l_max = lmax.value_or(empwass::default_l_max(x.dim()));
      const auto prof = empwass::delta_p(x, *mu, p, m_max, l_max, cube);
      if (g.json) {
        json blocks = json::array();
        for (const auto& b : prof.per_block) {
          blocks.push_back({{"m", b.m},
                            {"sample_mass", b.sample_mass},
                            {"reference_mass", b.reference_mass},
                            {"cell_discrepancy", b.cell_discrepancy},
                            {"normalized_discrepancy", b.normalized_discrepancy},
                            {"sample_count", b.sample_count},
                            {"cell_counts", b.cell_counts}});
        }
        json j = {{"p", prof.p},
                  {"m_max", prof.m_max},
                  {"l_max", prof.l_max},
                  {"delta_p", prof.delta_p},
                  {"d_p", prof.d_p},
                  {"tail_bound", prof.tail_bound},
                  {"d_tail_bound", prof.d_tail_bound},
                  {"sample_mass_beyond", prof.sample_mass_beyond},
                  {"per_block", blocks}};
        if (prof.cube_half_width) {
          j["M"] = *prof.cube_half_width;
          j["a_pm"] = prof.a_pm;
          j["b_pm"] = prof.b_pm;
        }
        emit(j);
      } else {
        std::cout << "Delta_p " << num(prof.delta_p) << " (tail <= " << num(prof.tail_bound)
                  << ")\nD_p " << num(prof.d_p) << " (tail <= " << num(prof.d_tail_bound)
                  << ")\n";
        if (prof.cube_half_width) {
          std::cout << "A_{p,M} " << num(prof.a_pm) << "\nB_{p,M} " << num(prof.b_pm)
                    << "\nM " << num(*prof.cube_half_width) << '\n';
        }
        std::cout << "m_max " << m_max << ", l_max " << l_max << '\n';
      }
      return empwass::kExitOk;
    }

    if (predict->parsed()) {
      th::ProblemParams params;
      params.p = th::to_rational(pp);
      params.d = dd;
      params.r = th::to_rational(rr);
      params.moment_kind = th::parse_moment_kind(kind);
      params.sqrt_tail_integrable = sqrt_tail;
      params.epsilon = th::to_rational(eps);
      params.dimension_override = dim_override;
      const th::Statistic stat = th::parse_statistic(statistic);
      json j = {{"classify", th::to_string(th::classify(params))},
                {"prediction", th::to_json(th::moment_rate(params, stat))}};
      if (alpha) {
        const auto a = th::to_rational(*alpha);
        j["moderate_deviation"] = th::to_json(th::moderate_deviation_rate(params, a));
        const auto bk = th::baum_katz_weights(params, a);
        json b = {{"admissible", bk.admissible}, {"source", bk.source}, {"reason", bk.reason}};
        if (bk.admissible) b["weight_exponent"] = th::to_string(bk.weight_exponent);
        if (bk.has_interval) {
          b["interval"] = {{"lo", th::to_string(bk.lo)}, {"lo_closed", bk.lo_closed}, {"hi", "1"}};
        }
        j["baum_katz"] = b;
      }
      if (xval && nval) {
        const auto env = th::deviation_bound(params, *nval, *xval);
        j["deviation_bound"] = {{"value", env.value},
                                {"regime", th::to_string(env.regime)},
                                {"source", env.source},
                                {"label", env.label}};
      }
      if (g.json) {
        emit(j);
      } else {
        const auto& pr = j["prediction"];
        std::cout << "regime " << j["classify"].get<std::string>() << '\n';
        if (pr["no_prediction"].get<bool>()) {
          std::cout << "no prediction: " << pr["note"].get<std::string>() << '\n';
        } else {
          std::cout << "n^" << pr["exponent"].get<std::string>() << " (log n)^"
                    << pr["log_power"].get<std::string>() << " (loglog n)^"
                    << pr["loglog_power"].get<std::string>() << "  [" << pr["source"].get<std::string>()
                    << ", shape only]\n";
        }
        if (j.contains("baum_katz")) std::cout << "baum_katz " << j["baum_katz"].dump() << '\n';
        if (j.contains("moderate_deviation")) {
          const auto& md = j["moderate_deviation"];
          std::cout << "moderate deviation n^" << md["exponent"].get<std::string>()
                    << (md["no_prediction"].get<bool>() ? " (no prediction)" : "") << '\n';
        }
        if (j.contains("deviation_bound")) {
          std::cout << "envelope " << num(j["deviation_bound"]["value"].get<double>())
                    << " (shape only)\n";
        }
      }
      return empwass::kExitOk;
    }

    const bool seed_given = seed_opt->count() > 0;
    const bool threads_given = threads_opt->count() > 0;
    if (rates->parsed()) {
      const auto c = load(config_path, g, seed_given, threads_given);
      const auto report = ex::run_moment_rate(c);
      const auto out = prepare_out(out_dir);
      const json j = ex::to_json(report);
      write_file(out / "rates.json", j.dump(2) + "\n");
      write_file(out / "rates.csv", ex::to_csv(report));
      if (g.json) {
        emit(j);
      } else {
        print_rate(report);
      }
      return exit_for(report.verdict);
    }
    if (deviations->parsed()) {
      const auto c = load(config_path, g, seed_given, threads_given);
      const auto report = ex::run_deviation_tail(c);
      const auto out = prepare_out(out_dir);
      const json j = ex::to_json(report);
      write_file(out / "deviations.json", j.dump(2) + "\n");
      write_file(out / "deviations.csv", ex::to_csv(report));
      if (g.json) {
        emit(j);
      } else {
        std::cout << "alpha " << num(report.alpha) << ", predicted exponent "
                  << th::to_string(report.prediction.exponent) << " ("
                  << report.prediction.source << ")\n";
        for (const auto& f : report.fits) {
          std::cout << "x " << num(f.x) << ": ";
          if (f.fit) {
            std::cout << "slope " << num(f.fit->slope) << " +- " << num(f.fit->stderr) << ", ";
          }
          std::cout << ex::to_string(f.verdict);
          if (!f.reason.empty()) std::cout << " (" << f.reason << ")";
          std::cout << '\n';
        }
        if (report.x_slope) std::cout << "x slope (diagnostic) " << num(*report.x_slope) << '\n';
        std::cout << "verdict " << ex::to_string(report.verdict) << '\n';
      }
      return exit_for(report.verdict);
    }
    if (trajectory->parsed()) {
      const auto c = load(config_path, g, seed_given, threads_given);
      const auto report = ex::run_running_max(c);
      const auto out = prepare_out(out_dir);
      const json j = ex::to_json(report);
      write_file(out / "trajectory.json", j.dump(2) + "\n");
      write_file(out / "trajectory.csv", ex::to_csv(report));
      if (g.json) {
        emit(j);
      } else {
        std::cout << "normalization " << report.normalization_formula << '\n';
        for (std::size_t t = 0; t < report.trajectories.size(); ++t) {
          const auto& tr = report.trajectories[t];
          std::cout << "trajectory " << t << ": final " << num(tr.normalized.back())
                    << (tr.violation ? "  violation" : "") << '\n';
        }
        std::cout << report.violations << " of " << report.trajectories.size()
                  << " trajectories flagged (boundedness heuristic, non-conclusive)\n";
      }
      return empwass::kExitOk;
    }
    if (verify->parsed()) {
      empwass::verify::VerifyOptions opts;
      if (!group.empty()) opts.group = group;
      opts.fault = empwass::verify::parse_fault(fault);
      if (seed_given) opts.seed = g.seed;
      const auto results = empwass::verify::run(opts);
      bool ok = true;
      json j = json::array();
      for (const auto& r : results) {
        ok = ok && r.passed();
        json checks = json::array();
        for (const auto& c : r.checks) {
          checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
        }
        j.push_back({{"group", r.name}, {"passed", r.passed()}, {"checks", checks}});
        if (!g.json) {
          std::cout << (r.passed() ? "PASS " : "FAIL ") << r.name << '\n';
          for (const auto& c : r.checks) {
            std::cout << "  " << (c.passed ? "ok   " : "FAIL ") << c.name;
            if (!c.passed) std::cout << ": " << c.detail;
            std::cout << '\n';
          }
        }
      }
      if (g.json) emit(j);
      return ok ? empwass::kExitOk : empwass::kExitInconsistent;
    }
    if (export_table->parsed()) {
      const std::string text = th::export_table().dump(2) + "\n";
      if (table_out.empty()) {
        std::cout << text;
      } else {
        write_file(table_out, text);
      }
      return empwass::kExitOk;
    }
  } catch (const empwass::Refusal& e) {
    std::cerr << "refused: " << e.what() << '\n';
    return empwass::kExitRefusal;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return empwass::kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return empwass::kExitInternal;
  }
  return empwass::kExitInternal;
}
