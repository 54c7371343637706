#include "gknockoff/cli.hpp"

#include "gknockoff/baselines.hpp"
#include "gknockoff/fusis.hpp"
#include "gknockoff/io.hpp"
#include "gknockoff/model.hpp"
#include "gknockoff/numerics.hpp"
#include "gknockoff/pipeline.hpp"
#include "gknockoff/sim.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>

namespace gk::cli {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

json vector_to_json(const Vector& v) {
  json arr = json::array();
  for (Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

json indices_to_json(const std::vector<Index>& v, Index offset = 0) {
  json arr = json::array();
  for (Index i : v) arr.push_back(i + offset);
  return arr;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  require(out.good(), ErrorKind::io, "cannot write " + path.string());
  out << text;
  require(out.good(), ErrorKind::io, "write failed: " + path.string());
}

struct CommonSetup {
  std::map<std::string, std::string> cfg;
  std::uint64_t seed = 0;
  int threads = 1;
  fs::path out;
};

CommonSetup load_common(const CommandArgs& args, const std::set<std::string>& allowed) {
  CommonSetup s;
  s.cfg = io::parse_config(args.config_path);
  io::check_keys(s.cfg, allowed);
  require(s.cfg.count("seed") > 0, ErrorKind::config, "config must set a master seed");
  s.seed = static_cast<std::uint64_t>(io::to_long("seed", s.cfg.at("seed")));
  if (args.seed_override) s.seed = *args.seed_override;
  if (s.cfg.count("threads")) s.threads = static_cast<int>(io::to_long("threads", s.cfg.at("threads")));
  if (args.threads_override) s.threads = *args.threads_override;
  require(s.threads >= 1, ErrorKind::config, "threads must be >= 1");

  require(!args.out_dir.empty(), ErrorKind::config, "output directory is required");
  s.out = fs::path(args.out_dir);
  std::error_code ec;
  fs::create_directories(s.out, ec);
  require(!ec, ErrorKind::io, "cannot create output directory: " + args.out_dir);
  return s;
}

json config_echo(const CommonSetup& s) {
  json j = json::object();
  for (const auto& [k, v] : s.cfg) j[k] = v;
  return j;
}

double cfg_double(const CommonSetup& s, const std::string& key, double fallback) {
  auto it = s.cfg.find(key);
  return it == s.cfg.end() ? fallback : io::to_double(key, it->second);
}

long cfg_long(const CommonSetup& s, const std::string& key, long fallback) {
  auto it = s.cfg.find(key);
  return it == s.cfg.end() ? fallback : io::to_long(key, it->second);
}

std::string cfg_string(const CommonSetup& s, const std::string& key,
                       const std::string& fallback) {
  auto it = s.cfg.find(key);
  return it == s.cfg.end() ? fallback : it->second;
}

long cfg_required_long(const CommonSetup& s, const std::string& key) {
  require(s.cfg.count(key) > 0, ErrorKind::config, "config must set '" + key + "'");
  return io::to_long(key, s.cfg.at(key));
}

double cfg_required_double(const CommonSetup& s, const std::string& key) {
  require(s.cfg.count(key) > 0, ErrorKind::config, "config must set '" + key + "'");
  return io::to_double(key, s.cfg.at(key));
}

sim::CovKind parse_cov(const std::string& v) {
  if (v == "identity") return sim::CovKind::identity;
  if (v == "ar") return sim::CovKind::ar;
  if (v == "grouped") return sim::CovKind::grouped;
  fail(ErrorKind::config, "cov must be identity, ar, or grouped (got '" + v + "')");
}

pipeline::Method parse_method(const std::string& v) {
  if (v == "auto") return pipeline::Method::automatic;
  if (v == "gknockoff") return pipeline::Method::gknock;
  if (v == "egknockoff") return pipeline::Method::egknock;
  if (v == "hgknockoff") return pipeline::Method::hgknock;
  fail(ErrorKind::config, "unknown method '" + v + "'");
}

knockoff::StatKind parse_stat(const std::string& v) {
  if (v == "signed_max") return knockoff::StatKind::signed_max;
  if (v == "lcd") return knockoff::StatKind::lcd;
  fail(ErrorKind::config, "stat must be signed_max or lcd (got '" + v + "')");
}

std::vector<Index> parse_index_list(const std::string& key, const std::string& v) {
  std::vector<Index> out;
  for (long x : [&] {
         std::vector<long> xs;
         for (const auto& item : io::split_list(v)) xs.push_back(io::to_long(key, item));
         return xs;
       }()) {
    out.push_back(static_cast<Index>(x));
  }
  return out;
}

pipeline::DetectOptions detect_options_from(const CommonSetup& s) {
  pipeline::DetectOptions opt;
  opt.q = cfg_double(s, "q", 0.2);
  opt.method = parse_method(cfg_string(s, "method", "auto"));
  opt.stat = parse_stat(cfg_string(s, "stat", "signed_max"));
  opt.split_fraction = cfg_double(s, "split_fraction", 0.5);
  if (s.cfg.count("noise_variance")) {
    opt.noise_variance = io::to_double("noise_variance", s.cfg.at("noise_variance"));
  }
  if (s.cfg.count("keep_top")) {
    opt.keep_top = static_cast<Index>(io::to_long("keep_top", s.cfg.at("keep_top")));
  }
  if (s.cfg.count("bandwidth_grid")) {
    opt.bandwidth_grid = parse_index_list("bandwidth_grid", s.cfg.at("bandwidth_grid"));
  }
  opt.grid_count = static_cast<Index>(cfg_long(s, "grid_count", 100));
  opt.grid_ratio = cfg_double(s, "grid_ratio", 1e-3);
  return opt;
}

std::string method_name(pipeline::Method m) {
  switch (m) {
    case pipeline::Method::automatic: return "auto";
    case pipeline::Method::gknock: return "gknockoff";
    case pipeline::Method::egknock: return "egknockoff";
    case pipeline::Method::hgknock: return "hgknockoff";
  }
  return "?";
}

json diagnostics_to_json(const pipeline::Diagnostics& d) {
  json j = json::object();
  j["spec_condition"] = d.spec_condition;
  j["sigma_min_eig"] = d.sigma_min_eig;
  j["jitter"] = d.jitter;
  j["gram_r1"] = d.gram_r1;
  j["gram_r2"] = d.gram_r2;
  j["lambda_max"] = d.lambda_max;
  if (d.augmented_rows > 0) j["augmented_rows"] = d.augmented_rows;
  if (std::isfinite(d.noise_variance)) j["noise_variance"] = d.noise_variance;
  if (d.screened_count >= 0) j["screened_count"] = d.screened_count;
  if (d.screen_bandwidth >= 0) j["screen_bandwidth"] = d.screen_bandwidth;
  return j;
}

// ---------- simulate ----------

const std::set<std::string> kSimulateKeys = {
    "scenario",   "method",      "stat",          "n",         "p",
    "sources",    "changes",     "amplitude",     "rho",       "sigma",
    "zeta",       "cov",         "q",             "reps",      "seed",
    "threads",    "sweep",       "sweep_values",  "split_fraction",
    "noise_variance", "keep_top", "bandwidth_grid", "fixed_h",
    "grid_count", "grid_ratio"};

struct SweepPlan {
  std::string key;
  std::vector<double> values;
};

SweepPlan sweep_plan(const CommonSetup& s) {
  SweepPlan plan;
  require(s.cfg.count("sweep") > 0 && s.cfg.count("sweep_values") > 0, ErrorKind::config,
          "config must set 'sweep' and 'sweep_values' (a single value is fine)");
  plan.key = s.cfg.at("sweep");
  plan.values = io::to_double_list("sweep_values", s.cfg.at("sweep_values"));
  require(!plan.values.empty(), ErrorKind::config, "sweep_values is empty");
  const std::set<std::string> sweepable = {"changes", "amplitude", "rho", "sources",
                                           "zeta",    "n",         "q"};
  require(sweepable.count(plan.key) > 0, ErrorKind::config,
          "cannot sweep over '" + plan.key + "'");
  return plan;
}

struct ScenarioPoint {
  // Everything needed to run one sweep point.
  std::function<sim::Dataset(Rng&)> gen;
  model::TransformSpec spec;
  double q = 0.2;
};

int simulate_coverage(const CommonSetup& s, const SweepPlan& plan, json& report);

int run_simulate(const CommonSetup& s) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::string scenario = cfg_string(s, "scenario", "");
  require(scenario == "piecewise" || scenario == "integration" || scenario == "coverage",
          ErrorKind::config, "scenario must be piecewise, integration, or coverage");

  json report;
  report["command"] = "simulate";
  report["scenario"] = scenario;
  report["seed"] = s.seed;
  report["config"] = config_echo(s);
  report["config_hash"] = io::config_hash(s.cfg);

  const SweepPlan plan = sweep_plan(s);
  report["sweep"] = plan.key;

  std::string csv;
  if (scenario == "coverage") {
    require(s.cfg.count("method") == 0, ErrorKind::config,
            "the coverage scenario takes no 'method'");
    const int rc = simulate_coverage(s, plan, report);
    if (rc != 0) return rc;
    csv = "sweep_value,fixed_coverage,optimal_coverage,reps\n";
    for (const auto& row : report["rows"]) {
      csv += fmt17(row["sweep_value"].get<double>()) + std::string(",") +
             fmt17(row["fixed_coverage"].get<double>()) + "," +
             fmt17(row["optimal_coverage"].get<double>()) + "," +
             std::to_string(row["reps"].get<long>()) + "\n";
    }
  } else {
    const std::string method = cfg_string(s, "method", "auto");
    const long reps = cfg_required_long(s, "reps");
    require(reps >= 1, ErrorKind::config, "reps must be >= 1");
    report["method"] = method;
    report["rows"] = json::array();

    for (double sweep_value : plan.values) {
      // Resolve the scenario parameters with the sweep value substituted in.
      auto num = [&](const std::string& key, double fallback, bool required = false) {
        if (plan.key == key) return sweep_value;
        if (required) return cfg_required_double(s, key);
        return cfg_double(s, key, fallback);
      };

      double q = num("q", 0.2);
      std::function<sim::Dataset(Rng&)> gen;
      model::TransformSpec spec;

      if (scenario == "piecewise") {
        sim::PiecewiseConfig pc;
        pc.n = static_cast<Index>(num("n", 0, true));
        pc.p = static_cast<Index>(cfg_required_long(s, "p"));
        pc.changes = static_cast<Index>(num("changes", 0, true));
        pc.amplitude = num("amplitude", 0, true);
        pc.rho = num("rho", 0.0);
        pc.sigma = num("sigma", 1.0);
        pc.cov = parse_cov(cfg_string(s, "cov", pc.rho == 0.0 ? "identity" : "ar"));
        spec = model::complete_basis(model::build_difference_matrix(pc.p));
        Matrix chol;
        if (pc.cov != sim::CovKind::identity) {
          chol = numerics::cholesky_psd(sim::gen_covariance(pc.cov, pc.p, pc.rho), 1e-8).l;
        }
        gen = [pc, chol](Rng& rng) {
          return sim::gen_piecewise(pc, rng, pc.cov == sim::CovKind::identity ? nullptr : &chol);
        };
      } else {
        sim::IntegrationConfig ic;
        ic.sources = static_cast<Index>(num("sources", 0, true));
        ic.p = static_cast<Index>(cfg_required_long(s, "p"));
        ic.changes = static_cast<Index>(num("changes", 0, true));
        ic.amplitude = num("amplitude", 0, true);
        ic.zeta = num("zeta", 0, true);
        ic.sigma = num("sigma", 1.0);
        spec = model::complete_basis(model::build_integration_matrix(ic.sources, ic.p));
        gen = [ic](Rng& rng) { return sim::gen_integration(ic, rng); };
      }

      sim::Detector det;
      if (method == "by") {
        const Matrix d = spec.d;
        det = [d, q](const sim::Dataset& ds, std::uint64_t) {
          return baselines::by_procedure(ds.x, ds.y, d, q).selected;
        };
      } else if (method == "permutation") {
        auto spec_copy = spec;
        const knockoff::StatKind stat = parse_stat(cfg_string(s, "stat", "signed_max"));
        det = [spec_copy, q, stat](const sim::Dataset& ds, std::uint64_t det_seed) {
          const model::TransformedProblem prob = model::transform(ds.x, ds.y, spec_copy);
          Rng rng(det_seed);
          return baselines::permutation_filter(prob, q, stat, rng).selected;
        };
      } else {
        auto spec_copy = spec;
        auto opt = detect_options_from(s);
        opt.q = q;
        det = [spec_copy, opt](const sim::Dataset& ds, std::uint64_t det_seed) {
          auto local = opt;
          local.seed = det_seed;
          return pipeline::detect(ds.x, ds.y, spec_copy, local).selected;
        };
      }

      const sim::StudySummary sum =
          sim::run_study(gen, det, static_cast<Index>(reps), s.seed, s.threads);

      json row;
      row["sweep_value"] = sweep_value;
      row["fdr"] = sum.fdr;
      row["se_fdr"] = sum.se_fdr;
      row["power"] = sum.power;
      row["se_power"] = sum.se_power;
      row["reps"] = reps;
      json per_rep = json::array();
      for (const auto& rep : sum.reps) {
        json r;
        r["selected"] = indices_to_json(rep.selected, 1);  // 1-based like every report
        r["fdp"] = rep.fdp;
        r["tpp"] = rep.tpp;
        per_rep.push_back(std::move(r));
      }
      row["per_rep"] = std::move(per_rep);
      report["rows"].push_back(std::move(row));
    }

    csv = "sweep_value,fdr_hat,se_fdr,power_hat,se_power\n";
    for (const auto& row : report["rows"]) {
      csv += fmt17(row["sweep_value"].get<double>()) + std::string(",") +
             fmt17(row["fdr"].get<double>()) + "," + fmt17(row["se_fdr"].get<double>()) + "," +
             fmt17(row["power"].get<double>()) + "," + fmt17(row["se_power"].get<double>()) +
             "\n";
    }
  }

  const auto t1 = std::chrono::steady_clock::now();
  report["elapsed_seconds"] = std::chrono::duration<double>(t1 - t0).count();

  write_text(s.out / "study.json", report.dump(2) + "\n");
  write_text(s.out / "study.csv", csv);
  return 0;
}

int simulate_coverage(const CommonSetup& s, const SweepPlan& plan, json& report) {
  const long reps = cfg_required_long(s, "reps");
  require(reps >= 1, ErrorKind::config, "reps must be >= 1");
  report["rows"] = json::array();

  for (double sweep_value : plan.values) {
    auto num = [&](const std::string& key, double fallback, bool required = false) {
      if (plan.key == key) return sweep_value;
      if (required) return cfg_required_double(s, key);
      return cfg_double(s, key, fallback);
    };

    sim::PiecewiseConfig pc;
    pc.n = static_cast<Index>(num("n", 0, true));
    pc.p = static_cast<Index>(cfg_required_long(s, "p"));
    pc.changes = static_cast<Index>(num("changes", 0, true));
    pc.amplitude = num("amplitude", 0, true);
    pc.rho = num("rho", 0.0);
    pc.sigma = num("sigma", 1.0);
    pc.cov = parse_cov(cfg_string(s, "cov", "ar"));

    const Index fixed_h = static_cast<Index>(cfg_required_long(s, "fixed_h"));
    const Index keep_top = static_cast<Index>(cfg_long(s, "keep_top", pc.n - 1));
    std::vector<Index> grid;
    if (s.cfg.count("bandwidth_grid")) {
      grid = parse_index_list("bandwidth_grid", s.cfg.at("bandwidth_grid"));
    } else {
      grid = {pc.p / 100, pc.p / 40, pc.p / 20};
    }

    const sim::CoverageSummary cov = sim::coverage_study(
        pc, fixed_h, grid, keep_top, static_cast<Index>(reps), s.seed, s.threads);

    json row;
    row["sweep_value"] = sweep_value;
    row["fixed_coverage"] = cov.fixed;
    row["optimal_coverage"] = cov.optimal;
    row["reps"] = reps;
    report["rows"].push_back(std::move(row));
  }
  return 0;
}

// ---------- detect ----------

const std::set<std::string> kDetectKeys = {
    "response", "group",          "exposures",  "unpenalized", "q",
    "method",   "stat",           "seed",       "threads",     "split_fraction",
    "noise_variance", "keep_top", "bandwidth_grid", "grid_count", "grid_ratio"};

int run_detect(const CommandArgs& args, const CommonSetup& s) {
  require(!args.data_path.empty(), ErrorKind::config, "detect needs a data file (--data)");
  const io::CsvTable table = io::read_csv(args.data_path);

  const std::string response = cfg_string(s, "response", "");
  require(!response.empty(), ErrorKind::config, "config must set 'response'");
  const Vector y_raw = table.numeric_column(response);

  require(s.cfg.count("exposures") > 0, ErrorKind::config, "config must set 'exposures'");
  const std::vector<std::string> exposure_names = io::split_list(s.cfg.at("exposures"));
  require(!exposure_names.empty(), ErrorKind::config, "exposures list is empty");
  const Index e_cols = static_cast<Index>(exposure_names.size());

  std::vector<Vector> exposure_raw;
  for (const auto& name : exposure_names) exposure_raw.push_back(table.numeric_column(name));

  std::vector<std::string> unpenalized_names;
  if (s.cfg.count("unpenalized")) unpenalized_names = io::split_list(s.cfg.at("unpenalized"));
  std::vector<Vector> extra_raw;
  for (const auto& name : unpenalized_names) extra_raw.push_back(table.numeric_column(name));

  // Group labels in order of first appearance.
  std::vector<std::string> group_names;
  std::vector<Index> group_of_row(static_cast<std::size_t>(table.nrows()), 0);
  if (s.cfg.count("group")) {
    const Index gcol = table.column(s.cfg.at("group"));
    for (Index r = 0; r < table.nrows(); ++r) {
      const std::string& label =
          table.rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(gcol)];
      auto it = std::find(group_names.begin(), group_names.end(), label);
      if (it == group_names.end()) {
        group_names.push_back(label);
        it = group_names.end() - 1;
      }
      group_of_row[static_cast<std::size_t>(r)] =
          static_cast<Index>(it - group_names.begin());
    }
  } else {
    group_names.push_back("all");
  }
  const Index k_groups = static_cast<Index>(group_names.size());

  json report;
  report["command"] = "detect";
  report["seed"] = s.seed;
  report["config"] = config_echo(s);
  report["config_hash"] = io::config_hash(s.cfg);
  report["n"] = table.nrows();
  report["groups"] = group_names;

  if (k_groups < 2) {
    // One group: there is no adjacent pair to test.
    report["method_used"] = "none";
    report["positions"] = json::array();
    report["threshold"] = nullptr;
    write_text(s.out / "detect.json", report.dump(2) + "\n");
    return 0;
  }

  for (Index g = 0; g < k_groups; ++g) {
    Index count = 0;
    for (Index v : group_of_row) count += (v == g) ? 1 : 0;
    require(count > 0, ErrorKind::routing, "group '" +
            group_names[static_cast<std::size_t>(g)] + "' has no rows");
  }

  // Stack per-group exposure blocks (rows keep file order inside each group).
  model::MultiSource ms;
  std::vector<std::vector<Index>> rows_of_group(static_cast<std::size_t>(k_groups));
  for (Index r = 0; r < table.nrows(); ++r) {
    rows_of_group[static_cast<std::size_t>(group_of_row[static_cast<std::size_t>(r)])]
        .push_back(r);
  }
  Matrix extra(table.nrows(), static_cast<Index>(extra_raw.size()));
  Vector y(table.nrows());
  Index out_row = 0;
  for (Index g = 0; g < k_groups; ++g) {
    const auto& rows = rows_of_group[static_cast<std::size_t>(g)];
    Matrix xb(static_cast<Index>(rows.size()), e_cols);
    Vector yb(static_cast<Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      for (Index c = 0; c < e_cols; ++c) {
        xb(static_cast<Index>(i), c) = exposure_raw[static_cast<std::size_t>(c)](rows[i]);
      }
      yb(static_cast<Index>(i)) = y_raw(rows[i]);
      for (std::size_t c = 0; c < extra_raw.size(); ++c) {
        extra(out_row, static_cast<Index>(c)) = extra_raw[c](rows[i]);
      }
      y(out_row) = y_raw(rows[i]);
      ++out_row;
    }
    ms.x_blocks.push_back(std::move(xb));
    ms.y_blocks.push_back(std::move(yb));
  }
  const model::Stacked stacked = model::stack_multisource(ms);

  const model::TransformSpec spec =
      model::complete_basis(model::build_integration_matrix(k_groups, e_cols));
  pipeline::DetectOptions opt = detect_options_from(s);
  opt.seed = s.seed;

  const pipeline::DetectReport rep =
      pipeline::detect(stacked.x, y, spec, opt, extra.cols() ? extra : Matrix());

  report["method_used"] = method_name(rep.method_used);
  report["threshold"] = std::isfinite(rep.threshold) ? json(rep.threshold) : json(nullptr);
  report["diagnostics"] = diagnostics_to_json(rep.diag);

  json positions = json::array();
  for (Index r : rep.selected) {
    if (e_cols == 1) {
      positions.push_back(r + 1);  // 1-based: change between group r+1 and r+2
    } else {
      json p;
      p["between"] = json::array({r / e_cols + 1, r / e_cols + 2});
      p["coordinate"] = r % e_cols + 1;
      positions.push_back(std::move(p));
    }
  }
  report["positions"] = std::move(positions);
  report["tested_rows"] = indices_to_json(rep.tested_rows, 1);
  report["w"] = vector_to_json(rep.w);

  // Per-group coefficients refit under the selected change pattern: contrasts not
  // selected are pinned to zero through a null-space reparameterization.
  {
    const Index m = spec.m();
    std::vector<bool> is_sel(static_cast<std::size_t>(m), false);
    for (Index r : rep.selected) is_sel[static_cast<std::size_t>(r)] = true;
    Matrix d_zero(m - static_cast<Index>(rep.selected.size()), spec.p());
    Index rz = 0;
    for (Index r = 0; r < m; ++r) {
      if (!is_sel[static_cast<std::size_t>(r)]) d_zero.row(rz++) = spec.d.row(r);
    }
    const Matrix reducer = (d_zero.rows() == 0)
                               ? Matrix::Identity(spec.p(), spec.p())
                               : numerics::qr_null_space(d_zero.transpose());
    Matrix design(stacked.x.rows(), reducer.cols() + extra.cols());
    design.leftCols(reducer.cols()) = stacked.x * reducer;
    if (extra.cols() > 0) design.rightCols(extra.cols()) = extra;

    Eigen::ColPivHouseholderQR<Matrix> qr(design);
    if (design.rows() > design.cols() && qr.rank() == design.cols()) {
      const Vector fit = qr.solve(y);
      const Vector beta = reducer * fit.head(reducer.cols());
      json by_group = json::array();
      for (Index g = 0; g < k_groups; ++g) {
        json gj;
        gj["group"] = group_names[static_cast<std::size_t>(g)];
        gj["coefficients"] = vector_to_json(beta.segment(g * e_cols, e_cols));
        by_group.push_back(std::move(gj));
      }
      report["group_coefficients"] = std::move(by_group);
      if (extra.cols() > 0) {
        json alpha = json::object();
        for (std::size_t c = 0; c < unpenalized_names.size(); ++c) {
          alpha[unpenalized_names[c]] = fit(reducer.cols() + static_cast<Index>(c));
        }
        report["unpenalized_coefficients"] = std::move(alpha);
      }
    } else {
      report["group_coefficients"] = nullptr;
    }
  }

  write_text(s.out / "detect.json", report.dump(2) + "\n");
  return 0;
}

// ---------- screen ----------

const std::set<std::string> kScreenKeys = {"response",  "features", "h",    "bandwidth_grid",
                                           "threshold", "keep_top", "seed", "threads"};

int run_screen(const CommandArgs& args, const CommonSetup& s) {
  require(!args.data_path.empty(), ErrorKind::config, "screen needs a data file (--data)");
  const io::CsvTable table = io::read_csv(args.data_path);

  const std::string response = cfg_string(s, "response", "");
  require(!response.empty(), ErrorKind::config, "config must set 'response'");
  const Vector y = table.numeric_column(response);

  std::vector<std::string> feature_names;
  const std::string features = cfg_string(s, "features", "auto");
  if (features == "auto") {
    for (const auto& h : table.header) {
      if (h != response) feature_names.push_back(h);
    }
  } else {
    feature_names = io::split_list(features);
  }
  require(feature_names.size() >= 2, ErrorKind::config, "need at least two feature columns");

  Matrix x(table.nrows(), static_cast<Index>(feature_names.size()));
  for (std::size_t c = 0; c < feature_names.size(); ++c) {
    x.col(static_cast<Index>(c)) = table.numeric_column(feature_names[c]);
  }

  fusis::ScreenOptions sopt;
  const bool have_threshold = s.cfg.count("threshold") > 0;
  const bool have_keep = s.cfg.count("keep_top") > 0;
  require(have_threshold != have_keep, ErrorKind::config,
          "set exactly one of 'threshold' or 'keep_top'");
  if (have_threshold) sopt.threshold = io::to_double("threshold", s.cfg.at("threshold"));
  if (have_keep) sopt.keep_top = static_cast<Index>(io::to_long("keep_top", s.cfg.at("keep_top")));

  const bool have_h = s.cfg.count("h") > 0;
  const bool have_grid = s.cfg.count("bandwidth_grid") > 0;
  require(have_h != have_grid, ErrorKind::config,
          "set exactly one of 'h' or 'bandwidth_grid'");

  fusis::ScreenResult res;
  if (have_h) {
    res = fusis::screen(x, y, static_cast<Index>(io::to_long("h", s.cfg.at("h"))), sopt);
  } else {
    res = fusis::select_bandwidth(
        x, y, parse_index_list("bandwidth_grid", s.cfg.at("bandwidth_grid")), sopt);
  }

  json report;
  report["command"] = "screen";
  report["seed"] = s.seed;
  report["config"] = config_echo(s);
  report["config_hash"] = io::config_hash(s.cfg);
  report["n"] = table.nrows();
  report["p"] = static_cast<Index>(feature_names.size());
  report["bandwidth"] = res.bandwidth;
  report["positions"] = indices_to_json(res.selected, 1);
  if (!res.r2_by_bandwidth.empty()) {
    json r2 = json::array();
    for (const auto& [h, v] : res.r2_by_bandwidth) {
      json e;
      e["h"] = h;
      e["r2"] = std::isfinite(v) ? json(v) : json(nullptr);
      r2.push_back(std::move(e));
    }
    report["r2_by_bandwidth"] = std::move(r2);
  }

  write_text(s.out / "screen.json", report.dump(2) + "\n");
  return 0;
}

}  // namespace

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::config:
    case ErrorKind::io:
    case ErrorKind::invalid_argument:
      return 2;
    case ErrorKind::routing:
    case ErrorKind::dimension:
      return 4;
    default:
      return 3;
  }
}

namespace {

template <typename Fn>
int guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace

int cmd_simulate(const CommandArgs& args) {
  return guarded([&] { return run_simulate(load_common(args, kSimulateKeys)); });
}

int cmd_detect(const CommandArgs& args) {
  return guarded([&] {
    const CommonSetup s = load_common(args, kDetectKeys);
    return run_detect(args, s);
  });
}

int cmd_screen(const CommandArgs& args) {
  return guarded([&] {
    const CommonSetup s = load_common(args, kScreenKeys);
    return run_screen(args, s);
  });
}

}  // namespace gk::cli
