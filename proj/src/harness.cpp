#include "cfmec/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <thread>

#include <json.hpp>

#include "cfmec/estimation.hpp"
#include "cfmec/feasibility.hpp"
#include "cfmec/propagation.hpp"

namespace cfmec {

RealVector init_fractional_powers(const NetworkSnapshot& snapshot,
                                  const ServingTopology& topology,
                                  const SystemConfig& cfg) {
  const int K = topology.n_users;
  RealVector agg(K);
  for (int k = 0; k < K; ++k) {
    if (topology.serving_aps[k].empty())
      throw ConfigError("fractional power init: user has no serving AP");
    double sum = 0.0;
    for (int l : topology.serving_aps[k]) sum += snapshot.beta(l, k);
    agg(k) = sum;
  }
  RealVector p(K);
  for (int k = 0; k < K; ++k) {
    double worst_inv = 0.0;
    for (int i : topology.partial_set[k])
      worst_inv = std::max(worst_inv, 1.0 / agg(i));
    p(k) = cfg.p_max * (1.0 / agg(k)) / worst_inv;
  }
  return p;
}

SnapshotBundle make_bundle(const SystemConfig& cfg, int snapshot_index) {
  SnapshotBundle bundle;
  if (cfg.mode == NetworkMode::Cellular) {
    SystemConfig bs_cfg = cfg;
    bs_cfg.n_aps = cfg.cellular_n_bs;
    bs_cfg.antennas_per_ap =
        cfg.n_aps * cfg.antennas_per_ap / cfg.cellular_n_bs;
    bundle.snapshot = make_snapshot(bs_cfg, snapshot_index);
    bundle.topology = associate_cellular(bundle.snapshot, bs_cfg);
    // the BS pool matches the distributed deployment's total compute:
    // f_bs = ceil((sum f_ap + f_cpu) / n_bs), with f_ap redrawn from the
    // same substream the cell-free layout would use
    Rng compute_rng(derive_stream(cfg.rng_seed, stream::kApCompute,
                                  static_cast<std::uint64_t>(snapshot_index)));
    double total = cfg.f_cpu;
    for (int l = 0; l < cfg.n_aps; ++l)
      total += static_cast<double>(
          compute_rng.uniform_int(static_cast<std::int64_t>(cfg.f_ap_min),
                                  static_cast<std::int64_t>(cfg.f_ap_max)));
    const double f_bs = std::ceil(total / cfg.cellular_n_bs);
    bundle.f_servers = RealVector::Constant(cfg.cellular_n_bs, f_bs);
    bundle.snapshot.f_ap = bundle.f_servers;
    return bundle;
  }
  bundle.snapshot = make_snapshot(cfg, snapshot_index);
  ServingTopology topo = assign_pilots_dcc(bundle.snapshot, cfg);
  switch (cfg.ap_selection.kind) {
    case ApSelectionKind::Dcc:
      break;
    case ApSelectionKind::Fcc:
      topo = reduce_fcc(topo, bundle.snapshot, cfg.ap_selection.fcc_g);
      break;
    case ApSelectionKind::Lsfbs:
      topo = reduce_lsfbs(topo, bundle.snapshot,
                          cfg.ap_selection.lsfbs_threshold);
      break;
  }
  bundle.topology = std::move(topo);
  bundle.f_servers = bundle.snapshot.f_ap;
  return bundle;
}

namespace {

SystemConfig effective_config(const SystemConfig& cfg) {
  if (cfg.mode != NetworkMode::Cellular) return cfg;
  SystemConfig out = cfg;
  out.n_aps = cfg.cellular_n_bs;
  out.antennas_per_ap = cfg.n_aps * cfg.antennas_per_ap / cfg.cellular_n_bs;
  return out;
}

struct RunOutcome {
  bool feasible = false;
  AllocationResult alloc;
  std::vector<FeasibilityRow> feas_rows;
};

void emit_records(CampaignResult& res, const SystemConfig& cfg, int s, int r,
                  const RunOutcome& run, const OffloadingDemand& demand,
                  const ComputeModel* model) {
  const int K = cfg.n_users;
  for (int k = 0; k < K; ++k) {
    UserRecord rec;
    rec.snapshot = s;
    rec.realization = r;
    rec.user = k;
    rec.feasible = run.feasible;
    if (run.feasible) {
      const AllocationResult& a = run.alloc;
      rec.p = a.p(k);
      rec.se = a.se(k);
      rec.f = a.f_full(k);
      for (int l = 0; l < model->n_aps; ++l)
        rec.f += a.f_full(K + k * model->n_aps + l);
      rec.lat_tx = a.latency[k].transmission;
      rec.lat_comp = a.latency[k].computational;
      rec.lat_fh = a.latency[k].fronthaul;
      rec.lat_total = a.latency[k].total;
      rec.energy_mbit = energy_per_mbit(a.p(k), a.se(k), cfg.bandwidth);
    }
    res.records.push_back(rec);
  }
  if (run.feasible) {
    for (std::size_t i = 0; i < run.alloc.objective_trace.size(); ++i) {
      TraceRow row;
      row.snapshot = s;
      row.realization = r;
      row.iteration = static_cast<int>(i) + 1;
      row.objective = run.alloc.objective_trace[i];
      row.max_power_change = run.alloc.power_change_trace[i];
      row.kkt_residual = run.alloc.kkt_trace[i];
      res.traces.push_back(row);
    }
    for (const auto& b : model->budgets) {
      ServerLoadRow row;
      row.snapshot = s;
      row.realization = r;
      const int pos = b.vars.empty() ? -1 : model->full_index[b.vars[0]];
      row.server = (pos >= 0 && pos < K)
                       ? std::string("cpu")
                       : "ap" + std::to_string((pos - K) % model->n_aps);
      row.capacity = b.cap;
      double load = 0.0;
      if (run.alloc.f_full.size() > 0)
        for (int v : b.vars) load += run.alloc.f_full(model->full_index[v]);
      row.load = load;
      res.server_loads.push_back(row);
    }
    res.sca_iterations.push_back(run.alloc.iterations);
    ++res.n_feasible;
  } else {
    ++res.n_infeasible;
  }
  ++res.n_runs;
  for (const auto& fr : run.feas_rows) res.feasibility.push_back(fr);
}

CampaignResult run_snapshot(const SystemConfig& cfg, int s) {
  CampaignResult res;
  const SystemConfig eff = effective_config(cfg);
  const SnapshotBundle bundle = make_bundle(cfg, s);
  const CorrFactors factors = make_corr_factors(bundle.snapshot);

  Rng demand_rng(derive_stream(cfg.rng_seed, stream::kDemand,
                               static_cast<std::uint64_t>(s)));
  const OffloadingDemand demand = generate_demands(cfg, demand_rng);

  for (int r = 0; r < cfg.n_realizations; ++r) {
    const auto idx = static_cast<std::uint64_t>(s) *
                         static_cast<std::uint64_t>(cfg.n_realizations) +
                     static_cast<std::uint64_t>(r);
    Rng ch_rng(derive_stream(cfg.rng_seed, stream::kChannel, idx));
    Rng noise_rng(derive_stream(cfg.rng_seed, stream::kPilotNoise, idx));
    const ChannelRealization channels = draw_channels(factors, ch_rng);
    const ChannelEstimate estimates =
        estimate_mmse(channels, bundle.topology, bundle.snapshot, noise_rng,
                      eff);

    RunOutcome run;
    const RealVector p_init =
        init_fractional_powers(bundle.snapshot, bundle.topology, eff);
    const CombinerSet combiners0 =
        cfg.mode == NetworkMode::Cellular
            ? lmmse(estimates, bundle.topology, p_init, eff)
            : pmmse(estimates, bundle.topology, p_init, eff);
    const SinrCoefficients coeffs0 =
        sinr_coefficients(combiners0, estimates, bundle.topology, eff);
    const SeReport rep0 = evaluate_se(coeffs0, p_init, eff);

    ComputeModel model;
    bool model_ok = true;
    CranAssociation cran;
    switch (cfg.mode) {
      case NetworkMode::CellFree:
        model = make_compute_model_cellfree(bundle.topology, bundle.f_servers,
                                            cfg.f_cpu);
        break;
      case NetworkMode::Cellular:
        model = make_compute_model_cellular(bundle.topology, bundle.f_servers);
        break;
      case NetworkMode::Cran:
        cran = associate_cran(bundle.topology, demand, rep0.se,
                              bundle.f_servers, eff);
        if (!cran.feasible) {
          model_ok = false;
          run.feas_rows.push_back(
              {s, r, "cran-association", "infeasible", 0.0, 0});
        } else {
          model = make_compute_model_cran(cran, bundle.topology,
                                          bundle.f_servers, cfg.f_cpu);
        }
        break;
    }

    RealVector p_start = p_init;
    bool proceed = model_ok;
    if (proceed) {
      const ObjectiveWeights weights = objective_weights(eff, rep0.se);
      bool rough_pass = false;
      if (cfg.feasibility == FeasibilityMode::Rough ||
          cfg.feasibility == FeasibilityMode::RoughThenAccurate) {
        const RealVector rates = cfg.bandwidth * rep0.se;
        const RoughVerdict verdict = rough_check(rates, demand, model);
        rough_pass = verdict.pass;
        run.feas_rows.push_back(
            {s, r, "rough", verdict.pass ? "pass" : "inconclusive-fail", 0.0,
             0});
      }
      if (cfg.feasibility == FeasibilityMode::Rough) {
        proceed = rough_pass;
      } else if (!rough_pass) {  // accurate | rough-then-accurate fallback
        const PipelineResult pipe = accurate_pipeline(
            demand, model, estimates, bundle.topology, eff, p_init);
        run.feas_rows.push_back({s, r,
                                 pipe.feasible ? "accurate"
                                               : "accurate:" + pipe.stage,
                                 pipe.feasible ? "pass" : "infeasible",
                                 pipe.rho, pipe.pc_iterations});
        proceed = pipe.feasible;
        if (pipe.feasible) p_start = pipe.p0;
      }
      if (proceed) {
        run.alloc = run_sca(p_start, bundle.topology, estimates, demand,
                            model, weights, eff);
        run.feasible = run.alloc.feasible;
        if (!run.feasible)
          run.feas_rows.push_back({s, r, "sca", run.alloc.status, 0.0, 0});
      }
    }
    emit_records(res, cfg, s, r, run, demand, model_ok ? &model : nullptr);
  }
  return res;
}

void merge(CampaignResult& into, CampaignResult&& part) {
  auto move_all = [](auto& dst, auto& src) {
    dst.insert(dst.end(), std::make_move_iterator(src.begin()),
               std::make_move_iterator(src.end()));
  };
  move_all(into.records, part.records);
  move_all(into.traces, part.traces);
  move_all(into.feasibility, part.feasibility);
  move_all(into.server_loads, part.server_loads);
  move_all(into.sca_iterations, part.sca_iterations);
  into.n_feasible += part.n_feasible;
  into.n_infeasible += part.n_infeasible;
  into.n_runs += part.n_runs;
}

}  // namespace

CampaignResult run_campaign(const SystemConfig& cfg) {
  cfg.validate();
  std::vector<CampaignResult> per_snapshot(cfg.n_snapshots);
  const int workers = std::max(1, cfg.n_workers);
  if (workers == 1) {
    for (int s = 0; s < cfg.n_snapshots; ++s)
      per_snapshot[s] = run_snapshot(cfg, s);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (;;) {
          const int s = next.fetch_add(1);
          if (s >= cfg.n_snapshots) return;
          per_snapshot[s] = run_snapshot(cfg, s);
        }
      });
    for (auto& t : pool) t.join();
  }
  CampaignResult res;
  for (auto& part : per_snapshot) merge(res, std::move(part));
  return res;
}

std::vector<std::pair<double, double>> empirical_cdf(
    const std::vector<double>& values) {
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::pair<double, double>> cdf;
  cdf.reserve(sorted.size());
  const double n = static_cast<double>(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i)
    cdf.emplace_back(sorted[i], static_cast<double>(i + 1) / n);
  return cdf;
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

void write_cdf(const std::string& path, const std::vector<double>& values) {
  std::ofstream out(path);
  out << "value,cdf\n";
  for (const auto& [v, c] : empirical_cdf(values))
    out << fmt(v) << "," << fmt(c) << "\n";
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string config_hash(const SystemConfig& cfg) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016zx",
                std::hash<std::string>{}(config_to_json(cfg)));
  return buf;
}

}  // namespace

void write_outputs(const CampaignResult& result, const SystemConfig& cfg,
                   const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const fs::path dir(out_dir);

  {
    std::ofstream out(dir / "records.csv");
    out << "snapshot,realization,user,feasible,p,f,se,lat_tx,lat_comp,"
           "lat_fh,lat_total,energy_mbit\n";
    for (const auto& r : result.records)
      out << r.snapshot << "," << r.realization << "," << r.user << ","
          << (r.feasible ? 1 : 0) << "," << fmt(r.p) << "," << fmt(r.f) << ","
          << fmt(r.se) << "," << fmt(r.lat_tx) << "," << fmt(r.lat_comp)
          << "," << fmt(r.lat_fh) << "," << fmt(r.lat_total) << ","
          << fmt(r.energy_mbit) << "\n";
  }
  {
    std::ofstream out(dir / "trace.csv");
    out << "snapshot,realization,iteration,objective,max_power_change,"
           "kkt_residual\n";
    for (const auto& t : result.traces)
      out << t.snapshot << "," << t.realization << "," << t.iteration << ","
          << fmt(t.objective) << "," << fmt(t.max_power_change) << ","
          << fmt(t.kkt_residual) << "\n";
  }
  {
    std::ofstream out(dir / "feasibility.csv");
    out << "snapshot,realization,stage,verdict,rho,iterations\n";
    for (const auto& f : result.feasibility)
      out << f.snapshot << "," << f.realization << "," << f.stage << ","
          << f.verdict << "," << fmt(f.rho) << "," << f.iterations << "\n";
  }

  std::vector<double> user_power, user_compute, se, energy, latency;
  std::map<std::pair<int, int>, double> total_by_run;
  for (const auto& r : result.records) {
    if (!r.feasible) continue;
    user_power.push_back(r.p);
    user_compute.push_back(r.f);
    se.push_back(r.se);
    energy.push_back(r.energy_mbit);
    latency.push_back(r.lat_total);
    total_by_run[{r.snapshot, r.realization}] += r.p;
  }
  std::vector<double> total_power, server_load;
  for (const auto& [key, v] : total_by_run) total_power.push_back(v);
  for (const auto& s : result.server_loads) server_load.push_back(s.load);

  write_cdf((dir / "cdf_total_power.csv").string(), total_power);
  write_cdf((dir / "cdf_user_power.csv").string(), user_power);
  write_cdf((dir / "cdf_user_compute.csv").string(), user_compute);
  write_cdf((dir / "cdf_server_load.csv").string(), server_load);
  write_cdf((dir / "cdf_se.csv").string(), se);
  write_cdf((dir / "cdf_energy.csv").string(), energy);
  write_cdf((dir / "cdf_latency.csv").string(), latency);

  nlohmann::ordered_json meta;
  meta["schema_version"] = 1;
  meta["seed"] = cfg.rng_seed;
  meta["preset"] = cfg.preset;
  meta["mode"] = mode_name(cfg.mode);
  meta["ap_selection"] = ap_selection_name(cfg.ap_selection);
  meta["config_hash"] = config_hash(cfg);
  meta["version"] = "cfmec-0.1.0";
  meta["n_runs"] = result.n_runs;
  meta["n_feasible"] = result.n_feasible;
  meta["n_infeasible"] = result.n_infeasible;
  meta["config"] = nlohmann::ordered_json::parse(config_to_json(cfg));
  std::ofstream(dir / "meta.json") << meta.dump(2) << "\n";
}

CompareResult compare_modes(const SystemConfig& base) {
  CompareResult out;
  for (const NetworkMode mode :
       {NetworkMode::CellFree, NetworkMode::Cellular, NetworkMode::Cran}) {
    SystemConfig cfg = base;
    cfg.mode = mode;
    CampaignResult campaign = run_campaign(cfg);

    ModeSummary summary;
    summary.mode = mode_name(mode);
    summary.n_runs = campaign.n_runs;
    summary.n_feasible = campaign.n_feasible;
    std::vector<double> user_power, se, energy, latency;
    std::map<std::pair<int, int>, double> totals;
    for (const auto& r : campaign.records) {
      if (!r.feasible) continue;
      user_power.push_back(r.p);
      se.push_back(r.se);
      energy.push_back(r.energy_mbit);
      latency.push_back(r.lat_total);
      totals[{r.snapshot, r.realization}] += r.p;
    }
    std::vector<double> total_power;
    for (const auto& [key, v] : totals) total_power.push_back(v);
    summary.median_total_power = median(total_power);
    summary.median_user_power = median(user_power);
    summary.median_latency = median(latency);
    summary.median_energy = median(energy);
    summary.median_se = median(se);
    out.summaries.push_back(summary);
    out.campaigns.emplace(summary.mode, std::move(campaign));
  }
  return out;
}

void write_compare(const CompareResult& result, const SystemConfig& cfg,
                   const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  std::ofstream out(fs::path(out_dir) / "compare.csv");
  out << "mode,median_total_power,median_user_power,median_latency,"
         "median_energy,median_se,n_feasible,n_runs\n";
  for (const auto& s : result.summaries)
    out << s.mode << "," << fmt(s.median_total_power) << ","
        << fmt(s.median_user_power) << "," << fmt(s.median_latency) << ","
        << fmt(s.median_energy) << "," << fmt(s.median_se) << ","
        << s.n_feasible << "," << s.n_runs << "\n";
  for (const auto& [mode, campaign] : result.campaigns) {
    SystemConfig mode_cfg = cfg;
    mode_cfg.mode = parse_mode(mode);
    write_outputs(campaign, mode_cfg,
                  (fs::path(out_dir) / mode).string());
  }
}

void dump_snapshot(const NetworkSnapshot& snapshot, const std::string& path) {
  std::ofstream out(path);
  out << "kind,ap,user,row,col,re,im\n";
  const int L = static_cast<int>(snapshot.beta.rows());
  const int K = static_cast<int>(snapshot.beta.cols());
  for (int l = 0; l < L; ++l)
    for (int k = 0; k < K; ++k)
      out << "beta," << l << "," << k << ",0,0," << fmt(snapshot.beta(l, k))
          << ",0\n";
  for (int l = 0; l < L; ++l)
    for (int k = 0; k < K; ++k) {
      const Matrix& R = snapshot.corr[l][k];
      for (int i = 0; i < R.rows(); ++i)
        for (int j = 0; j < R.cols(); ++j)
          out << "corr," << l << "," << k << "," << i << "," << j << ","
              << fmt(R(i, j).real()) << "," << fmt(R(i, j).imag()) << "\n";
    }
}

}  // namespace cfmec
