#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include <CLI11.hpp>

#include "cfmec/estimation.hpp"
#include "cfmec/feasibility.hpp"
#include "cfmec/harness.hpp"
#include "cfmec/propagation.hpp"

namespace {

struct CommonOpts {
  std::string config_path;
  std::string mode;
  std::string ap_selection;
  std::string preset;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  bool seed_set = false;
  bool mode_set = false;
  bool ap_set = false;
  bool preset_set = false;
};

void add_common(CLI::App* cmd, CommonOpts& opt) {
  cmd->add_option("--config", opt.config_path, "JSON config file");
  cmd->add_option("--seed", opt.seed, "Master RNG seed")
      ->each([&](const std::string&) { opt.seed_set = true; });
  cmd->add_option("--mode", opt.mode, "cellfree | cellular | cran")
      ->each([&](const std::string&) { opt.mode_set = true; });
  cmd->add_option("--ap-selection", opt.ap_selection,
                  "dcc | fcc:G | lsfbs:T")
      ->each([&](const std::string&) { opt.ap_set = true; });
  cmd->add_option("--preset", opt.preset, "desk | loose | strict | paper")
      ->each([&](const std::string&) { opt.preset_set = true; });
  cmd->add_option("--out", opt.out_dir, "Output directory");
}

cfmec::SystemConfig build_config(const CommonOpts& opt) {
  cfmec::SystemConfig cfg;
  if (!opt.config_path.empty()) cfg = cfmec::load_config(opt.config_path);
  if (opt.preset_set) cfg.apply_preset(opt.preset);
  if (opt.seed_set) cfg.rng_seed = opt.seed;
  if (opt.mode_set) cfg.mode = cfmec::parse_mode(opt.mode);
  if (opt.ap_set) cfg.ap_selection = cfmec::parse_ap_selection(opt.ap_selection);
  cfg.validate();
  return cfg;
}

int cmd_run(const CommonOpts& opt) {
  const cfmec::SystemConfig cfg = build_config(opt);
  const cfmec::CampaignResult result = cfmec::run_campaign(cfg);
  cfmec::write_outputs(result, cfg, opt.out_dir);
  std::printf("runs=%d feasible=%d infeasible=%d\n", result.n_runs,
              result.n_feasible, result.n_infeasible);
  return result.n_feasible == 0 ? 3 : 0;
}

int cmd_feasibility(const CommonOpts& opt) {
  namespace fs = std::filesystem;
  cfmec::SystemConfig cfg = build_config(opt);
  if (cfg.feasibility == cfmec::FeasibilityMode::Rough)
    cfg.feasibility = cfmec::FeasibilityMode::RoughThenAccurate;
  fs::create_directories(opt.out_dir);
  std::ofstream out(fs::path(opt.out_dir) / "feasibility.csv");
  out << "snapshot,realization,stage,verdict,rho,iterations\n";

  for (int s = 0; s < cfg.n_snapshots; ++s) {
    const cfmec::SnapshotBundle bundle = cfmec::make_bundle(cfg, s);
    const cfmec::CorrFactors factors =
        cfmec::make_corr_factors(bundle.snapshot);
    cfmec::Rng demand_rng(cfmec::derive_stream(
        cfg.rng_seed, cfmec::stream::kDemand, static_cast<std::uint64_t>(s)));
    const cfmec::OffloadingDemand demand =
        cfmec::generate_demands(cfg, demand_rng);
    cfmec::SystemConfig eff = cfg;
    if (cfg.mode == cfmec::NetworkMode::Cellular) {
      eff.n_aps = cfg.cellular_n_bs;
      eff.antennas_per_ap =
          cfg.n_aps * cfg.antennas_per_ap / cfg.cellular_n_bs;
    }
    for (int r = 0; r < cfg.n_realizations; ++r) {
      const auto idx = static_cast<std::uint64_t>(s) *
                           static_cast<std::uint64_t>(cfg.n_realizations) +
                       static_cast<std::uint64_t>(r);
      cfmec::Rng ch_rng(
          cfmec::derive_stream(cfg.rng_seed, cfmec::stream::kChannel, idx));
      cfmec::Rng noise_rng(cfmec::derive_stream(
          cfg.rng_seed, cfmec::stream::kPilotNoise, idx));
      const cfmec::ChannelRealization channels =
          cfmec::draw_channels(factors, ch_rng);
      const cfmec::ChannelEstimate estimates = cfmec::estimate_mmse(
          channels, bundle.topology, bundle.snapshot, noise_rng, eff);
      const cfmec::RealVector p_init =
          cfmec::init_fractional_powers(bundle.snapshot, bundle.topology, eff);
      const cfmec::CombinerSet combiners =
          cfg.mode == cfmec::NetworkMode::Cellular
              ? cfmec::lmmse(estimates, bundle.topology, p_init, eff)
              : cfmec::pmmse(estimates, bundle.topology, p_init, eff);
      const cfmec::SinrCoefficients coeffs = cfmec::sinr_coefficients(
          combiners, estimates, bundle.topology, eff);
      const cfmec::SeReport rep = cfmec::evaluate_se(coeffs, p_init, eff);

      cfmec::ComputeModel model;
      if (cfg.mode == cfmec::NetworkMode::Cellular) {
        model = cfmec::make_compute_model_cellular(bundle.topology,
                                                   bundle.f_servers);
      } else {
        model = cfmec::make_compute_model_cellfree(
            bundle.topology, bundle.f_servers, cfg.f_cpu);
      }
      const cfmec::RoughVerdict rough =
          cfmec::rough_check(cfg.bandwidth * rep.se, demand, model);
      out << s << "," << r << ",rough,"
          << (rough.pass ? "pass" : "inconclusive-fail") << ",0,0\n";
      if (!rough.pass) {
        const cfmec::PipelineResult pipe = cfmec::accurate_pipeline(
            demand, model, estimates, bundle.topology, eff, p_init);
        out << s << "," << r << ","
            << (pipe.feasible ? "accurate" : "accurate:" + pipe.stage) << ","
            << (pipe.feasible ? "pass" : "infeasible") << "," << pipe.rho
            << "," << pipe.pc_iterations << "\n";
      }
    }
  }
  return 0;
}

int cmd_compare(const CommonOpts& opt) {
  const cfmec::SystemConfig cfg = build_config(opt);
  const cfmec::CompareResult result = cfmec::compare_modes(cfg);
  cfmec::write_compare(result, cfg, opt.out_dir);
  for (const auto& s : result.summaries)
    std::printf("%s: median total power %.6g W, feasible %d/%d\n",
                s.mode.c_str(), s.median_total_power, s.n_feasible, s.n_runs);
  return 0;
}

int cmd_dump_snapshot(const CommonOpts& opt, int snapshot_index) {
  namespace fs = std::filesystem;
  const cfmec::SystemConfig cfg = build_config(opt);
  const cfmec::SnapshotBundle bundle =
      cfmec::make_bundle(cfg, snapshot_index);
  fs::create_directories(opt.out_dir);
  cfmec::dump_snapshot(bundle.snapshot,
                       (fs::path(opt.out_dir) / "snapshot.csv").string());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MEC-enabled cell-free massive MIMO uplink simulator"};
  app.require_subcommand(1);

  CommonOpts run_opt, feas_opt, cmp_opt, dump_opt;
  int snapshot_index = 0;

  CLI::App* run = app.add_subcommand("run", "Monte-Carlo campaign");
  add_common(run, run_opt);
  CLI::App* feas =
      app.add_subcommand("feasibility", "Feasibility checks only");
  add_common(feas, feas_opt);
  CLI::App* cmp =
      app.add_subcommand("compare", "Cell-free vs cellular vs C-RAN");
  add_common(cmp, cmp_opt);
  CLI::App* dump =
      app.add_subcommand("dump-snapshot", "Dump one snapshot's large-scale state");
  add_common(dump, dump_opt);
  dump->add_option("--snapshot", snapshot_index, "Snapshot index");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(run_opt);
    if (feas->parsed()) return cmd_feasibility(feas_opt);
    if (cmp->parsed()) return cmd_compare(cmp_opt);
    if (dump->parsed()) return cmd_dump_snapshot(dump_opt, snapshot_index);
  } catch (const cfmec::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
