// pairit: serve the platform, simulate sessions, analyze runs, and prepare
// field-experiment inputs.

#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "pairit/core/error.hpp"
#include "pairit/fieldkit/campaigns.hpp"
#include "pairit/fieldkit/io.hpp"
#include "pairit/fieldkit/mockup.hpp"
#include "pairit/fieldkit/rating.hpp"
#include "pairit/fieldkit/synthetic.hpp"
#include "pairit/service/analyze.hpp"
#include "pairit/service/server.hpp"
#include "pairit/service/simulate.hpp"

using namespace pairit;
namespace fs = std::filesystem;

namespace {

ExperimentConfig load_config(const std::string& path) {
  return path.empty() ? ExperimentConfig{} : ExperimentConfig::load(path);
}

std::ofstream out_file(const std::string& path) {
  if (auto parent = fs::path(path).parent_path(); !parent.empty()) fs::create_directories(parent);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::MissingInputs, "cannot write " + path);
  return out;
}

std::vector<std::string> read_ids(const std::string& path, const std::string& column) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MissingInputs, path + " not found");
  std::string header, line;
  std::getline(in, header);
  std::size_t idx = 0, pos = 0;
  bool found = false;
  for (std::size_t next; !found; pos = next + 1, ++idx) {
    next = header.find(',', pos);
    if (header.substr(pos, next - pos) == column) found = true;
    if (next == std::string::npos) break;
  }
  if (!found) throw Error(ErrorCode::MissingColumn, column + " in " + path);
  --idx;
  std::vector<std::string> ids;
  while (std::getline(in, line)) {
    std::size_t start = 0;
    for (std::size_t k = 0; k < idx; ++k) start = line.find(',', start) + 1;
    ids.push_back(line.substr(start, line.find(',', start) - start));
  }
  return ids;
}

int serve(const std::string& configPath) {
  auto config = load_config(configPath);
  SystemClock clock;
  service::Experiment experiment(config, clock, service::make_clients(config), config.outputDir);
  service::Server server(experiment, config.host, static_cast<unsigned short>(config.port));
  std::cout << "serving on " << config.host << ':' << server.port() << ", logs in " << config.outputDir << std::endl;
  server.run(true);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pairit: human-AI collaboration experiments"};
  app.require_subcommand(1);
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "trace|debug|info|warn|error|off");

  std::string config_path;
  auto* serve_cmd = app.add_subcommand("serve", "run the HTTP and WebSocket service");
  serve_cmd->add_option("--config", config_path, "experiment config (JSON)");

  std::string scenario = "mixed", out_dir;
  std::size_t n = 10;
  std::uint64_t seed = 1;
  auto* sim_cmd = app.add_subcommand("simulate", "run scripted sessions on a simulated clock");
  sim_cmd->add_option("--config", config_path, "experiment config (JSON)");
  sim_cmd->add_option("--scenario", scenario, "hh-basic | hai-basic | mixed | path to scenario JSON");
  sim_cmd->add_option("--n", n, "number of sessions");
  sim_cmd->add_option("--seed", seed, "master seed");
  sim_cmd->add_option("--out", out_dir, "output directory")->required();

  std::string run_dir, stage = "metrics";
  auto* an_cmd = app.add_subcommand("analyze", "compute metrics, models or field tables for a run");
  an_cmd->add_option("--run", run_dir, "run directory")->required();
  an_cmd->add_option("--stage", stage, "metrics | models | field");

  auto* fk = app.add_subcommand("fieldkit", "field-experiment design and measurement");
  fk->require_subcommand(1);
  std::string ads_path, zips_path, sample_path, delivery_path, views_path, plan_path, log_path, task;
  std::size_t target = 2000, n_samples = 1300, per_sample = 40, index = 0;

  auto* fk_synth = fk->add_subcommand("synth", "write a synthetic field run (ads, ZIPs, plan, delivery, views)");
  fk_synth->add_option("--out", out_dir, "output directory")->required();
  fk_synth->add_option("--seed", seed, "seed");

  auto* fk_sample = fk->add_subcommand("sample", "stratified ad sample");
  fk_sample->add_option("--ads", ads_path)->required();
  fk_sample->add_option("--n", target, "sample size");
  fk_sample->add_option("--seed", seed);
  fk_sample->add_option("--out", out_dir, "output CSV")->required();

  auto* fk_camp = fk->add_subcommand("campaigns", "allocate sampled ads and ZIP codes to campaigns");
  fk_camp->add_option("--sample", sample_path)->required();
  fk_camp->add_option("--zips", zips_path)->required();
  fk_camp->add_option("--seed", seed);
  fk_camp->add_option("--out", out_dir, "output CSV")->required();

  auto* fk_bal = fk->add_subcommand("balance", "ANOVA of ZIP population and income across campaigns");
  fk_bal->add_option("--sample", sample_path)->required();
  fk_bal->add_option("--zips", zips_path)->required();
  fk_bal->add_option("--seed", seed);

  auto* fk_metrics = fk->add_subcommand("metrics", "CTR, CPC, VTR and VTD per ad");
  fk_metrics->add_option("--delivery", delivery_path)->required();
  fk_metrics->add_option("--views", views_path)->required();
  fk_metrics->add_option("--out", out_dir, "output CSV")->required();

  auto* fk_rating = fk->add_subcommand("rating-samples", "pre-generate rating-survey ad lists");
  fk_rating->add_option("--ads", ads_path)->required();
  fk_rating->add_option("--samples", n_samples);
  fk_rating->add_option("--per-sample", per_sample);
  fk_rating->add_option("--seed", seed);
  fk_rating->add_option("--out", out_dir, "output CSV")->required();

  auto* fk_mockup = fk->add_subcommand("mockup", "render spec for one submitted ad");
  fk_mockup->add_option("--log", log_path, "session log (JSONL)")->required();
  fk_mockup->add_option("--index", index, "submission index");

  CLI11_PARSE(app, argc, argv);
  spdlog::set_level(spdlog::level::from_str(log_level));

  try {
    if (*serve_cmd) return serve(config_path);
    if (*sim_cmd) {
      const auto run = service::simulate(load_config(config_path), service::load_scenario(scenario), n, seed, out_dir);
      std::cout << "simulated " << n << " sessions (" << run.sessionsCompleted << " completed, "
                << run.sessionsExcluded << " excluded) into " << out_dir << '\n';
      return 0;
    }
    if (*an_cmd) {
      for (const auto& f : service::analyze(run_dir, service::stage_from_string(stage))) std::cout << f.string() << '\n';
      return 0;
    }
    if (*fk_synth) {
      fieldkit::synthesize_field_data(out_dir, seed);
      std::cout << "wrote synthetic field run to " << out_dir << '\n';
    } else if (*fk_sample) {
      const auto ads = fieldkit::load_ads_csv(ads_path);
      Rng rng(seed);
      const auto s = fieldkit::stratified_sample(ads, target, rng);
      auto out = out_file(out_dir);
      fieldkit::write_sample_csv(out, s, ads);
      std::cout << s.adIds.size() << " ads sampled, " << s.removedFlagged << " flagged removed\n";
    } else if (*fk_camp) {
      const auto plan = fieldkit::allocate_campaigns(read_ids(sample_path, "adId"),
                                                     fieldkit::load_zip_csv(zips_path), seed);
      auto out = out_file(out_dir);
      fieldkit::write_plan_csv(out, plan);
      std::cout << plan.campaigns.size() << " campaigns\n";
    } else if (*fk_bal) {
      const auto zips = fieldkit::load_zip_csv(zips_path);
      const auto plan = fieldkit::allocate_campaigns(read_ids(sample_path, "adId"), zips, seed);
      const auto r = fieldkit::balance_check(plan, zips);
      std::cout << "population: F(" << r.population.dfBetween << ", " << r.population.dfWithin
                << ") = " << r.population.F << ", p = " << r.population.p << '\n'
                << "income:     F(" << r.income.dfBetween << ", " << r.income.dfWithin << ") = " << r.income.F
                << ", p = " << r.income.p << '\n';
    } else if (*fk_metrics) {
      const auto rows = fieldkit::field_metrics(fieldkit::load_delivery_csv(delivery_path),
                                                fieldkit::load_views_csv(views_path));
      auto out = out_file(out_dir);
      fieldkit::write_field_metrics_csv(out, rows);
    } else if (*fk_rating) {
      std::vector<std::string> ids;
      for (const auto& a : fieldkit::load_ads_csv(ads_path)) ids.push_back(a.adId);
      Rng rng(seed);
      fieldkit::RatingSampler sampler(ids, rng, {n_samples, per_sample, 3});
      auto out = out_file(out_dir);
      out << "sample,position,adId\n";
      for (std::size_t s = 0; s < sampler.samples().size(); ++s) {
        for (std::size_t p = 0; p < sampler.samples()[s].size(); ++p) {
          out << s + 1 << ',' << p + 1 << ',' << sampler.samples()[s][p] << '\n';
        }
      }
      const auto cov = fieldkit::coverage(ids, sampler.samples());
      std::cout << "coverage per ad: min " << cov.minCount << ", max " << cov.maxCount << '\n';
    } else if (*fk_mockup) {
      const auto state = replay(analytics::load_record(log_path).log);
      if (index >= state.submissions.size()) {
        throw Error(ErrorCode::MissingInputs, "session has " + std::to_string(state.submissions.size()) +
                                                  " submissions");
      }
      std::cout << fieldkit::mockup_export(state.submissions[index].ad).dump(2) << '\n';
    }
    return 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
