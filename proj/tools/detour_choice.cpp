// Command-line front end for the crowd-shipping detour mode-choice toolkit.
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "detour/config.hpp"
#include "detour/dataset.hpp"
#include "detour/estimate.hpp"
#include "detour/mixed.hpp"
#include "detour/mpe.hpp"
#include "detour/pipeline.hpp"
#include "detour/report.hpp"
#include "detour/summary.hpp"
#include "detour/synthesis.hpp"
#include "detour/synthetic.hpp"

namespace {

namespace fs = std::filesystem;
using namespace detour;

struct GlobalOptions {
  std::string config_path;
  std::string out_dir = "out";
  int threads = 0;
  std::uint64_t seed = 42;
  bool seed_set = false;
};

RunConfig effective_config(const GlobalOptions& g) {
  RunConfig cfg;
  if (!g.config_path.empty()) cfg = load_config(g.config_path);
  cfg.threads = g.threads;
  cfg.out_dir = g.out_dir;
  if (g.seed_set) cfg.draws.seed = g.seed;
  return cfg;
}

void write_or_print(const std::string& out, const std::string& content) {
  if (out.empty()) {
    std::cout << content;
  } else {
    write_file(out, content);
    std::cerr << "wrote " << out << "\n";
  }
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const IoError*>(&e) != nullptr) return 2;
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Crowd-shipping detour mode-choice toolkit"};
  app.require_subcommand(1);

  GlobalOptions global;
  app.add_option("--config", global.config_path, "configuration file");
  app.add_option("--out-dir", global.out_dir, "output directory for `run`");
  app.add_option("--threads", global.threads,
                 "worker threads (0 = DETOUR_CHOICE_THREADS or hardware)");
  app.add_option("--seed", global.seed, "draw seed override")
      ->each([&global](const std::string&) { global.seed_set = true; });

  // describe ---------------------------------------------------------------
  auto* describe = app.add_subcommand("describe", "descriptive statistics");
  std::string describe_dataset, describe_out;
  bool describe_pooled = false;
  describe->add_option("--dataset", describe_dataset, "input CSV")->required();
  describe->add_option("--out", describe_out, "output text file");
  describe->add_flag("--pooled", describe_pooled,
                     "single pooled group instead of per-gender");

  // synthesize ---------------------------------------------------------------
  auto* synthesize =
      app.add_subcommand("synthesize", "reconstructed attribute table");
  std::string synthesize_dataset, synthesize_out;
  synthesize->add_option("--dataset", synthesize_dataset, "input CSV")
      ->required();
  synthesize->add_option("--out", synthesize_out, "output CSV");

  // synth ---------------------------------------------------------------
  auto* synth = app.add_subcommand("synth", "synthetic dataset generator");
  std::string synth_spec = "cost-time";
  std::string synth_params, synth_out;
  std::size_t synth_n = 249;
  std::uint64_t synth_seed = 1;
  synth->add_option("--spec", synth_spec,
                    "model preset or spec file for the true model");
  synth->add_option("--true-params", synth_params, "name/value file")
      ->required();
  synth->add_option("--n", synth_n, "number of observations");
  synth->add_option("--seed", synth_seed, "generator seed");
  synth->add_option("--out", synth_out, "output CSV");

  // fit ---------------------------------------------------------------
  auto* fit = app.add_subcommand("fit", "estimate a mode-choice model");
  std::string fit_model = "cost-time";
  std::string fit_dataset, fit_out;
  bool fit_mixture = false;
  int fit_draws = 0;
  std::string fit_draw_type;
  fit->add_option("--model", fit_model,
                  "cost-time | profit-time | spec file path");
  fit->add_option("--dataset", fit_dataset, "input CSV")->required();
  fit->add_option("--out", fit_out, "result CSV path");
  fit->add_flag("--mixture", fit_mixture, "mixture-of-logit estimation");
  fit->add_option("--draws", fit_draws, "simulation draws (mixture)");
  fit->add_option("--draw-type", fit_draw_type, "halton | random");

  // mpe ---------------------------------------------------------------
  auto* mpe_cmd =
      app.add_subcommand("mpe", "marginal probability effects table");
  std::string mpe_dataset, mpe_result_path, mpe_out, mpe_model;
  std::string mpe_levels = "-10,-5,-1,1,5,10";
  mpe_cmd->add_option("--dataset", mpe_dataset, "input CSV")->required();
  mpe_cmd->add_option("--model-result", mpe_result_path,
                      "fit result CSV")->required();
  mpe_cmd->add_option("--model", mpe_model,
                      "model spec (defaults to the result's model id)");
  mpe_cmd->add_option("--levels", mpe_levels, "perturbation percents");
  mpe_cmd->add_option("--out", mpe_out, "output CSV");

  // report ---------------------------------------------------------------
  auto* report_cmd = app.add_subcommand("report", "render fitted results");
  std::vector<std::string> report_results;
  std::vector<std::string> report_mpes;
  std::string report_out;
  report_cmd->add_option("--result", report_results, "fit result CSV(s)")
      ->required();
  report_cmd->add_option("--mpe", report_mpes, "MPE table CSV(s)");
  report_cmd->add_option("--out", report_out,
                         "output base path (.txt/.csv appended)");

  // run ---------------------------------------------------------------
  auto* run_cmd = app.add_subcommand("run", "full pipeline");
  std::string run_dataset;
  std::string run_model;
  bool run_mixture = false;
  run_cmd->add_option("--dataset", run_dataset, "input CSV")->required();
  run_cmd->add_option("--model", run_model, "model preset or spec file");
  run_cmd->add_flag("--mixture", run_mixture, "also fit the mixture model");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*describe) {
      const Dataset d = load_dataset(describe_dataset);
      const SummaryReport rep = summarize(d, !describe_pooled);
      write_or_print(describe_out, summary_to_text(rep));
      return 0;
    }

    if (*synthesize) {
      const RunConfig cfg = effective_config(global);
      const Dataset d = load_dataset(synthesize_dataset);
      write_or_print(synthesize_out,
                     attribute_table_csv(d, cfg.network, cfg.scaling));
      return 0;
    }

    if (*synth) {
      const RunConfig cfg = effective_config(global);
      SyntheticConfig scfg;
      scfg.spec = resolve_model(synth_spec, false, cfg.draws);
      scfg.true_parameters = load_parameter_file(synth_params);
      scfg.network = cfg.network;
      scfg.scaling = cfg.scaling;
      scfg.n_obs = synth_n;
      scfg.seed = synth_seed;
      const GeneratedData g = generate(scfg);
      write_or_print(synth_out, g.dataset.to_csv());
      std::cerr << "choice shares:";
      for (Mode m : kAllModes) {
        std::cerr << " " << mode_name(m) << "="
                  << g.tallies.chosen[mode_index(m)];
      }
      std::cerr << " car_available=" << g.tallies.car_available << "\n";
      return 0;
    }

    if (*fit) {
      RunConfig cfg = effective_config(global);
      if (fit_draws > 0) cfg.draws.count = fit_draws;
      if (!fit_draw_type.empty()) cfg.draws.type = parse_draw_type(fit_draw_type);
      const Dataset d = load_dataset(fit_dataset);
      const ModelSpec spec = resolve_model(fit_model, fit_mixture, cfg.draws);
      const DesignMatrix x =
          build_design_matrix(d, cfg.network, cfg.scaling, spec);
      OptimizerOptions opts = cfg.optimizer;
      opts.threads = cfg.threads;
      const EstimationResult res = fit_mixture
                                       ? estimate_mixed(d, x, spec, opts)
                                       : estimate(d, x, spec, opts);
      std::cout << result_to_text(res);
      if (!fit_out.empty()) {
        write_file(fit_out, result_to_csv(res));
        std::cerr << "wrote " << fit_out << "\n";
      }
      return 0;
    }

    if (*mpe_cmd) {
      const RunConfig cfg = effective_config(global);
      const Dataset d = load_dataset(mpe_dataset);
      const EstimationResult res = result_from_csv(mpe_result_path);
      const std::string model_name =
          mpe_model.empty() ? res.model_id : mpe_model;
      DrawConfig draws = cfg.draws;
      if (res.draw_count > 0) {
        draws.count = res.draw_count;
        draws.type = res.draw_type;
        draws.seed = res.draw_seed;
      }
      const ModelSpec spec =
          resolve_model(model_name, res.draw_count > 0, draws);
      const DesignMatrix x =
          build_design_matrix(d, cfg.network, cfg.scaling, spec);
      std::vector<double> levels;
      for (const std::string& field : split_csv_line(mpe_levels)) {
        levels.push_back(parse_double(field, "--levels"));
      }
      std::vector<std::string> attributes;
      for (const Term& t : spec.terms) {
        if (t.attribute == "const" || t.attribute == "income") continue;
        bool seen = false;
        for (const std::string& a : attributes) seen = seen || a == t.attribute;
        if (!seen) attributes.push_back(t.attribute);
      }
      const MpeTable table = mpe_table(d, x, res, spec, attributes, levels);
      std::cout << mpe_table_to_text(table);
      if (!mpe_out.empty()) {
        write_file(mpe_out, mpe_table_to_csv(table));
        std::cerr << "wrote " << mpe_out << "\n";
      }
      return 0;
    }

    if (*report_cmd) {
      std::vector<EstimationResult> results;
      for (const std::string& path : report_results) {
        results.push_back(result_from_csv(path));
      }
      std::vector<MpeTable> tables;
      for (const std::string& path : report_mpes) {
        tables.push_back(mpe_table_from_csv(path));
      }
      const RenderedReport rendered = render_report(results, tables);
      if (report_out.empty()) {
        std::cout << rendered.text;
      } else {
        write_file(report_out + ".txt", rendered.text);
        write_file(report_out + ".csv", rendered.csv);
        std::cerr << "wrote " << report_out << ".txt and " << report_out
                  << ".csv\n";
      }
      return 0;
    }

    if (*run_cmd) {
      RunConfig cfg = effective_config(global);
      if (!run_model.empty()) cfg.model = run_model;
      if (run_mixture) cfg.mixture = true;
      try {
        const PipelineArtifacts artifacts =
            run_pipeline(cfg, run_dataset, std::cerr);
        for (const std::string& file : artifacts.files) {
          std::cerr << "wrote " << file << "\n";
        }
      } catch (const PipelineError& e) {
        std::cerr << "error in stage '" << e.stage << "': " << e.what()
                  << "\n";
        const bool missing_input =
            std::string(e.what()).find("cannot open file") !=
            std::string::npos;
        return missing_input ? 2 : 1;
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
  return 0;
}
