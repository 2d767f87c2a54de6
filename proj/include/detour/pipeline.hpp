#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "detour/config.hpp"
#include "detour/dataset.hpp"
#include "detour/estimate.hpp"
#include "detour/mixed.hpp"
#include "detour/mpe.hpp"
#include "detour/report.hpp"
#include "detour/summary.hpp"
#include "detour/synthesis.hpp"

namespace detour {

struct PipelineError : Error {
  PipelineError(const std::string& stage_name, const std::string& what)
      : Error(what), stage(stage_name) {}
  std::string stage;
};

struct PipelineArtifacts {
  std::vector<std::string> files;
  EstimationResult mnl_result;
  EstimationResult mixture_result;  // valid only when mixture ran
  bool has_mixture = false;
};

// Full run: describe -> synthesize -> fit (MNL, optionally mixture) ->
// marginal probability effects -> report. Every intermediate artifact is
// written before the next stage starts, so a failure retains partial output.
inline PipelineArtifacts run_pipeline(const RunConfig& cfg,
                                      const std::string& dataset_path,
                                      std::ostream& warn_stream = std::cerr) {
  namespace fs = std::filesystem;
  PipelineArtifacts artifacts;
  const fs::path out_dir(cfg.out_dir);

  auto stage = [&](const std::string& name, auto&& fn) {
    try {
      fn();
    } catch (const PipelineError&) {
      throw;
    } catch (const std::exception& e) {
      throw PipelineError(name, e.what());
    }
  };

  auto emit = [&](const std::string& name, const std::string& content) {
    const std::string path = (out_dir / name).string();
    write_file(path, content);
    artifacts.files.push_back(path);
  };

  Dataset dataset;
  stage("load", [&] {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory: " + cfg.out_dir);
    dataset = load_dataset(dataset_path, warn_stream);
  });

  stage("describe", [&] {
    const SummaryReport rep = summarize(dataset, /*by_gender=*/true);
    emit("describe.txt", summary_to_text(rep));
    emit("describe.csv", summary_to_csv(rep));
  });

  stage("synthesize", [&] {
    emit("attributes.csv",
         attribute_table_csv(dataset, cfg.network, cfg.scaling));
  });

  ModelSpec spec;
  DesignMatrix x;
  OptimizerOptions opts = cfg.optimizer;
  opts.threads = cfg.threads;
  stage("fit", [&] {
    spec = resolve_model(cfg.model, /*mixture=*/false, cfg.draws);
    x = build_design_matrix(dataset, cfg.network, cfg.scaling, spec);
    artifacts.mnl_result = estimate(dataset, x, spec, opts);
    emit("fit_mnl.csv", result_to_csv(artifacts.mnl_result));
  });

  ModelSpec mixed_spec;
  if (cfg.mixture) {
    stage("fit-mixture", [&] {
      mixed_spec = resolve_model(cfg.model, /*mixture=*/true, cfg.draws);
      artifacts.mixture_result = estimate_mixed(dataset, x, mixed_spec, opts);
      artifacts.has_mixture = true;
      emit("fit_mixture.csv", result_to_csv(artifacts.mixture_result));
    });
  }

  MpeTable mpe_result;
  stage("mpe", [&] {
    std::vector<std::string> attributes;
    for (const Term& t : spec.terms) {
      if (t.attribute == "const" || t.attribute == "income") continue;
      bool seen = false;
      for (const std::string& a : attributes) seen = seen || a == t.attribute;
      if (!seen) attributes.push_back(t.attribute);
    }
    mpe_result = mpe_table(dataset, x, artifacts.mnl_result, spec, attributes);
    emit("mpe_mnl.csv", mpe_table_to_csv(mpe_result));
  });

  stage("report", [&] {
    std::vector<EstimationResult> results = {artifacts.mnl_result};
    if (artifacts.has_mixture) results.push_back(artifacts.mixture_result);
    const RenderedReport rendered = render_report(results, {mpe_result});
    emit("report.txt", rendered.text);
    emit("report.csv", rendered.csv);
  });

  return artifacts;
}

}  // namespace detour
