// Batch pipeline driver: synth | project | train | classify | eval.
#include <CLI11.hpp>

#include <cstdio>
#include <string>

#include "lidarsem/pipeline.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Pointwise LiDAR semantic classification pipeline"};
  app.require_subcommand(1);

  std::string config_path;
  std::string mode;
  std::string out_dir;
  long long seed = -1;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "pipeline config file")->required();
    sub->add_option("--seed", seed, "random seed override");
    sub->add_option("--mode", mode, "experiment mode: exp1 | exp2 | exp3");
    sub->add_option("--out", out_dir, "output directory override");
  };

  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic scene dataset");
  CLI::App* project = app.add_subcommand("project", "dump range-image channels");
  CLI::App* train = app.add_subcommand("train", "train the per-pixel scorer");
  CLI::App* classify = app.add_subcommand("classify", "run the full pipeline");
  CLI::App* eval = app.add_subcommand("eval", "compute metrics against ground truth");
  for (CLI::App* sub : {synth, project, train, classify, eval}) add_common(sub);

  CLI11_PARSE(app, argc, argv);

  try {
    lidarsem::PipelineConfig cfg = lidarsem::load_pipeline_config(config_path);
    if (seed >= 0) cfg.seed = uint64_t(seed);
    if (!mode.empty()) {
      cfg.mode = mode;
      cfg.filter.object_update = lidarsem::mode_from_string(mode);
    }
    if (!out_dir.empty()) cfg.out_dir = out_dir;

    if (synth->parsed()) lidarsem::cmd_synth(cfg);
    if (project->parsed()) lidarsem::cmd_project(cfg);
    if (train->parsed()) lidarsem::cmd_train(cfg);
    if (classify->parsed()) lidarsem::cmd_classify(cfg);
    if (eval->parsed()) lidarsem::cmd_eval(cfg);
  } catch (const lidarsem::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const lidarsem::DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 2;
  } catch (const lidarsem::NumericalError& e) {
    std::fprintf(stderr, "numerical error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
