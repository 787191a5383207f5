#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "fgssl/dataset.hpp"
#include "fgssl/errors.hpp"
#include "fgssl/experiment.hpp"
#include "fgssl/explain.hpp"
#include "fgssl/metrics.hpp"
#include "fgssl/model.hpp"
#include "fgssl/trainer.hpp"
#include "fgssl/verify.hpp"

namespace fs = std::filesystem;
using namespace fgssl;

namespace {

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir + "': " + ec.message());
}

int cmd_gen_data(const std::string& out, int64_t classes, int64_t per_class_train,
                 int64_t per_class_test, int64_t size, uint64_t seed) {
  auto [train, test] = generate_synthetic(classes, per_class_train, per_class_test, size, seed);
  ensure_dir(out);
  save_dataset(train, test, out);
  std::cout << "wrote " << train.size() << " train and " << test.size() << " test samples to "
            << out << "\n";
  return 0;
}

int cmd_train(const std::string& config_path, const std::string& data, const std::string& out,
              const std::string& mode_override, double label_fraction_override) {
  TrainConfig cfg = config_path.empty() ? TrainConfig{} : parse_experiment_file(config_path);
  if (!mode_override.empty()) cfg.mode = parse_train_mode(mode_override);
  if (label_fraction_override >= 0.0) cfg.label_fraction = label_fraction_override;
  validate(cfg);

  auto [train_set, test_set] = load_dataset_root(data);
  const std::string resolved = serialize_experiment(cfg);
  std::cout << "# resolved configuration\n" << resolved << std::flush;

  TrainResult<float> result = train<float>(cfg, train_set, test_set);

  ensure_dir(out);
  write_metrics(result.history, out + "/metrics.csv", out + "/summary.json", resolved);
  save_checkpoint(result.model, out + "/final.ckpt", static_cast<uint64_t>(cfg.epochs),
                  config_hash(cfg));
  const MetricsRow& last = result.history.back();
  std::printf("final: top1 %.2f top2 %.2f\n", last.test_top1, last.test_top2);
  return 0;
}

int cmd_eval(const std::string& ckpt, const std::string& data, const std::string& config_path) {
  CheckpointData snap = load_checkpoint(ckpt);
  Model<float> model = model_from_checkpoint<float>(snap);
  PreprocessConfig pp;
  if (!config_path.empty()) {
    TrainConfig cfg = parse_experiment_file(config_path);
    pp = cfg.preprocess;
    if (config_hash(cfg) != snap.config_hash) {
      std::cerr << "warning: config hash does not match the checkpoint's training config\n";
    }
  }
  auto [train_set, test_set] = load_dataset_root(data);
  (void)train_set;
  auto [top1, top2] = evaluate(model, test_set, pp);
  std::printf("%.2f / %.2f\n", top1, top2);
  return 0;
}

int cmd_cam(const std::string& ckpt, const std::string& data, const std::string& out,
            int64_t class_index, bool auto_class) {
  CheckpointData snap = load_checkpoint(ckpt);
  Model<float> model = model_from_checkpoint<float>(snap);
  auto [train_set, test_set] = load_dataset_root(data);
  (void)train_set;
  ensure_dir(out);
  for (const Sample& s : test_set.samples) {
    const int64_t target = auto_class ? s.label : class_index;
    Heatmap hm = grad_cam(model, s.image, target, s.id);
    char gray[64], overlay[64];
    std::snprintf(gray, sizeof(gray), "cam_%06lld_class%02lld.pgm",
                  static_cast<long long>(s.id), static_cast<long long>(target));
    std::snprintf(overlay, sizeof(overlay), "cam_%06lld_class%02lld_overlay.ppm",
                  static_cast<long long>(s.id), static_cast<long long>(target));
    export_heatmap(hm, s.image, out + "/" + gray, out + "/" + overlay);
  }
  const double rate = localization_rate(model, test_set);
  std::printf("exported %lld heatmaps; localization_rate %.2f%%\n",
              static_cast<long long>(test_set.size()), rate);
  return 0;
}

int cmd_verify(const std::string& suite) {
  std::vector<CheckResult> results;
  auto run = [&](const std::string& name, std::vector<CheckResult> (*fn)()) {
    if (suite == "all" || suite == name) {
      auto r = fn();
      results.insert(results.end(), r.begin(), r.end());
    }
  };
  run("grad", verify_grad_suite);
  run("perm", verify_perm_suite);
  run("loss", verify_loss_suite);
  FGSSL_CHECK(!results.empty(), "verify: unknown suite '" + suite + "'");
  print_results(results, std::cout);
  const bool ok = all_pass(results);
  std::cout << (ok ? "all checks passed" : "CHECKS FAILED") << " (" << results.size() << ")\n";
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Self-supervised auxiliary tasks for fine-grained classification"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("gen-data", "Generate the synthetic glyph dataset");
  std::string gen_out;
  int64_t classes = 20, per_train = 100, per_test = 50, size = 32;
  uint64_t gen_seed = 1;
  gen->add_option("--out", gen_out, "Output dataset root")->required();
  gen->add_option("--classes", classes, "Number of classes");
  gen->add_option("--per-class-train", per_train, "Training samples per class");
  gen->add_option("--per-class-test", per_test, "Test samples per class");
  gen->add_option("--size", size, "Square image side in pixels");
  gen->add_option("--seed", gen_seed, "Generator seed");

  auto* tr = app.add_subcommand("train", "Train a model and write metrics plus a checkpoint");
  std::string tr_config, tr_data, tr_out, tr_mode;
  double tr_fraction = -1.0;
  tr->add_option("--config", tr_config, "Experiment file; defaults apply when omitted");
  tr->add_option("--data", tr_data, "Dataset root from gen-data")->required();
  tr->add_option("--out", tr_out, "Output directory")->required();
  tr->add_option("--mode", tr_mode, "Override the training mode");
  tr->add_option("--label-fraction", tr_fraction, "Override the labeled fraction");

  auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset's test split");
  std::string ev_ckpt, ev_data, ev_config;
  ev->add_option("--ckpt", ev_ckpt, "Checkpoint file")->required();
  ev->add_option("--data", ev_data, "Dataset root")->required();
  ev->add_option("--config", ev_config, "Experiment file for preprocessing settings");

  auto* cam = app.add_subcommand("cam", "Export Grad-CAM heatmaps for the test split");
  std::string cam_ckpt, cam_data, cam_out;
  int64_t cam_class = -1;
  bool cam_auto = false;
  cam->add_option("--ckpt", cam_ckpt, "Checkpoint file")->required();
  cam->add_option("--data", cam_data, "Dataset root")->required();
  cam->add_option("--out", cam_out, "Output directory")->required();
  auto* copt = cam->add_option("--class", cam_class, "Fixed class index for every heatmap");
  auto* aopt = cam->add_flag("--auto", cam_auto, "Use each sample's true label");
  copt->excludes(aopt);

  auto* vf = app.add_subcommand("verify", "Run the oracle and property suites");
  std::string suite = "all";
  vf->add_option("--suite", suite, "grad, perm, loss, or all")
      ->check(CLI::IsMember({"grad", "perm", "loss", "all"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);  // prints help, exit 0
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (gen->parsed()) {
      return cmd_gen_data(gen_out, classes, per_train, per_test, size, gen_seed);
    }
    if (tr->parsed()) return cmd_train(tr_config, tr_data, tr_out, tr_mode, tr_fraction);
    if (ev->parsed()) return cmd_eval(ev_ckpt, ev_data, ev_config);
    if (cam->parsed()) {
      if (!cam_auto && cam_class < 0) {
        std::cerr << "error: cam needs --class or --auto\n";
        return 2;
      }
      return cmd_cam(cam_ckpt, cam_data, cam_out, cam_class, cam_auto);
    }
    if (vf->parsed()) return cmd_verify(suite);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 3;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
