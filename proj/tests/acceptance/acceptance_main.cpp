// End-to-end acceptance checks. Each numbered check prints exactly one
// [PASS]/[FAIL] line; the process exits nonzero if any fail. The directional
// checks train real models on the default synthetic preset, so a full run
// takes tens of minutes on one core.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "fgssl/dataset.hpp"
#include "fgssl/diversification.hpp"
#include "fgssl/explain.hpp"
#include "fgssl/image.hpp"
#include "fgssl/losses.hpp"
#include "fgssl/model.hpp"
#include "fgssl/rng.hpp"
#include "fgssl/trainer.hpp"
#include "fgssl/transforms.hpp"
#include "fgssl/verify.hpp"

#ifndef FGSSL_CLI_PATH
#define FGSSL_CLI_PATH ""
#endif

namespace fs = std::filesystem;
using namespace fgssl;
using clock_type = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(int id, bool ok, const std::string& text) {
  std::printf("[%s] %02d %s\n", ok ? "PASS" : "FAIL", id, text.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

void info(const std::string& text) {
  std::printf("       %s\n", text.c_str());
  std::fflush(stdout);
}

double seconds_since(clock_type::time_point t0) {
  return std::chrono::duration<double>(clock_type::now() - t0).count();
}

const CheckResult* find_check(const std::vector<CheckResult>& rs, const std::string& name) {
  for (const auto& r : rs) {
    if (r.name == name) return &r;
  }
  return nullptr;
}

double median3(double a, double b, double c) {
  std::vector<double> v{a, b, c};
  std::sort(v.begin(), v.end());
  return v[1];
}

std::string fmt(double v, int prec = 2) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", prec, v);
  return buf;
}

std::string fmt_sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.1e", v);
  return buf;
}

// Shared trainer for the directional checks. Results are cached per
// (mode, lambda, fraction, seed) so paired comparisons reuse runs.
struct PresetRuns {
  Dataset train, test;
  std::map<std::string, TrainResult<float>> cache;

  PresetRuns() {
    auto pair = generate_synthetic(20, 100, 50, 32, 1);
    train = std::move(pair.first);
    test = std::move(pair.second);
  }

  TrainResult<float>& get(TrainMode mode, double lambda, double fraction, uint64_t seed) {
    std::ostringstream key;
    key << to_string(mode) << "/" << lambda << "/" << fraction << "/" << seed;
    auto it = cache.find(key.str());
    if (it != cache.end()) return it->second;
    TrainConfig cfg;
    cfg.mode = mode;
    cfg.lambda = lambda;
    cfg.label_fraction = fraction;
    cfg.seed = seed;
    TrainResult<float> r = fgssl::train<float>(cfg, train, test);
    return cache.emplace(key.str(), std::move(r)).first->second;
  }

  double final_top1(TrainMode mode, double lambda, double fraction, uint64_t seed) {
    return get(mode, lambda, fraction, seed).history.back().test_top1;
  }
};

std::string read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

// 1: every op and every loss against central finite differences.
void check_gradient_oracle() {
  const auto t0 = clock_type::now();
  const auto rs = verify_grad_suite();
  const double dur = seconds_since(t0);
  double worst = 0.0;
  for (const auto& r : rs) worst = std::max(worst, r.observed);
  const bool ok = all_pass(rs) && dur < 60.0;
  report(1, ok,
         "every op and loss gradient matches central finite differences (" +
             std::to_string(rs.size()) + " checks, worst rel err " + fmt_sci(worst) + ", " +
             fmt(dur, 1) + "s < 60s)");
}

// 2 and 6 come from the loss-identity suite.
void check_loss_identities(const std::vector<CheckResult>& loss_rs) {
  const CheckResult* gce = find_check(loss_rs, "loss.gce_equals_ce_at_full_k");
  report(2, gce && gce->pass,
         std::string("top-(N-1) boosted loss equals plain cross entropy") +
             (gce ? " (worst |diff| " + fmt_sci(gce->observed) + " < 1e-12 over 1000 draws)"
                  : " (check missing)"));
}

// 3 and 4: constrained-shuffle properties.
void check_permutations() {
  const auto t0 = clock_type::now();
  const auto rs = verify_perm_suite();
  const double dur = seconds_since(t0);
  const CheckResult* cons = find_check(rs, "perm.constraint_10000");
  const CheckResult* round = find_check(rs, "perm.roundtrip_100");
  report(3, cons && cons->pass && dur < 10.0,
         std::string("10000 random constrained shuffles stay bijective within the movement ") +
             "bound (" + fmt(dur, 1) + "s < 10s)");
  report(4, round && round->pass,
         "100 shuffle then unshuffle roundtrips reassemble images bitwise");
}

// 5: zero-weight and identity settings reduce exactly to the plain path.
void check_reduction_boundaries() {
  // Zero-weight rotation training against the plain run, double precision.
  auto [tr, te] = generate_synthetic(4, 12, 6, 16, 9);
  double worst = 0.0;
  for (int64_t epochs = 1; epochs <= 3; ++epochs) {
    TrainConfig base;
    base.epochs = epochs;
    base.batch_size = 4;
    base.seed = 5;
    base.preprocess.resize = 18;
    base.preprocess.crop = 16;
    base.mode = TrainMode::baseline;
    TrainConfig rot = base;
    rot.mode = TrainMode::rotation;
    rot.lambda = 0.0;
    auto rb = fgssl::train<double>(base, tr, te);
    auto rr = fgssl::train<double>(rot, tr, te);
    for (Parameter<double>* p : rb.model.parameters()) {
      const auto& a = p->value.vec();
      const auto& b = rr.model.param(p->name).value.vec();
      for (size_t i = 0; i < a.size(); ++i) {
        worst = std::max(worst, std::abs(a[i] - b[i]));
      }
    }
  }
  const bool traj_ok = worst < 1e-12;

  // Suppression with zero draw probability, and with scale factor one, must
  // leave the activation maps bitwise untouched.
  Model<double> cam_model(ModelArch{6, TrainMode::db_gce, 4, LocMode::mse, 9, 32}, 11);
  Tensor<double> cams =
      cam_model.cam_forward(to_tensor<double>(std::vector<Image>{te.samples[0].image}));
  Tensor<double> one = ops::reshape(cams, Shape{cams.dim(1), cams.dim(2), cams.dim(3)});
  DbConfig off;
  off.p_peak = 0.0;
  off.p_patch = 0.0;
  Rng rng_off(derive_stream(7, {stream::kMask, 0, 0}));
  auto mask_off = suppression_mask(one, off, rng_off);
  const bool off_ok = apply_suppression(one, mask_off, off.alpha).vec() == one.vec();
  DbConfig unity;
  unity.p_peak = 1.0;
  unity.p_patch = 1.0;
  unity.alpha = 1.0;
  Rng rng_unity(derive_stream(7, {stream::kMask, 0, 1}));
  auto mask_unity = suppression_mask(one, unity, rng_unity);
  const bool unity_ok = apply_suppression(one, mask_unity, unity.alpha).vec() == one.vec();

  // Perfect location predictions give exactly zero loss.
  const int64_t k = 4;
  auto grid = identity_location_targets(k);
  Tensor<double> ident = Tensor<double>::from_data(Shape{2, k, k}, coord_grid_chw<double>(grid, k));
  const double mse =
      dcl_loc_loss(ident, ident, ident, LocMode::mse).vec()[0];
  const double l1 = dcl_loc_loss(ident, ident, ident, LocMode::l1).vec()[0];
  const bool loc_ok = mse == 0.0 && l1 == 0.0;

  report(5, traj_ok && off_ok && unity_ok && loc_ok,
         "boundary settings reduce exactly: zero-weight rotation training tracks the plain "
         "run (max param diff " +
             fmt_sci(worst) + " < 1e-12), suppression at p=0 and at alpha=1 is a bitwise " +
             "identity on the maps, perfect location predictions give exactly zero loss");
}

void check_memory_bank(const std::vector<CheckResult>& loss_rs) {
  const CheckResult* bank = find_check(loss_rs, "loss.bank_ema_closed_form");
  report(6, bank && bank->pass,
         std::string("memory bank entries match the closed-form moving-average recursion") +
             (bank ? " (worst err " + fmt_sci(bank->observed) + " < 1e-10, norms within 1e-6)"
                   : " (check missing)"));
}

void check_directional(PresetRuns& runs) {
  // 7: jigsaw deconstruction training vs the plain classifier, full labels.
  info("training preset runs for the directional checks (several minutes)...");
  const auto t0 = clock_type::now();
  std::vector<double> dcl1, base1;
  for (uint64_t seed : {1, 2, 3}) {
    base1.push_back(runs.final_top1(TrainMode::baseline, 0.1, 1.0, seed));
    dcl1.push_back(runs.final_top1(TrainMode::dcl, 0.1, 1.0, seed));
    info("  seed " + std::to_string(seed) + ": baseline " + fmt(base1.back()) + ", dcl " +
         fmt(dcl1.back()));
  }
  const double dur7 = seconds_since(t0);
  const double med_dcl = median3(dcl1[0], dcl1[1], dcl1[2]);
  const double med_base = median3(base1[0], base1[1], base1[2]);
  report(7, med_dcl >= med_base && dur7 < 1200.0,
         "jigsaw deconstruction training reaches at least the plain classifier's median "
         "final top-1 (" +
             fmt(med_dcl) + " vs " + fmt(med_base) + " over 3 seeds, " + fmt(dur7 / 60.0, 1) +
             " min < 20 min)");

  // 8: the gap grows when only a tenth of the labels remain.
  std::vector<double> gap_low, gap_full;
  for (uint64_t seed : {1, 2, 3}) {
    const double b = runs.final_top1(TrainMode::baseline, 0.1, 0.10, seed);
    const double d = runs.final_top1(TrainMode::dcl, 0.1, 0.10, seed);
    info("  fraction 0.10 seed " + std::to_string(seed) + ": baseline " + fmt(b) + ", dcl " +
         fmt(d));
    gap_low.push_back(d - b);
    gap_full.push_back(dcl1[static_cast<size_t>(seed - 1)] - base1[static_cast<size_t>(seed - 1)]);
  }
  const double med_gap_low = median3(gap_low[0], gap_low[1], gap_low[2]);
  const double med_gap_full = median3(gap_full[0], gap_full[1], gap_full[2]);
  report(8, med_gap_low > med_gap_full,
         "the accuracy gap from the auxiliary tasks widens at one-tenth labels (median gap " +
             fmt(med_gap_low) + " vs " + fmt(med_gap_full) + " at full labels)");

  // 9: heavier rotation weighting must not help.
  std::vector<double> lam_low, lam_high;
  for (uint64_t seed : {1, 2, 3}) {
    lam_low.push_back(runs.final_top1(TrainMode::rotation, 0.1, 1.0, seed));
    lam_high.push_back(runs.final_top1(TrainMode::rotation, 0.7, 1.0, seed));
    info("  rotation seed " + std::to_string(seed) + ": lambda 0.1 " + fmt(lam_low.back()) +
         ", lambda 0.7 " + fmt(lam_high.back()));
  }
  const double med_low = median3(lam_low[0], lam_low[1], lam_low[2]);
  const double med_high = median3(lam_high[0], lam_high[1], lam_high[2]);
  report(9, med_high <= med_low,
         "raising the rotation weight from 0.1 to 0.7 does not raise median top-1 (" +
             fmt(med_high) + " vs " + fmt(med_low) + ")");
}

void check_localization(PresetRuns& runs) {
  Model<float>& model = runs.get(TrainMode::dcl, 0.1, 1.0, 1).model;
  const double rate = localization_rate(model, runs.test);
  double area_sum = 0.0;
  for (const Sample& s : runs.test.samples) {
    area_sum += static_cast<double>(s.glyph_box->area()) /
                static_cast<double>(s.image.h * s.image.w);
  }
  const double chance = 100.0 * area_sum / static_cast<double>(runs.test.samples.size());
  report(10, rate >= 3.0 * chance,
         "trained attention lands inside the class glyph box far above chance (" + fmt(rate, 1) +
             "% vs " + fmt(chance, 1) + "% chance, needs 3x)");
}

void check_determinism() {
  const fs::path cli = FGSSL_CLI_PATH;
  const fs::path root = fs::temp_directory_path() / "fgssl_acceptance";
  std::error_code ec;
  fs::remove_all(root, ec);
  fs::create_directories(root);
  const fs::path data = root / "data";
  const fs::path cfg_path = root / "run.ini";
  {
    std::ofstream cfg(cfg_path);
    cfg << "mode = dcl\nepochs = 3\nseed = 4\n";
  }
  auto run = [&](const std::string& args) {
    const std::string cmd = "\"" + cli.string() + "\" " + args + " > /dev/null 2>&1";
    return std::system(cmd.c_str()) == 0;
  };
  bool ok = run("gen-data --out \"" + data.string() +
                "\" --classes 5 --per-class-train 20 --per-class-test 5 --size 32 --seed 3");
  ok = ok && run("train --config \"" + cfg_path.string() + "\" --data \"" + data.string() +
                 "\" --out \"" + (root / "a").string() + "\"");
  ok = ok && run("train --config \"" + cfg_path.string() + "\" --data \"" + data.string() +
                 "\" --out \"" + (root / "b").string() + "\"");
  const std::string ma = read_bytes(root / "a" / "metrics.csv");
  const std::string mb = read_bytes(root / "b" / "metrics.csv");
  const bool same = ok && !ma.empty() && ma == mb;
  report(11, same, std::string("two identical training invocations write byte-identical ") +
                       "metrics.csv (" + std::to_string(ma.size()) + " bytes)");
  fs::remove_all(root, ec);
}

}  // namespace

int main() {
  std::printf("acceptance checks\n");
  check_gradient_oracle();
  const auto loss_rs = verify_loss_suite();
  check_loss_identities(loss_rs);
  check_permutations();
  check_reduction_boundaries();
  check_memory_bank(loss_rs);
  PresetRuns runs;
  check_directional(runs);
  check_localization(runs);
  check_determinism();
  std::printf("%d/11 checks passed\n", 11 - failures);
  return failures == 0 ? 0 : 1;
}
