// Copyright 2026 The AugCondD Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// Prints one PASS/FAIL line per acceptance criterion; exits nonzero if any
// hard criterion fails. Criterion 8 only warns.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "augcondd/augment.h"
#include "augcondd/config.h"
#include "augcondd/data.h"
#include "augcondd/evaluation.h"
#include "augcondd/losses.h"
#include "augcondd/models.h"
#include "augcondd/training.h"
#include "../test_util.h"

namespace {

using namespace augcondd;
namespace fs = std::filesystem;
using testing::read_file;

enum class Verdict { kPass, kFail, kWarn };

struct Outcome {
  Verdict verdict;
  std::string detail;
};

Outcome pass_if(bool ok, std::string detail) {
  return {ok ? Verdict::kPass : Verdict::kFail, std::move(detail)};
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), f, a, b, c);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct ConstantDisc {
  double c;
  models::DiscOutput operator()(nn::Tape& tape, const nn::Var& x,
                                const std::optional<nn::Var>&) const {
    models::DiscOutput out;
    for (int s = 0; s < 3; ++s) {
      nn::Var score = tape.constant(Tensor({x.shape()[0], 1, 5}, c));
      out.scales.push_back({score, {score}});
    }
    return out;
  }
};

Outcome loss_closed_forms() {
  const dsp::Waveform r = testing::noise(256, 1), f = testing::noise(256, 2);
  double worst = 0.0;
  for (double c : {-1.0, 0.0, 0.5, 1.0}) {
    const ConstantDisc d{c};
    worst = std::max(worst, std::abs(losses::adv_loss_d(d, r, f, std::nullopt) -
                                     ((c - 1) * (c - 1) + c * c)));
    worst = std::max(worst, std::abs(losses::adv_loss_g(d, f, std::nullopt) - (c - 1) * (c - 1)));
  }
  return pass_if(worst <= 1e-12, fmt("max abs error %.3g", worst));
}

struct GradStats {
  std::size_t total = 0;
  std::size_t within_tight = 0;
  double worst = 0.0;
};

// Central differences of one scalar loss over every entry of one parameter set.
void check_set(GradStats& stats, models::ParamSet& params, const std::vector<Tensor>& analytic,
               const std::function<double()>& loss) {
  constexpr double h = 1e-6;
  constexpr double floor = 1e-6;
  for (std::size_t i = 0; i < params.entries.size(); ++i) {
    Tensor& p = params.entries[i].value;
    for (std::size_t j = 0; j < p.size(); ++j) {
      const double keep = p[j];
      p[j] = keep + h;
      const double up = loss();
      p[j] = keep - h;
      const double down = loss();
      p[j] = keep;
      const double numeric = (up - down) / (2 * h);
      const double a = analytic[i][j];
      const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), floor});
      ++stats.total;
      if (rel <= 1e-3) ++stats.within_tight;
      stats.worst = std::max(stats.worst, rel);
    }
  }
}

Outcome gradient_check() {
  struct Case {
    bool conditional;
    augment::AugmentationKind kind;
    augment::Strategy strategy;
    const char* name;
  };
  const Case cases[] = {
      {false, augment::AugmentationKind::kNone, augment::Strategy::kS2, "baseline"},
      {true, augment::AugmentationKind::kMixup, augment::Strategy::kS2, "augcondd-S2"},
      {true, augment::AugmentationKind::kMixup, augment::Strategy::kS1, "augcondd-S1"},
      {true, augment::AugmentationKind::kRate, augment::Strategy::kS1, "augcondd-rate-S1"},
  };
  bool ok = true;
  std::string detail;
  for (const Case& c : cases) {
    const training::ModelSpec spec = testing::tiny_spec(c.conditional);
    training::Trainer trainer(spec, {}, {}, c.conditional ? training::TrainMode::kAugCondD
                                                          : training::TrainMode::kBaseline);
    const std::vector<dsp::Waveform> segs = testing::tiny_segments(2, 256, 17);
    Rng rng(5);
    const augment::TrainingBatch batch =
        augment::apply_strategy(segs, c.strategy, c.kind, rng, trainer.extractor());
    training::TrainState st = training::init_state(spec, 3);
    const std::size_t n_params = st.generator.num_scalars() + st.discriminator.num_scalars();
    const training::LossEvaluation e = trainer.evaluate(st.generator, st.discriminator, batch, true);
    GradStats stats;
    check_set(stats, st.generator, e.grad_generator, [&] {
      return trainer.evaluate(st.generator, st.discriminator, batch, false).losses.total_g;
    });
    check_set(stats, st.discriminator, e.grad_discriminator, [&] {
      return trainer.evaluate(st.generator, st.discriminator, batch, false).losses.total_d;
    });
    const double frac = static_cast<double>(stats.within_tight) / stats.total;
    ok = ok && n_params <= 20000 && frac >= 0.95 && stats.worst <= 1e-2;
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%s %zu params, %.1f%% <= 1e-3, worst %.2g; ", c.name,
                  n_params, 100.0 * frac, stats.worst);
    detail += buf;
  }
  detail.resize(detail.size() - 2);
  return pass_if(ok, detail);
}

Outcome mu_zero_reduction() {
  training::ModelSpec plain;
  plain.mel = dsp::MelConfig::desk();
  plain.generator = models::GeneratorConfig::desk();
  plain.discriminator = models::DiscriminatorConfig::desk();
  training::ModelSpec cond = plain;
  cond.discriminator.augmentation_conditional = true;
  cond.discriminator.mu_dim = 1;

  training::Trainer base(plain, {}, {}, training::TrainMode::kBaseline);
  training::Trainer acd(cond, {}, {}, training::TrainMode::kAugCondD);
  const data::Corpus corpus = data::make_synthetic_corpus(4, 8, 22050, 0.5);
  Rng rng(9);
  std::vector<dsp::Waveform> segs;
  for (const data::Clip& c : corpus.clips) segs.push_back(data::sample_segment(c.wave, 2048, 64, rng));
  augment::TrainingBatch batch = augment::apply_strategy(
      segs, augment::Strategy::kS2, augment::AugmentationKind::kNone, rng, base.extractor());
  batch.mu.assign(batch.size(), augment::AugmentationState{{0.0}});

  const training::TrainState st = training::init_state(plain, 21);
  const models::ParamSet wide = models::widen_input_channels(plain.discriminator, st.discriminator, 1);
  const losses::LossBreakdown a = base.evaluate(st.generator, st.discriminator, batch, false).losses;
  const losses::LossBreakdown b = acd.evaluate(st.generator, wide, batch, false).losses;
  const double worst = std::max({std::abs(a.adv_d - b.adv_d), std::abs(a.adv_g - b.adv_g),
                                 std::abs(a.fm - b.fm), std::abs(a.mel - b.mel)});
  return pass_if(worst <= 1e-6, fmt("max abs difference %.3g over adv_d, adv_g, fm, mel", worst));
}

Outcome state_formulas() {
  double worst_mix = 0.0;
  for (int i = 0; i <= 100; ++i) {
    const double m = i / 100.0;
    worst_mix = std::max(worst_mix, std::abs(augment::mixup_state(m) - (1 - std::max(m, 1 - m)) * 2));
  }
  const bool endpoints = augment::mixup_state(0.0) == 0.0 && augment::mixup_state(1.0) == 0.0 &&
                         augment::mixup_state(0.5) == 1.0;
  double worst_rate = 0.0;
  for (int i = 0; i <= 80; ++i) {
    const double s = -1.0 + i / 40.0;
    const double mu = augment::rate_state(s);
    worst_rate = std::max({worst_rate, std::abs(mu - std::exp2(s)), std::abs(std::log2(mu) - s)});
  }
  return pass_if(worst_mix <= 1e-12 && endpoints && worst_rate <= 1e-12,
                 fmt("mixup max err %.3g, rate max err %.3g, endpoints ", worst_mix, worst_rate) +
                     (endpoints ? "exact" : "wrong"));
}

Outcome strategy_separation() {
  std::string detail;
  bool ok = true;
  for (augment::Strategy strategy : {augment::Strategy::kS1, augment::Strategy::kS2}) {
    training::RunOptions o;
    o.spec = testing::tiny_spec(true);
    o.optimizer.batch_size = 2;
    o.optimizer.max_iterations = 100;
    o.optimizer.learning_rate = 1e-3;
    o.mode = training::TrainMode::kAugCondD;
    o.augmentation = augment::AugmentationKind::kMixup;
    o.strategy = strategy;
    o.seed = 4;
    o.segment_length = 256;
    o.validate_every = 100;
    o.log_wall_time = false;
    dsp::MelExtractor ex(o.spec.mel);
    std::size_t steps = 0, exact = 0, augmented_differs = 0;
    o.probe = [&](const training::StepView& v) {
      ++steps;
      std::vector<dsp::MelSpectrogram> expect;
      if (strategy == augment::Strategy::kS1) {
        for (const dsp::Waveform& w : v.clean_segments) expect.push_back(ex.log_mel(w));
      } else {
        for (const dsp::Waveform& w : v.batch->real_waves) expect.push_back(ex.log_mel(w));
      }
      if (models::stack_mels(expect) == *v.generator_input) ++exact;
      std::vector<dsp::MelSpectrogram> clean;
      for (const dsp::Waveform& w : v.clean_segments) clean.push_back(ex.log_mel(w));
      if (!(models::stack_mels(clean) == *v.generator_input)) ++augmented_differs;
    };
    const data::Corpus train = testing::tiny_corpus(6, 2, 8000, 0.5);
    const data::Corpus val = testing::tiny_corpus(1, 3, 8000, 0.25);
    training::run_training(o, train, val);
    const bool s1 = strategy == augment::Strategy::kS1;
    // Under S2 the generator input must also differ from the clean mels on
    // (nearly) every step; under S1 never.
    const bool case_ok = steps == 100 && exact == 100 &&
                         (s1 ? augmented_differs == 0 : augmented_differs >= 95);
    ok = ok && case_ok;
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%s: %zu/%zu steps exact, %zu differ from clean; ",
                  s1 ? "S1" : "S2", exact, steps, augmented_differs);
    detail += buf;
  }
  detail.resize(detail.size() - 2);
  return pass_if(ok, detail);
}

Outcome shape_law() {
  const models::GeneratorConfig g = models::GeneratorConfig::desk();
  const models::ParamSet p = models::init_params(g, 1);
  const dsp::MelConfig mc = dsp::MelConfig::desk();
  std::size_t bad = 0;
  for (int frames = 1; frames <= 256; ++frames) {
    dsp::MelSpectrogram m;
    m.frames = frames;
    m.n_mels = g.n_mels;
    m.config = mc;
    m.values.assign(static_cast<std::size_t>(frames) * g.n_mels, -2.0);
    if (models::generate(g, p, m).size() != static_cast<std::size_t>(frames) * 64) ++bad;
  }
  std::size_t bad_cond = 0;
  const dsp::Waveform w = testing::noise(100, 3);
  for (std::size_t d : {1u, 2u}) {
    augment::AugmentationState mu;
    for (std::size_t k = 0; k < d; ++k) mu.mu.push_back(0.25 + 0.5 * k);
    const Tensor t = models::condition_input(w, mu);
    if (t.shape() != Shape{1 + d, w.size()}) {
      ++bad_cond;
      continue;
    }
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (t[i] != w.samples[i]) ++bad_cond;
      for (std::size_t k = 0; k < d; ++k) {
        if (t[(1 + k) * w.size() + i] != mu.mu[k]) ++bad_cond;
      }
    }
  }
  return pass_if(bad == 0 && bad_cond == 0,
                 fmt("%.0f of 256 frame counts wrong, %.0f bad conditioning entries", bad, bad_cond));
}

struct ToyData {
  data::Corpus train;
  data::Corpus val;
};

const ToyData& toy() {
  static const ToyData d = [] {
    ToyData t;
    t.train = data::make_synthetic_corpus(64, 1, 22050, 3.0);
    data::SyntheticOptions vo;
    vo.first_index = 64;
    vo.id_prefix = "val";
    t.val = data::make_synthetic_corpus(8, 1, 22050, 3.0, vo);
    t.val.split = data::Split::kVal;
    return t;
  }();
  return d;
}

training::RunOptions toy_options(const std::string& out_dir) {
  config::RunConfig cfg = config::profile("desk");
  cfg.mode = training::TrainMode::kAugCondD;
  cfg.augmentation = augment::AugmentationKind::kMixup;
  cfg.strategy = augment::Strategy::kS2;
  cfg.optimizer.max_iterations = 2000;
  cfg.optimizer.batch_size = 8;
  cfg.log_wall_time = false;
  cfg.out_dir = out_dir;
  return cfg.run_options();
}

double last_val(const training::TrainResult& r) {
  for (auto it = r.log.rbegin(); it != r.log.rend(); ++it) {
    if (it->kind == training::LogRecord::Kind::kVal) return it->val_mel_l1;
  }
  return NAN;
}

Outcome toy_convergence(const fs::path& root, double& runtime) {
  const auto t0 = std::chrono::steady_clock::now();
  const training::TrainResult r =
      training::run_training(toy_options((root / "toy_a").string()), toy().train, toy().val);
  runtime = seconds_since(t0);
  const double v0 = r.log.front().val_mel_l1;
  const double v1 = last_val(r);
  return pass_if(r.state.step == 2000 && v1 <= 0.5 * v0 && runtime <= 1800.0,
                 fmt("val mel-L1 %.4f at step 0, %.4f at step 2000", v0, v1) +
                     fmt(" (ratio %.3f), %.0f s", v1 / v0, runtime));
}

Outcome determinism(const fs::path& root) {
  training::run_training(toy_options((root / "toy_b").string()), toy().train, toy().val);
  const fs::path a = root / "toy_a", b = root / "toy_b";
  const std::string log_a = read_file((a / "metrics.jsonl").string());
  const bool logs = !log_a.empty() && log_a == read_file((b / "metrics.jsonl").string());
  const std::string ck = "checkpoints/step_00002000.ckpt";
  const std::string ck_a = read_file((a / ck).string());
  const bool ckpts = !ck_a.empty() && ck_a == read_file((b / ck).string()) &&
                     read_file((a / "best.ckpt").string()) == read_file((b / "best.ckpt").string());
  return pass_if(logs && ckpts, std::string("metrics.jsonl ") + (logs ? "identical" : "differ") +
                                    ", final checkpoints " + (ckpts ? "identical" : "differ"));
}

Outcome comparative() {
  struct Arm {
    const char* name;
    training::TrainMode mode;
    augment::AugmentationKind kind;
    double mean = 0.0;
  };
  Arm arms[] = {{"baseline", training::TrainMode::kBaseline, augment::AugmentationKind::kNone},
                {"baseline+mixup", training::TrainMode::kBaseline, augment::AugmentationKind::kMixup},
                {"augcondd+mixup", training::TrainMode::kAugCondD, augment::AugmentationKind::kMixup}};
  const data::Corpus small = data::subset(toy().train, {4.0 / 64.0, 0});
  std::string detail = "train clips " + std::to_string(small.size()) + "; ";
  for (Arm& arm : arms) {
    double sum = 0.0;
    for (std::uint64_t seed : {0u, 1u, 2u}) {
      training::RunOptions o = toy_options("");
      o.mode = arm.mode;
      o.augmentation = arm.kind;
      o.spec.discriminator.augmentation_conditional = arm.mode == training::TrainMode::kAugCondD;
      o.seed = seed;
      o.validate_every = 2000;
      sum += last_val(training::run_training(o, small, toy().val));
    }
    arm.mean = sum / 3.0;
    detail += std::string(arm.name) + fmt(" %.4f; ", arm.mean);
  }
  const double ratio = arms[2].mean / arms[1].mean;
  detail += fmt("augcondd/baseline+mixup %.3f (gate 1.05)", ratio);
  return {ratio <= 1.05 ? Verdict::kPass : Verdict::kWarn, detail};
}

// Principal square root by the Denman-Beavers iteration.
Eigen::MatrixXd db_sqrt(const Eigen::MatrixXd& a) {
  Eigen::MatrixXd y = a, z = Eigen::MatrixXd::Identity(a.rows(), a.cols());
  for (int i = 0; i < 100; ++i) {
    const Eigen::MatrixXd yi = y.inverse(), zi = z.inverse();
    const Eigen::MatrixXd ny = 0.5 * (y + zi), nz = 0.5 * (z + yi);
    const double change = (ny - y).norm() / y.norm();
    y = ny;
    z = nz;
    if (change < 1e-15) break;
  }
  return y;
}

void moments(const std::vector<dsp::Waveform>& set, const dsp::MelConfig& cfg,
             Eigen::VectorXd& mean, Eigen::MatrixXd& cov) {
  std::vector<std::vector<double>> rows;
  for (const dsp::Waveform& w : set) {
    const dsp::MelSpectrogram m = dsp::log_mel(w, cfg);
    for (int t = 0; t < m.frames; ++t) {
      rows.emplace_back(m.values.begin() + t * m.n_mels, m.values.begin() + (t + 1) * m.n_mels);
    }
  }
  Eigen::MatrixXd x(rows.size(), rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) x(i, j) = rows[i][j];
  }
  mean = x.colwise().mean();
  const Eigen::MatrixXd c = x.rowwise() - mean.transpose();
  cov = c.transpose() * c / static_cast<double>(x.rows() - 1);
}

Outcome metric_oracles() {
  const dsp::MelConfig cfg = dsp::MelConfig::desk();
  std::vector<dsp::Waveform> a, b;
  for (int i = 0; i < 4; ++i) {
    dsp::Waveform s = testing::sine(150.0 + 40.0 * i, 8192, 22050, 0.4);
    const dsp::Waveform n = testing::noise(8192, 100 + i, 22050, 0.05);
    for (std::size_t k = 0; k < s.size(); ++k) s.samples[k] += n.samples[k];
    a.push_back(s);
    b.push_back(testing::noise(8192, 200 + i, 22050, 0.2 + 0.05 * i));
  }
  Eigen::VectorXd ma, mb;
  Eigen::MatrixXd ca, cb;
  moments(a, cfg, ma, ca);
  moments(b, cfg, mb, cb);
  const double oracle = (ma - mb).squaredNorm() + ca.trace() + cb.trace() -
                        2.0 * db_sqrt(ca * cb).trace();
  const evaluation::FrechetResult got = evaluation::mel_frechet(a, b, cfg);
  const evaluation::FrechetResult self = evaluation::mel_frechet(a, a, cfg);
  double err = std::abs(got.distance - oracle);

  double fixture_err = 0.0;
  const auto& fx = testing::fixtures();
  if (!fx.is_null()) {
    auto as_mel = [](const nlohmann::json& rows) {
      dsp::MelSpectrogram m;
      m.frames = static_cast<int>(rows.size());
      m.n_mels = static_cast<int>(rows[0].size());
      for (const auto& r : rows) {
        for (const auto& v : r) m.values.push_back(v.get<double>());
      }
      return m;
    };
    const dsp::MelSpectrogram fa = as_mel(fx["frechet"]["a"]), fb = as_mel(fx["frechet"]["b"]);
    fixture_err = std::abs(evaluation::gaussian_frechet(evaluation::fit_gaussian(std::span(&fa, 1)),
                                                        evaluation::fit_gaussian(std::span(&fb, 1)))
                               .distance -
                           fx["frechet"]["distance"].get<double>());
  }

  const dsp::Waveform sine = testing::sine(180.0, 22050);
  const dsp::Waveform noise = testing::noise(22050, 7);
  const double rmse = evaluation::periodicity_error(noise, sine).rmse;
  const bool ok = err <= 1e-6 && fixture_err <= 1e-6 && std::abs(self.distance) <= 1e-6 &&
                  rmse > 0.4;
  return pass_if(ok, fmt("frechet %.6f vs oracle %.6f (err %.2g)", got.distance, oracle, err) +
                         fmt(", numpy fixture err %.2g", fixture_err) +
                         (fx.is_null() ? " (fixture missing)" : "") +
                         fmt(", sine/noise periodicity rmse %.3f", rmse));
}

}  // namespace

int main() {
  const fs::path root = fs::temp_directory_path() / ("augcondd_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(root);
  bool failed = false;
  auto report = [&](int id, const char* title, const std::function<Outcome()>& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {Verdict::kFail, std::string("exception: ") + e.what()};
    }
    const char* tag = o.verdict == Verdict::kPass ? "PASS" : o.verdict == Verdict::kWarn ? "WARN" : "FAIL";
    if (o.verdict == Verdict::kFail) failed = true;
    std::printf("criterion %2d %s  %s: %s [%.1f s]\n", id, tag, title, o.detail.c_str(),
                seconds_since(t0));
    std::fflush(stdout);
  };
  double toy_runtime = 0.0;
  report(1, "loss closed forms", loss_closed_forms);
  report(2, "gradient check", gradient_check);
  report(3, "mu-zero reduction", mu_zero_reduction);
  report(4, "augmentation-state formulas", state_formulas);
  report(5, "strategy separation", strategy_separation);
  report(6, "shape law", shape_law);
  report(7, "toy convergence", [&] { return toy_convergence(root, toy_runtime); });
  report(8, "comparative regression (soft)", comparative);
  report(9, "determinism", [&] { return determinism(root); });
  report(10, "metric oracles", metric_oracles);
  std::error_code ec;
  fs::remove_all(root, ec);
  std::printf("%s\n", failed ? "acceptance: FAILED" : "acceptance: all hard criteria passed");
  return failed ? 1 : 0;
}
