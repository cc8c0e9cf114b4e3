// Copyright 2026 The ertrl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Acceptance gate. Runs each criterion at its pinned tolerance and prints
// one PASS/FAIL line per criterion. An optional argument restricts the run
// to a comma-separated list of criterion numbers.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/LU>

#include "ertrl/agent.h"
#include "ertrl/analysis.h"
#include "ertrl/checkpoint.h"
#include "ertrl/datasets.h"
#include "ertrl/envtasks.h"
#include "ertrl/evaluation.h"
#include "ertrl/mi_gan.h"
#include "ertrl/representation.h"
#include "ertrl/trainer.h"
#include "test_util.h"

namespace ertrl {
namespace {

using testing::NumericGradient;
using testing::ReadFile;
using testing::RelativeError;
using testing::TempDir;

// Pinned tolerances.
constexpr double kAnalyticTol = 1e-9;
constexpr double kJitteredMiTol = 1e-5;
constexpr double kDiscreteWorldTol = 1e-12;
constexpr double kGradientTol = 1e-4;
constexpr double kOracleRelTol = 1e-6;
constexpr double kGanMeanTol = 0.1;
constexpr double kGanMiRelTol = 0.25;
constexpr int kGanSteps = 2000;
constexpr int kOracleInstances = 50;
constexpr int kPermutationTrials = 100;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void Check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "] ";
    }
  }
};

std::string Fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

// 1. Closed-form values.
void AnalyticValues(Outcome& out) {
  const nn::Vector half = nn::Vector::Constant(16, 0.5);
  const double ld = DiscriminatorLossFromProbabilities(half, half);
  out.Check(std::abs(ld - 2.0 * std::log(2.0)) <= kAnalyticTol, "discriminator loss");

  CovarianceEstimate cov;
  cov.sigma = nn::Matrix::Identity(2, 2);
  cov.sample_count = 100;
  const double h = EntropyEstimate(cov);
  out.Check(std::abs(h - std::log(2.0 * std::numbers::pi * std::numbers::e)) <= kAnalyticTol,
            "entropy of identity");

  // Rows +-2 on one axis and +-1 on the other give covariance diag(4, 1).
  nn::Matrix a(4, 2);
  a << 2, 0, -2, 0, 0, 1, 0, -1;
  a.col(0) *= std::sqrt(2.0);
  a.col(1) *= std::sqrt(2.0);
  const double mi = MiLoss(a);
  out.Check(std::abs(mi + 0.5 * std::log(4.0)) <= kJitteredMiTol, "mi loss diag(4,1)");

  nn::Vector m(1);
  m << 0.0;
  nn::Matrix c1(1, 1), c3(1, 1);
  c1 << 1.0;
  c3 << 9.0;
  const double w = WassersteinGaussian(m, c1, m, c3);
  out.Check(std::abs(w - 2.0) <= kAnalyticTol, "1-D Wasserstein");

  const double lo = NormalizedReturn(-12.5, -12.5, 40.25);
  const double hi = NormalizedReturn(40.25, -12.5, 40.25);
  out.Check(lo == 0.0 && hi == 100.0, "normalized return anchors");
  out.detail << "L_D=" << Fmt(ld) << " H=" << Fmt(h) << " L_MI=" << Fmt(mi)
             << " W2=" << Fmt(w) << " anchors=" << lo << "/" << hi;
}

// 2. Meta-behavior entropy identity on a discrete toy world.
void DiscreteWorld(Outcome& out) {
  DiscreteTaskWorld w;
  w.task_prob = {0.5, 0.3, 0.2};
  w.state_prob = {0.25, 0.35, 0.4};
  w.behavior = {{{0.4, 0.3, 0.2, 0.1}, {0.1, 0.1, 0.1, 0.7}, {0.25, 0.25, 0.25, 0.25}},
                {{0.05, 0.05, 0.45, 0.45}, {0.6, 0.2, 0.1, 0.1}, {0.3, 0.0, 0.7, 0.0}},
                {{0.1, 0.6, 0.2, 0.1}, {0.0, 0.0, 0.5, 0.5}, {0.9, 0.05, 0.025, 0.025}}};
  w.encoder = {0, 1, 2};
  // Exhaustive H(a | s, task): a deterministic injective encoder makes z the task.
  double conditional = 0.0;
  for (std::size_t t = 0; t < 3; ++t) {
    for (std::size_t s = 0; s < 3; ++s) {
      for (double p : w.behavior[t][s]) {
        if (p > 0.0) conditional -= w.task_prob[t] * w.state_prob[s] * p * std::log(p);
      }
    }
  }
  const double estimate = ExpectedMetaBehaviorEntropy(w);
  const double gap = std::abs(conditional - estimate);
  out.Check(gap <= kDiscreteWorldTol, "entropy identity");
  out.detail << "exhaustive=" << Fmt(conditional) << " estimate=" << Fmt(estimate)
             << " gap=" << gap;
}

// 3. Finite-difference gradients on 4-row batches.
void GradientSuite(Outcome& out) {
  Rng rng = MakeRng(303);
  double worst = 0.0;
  auto record = [&](double err, const char* what) {
    worst = std::max(worst, err);
    out.Check(err <= kGradientTol, what);
    out.detail << what << "=" << Fmt(err) << " ";
  };

  {
    const nn::Matrix z = 0.3 * StandardNormal(4, 3, rng);
    const std::vector<int> ids = {0, 1, 0, 2};
    EncoderLossConfig cfg;
    cfg.epsilon0 = 0.1;
    nn::Matrix g;
    DmlLoss(z, ids, cfg, &g);
    auto f = [&](const nn::Vector& v) {
      return DmlLoss(testing::UnflattenMatrix(v, 4, 3), ids, cfg);
    };
    record(RelativeError(testing::FlattenMatrix(g), NumericGradient(f, testing::FlattenMatrix(z))),
           "dml");
  }
  {
    const nn::Matrix a = 0.4 * StandardNormal(4, 2, rng);
    nn::Matrix g;
    MiLoss(a, &g);
    auto f = [](const nn::Vector& v) { return MiLoss(testing::UnflattenMatrix(v, 4, 2)); };
    record(RelativeError(testing::FlattenMatrix(g), NumericGradient(f, testing::FlattenMatrix(a))),
           "mi");
  }

  const int latent = 3;
  Actor actor(kStateDim, latent, kActionDim, {16, 16}, rng);
  Critic critic(kStateDim, latent, kActionDim, {16, 16}, rng);
  Critic target(kStateDim, latent, kActionDim, {16, 16}, rng);
  BehaviorModel behavior(kStateDim, latent, kActionDim, {16, 16}, rng);
  AgentBatch b;
  b.states = StandardNormal(4, kStateDim, rng);
  b.actions = (0.7 * StandardNormal(4, kActionDim, rng)).array().tanh().matrix();
  b.rewards = StandardNormal(4, 1, rng);
  b.next_states = StandardNormal(4, kStateDim, rng);
  b.dones = nn::Matrix::Zero(4, 1);
  b.z = StandardNormal(4, latent, rng).array().tanh().matrix();
  const nn::Matrix noise = StandardNormal(4, kActionDim, rng);
  AgentConfig cfg;
  {
    nn::Gradients g = critic.network().ZeroGradients();
    CriticLoss(critic, target, actor, b, cfg, noise, &g);
    auto f = [&](const nn::Vector& v) {
      Critic c = critic;
      c.network().Unflatten(v);
      return CriticLoss(c, target, actor, b, cfg, noise, nullptr);
    };
    record(RelativeError(g.Flatten(), NumericGradient(f, critic.network().Flatten())), "critic");
  }
  {
    nn::Gradients g = actor.network().ZeroGradients();
    ActorLoss(actor, critic, behavior, b.states, b.z, cfg, noise, &g);
    auto f = [&](const nn::Vector& v) {
      Actor a = actor;
      a.network().Unflatten(v);
      return ActorLoss(a, critic, behavior, b.states, b.z, cfg, noise, nullptr);
    };
    record(RelativeError(g.Flatten(), NumericGradient(f, actor.network().Flatten())), "actor");
  }
  out.detail << "worst=" << Fmt(worst);
}

// 2x2 PSD square root in closed form; independent of the library's
// eigendecomposition.
nn::Matrix Sqrt2x2(const nn::Matrix& a) {
  const double s = std::sqrt(std::max(0.0, a.determinant()));
  return (a + s * nn::Matrix::Identity(2, 2)) / std::sqrt(a.trace() + 2.0 * s);
}

double W2Brute(const GaussianPolicyHead& p, const GaussianPolicyHead& q) {
  const nn::Matrix r = Sqrt2x2(p.covariance);
  const double tr = std::max(0.0, p.covariance.trace() + q.covariance.trace() -
                                      2.0 * Sqrt2x2(r * q.covariance * r).trace());
  return std::sqrt((p.mean - q.mean).squaredNorm() + tr);
}

double RelGap(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

// 4. Brute-force double-loop oracles.
void OracleEquivalence(Outcome& out) {
  Rng rng = MakeRng(404);
  double worst_dml = 0.0, worst_cov = 0.0, worst_d = 0.0;
  for (int inst = 0; inst < kOracleInstances; ++inst) {
    const int n = 2 + inst % 9, k = 1 + inst % 5;
    const nn::Matrix z = StandardNormal(n, k, rng).array().tanh().matrix();
    std::vector<int> ids(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) ids[static_cast<std::size_t>(i)] = (i * 7 + inst) % 3;
    EncoderLossConfig cfg;
    cfg.beta = 0.5 + inst % 3;
    cfg.epsilon0 = 1e-3;
    double total = 0.0;
    int pairs = 0;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        double d2 = 0.0;
        for (int c = 0; c < k; ++c) d2 += (z(i, c) - z(j, c)) * (z(i, c) - z(j, c));
        total += ids[static_cast<std::size_t>(i)] == ids[static_cast<std::size_t>(j)]
                     ? d2
                     : cfg.beta / (d2 + cfg.epsilon0);
        ++pairs;
      }
    }
    worst_dml = std::max(worst_dml, RelGap(DmlLoss(z, ids, cfg), total / pairs));

    const int rows = 2 + inst * 3;
    const nn::Matrix a = StandardNormal(rows, k, rng);
    nn::Matrix sigma = nn::Matrix::Zero(k, k);
    for (int r = 0; r < k; ++r) {
      for (int c = 0; c < k; ++c) {
        double mr = 0.0, mc = 0.0;
        for (int i = 0; i < rows; ++i) {
          mr += a(i, r) / rows;
          mc += a(i, c) / rows;
        }
        for (int i = 0; i < rows; ++i) sigma(r, c) += (a(i, r) - mr) * (a(i, c) - mc) / rows;
      }
    }
    const nn::Matrix got = SampleCovariance(a).sigma;
    for (int r = 0; r < k; ++r) {
      for (int c = 0; c < k; ++c) worst_cov = std::max(worst_cov, RelGap(got(r, c), sigma(r, c)));
    }

    const int tasks = 1 + inst % 4, states = 1 + inst % 3;
    std::vector<std::vector<GaussianPolicyHead>> heads(static_cast<std::size_t>(tasks));
    for (auto& h : heads) {
      for (int s = 0; s < states; ++s) {
        const nn::Matrix m = StandardNormal(2, 2, rng);
        h.push_back({StandardNormal(2, 1, rng).col(0),
                     m * m.transpose() + 0.01 * nn::Matrix::Identity(2, 2)});
      }
    }
    double sum = 0.0;
    for (const auto& hi : heads) {
      for (const auto& hj : heads) {
        for (int s = 0; s < states; ++s) {
          sum += W2Brute(hi[static_cast<std::size_t>(s)], hj[static_cast<std::size_t>(s)]) /
                 states;
        }
      }
    }
    worst_d = std::max(worst_d,
                       RelGap(MeanPolicyDistance(heads, 2), sum / (2.0 * tasks * tasks)));
  }
  out.Check(worst_dml <= kOracleRelTol, "dml_loss");
  out.Check(worst_cov <= kOracleRelTol, "sample_covariance");
  out.Check(worst_d <= kOracleRelTol, "mean_policy_distance");
  out.detail << kOracleInstances << " instances each; worst rel gap dml=" << worst_dml
             << " cov=" << worst_cov << " d=" << worst_d;
}

// 5. Conditional GAN fit to a fixed Gaussian policy.
void GanFit(Outcome& out) {
  Rng rng = MakeRng(505);
  const int latent = 20, batch = 128;
  ConditionalGan gan(kStateDim, latent, kActionDim, GanOptions{}, rng);
  const nn::Matrix z = nn::Matrix::Zero(batch, latent);
  for (int step = 0; step < kGanSteps; ++step) {
    const nn::Matrix s = StandardNormal(batch, kStateDim, rng);
    const nn::Matrix real = (0.05 * StandardNormal(batch, kActionDim, rng)).array() + 0.3;
    gan.Update(s, z, real, rng);
  }
  const int n = 4000;
  const nn::Matrix fake =
      gan.generator().Generate(StandardNormal(n, kStateDim, rng), nn::Matrix::Zero(n, latent),
                               StandardNormal(n, gan.generator().noise_dim(), rng));
  const nn::RowVector mean = fake.colwise().mean();
  const double mi = MiLoss(fake);
  const double target = -0.5 * std::log((0.0025 * nn::Matrix::Identity(2, 2)).determinant());
  for (int c = 0; c < kActionDim; ++c) {
    out.Check(std::abs(mean(c) - 0.3) <= kGanMeanTol, "generated mean");
  }
  out.Check(std::abs(mi - target) <= kGanMiRelTol * std::abs(target), "mi_loss");
  const nn::RowVector std_dev =
      ((fake.rowwise() - mean).array().square().colwise().mean()).sqrt();
  out.detail << "mean=(" << Fmt(mean(0)) << "," << Fmt(mean(1)) << ") std=(" << Fmt(std_dev(0))
             << "," << Fmt(std_dev(1)) << ") L_MI=" << Fmt(mi) << " target=" << Fmt(target);
}

// Desk-scale configuration: the criterion's task counts, dataset size, step
// count and seeds, with narrower networks and smaller batches so that one
// seed (two training runs) fits the CPU budget on a single core.
TrainConfig DeskConfig(std::uint64_t seed, bool mi_enabled) {
  TrainConfig c;
  c.family = Family::kPointDir;
  c.tasks_train = 8;
  c.tasks_id = 4;
  c.tasks_ood = 4;
  c.meta_batch = 8;
  c.batch_size = 64;
  c.context_size = 64;
  c.encoder_hidden = {64, 64};
  c.generator_hidden = {64, 64};
  c.discriminator_hidden = {64, 64};
  c.actor_hidden = c.critic_hidden = c.behavior_hidden = {64, 64};
  c.total_steps = 5000;
  c.eval_every = 0;
  c.checkpoint_every = 0;
  c.mi_enabled = mi_enabled;
  c.seed = seed;
  return c;
}

// 6. Desk-scale end-to-end ordering checks.
void DeskEndToEnd(Outcome& out) {
  constexpr int kSeeds = 3;
  constexpr int kTransitions = 20000;
  std::vector<double> ertrl_norm, ablation_norm, trained_rmse, random_rmse;
  bool probe_ok = true;
  for (std::uint64_t seed = 0; seed < kSeeds; ++seed) {
    const auto tasks = SampleTaskSuite(Family::kPointDir, 8, 4, 4, 1000 + seed);
    DatasetCollection data;
    data.manifest.family = Family::kPointDir;
    data.manifest.seed = 1000 + seed;
    data.manifest.noise_mix = DefaultNoiseMix();
    for (const TaskSpec& t : tasks) {
      data.tasks.push_back(GenerateTaskDataset(t, kTransitions, DefaultNoiseMix(), 1000 + seed));
    }
    const auto ood = data.Split(Split::kOodTest);
    std::vector<const TaskDataset*> probe_tasks = data.Split(Split::kIdTest);
    probe_tasks.insert(probe_tasks.end(), ood.begin(), ood.end());

    double norm[2] = {0.0, 0.0};
    for (int variant = 0; variant < 2; ++variant) {
      const bool mi = variant == 0;
      const auto t0 = std::chrono::steady_clock::now();
      const TrainResult r = Train(DeskConfig(seed, mi), data, {});
      ContextStrategy online;
      online.kind = ContextKind::kOnline;
      online.context_size = r.state.config.context_size;
      const EvalResult e = EvaluateSuite(r.state.agent, r.state.encoder, ood, online,
                                         Split::kOodTest, kDefaultEvalEpisodes, {1, 2, 3});
      norm[variant] = e.mean_normalized;
      const double secs =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      std::printf("  seed %llu %-9s online OOD normalized %.2f (%.0fs)\n",
                  static_cast<unsigned long long>(seed), mi ? "er-trl" : "no-mi",
                  e.mean_normalized, secs);
      if (mi) {
        Rng rng = MakeRng(2000 + seed);
        const ContextEncoder untrained(r.state.encoder.latent_dim(), r.state.config.encoder_hidden,
                                       rng);
        const ProbeResult pt =
            RegressionProbe(r.state.encoder, probe_tasks, kDefaultProbeSamples, seed);
        const ProbeResult pr = RegressionProbe(untrained, probe_tasks, kDefaultProbeSamples, seed);
        trained_rmse.push_back(pt.entries[0].rmse);
        random_rmse.push_back(pr.entries[0].rmse);
        std::printf("  seed %llu probe linear RMSE trained %.4f random %.4f (svr %.4f / %.4f)\n",
                    static_cast<unsigned long long>(seed), pt.entries[0].rmse,
                    pr.entries[0].rmse, pt.entries[1].rmse, pr.entries[1].rmse);
        probe_ok = probe_ok && pt.entries[0].rmse < pr.entries[0].rmse;
      }
      std::fflush(stdout);
    }
    ertrl_norm.push_back(norm[0]);
    ablation_norm.push_back(norm[1]);
  }
  auto mean = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x / static_cast<double>(v.size());
    return s;
  };
  const TTestResult t = WelchTTest(ertrl_norm, ablation_norm);
  out.Check(mean(ertrl_norm) >= mean(ablation_norm), "(a) er-trl >= no-mi on OOD online");
  out.Check(probe_ok, "(b) trained probe RMSE < random on every seed");
  out.detail << "(a) er-trl " << Fmt(mean(ertrl_norm)) << " vs no-mi " << Fmt(mean(ablation_norm))
             << " (Welch p=" << Fmt(t.p) << "); (b) RMSE trained " << Fmt(mean(trained_rmse))
             << " vs random " << Fmt(mean(random_rmse));
}

TrainOptions ResumeOptions() {
  TrainOptions o;
  o.resume = true;
  return o;
}

bool SameRows(const TransitionTable& a, const TransitionTable& b) {
  return a.rows() == b.rows() &&
         std::memcmp(a.data(), b.data(), static_cast<std::size_t>(a.size()) * sizeof(float)) == 0;
}

// 7. Context-collection protocol invariants.
void ProtocolInvariants(Outcome& out) {
  Rng rng = MakeRng(707);
  const DatasetCollection data = testing::MakeCollection(Family::kPointDir, 2, 1, 1, 2000, 7);
  const int latent = 8;
  const ContextEncoder encoder(latent, {32, 32}, rng);
  AgentOptions opts;
  opts.actor_hidden = opts.critic_hidden = opts.behavior_hidden = {32, 32};
  const Agent agent(kStateDim, latent, kActionDim, opts, AgentConfig{}, rng);

  const TaskDataset& ds = *data.Split(Split::kOodTest).front();
  std::int64_t offline_steps = 0;
  int replay_failures = 0, rows_checked = 0;
  for (ContextKind kind : {ContextKind::kOffline, ContextKind::kOnline, ContextKind::kNonprior}) {
    for (int trial = 0; trial < 5; ++trial) {
      ContextStrategy s;
      s.kind = kind;
      s.context_size = 256;
      PointEnv env(ds.task);
      const ContextBatch c = CollectContext(s, env, ds, agent, encoder, rng);
      out.Check(c.size() == 256, "context size");
      if (kind == ContextKind::kOffline) {
        offline_steps += env.steps_taken();
        continue;
      }
      for (Eigen::Index i = 0; i < c.size(); ++i) {
        const Transition tr = RowToTransition(c.transitions, i);
        EnvState st;
        st.position = {tr.state[0], tr.state[1]};
        st.velocity = {tr.state[2], tr.state[3]};
        const StepResult r = Step(st, tr.action, ds.task);
        ++rows_checked;
        if (r.state.observation() != tr.next_state || r.reward != tr.reward) ++replay_failures;
      }
    }
  }
  out.Check(offline_steps == 0, "offline collection stepped the environment");
  out.Check(replay_failures == 0, "replay");

  int perm_failures = 0;
  for (int trial = 0; trial < kPermutationTrials; ++trial) {
    const int h = 1 + trial % 64;
    const TransitionTable rows = SampleContext(ds, h, rng).transitions;
    std::vector<Eigen::Index> order(static_cast<std::size_t>(h));
    for (int i = 0; i < h; ++i) order[static_cast<std::size_t>(i)] = i;
    std::shuffle(order.begin(), order.end(), rng);
    TransitionTable shuffled(h, kRowFloats);
    for (int i = 0; i < h; ++i) shuffled.row(i) = rows.row(order[static_cast<std::size_t>(i)]);
    if (encoder.EncodeContext(rows) != encoder.EncodeContext(shuffled)) ++perm_failures;
  }
  out.Check(perm_failures == 0, "permutation invariance");
  out.detail << "offline env steps=" << offline_steps << " replayed rows=" << rows_checked
             << " mismatches=" << replay_failures << " permutation failures=" << perm_failures
             << "/" << kPermutationTrials;
}

// 8. Determinism and persistence.
void DeterminismAndPersistence(Outcome& out) {
  const DatasetCollection data = testing::MakeCollection(Family::kPointDir, 3, 1, 1, 1000, 8);
  TrainConfig c;
  c.family = Family::kPointDir;
  c.tasks_train = 3;
  c.tasks_id = 1;
  c.tasks_ood = 1;
  c.meta_batch = 3;
  c.batch_size = 32;
  c.context_size = 32;
  c.encoder_hidden = c.generator_hidden = c.discriminator_hidden = {32, 32};
  c.actor_hidden = c.critic_hidden = c.behavior_hidden = {32, 32};
  c.total_steps = 10;
  c.eval_every = 5;
  c.eval_episodes = 2;
  c.checkpoint_every = 0;
  c.seed = 88;

  TempDir a, b, resumed, ds_a, ds_b;
  Train(c, data, a.path());
  Train(c, data, b.path());
  const bool same_csv =
      ReadFile(a.path() / kTrainMetricsFile) == ReadFile(b.path() / kTrainMetricsFile) &&
      ReadFile(a.path() / kEvalMetricsFile) == ReadFile(b.path() / kEvalMetricsFile);
  out.Check(same_csv, "identical seeds give identical CSVs");

  TrainConfig half = c;
  half.total_steps = 5;
  Train(half, data, resumed.path());
  Train(c, data, resumed.path(), ResumeOptions());
  const bool resume_ok =
      ReadFile(a.path() / kTrainMetricsFile) == ReadFile(resumed.path() / kTrainMetricsFile) &&
      ReadFile(a.path() / kEvalMetricsFile) == ReadFile(resumed.path() / kEvalMetricsFile);
  out.Check(resume_ok, "interrupted 10-step trace matches");

  SaveDataset(data, ds_a.path());
  const DatasetCollection back = LoadDataset(ds_a.path());
  SaveDataset(back, ds_b.path());
  bool files_equal = true, tables_equal = back.tasks.size() == data.tasks.size();
  for (std::size_t i = 0; tables_equal && i < data.tasks.size(); ++i) {
    tables_equal = SameRows(data.tasks[i].transitions, back.tasks[i].transitions);
  }
  for (const auto& entry : std::filesystem::directory_iterator(ds_a.path())) {
    files_equal = files_equal && ReadFile(entry.path()) ==
                                     ReadFile(ds_b.path() / entry.path().filename());
  }
  out.Check(tables_equal && files_equal, "dataset round trip");
  out.detail << "csv identical=" << same_csv << " resume identical=" << resume_ok
             << " dataset bit-exact=" << (tables_equal && files_equal);
}

struct Criterion {
  int id;
  const char* name;
  std::function<void(Outcome&)> run;
};

}  // namespace
}  // namespace ertrl

int main(int argc, char** argv) {
  using namespace ertrl;
  const std::vector<Criterion> criteria = {
      {1, "analytic values", AnalyticValues},
      {2, "discrete-world entropy identity", DiscreteWorld},
      {3, "finite-difference gradients", GradientSuite},
      {4, "brute-force oracle equivalence", OracleEquivalence},
      {5, "conditional GAN fit", GanFit},
      {6, "desk-scale end-to-end ordering", DeskEndToEnd},
      {7, "context protocol invariants", ProtocolInvariants},
      {8, "determinism and persistence", DeterminismAndPersistence},
  };
  std::set<int> selected;
  if (argc > 1) {
    std::stringstream list(argv[1]);
    for (std::string item; std::getline(list, item, ',');) selected.insert(std::stoi(item));
  }
  int failures = 0;
  for (const Criterion& c : criteria) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    Outcome out;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.run(out);
    } catch (const std::exception& e) {
      out.pass = false;
      out.detail << " [exception: " << e.what() << "]";
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %d %s: %s (%.1fs) %s\n", c.id, c.name, out.pass ? "PASS" : "FAIL",
                secs, out.detail.str().c_str());
    std::fflush(stdout);
    if (!out.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
