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

#ifndef ERTRL_ANALYSIS_H_
#define ERTRL_ANALYSIS_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "ertrl/datasets.h"
#include "ertrl/nn.h"
#include "ertrl/representation.h"

namespace ertrl {

inline constexpr int kDefaultProbeSamples = 1000;
inline constexpr int kDefaultLatentExportSamples = 256;
inline constexpr int kDefaultProbeStates = 128;
inline constexpr int kDefaultSvrMaxTrain = 4000;

struct SvrOptions {
  double c = 1.0;
  double epsilon = 0.1;
  // <= 0 selects the median pairwise distance of the training inputs.
  double kernel_width = 0.0;
  int max_epochs = 500;
  double tolerance = 1e-6;
};

// Epsilon-insensitive support vector regression with an RBF kernel
// exp(-|x - y|^2 / (2 w^2)), solved in the dual by coordinate descent. The
// bias is absorbed as a constant kernel offset.
class RbfSvr {
 public:
  void Fit(const nn::Matrix& x, const nn::Vector& y, const SvrOptions& options = {});
  nn::Vector Predict(const nn::Matrix& x) const;
  double kernel_width() const { return width_; }

 private:
  nn::Matrix support_;
  nn::Vector beta_;
  double width_ = 1.0;
};

// Median Euclidean distance over (at most 1000) training rows; 1 when all
// distances vanish.
double MedianPairwiseDistance(const nn::Matrix& x);

// Least squares with an intercept column, minimum-norm when rank deficient.
// Returns (d + 1) x m coefficients, intercept first.
nn::Matrix FitLinear(const nn::Matrix& x, const nn::Matrix& y);
nn::Matrix PredictLinear(const nn::Matrix& coefficients, const nn::Matrix& x);

// Root mean squared error over every entry.
double Rmse(const nn::Matrix& predicted, const nn::Matrix& truth);

struct ProbeEntry {
  std::string model;  // "linear" or "rbf-svr"
  std::string split;
  double rmse = 0.0;
  int n_train = 0;
  int n_test = 0;
};

struct ProbeResult {
  std::vector<ProbeEntry> entries;
  bool degenerate_labels = false;
};

// Maps a batch of transitions to per-row embeddings.
using RowEmbedder = std::function<nn::Matrix(const TransitionTable&)>;

// Embeds samples_per_task single transitions per task, labels them with the
// task's goal label, shuffles with `seed`, fits on 80% and reports test
// RMSE for the linear and RBF-SVR regressors.
ProbeResult RegressionProbe(const RowEmbedder& embed,
                            const std::vector<const TaskDataset*>& tasks,
                            int samples_per_task, std::uint64_t seed,
                            int svr_max_train = kDefaultSvrMaxTrain);
ProbeResult RegressionProbe(const ContextEncoder& encoder,
                            const std::vector<const TaskDataset*>& tasks,
                            int samples_per_task, std::uint64_t seed,
                            int svr_max_train = kDefaultSvrMaxTrain);

// Principal square root of a PSD matrix; negative eigenvalues clip to 0.
nn::Matrix PsdSqrt(const nn::Matrix& a);

// 2-Wasserstein distance between two Gaussians. Throws std::invalid_argument
// on non-symmetric or non-PSD covariances.
double WassersteinGaussian(const nn::Vector& mean1, const nn::Matrix& cov1,
                           const nn::Vector& mean2, const nn::Matrix& cov2);

// heads[i][s] is task i's Gaussian head at probe state s. Returns
// sum_i sum_j mean_s W2(heads[i][s], heads[j][s]) / (k n^2).
double MeanPolicyDistance(const std::vector<std::vector<GaussianPolicyHead>>& heads,
                          int action_dim, nn::Matrix* pairwise = nullptr);

struct CorrelationResult {
  double rho = 0.0;
  double p = 1.0;
};

// Sample Pearson correlation with a two-sided Student-t p-value.
CorrelationResult Pearson(std::span<const double> xs, std::span<const double> ys);

struct TTestResult {
  double t = 0.0;
  double p = 1.0;
  double dof = 0.0;
};

// Two-sided Welch t-test.
TTestResult WelchTTest(std::span<const double> a, std::span<const double> b);

struct PolicyDistanceReport {
  nn::Matrix pairwise;
  double mean_distance = 0.0;
  bool has_correlation = false;
  double pearson_rho = 0.0;
  double pearson_p = 1.0;
};

// Expert heads of every task evaluated on `probe_states` states drawn from
// the pooled datasets.
PolicyDistanceReport ExpertDistanceReport(const std::vector<const TaskDataset*>& tasks,
                                          int probe_states, std::uint64_t seed);

std::string ProbeResultToJson(const ProbeResult& result);
std::string PolicyDistanceReportToJson(const PolicyDistanceReport& report);

// Columns task_id, goal_1..goal_m, z_1..z_d; one row per embedded transition.
void ExportLatents(const ContextEncoder& encoder,
                   const std::vector<const TaskDataset*>& tasks, int samples_per_task,
                   std::uint64_t seed, std::ostream& out);
void ExportLatents(const ContextEncoder& encoder,
                   const std::vector<const TaskDataset*>& tasks, int samples_per_task,
                   std::uint64_t seed, const std::filesystem::path& path);

}  // namespace ertrl

#endif  // ERTRL_ANALYSIS_H_
