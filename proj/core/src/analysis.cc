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

#include "ertrl/analysis.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <boost/math/distributions/students_t.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "ertrl/errors.h"
#include "ertrl/evaluation.h"

namespace ertrl {
namespace {

constexpr std::uint64_t kProbeStream = 0x70726f6265ULL;
constexpr std::uint64_t kShuffleStream = 0x73687566ULL;
constexpr std::uint64_t kExportStream = 0x6578706fULL;

double TwoSidedP(double t, double dof) {
  if (std::isinf(t)) return 0.0;
  boost::math::students_t dist(dof);
  return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

double Mean(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double SampleVariance(std::span<const double> v, double mean) {
  double s = 0.0;
  for (double x : v) s += (x - mean) * (x - mean);
  return s / static_cast<double>(v.size() - 1);
}

void CheckCovariance(const nn::Matrix& cov, Eigen::Index dim, const char* name) {
  if (cov.rows() != dim || cov.cols() != dim) {
    throw std::invalid_argument(std::string("WassersteinGaussian: ") + name +
                                " has the wrong shape");
  }
  const double scale = std::max(1.0, cov.cwiseAbs().maxCoeff());
  if (!cov.allFinite() || (cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale) {
    throw std::invalid_argument(std::string("WassersteinGaussian: ") + name +
                                " is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<nn::Matrix> eig(cov, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -1e-9 * scale) {
    throw std::invalid_argument(std::string("WassersteinGaussian: ") + name +
                                " is not positive semidefinite");
  }
}

}  // namespace

double MedianPairwiseDistance(const nn::Matrix& x) {
  const Eigen::Index n = std::min<Eigen::Index>(x.rows(), 1000);
  std::vector<double> d;
  d.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) d.push_back((x.row(i) - x.row(j)).norm());
  }
  if (d.empty()) return 1.0;
  auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
  std::nth_element(d.begin(), mid, d.end());
  return *mid > 0.0 ? *mid : 1.0;
}

void RbfSvr::Fit(const nn::Matrix& x, const nn::Vector& y, const SvrOptions& options) {
  const Eigen::Index n = x.rows();
  if (n == 0 || y.size() != n) throw std::invalid_argument("RbfSvr::Fit: bad shapes");
  width_ = options.kernel_width > 0.0 ? options.kernel_width : MedianPairwiseDistance(x);
  support_ = x;
  const double gamma = 1.0 / (2.0 * width_ * width_);
  const nn::Vector sq = x.rowwise().squaredNorm();
  nn::Matrix q = x * x.transpose();
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      q(i, j) = std::exp(-gamma * std::max(0.0, sq(i) + sq(j) - 2.0 * q(i, j))) + 1.0;
    }
  }
  beta_ = nn::Vector::Zero(n);
  nn::Vector q_beta = nn::Vector::Zero(n);
  for (int epoch = 0; epoch < options.max_epochs; ++epoch) {
    double max_change = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double qii = q(i, i);
      const double a = q_beta(i) - qii * beta_(i) - y(i);
      double b = 0.0;
      if (a > options.epsilon) b = -(a - options.epsilon) / qii;
      else if (a < -options.epsilon) b = -(a + options.epsilon) / qii;
      b = std::clamp(b, -options.c, options.c);
      const double delta = b - beta_(i);
      if (delta != 0.0) {
        q_beta += delta * q.col(i);
        beta_(i) = b;
        max_change = std::max(max_change, std::abs(delta));
      }
    }
    if (max_change < options.tolerance) break;
  }
}

nn::Vector RbfSvr::Predict(const nn::Matrix& x) const {
  const double gamma = 1.0 / (2.0 * width_ * width_);
  const nn::Vector sq_s = support_.rowwise().squaredNorm();
  const nn::Vector sq_x = x.rowwise().squaredNorm();
  const nn::Matrix cross = x * support_.transpose();
  nn::Vector out(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    double f = 0.0;
    for (Eigen::Index j = 0; j < support_.rows(); ++j) {
      if (beta_(j) == 0.0) continue;
      const double d2 = std::max(0.0, sq_x(i) + sq_s(j) - 2.0 * cross(i, j));
      f += beta_(j) * (std::exp(-gamma * d2) + 1.0);
    }
    out(i) = f;
  }
  return out;
}

nn::Matrix FitLinear(const nn::Matrix& x, const nn::Matrix& y) {
  nn::Matrix design(x.rows(), x.cols() + 1);
  design.col(0).setOnes();
  design.rightCols(x.cols()) = x;
  return Eigen::CompleteOrthogonalDecomposition<nn::Matrix>(design).solve(y);
}

nn::Matrix PredictLinear(const nn::Matrix& coefficients, const nn::Matrix& x) {
  return (x * coefficients.bottomRows(x.cols())).rowwise() + coefficients.row(0);
}

double Rmse(const nn::Matrix& predicted, const nn::Matrix& truth) {
  if (predicted.rows() != truth.rows() || predicted.cols() != truth.cols() ||
      truth.size() == 0) {
    throw std::invalid_argument("Rmse: shape mismatch");
  }
  return std::sqrt((predicted - truth).squaredNorm() / static_cast<double>(truth.size()));
}

ProbeResult RegressionProbe(const RowEmbedder& embed,
                            const std::vector<const TaskDataset*>& tasks,
                            int samples_per_task, std::uint64_t seed, int svr_max_train) {
  if (samples_per_task < 10) {
    throw std::invalid_argument("RegressionProbe: samples_per_task must be >= 10");
  }
  if (tasks.empty()) throw std::invalid_argument("RegressionProbe: no tasks");
  std::vector<nn::Matrix> zs;
  std::vector<std::vector<double>> labels;
  for (const TaskDataset* ds : tasks) {
    Rng rng = MakeRng(seed, {kProbeStream, static_cast<std::uint64_t>(ds->task.task_id)});
    zs.push_back(embed(SampleTrainingBatch(*ds, samples_per_task, rng)));
    labels.push_back(GoalLabel(ds->task));
  }
  const Eigen::Index total = static_cast<Eigen::Index>(tasks.size()) * samples_per_task;
  const Eigen::Index zdim = zs.front().cols();
  const Eigen::Index ldim = static_cast<Eigen::Index>(labels.front().size());
  nn::Matrix z(total, zdim), y(total, ldim);
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    const Eigen::Index offset = static_cast<Eigen::Index>(t) * samples_per_task;
    z.middleRows(offset, samples_per_task) = zs[t];
    for (Eigen::Index k = 0; k < ldim; ++k) {
      y.block(offset, k, samples_per_task, 1).setConstant(labels[t][static_cast<std::size_t>(k)]);
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(total));
  for (Eigen::Index i = 0; i < total; ++i) order[static_cast<std::size_t>(i)] = i;
  Rng shuffle = MakeRng(seed, {kShuffleStream});
  for (Eigen::Index i = total - 1; i > 0; --i) {
    std::uniform_int_distribution<Eigen::Index> pick(0, i);
    std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(pick(shuffle))]);
  }
  const Eigen::Index n_train = (total * 4) / 5;
  const Eigen::Index n_test = total - n_train;
  nn::Matrix z_train(n_train, zdim), y_train(n_train, ldim);
  nn::Matrix z_test(n_test, zdim), y_test(n_test, ldim);
  for (Eigen::Index i = 0; i < total; ++i) {
    const Eigen::Index src = order[static_cast<std::size_t>(i)];
    if (i < n_train) {
      z_train.row(i) = z.row(src);
      y_train.row(i) = y.row(src);
    } else {
      z_test.row(i - n_train) = z.row(src);
      y_test.row(i - n_train) = y.row(src);
    }
  }

  ProbeResult result;
  result.degenerate_labels = (y_train.rowwise() - y_train.row(0)).cwiseAbs().maxCoeff() == 0.0;
  if (result.degenerate_labels) {
    spdlog::warn("regression probe: all labels are equal; RMSE is uninformative");
  }
  const std::string split(SplitName(tasks.front()->task.split));

  const nn::Matrix coef = FitLinear(z_train, y_train);
  result.entries.push_back({"linear", split, Rmse(PredictLinear(coef, z_test), y_test),
                            static_cast<int>(n_train), static_cast<int>(n_test)});

  const Eigen::Index n_svr = std::min<Eigen::Index>(n_train, std::max(1, svr_max_train));
  nn::Matrix svr_pred(n_test, ldim);
  for (Eigen::Index k = 0; k < ldim; ++k) {
    RbfSvr svr;
    svr.Fit(z_train.topRows(n_svr), y_train.col(k).head(n_svr));
    svr_pred.col(k) = svr.Predict(z_test);
  }
  result.entries.push_back({"rbf-svr", split, Rmse(svr_pred, y_test),
                            static_cast<int>(n_svr), static_cast<int>(n_test)});
  return result;
}

ProbeResult RegressionProbe(const ContextEncoder& encoder,
                            const std::vector<const TaskDataset*>& tasks,
                            int samples_per_task, std::uint64_t seed, int svr_max_train) {
  return RegressionProbe(
      [&encoder](const TransitionTable& rows) { return encoder.EncodeRows(rows); }, tasks,
      samples_per_task, seed, svr_max_train);
}

nn::Matrix PsdSqrt(const nn::Matrix& a) {
  Eigen::SelfAdjointEigenSolver<nn::Matrix> eig(a);
  const nn::Vector root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().transpose();
}

double WassersteinGaussian(const nn::Vector& mean1, const nn::Matrix& cov1,
                           const nn::Vector& mean2, const nn::Matrix& cov2) {
  const Eigen::Index k = mean1.size();
  if (mean2.size() != k) throw std::invalid_argument("WassersteinGaussian: mean sizes differ");
  CheckCovariance(cov1, k, "cov1");
  CheckCovariance(cov2, k, "cov2");
  const double mean_term = (mean1 - mean2).squaredNorm();
  if (cov1 == cov2) return std::sqrt(mean_term);
  const nn::Matrix root1 = PsdSqrt(cov1);
  const nn::Matrix cross = root1 * cov2 * root1;
  const double trace_term =
      cov1.trace() + cov2.trace() - 2.0 * PsdSqrt(0.5 * (cross + cross.transpose())).trace();
  return std::sqrt(mean_term + std::max(0.0, trace_term));
}

double MeanPolicyDistance(const std::vector<std::vector<GaussianPolicyHead>>& heads,
                          int action_dim, nn::Matrix* pairwise) {
  const std::size_t n = heads.size();
  if (n == 0) throw std::invalid_argument("MeanPolicyDistance: no tasks");
  if (action_dim < 1) throw std::invalid_argument("MeanPolicyDistance: action_dim < 1");
  const std::size_t states = heads.front().size();
  for (const auto& h : heads) {
    if (h.size() != states || states == 0) {
      throw std::invalid_argument("MeanPolicyDistance: tasks need the same probe states");
    }
  }
  nn::Matrix w = nn::Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double s = 0.0;
      for (std::size_t p = 0; p < states; ++p) {
        s += WassersteinGaussian(heads[i][p].mean, heads[i][p].covariance, heads[j][p].mean,
                                 heads[j][p].covariance);
      }
      w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = s / states;
      w(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = s / states;
    }
  }
  if (pairwise != nullptr) *pairwise = w;
  return w.sum() / (static_cast<double>(action_dim) * static_cast<double>(n * n));
}

CorrelationResult Pearson(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw std::invalid_argument("Pearson: length mismatch");
  if (xs.size() < 3) throw std::invalid_argument("Pearson: need at least 3 points");
  const double mx = Mean(xs), my = Mean(ys);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw ComputationError("Pearson: zero variance input");
  CorrelationResult r;
  r.rho = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  const double dof = static_cast<double>(xs.size() - 2);
  if (std::abs(r.rho) == 1.0) {
    r.p = 0.0;
  } else {
    r.p = TwoSidedP(r.rho * std::sqrt(dof / (1.0 - r.rho * r.rho)), dof);
  }
  return r;
}

TTestResult WelchTTest(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) {
    throw std::invalid_argument("WelchTTest: each sample needs at least 2 values");
  }
  const double ma = Mean(a), mb = Mean(b);
  const double va = SampleVariance(a, ma) / static_cast<double>(a.size());
  const double vb = SampleVariance(b, mb) / static_cast<double>(b.size());
  TTestResult r;
  const double se2 = va + vb;
  if (se2 == 0.0) {
    if (ma == mb) return r;
    throw ComputationError("WelchTTest: both samples are constant with different means");
  }
  r.t = (ma - mb) / std::sqrt(se2);
  r.dof = se2 * se2 / (va * va / static_cast<double>(a.size() - 1) +
                       vb * vb / static_cast<double>(b.size() - 1));
  r.p = TwoSidedP(r.t, r.dof);
  return r;
}

PolicyDistanceReport ExpertDistanceReport(const std::vector<const TaskDataset*>& tasks,
                                          int probe_states, std::uint64_t seed) {
  if (tasks.empty()) throw std::invalid_argument("ExpertDistanceReport: no tasks");
  if (probe_states < 1) throw std::invalid_argument("ExpertDistanceReport: probe_states < 1");
  Rng rng = MakeRng(seed, {kProbeStream});
  std::uniform_int_distribution<std::size_t> pick_task(0, tasks.size() - 1);
  std::vector<State> states;
  for (int s = 0; s < probe_states; ++s) {
    const TaskDataset& ds = *tasks[pick_task(rng)];
    std::uniform_int_distribution<Eigen::Index> pick_row(0, ds.size() - 1);
    const Transition t = RowToTransition(ds.transitions, pick_row(rng));
    states.push_back(t.state);
  }
  std::vector<std::vector<GaussianPolicyHead>> heads;
  for (const TaskDataset* ds : tasks) {
    auto& h = heads.emplace_back();
    for (const State& s : states) h.push_back(ExpertPolicy(s, ds->task, kAnchorExpertNoise));
  }
  PolicyDistanceReport report;
  report.mean_distance = MeanPolicyDistance(heads, kActionDim, &report.pairwise);
  return report;
}

std::string ProbeResultToJson(const ProbeResult& result) {
  nlohmann::json j;
  j["degenerate_labels"] = result.degenerate_labels;
  j["entries"] = nlohmann::json::array();
  for (const auto& e : result.entries) {
    j["entries"].push_back({{"model", e.model},
                            {"split", e.split},
                            {"rmse", e.rmse},
                            {"n_train", e.n_train},
                            {"n_test", e.n_test}});
  }
  return j.dump(2);
}

std::string PolicyDistanceReportToJson(const PolicyDistanceReport& report) {
  nlohmann::json j;
  j["mean_distance"] = report.mean_distance;
  j["pairwise"] = nlohmann::json::array();
  for (Eigen::Index i = 0; i < report.pairwise.rows(); ++i) {
    std::vector<double> row(report.pairwise.row(i).begin(), report.pairwise.row(i).end());
    j["pairwise"].push_back(row);
  }
  if (report.has_correlation) {
    j["pearson_rho"] = report.pearson_rho;
    j["pearson_p"] = report.pearson_p;
  } else {
    j["pearson_rho"] = nullptr;
    j["pearson_p"] = nullptr;
  }
  return j.dump(2);
}

void ExportLatents(const ContextEncoder& encoder,
                   const std::vector<const TaskDataset*>& tasks, int samples_per_task,
                   std::uint64_t seed, std::ostream& out) {
  if (tasks.empty()) throw std::invalid_argument("ExportLatents: no tasks");
  if (samples_per_task < 1) throw std::invalid_argument("ExportLatents: samples_per_task < 1");
  const std::size_t label_dim = GoalLabel(tasks.front()->task).size();
  out << "task_id";
  for (std::size_t k = 1; k <= label_dim; ++k) out << ",goal_" << k;
  for (int k = 1; k <= encoder.latent_dim(); ++k) out << ",z_" << k;
  out << '\n';
  for (const TaskDataset* ds : tasks) {
    Rng rng = MakeRng(seed, {kExportStream, static_cast<std::uint64_t>(ds->task.task_id)});
    const nn::Matrix z = encoder.EncodeRows(SampleTrainingBatch(*ds, samples_per_task, rng));
    const std::vector<double> label = GoalLabel(ds->task);
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
      out << ds->task.task_id;
      for (double g : label) out << ',' << FormatDouble(g);
      for (Eigen::Index k = 0; k < z.cols(); ++k) out << ',' << FormatDouble(z(i, k));
      out << '\n';
    }
  }
}

void ExportLatents(const ContextEncoder& encoder,
                   const std::vector<const TaskDataset*>& tasks, int samples_per_task,
                   std::uint64_t seed, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  ExportLatents(encoder, tasks, samples_per_task, seed, out);
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace ertrl
