#include <cmath>
#include <limits>

#include "mbfuse/error.hpp"
#include "mbfuse/regressors.hpp"

namespace mbfuse {

namespace {

// Gamma hyperprior shape/rate on both precisions. Keeps the updates finite
// for noiseless targets (zero residual) and constant targets (zero weights).
constexpr double kHyper = 1e-6;

struct Eigensystem {
  Vector values;        // eigenvalues of X'X, clamped at zero
  Eigen::MatrixXd vecs;
  Vector projected;     // V' X'y
};

Vector solve(const Eigensystem& es, double ratio, bool& singular) {
  const double scale = std::max(1.0, es.values.size() ? es.values.maxCoeff() : 1.0);
  Vector scaled(es.values.size());
  for (Eigen::Index i = 0; i < es.values.size(); ++i) {
    const double denom = es.values[i] + ratio;
    if (!(denom > scale * 1e-14)) {
      scaled[i] = 0.0;
      singular = true;
    } else {
      scaled[i] = es.projected[i] / denom;
    }
  }
  return es.vecs * scaled;
}

}  // namespace

double BayesianRidgeModel::predict(std::span<const double> x) const {
  double out = intercept;
  for (Eigen::Index i = 0; i < coef.size(); ++i) out += coef[i] * x[static_cast<std::size_t>(i)];
  return out;
}

BayesianRidgeModel fit_bayesian_ridge(const FeatureMatrix& x, const Vector& y, const BayesianRidgeOptions& options) {
  const Eigen::Index n = x.rows();
  if (n < 2) throw Error(ErrorKind::TooFewRows, "bayesian ridge needs >= 2 rows, got " + std::to_string(n));
  if (y.size() != n) throw Error(ErrorKind::ShapeMismatch, "target length differs from row count");

  const Eigen::RowVectorXd x_mean = x.colwise().mean();
  const double y_mean = y.mean();
  const Eigen::MatrixXd xc = x.rowwise() - x_mean;
  const Vector yc = y.array() - y_mean;

  Eigensystem es;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(xc.transpose() * xc);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::RegressorFitFailure, "eigendecomposition of X'X failed");
  }
  es.values = solver.eigenvalues().cwiseMax(0.0);
  es.vecs = solver.eigenvectors();
  es.projected = es.vecs.transpose() * (xc.transpose() * yc);

  BayesianRidgeModel model;
  const double var = yc.squaredNorm() / static_cast<double>(n);
  model.lambda = options.fixed_lambda.value_or(1.0);
  model.beta = options.fixed_beta.value_or(1.0 / (var + std::numeric_limits<double>::epsilon()));
  const bool frozen = options.fixed_lambda && options.fixed_beta;

  Vector coef = solve(es, model.lambda / model.beta, model.singular);
  if (frozen) {
    model.converged = true;
  } else {
    for (int it = 0; it < options.max_updates; ++it) {
      double gamma = 0.0;
      for (Eigen::Index i = 0; i < es.values.size(); ++i) {
        gamma += model.beta * es.values[i] / (model.beta * es.values[i] + model.lambda);
      }
      const double rss = (yc - xc * coef).squaredNorm();
      if (!options.fixed_lambda) model.lambda = (gamma + 2.0 * kHyper) / (coef.squaredNorm() + 2.0 * kHyper);
      if (!options.fixed_beta) {
        model.beta = (static_cast<double>(n) - gamma + 2.0 * kHyper) / (rss + 2.0 * kHyper);
      }
      ++model.updates;
      Vector next = solve(es, model.lambda / model.beta, model.singular);
      const double change = coef.size() ? (next - coef).cwiseAbs().maxCoeff() : 0.0;
      coef = std::move(next);
      if (change < options.tolerance) {
        model.converged = true;
        break;
      }
    }
  }
  if (!coef.allFinite()) throw Error(ErrorKind::RegressorFitFailure, "non-finite ridge coefficients");
  model.coef = coef;
  model.intercept = y_mean - x_mean.dot(coef);
  return model;
}

}  // namespace mbfuse
