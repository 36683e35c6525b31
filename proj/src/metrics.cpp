#include "bkb/metrics.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "bkb/gp_exact.hpp"

namespace bkb {

double effective_dimension(const Eigen::MatrixXd& K, double lambda) {
  if (K.rows() != K.cols()) throw std::invalid_argument("effective_dimension: matrix must be square");
  if (!(lambda > 0.0)) throw std::invalid_argument("effective_dimension: lambda must be positive");
  if (K.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(K, Eigen::EigenvaluesOnly);
  double acc = 0.0;
  for (double ev : eig.eigenvalues()) {
    ev = std::max(ev, 0.0);
    acc += ev / (ev + lambda);
  }
  return acc;
}

double ChainReport::min_slack() const {
  return std::min({slack_deff_sumvar, slack_sumvar_logdet, slack_logdet_upper});
}

ChainReport logdet_deff_chain(const Eigen::MatrixXd& K, double lambda, std::span<const double> per_step_variances,
                              double tol) {
  if (K.rows() != K.cols()) throw std::invalid_argument("logdet_deff_chain: matrix must be square");
  if (static_cast<std::size_t>(K.rows()) != per_step_variances.size())
    throw std::invalid_argument("logdet_deff_chain: variance count differs from Gram size");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(K, Eigen::EigenvaluesOnly);
  ChainReport r;
  double top = 0.0;
  for (double ev : eig.eigenvalues()) {
    ev = std::max(ev, 0.0);
    r.deff += ev / (ev + lambda);
    r.logdet += std::log1p(ev / lambda);
    top = std::max(top, ev);
  }
  for (double v : per_step_variances) r.sum_var += v;
  r.upper = r.deff * (1.0 + std::log(top / lambda + 1.0));
  r.slack_deff_sumvar = r.sum_var - r.deff;
  r.slack_sumvar_logdet = r.logdet - r.sum_var;
  r.slack_logdet_upper = r.upper - r.logdet;
  r.deff_le_sumvar = r.slack_deff_sumvar >= -tol;
  r.sumvar_le_logdet = r.slack_sumvar_logdet >= -tol;
  r.logdet_le_upper = r.slack_logdet_upper >= -tol;
  return r;
}

SandwichReport linear_oracle_sandwich(const KernelSpec& spec, const Eigen::MatrixXd& history, const Dictionary& dict,
                                      double lambda, double eps) {
  if (spec.family != KernelFamily::Linear)
    throw std::invalid_argument("linear_oracle_sandwich: only the linear kernel has explicit features");
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("linear_oracle_sandwich: eps must lie in (0,1)");
  const Eigen::Index t = history.rows();
  const Eigen::Index d = history.cols();
  if (dict.probs.size() != static_cast<std::size_t>(t))
    throw std::invalid_argument("linear_oracle_sandwich: probabilities must cover every history row");

  const Eigen::MatrixXd XtX = history.transpose() * history;
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(d, d);
  const Eigen::MatrixXd A = XtX + lambda * I;

  // Projection onto the span of the dictionary rows.
  Eigen::MatrixXd D(static_cast<Eigen::Index>(dict.size()), d);
  for (std::size_t j = 0; j < dict.size(); ++j) {
    if (dict.indices[j] >= static_cast<std::size_t>(t))
      throw std::invalid_argument("linear_oracle_sandwich: dictionary index out of range");
    D.row(static_cast<Eigen::Index>(j)) = history.row(static_cast<Eigen::Index>(dict.indices[j]));
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> span_eig(D.transpose() * D);
  const double cutoff = 1e-12 * std::max(span_eig.eigenvalues().maxCoeff(), 0.0);
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    if (span_eig.eigenvalues()(i) > cutoff && span_eig.eigenvalues()(i) > 0.0) {
      const Eigen::VectorXd u = span_eig.eigenvectors().col(i);
      P += u * u.transpose();
    }
  }
  const Eigen::MatrixXd A_tilde = P * XtX * P + lambda * I;

  SandwichReport r;
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> gen(A_tilde, A, Eigen::EigenvaluesOnly);
  r.min_ratio = gen.eigenvalues().minCoeff();
  r.max_ratio = gen.eigenvalues().maxCoeff();
  const double alpha = (1.0 + eps) / (1.0 - eps);
  const double tol = 1e-10;
  r.within = r.min_ratio >= 1.0 / alpha - tol && r.max_ratio <= alpha + tol;

  // Weighted sketch X^T S S^T X with weights 1/p on the selected rows.
  Eigen::MatrixXd weighted = Eigen::MatrixXd::Zero(d, d);
  for (std::size_t idx : dict.indices) {
    const Eigen::VectorXd x = history.row(static_cast<Eigen::Index>(idx)).transpose();
    weighted += (x * x.transpose()) / dict.probs[idx];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> a_eig(A);
  const Eigen::MatrixXd A_inv_sqrt = a_eig.operatorInverseSqrt();
  const Eigen::MatrixXd E = A_inv_sqrt * (weighted - XtX) * A_inv_sqrt;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> e_eig(0.5 * (E + E.transpose()), Eigen::EigenvaluesOnly);
  r.accuracy_norm = e_eig.eigenvalues().cwiseAbs().maxCoeff();
  r.eps_accurate = r.accuracy_norm <= eps;
  return r;
}

std::vector<double> cumulative_regret(const Trace& trace, const Environment& env) {
  if (trace.history.size() != trace.steps.size())
    throw std::invalid_argument("cumulative_regret: trace history and steps differ in length");
  std::vector<double> out;
  out.reserve(trace.history.size());
  double acc = 0.0;
  for (std::size_t arm : trace.history) {
    acc += env.gap(arm);
    out.push_back(acc);
  }
  return out;
}

MonotonicityReport check_monotonicity(const Trace& exact_trace, double kappa_sq, double lambda, double tol) {
  MonotonicityReport r;
  const double shrink = 1.0 / (kappa_sq / lambda + 1.0);
  for (const TraceStep& s : exact_trace.steps) {
    ++r.steps;
    const double before = s.selected_variance;
    const double after = s.post_variance;
    const double up = after - before;                 // must be <= 0
    const double down = before * shrink - after;      // must be <= 0
    const double excess = std::max(up, down);
    if (excess > tol) ++r.violations;
    r.worst_excess = std::max(r.worst_excess, excess);
  }
  return r;
}

AccuracyReport verify_accuracy_run(const Environment& env, const KernelSpec& kernel, const BkbParams& params,
                                   std::size_t T, std::uint64_t seed) {
  AccuracyReport rep;
  rep.alpha = params.sampling.alpha();
  const ArmSet& arms = env.arms();
  const Eigen::MatrixXd K = gram(kernel, arms.matrix());
  const Eigen::VectorXd prior = K.diagonal();
  ExactPosterior shadow(kernel, params.lambda);
  std::size_t synced = 0;

  auto sync = [&](std::span<const std::size_t> history, std::span<const double> rewards) {
    while (synced < history.size()) {
      shadow.update(arms.arm(static_cast<Eigen::Index>(history[synced])), rewards[synced]);
      ++synced;
    }
  };

  const double lo = 1.0 / rep.alpha;
  const double hi = rep.alpha;
  auto observer = [&](const StepView& v) {
    sync(v.history, v.rewards);
    Eigen::MatrixXd cross = K(v.history, Eigen::all);
    const Prediction exact = shadow.predict(cross, prior);
    double mn = std::numeric_limits<double>::infinity();
    double mx = 0.0;
    std::size_t bad = 0;
    for (Eigen::Index a = 0; a < prior.size(); ++a) {
      const double ratio = v.variance(a) / exact.variance(a);
      mn = std::min(mn, ratio);
      mx = std::max(mx, ratio);
      if (!(ratio >= lo && ratio <= hi)) ++bad;
    }
    rep.min_ratio.push_back(mn);
    rep.max_ratio.push_back(mx);
    rep.violations.push_back(bad);
    rep.total_violations += bad;
  };

  const Trace trace = run_bkb(env, kernel, params, T, seed, observer);
  const double kappa2 = prior.maxCoeff();
  const double factor = 3.0 * (1.0 + kappa2 / params.lambda) * rep.alpha * params.sampling.qbar;
  for (std::size_t t = 1; t <= trace.steps.size(); ++t) {
    const std::vector<std::size_t> prefix(trace.history.begin(), trace.history.begin() + static_cast<long>(t));
    const Eigen::MatrixXd Kt = K(prefix, prefix);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(Kt, Eigen::EigenvaluesOnly);
    double deff = 0.0, logdet = 0.0;
    for (double ev : eig.eigenvalues()) {
      ev = std::max(ev, 0.0);
      deff += ev / (ev + params.lambda);
      logdet += std::log1p(ev / params.lambda);
    }
    const std::size_t m = trace.steps[t - 1].m;
    const double bound = factor * deff;
    rep.m.push_back(m);
    rep.deff.push_back(deff);
    rep.logdet.push_back(logdet);
    rep.size_bound.push_back(bound);
    if (static_cast<double>(m) > bound) ++rep.size_violations;
  }
  return rep;
}

double fit_loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fit_loglog_slope: need >= 2 paired points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) continue;
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  if (n < 2) throw std::invalid_argument("fit_loglog_slope: fewer than 2 positive points");
  const double dn = static_cast<double>(n);
  const double denom = dn * sxx - sx * sx;
  if (denom == 0.0) throw std::invalid_argument("fit_loglog_slope: degenerate abscissae");
  return (dn * sxy - sx * sy) / denom;
}

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median: empty input");
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<long>(mid), values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<long>(mid));
  return 0.5 * (lower + upper);
}

}  // namespace bkb
