#include "anonsense/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "anonsense/analytic.hpp"

namespace anonsense {

OutcomeCounts OutcomeCounts::zeros(const ProtocolConfig& config) {
  OutcomeCounts c;
  c.labels = config.outcome_labels();
  c.counts.assign(c.labels.size(), 0);
  return c;
}

std::int64_t OutcomeCounts::total() const {
  std::int64_t acc = 0;
  for (auto v : counts) acc += v;
  return acc;
}

std::int64_t OutcomeCounts::at(const OutcomeLabel& label) const {
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == label) return counts[i];
  return 0;
}

void OutcomeCounts::add(const OutcomeLabel& label, std::int64_t count) {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == label) {
      counts[i] += count;
      return;
    }
  }
  labels.push_back(label);
  counts.push_back(count);
}

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Counts re-indexed to the model's label order.
std::vector<std::int64_t> align_counts(const OutcomeCounts& counts,
                                       const std::vector<OutcomeLabel>& labels) {
  if (counts.labels.size() != counts.counts.size())
    throw std::invalid_argument("outcome counts: label/count length mismatch");
  std::vector<std::int64_t> out(labels.size(), 0);
  for (std::size_t i = 0; i < counts.labels.size(); ++i) {
    if (counts.counts[i] < 0)
      throw std::invalid_argument("outcome counts: negative count for " +
                                  counts.labels[i].to_string());
    const auto it = std::find(labels.begin(), labels.end(), counts.labels[i]);
    if (it == labels.end())
      throw std::invalid_argument("outcome counts: label " + counts.labels[i].to_string() +
                                  " is not an outcome of this config");
    out[it - labels.begin()] += counts.counts[i];
  }
  return out;
}

double log_likelihood_aligned(const AnalyticModel& model, const std::vector<std::int64_t>& counts,
                              const PhaseParameters& params) {
  const auto p = model.probabilities(params.sender_phases());
  double acc = 0.0;
  for (std::size_t x = 0; x < p.size(); ++x) {
    if (counts[x] == 0) continue;
    if (!(p[x] > 0.0)) return kNegInf;
    acc += static_cast<double>(counts[x]) * std::log(p[x]);
  }
  return acc;
}

// Maximizes f on [lo, hi]; the endpoints are candidates too so that
// boundary maxima come back exact.
template <typename F>
double golden_section_max(F&& f, double lo, double hi, double tol) {
  constexpr double inv_phi = 0.6180339887498949;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  double best = fc >= fd ? c : d;
  double fbest = std::max(fc, fd);
  for (double edge : {lo, hi}) {
    const double fe = f(edge);
    if (fe >= fbest) {
      best = edge;
      fbest = fe;
    }
  }
  return best;
}

}  // namespace

double log_likelihood(const OutcomeCounts& counts, const ProtocolConfig& config,
                      const PhaseParameters& params) {
  const AnalyticModel model(config, params.m_est);
  return log_likelihood_aligned(model, align_counts(counts, model.labels()), params);
}

RecoveredOmegas recover_omegas(const PhaseParameters& theta_hat, double t) {
  if (!(t > 0.0)) throw std::invalid_argument("recover_omegas: t must be > 0");
  RecoveredOmegas out;
  const auto phases = theta_hat.sender_phases();
  for (double ph : phases) out.omegas.push_back(ph / t);
  std::sort(out.omegas.begin(), out.omegas.end());
  if (out.omegas.front() == 0.0) {
    out.flagged = true;
    out.note = "zero amplitude on the boundary of the model (fields are assumed positive)";
  } else if (out.omegas.front() < 0.0) {
    out.flagged = true;
    out.note = "negative recovered amplitude (fields are assumed positive)";
  }
  return out;
}

EstimateReport mle_estimate(const OutcomeCounts& counts, const ProtocolConfig& config,
                            const MleOptions& options) {
  if (config.m_est != 1 && config.m_est != 2)
    throw std::invalid_argument("mle_estimate: config must be the m_est = 1 or m_est = 2 preset");
  if (options.grid_points < 2) throw std::invalid_argument("mle_estimate: need >= 2 grid points");
  const int dim = config.m_est;
  const AnalyticModel model(config, dim);
  const auto aligned = align_counts(counts, model.labels());
  std::int64_t total = 0;
  for (auto v : aligned) total += v;
  if (total < 1) throw std::invalid_argument("mle_estimate: counts are all zero");

  const auto loglik = [&](const std::vector<double>& theta) {
    return log_likelihood_aligned(model, aligned, PhaseParameters{dim, theta});
  };

  // Score and observed information (-Hessian of the log-likelihood).
  struct Curvature {
    Eigen::VectorXd score;
    Eigen::MatrixXd info;
    bool finite = true;
  };
  const auto map = phase_map_for(dim);
  const auto curvature = [&](const std::vector<double>& theta) {
    Curvature c{Eigen::VectorXd::Zero(dim), Eigen::MatrixXd::Zero(dim, dim), true};
    const auto d = model.derivatives(theta, map, dim);
    for (std::size_t x = 0; x < aligned.size(); ++x) {
      if (aligned[x] == 0) continue;
      const auto& p = d.probability[x];
      if (!(p.value > 0.0)) {
        c.finite = false;
        return c;
      }
      const double w = static_cast<double>(aligned[x]);
      for (int a = 0; a < dim; ++a) {
        c.score[a] += w * p.grad[a] / p.value;
        for (int b = 0; b < dim; ++b)
          c.info(a, b) += w * (p.grad[a] * p.grad[b] / (p.value * p.value) - p.hess[a * dim + b] / p.value);
      }
    }
    c.info = 0.5 * (c.info + c.info.transpose());
    return c;
  };

  const int g = options.grid_points;
  const double step = std::numbers::pi / (g - 1);
  const auto axis = [&](int i) { return i == g - 1 ? std::numbers::pi : i * step; };

  std::vector<double> best(dim, 0.0);
  double fbest = kNegInf;
  double fworst = std::numeric_limits<double>::infinity();
  bool have = false;
  const std::size_t cells = dim == 1 ? g : static_cast<std::size_t>(g) * g;
  for (std::size_t idx = 0; idx < cells; ++idx) {
    std::vector<double> theta =
        dim == 1 ? std::vector<double>{axis(static_cast<int>(idx))}
                 : std::vector<double>{axis(static_cast<int>(idx / g)), axis(static_cast<int>(idx % g))};
    const double f = loglik(theta);
    fworst = std::min(fworst, f);
    if (!have || f > fbest) {
      best = std::move(theta);
      fbest = f;
      have = true;
    }
  }

  EstimateReport report;
  report.N = total;
  const bool flat = std::isfinite(fbest) && std::isfinite(fworst) &&
                    fbest - fworst <= 1e-12 * std::max(1.0, std::abs(fbest));
  bool converged = std::isfinite(fbest) && !flat;

  if (converged) {
    bool settled = false;
    for (int cycle = 0; cycle < options.max_cycles && !settled; ++cycle) {
      const double f_start = loglik(best);
      double moved = 0.0;
      for (int i = 0; i < dim; ++i) {
        auto along = [&](double x) {
          auto theta = best;
          theta[i] = x;
          return loglik(theta);
        };
        const double lo = std::max(0.0, best[i] - step);
        const double hi = std::min(std::numbers::pi, best[i] + step);
        const double x = golden_section_max(along, lo, hi, options.coordinate_tolerance);
        if (along(x) >= loglik(best)) {
          moved = std::max(moved, std::abs(x - best[i]));
          best[i] = x;
        }
      }
      // Near the optimum f is flat to rounding, so also stop once a full
      // cycle no longer improves it.
      const double gain = loglik(best) - f_start;
      settled = moved <= options.coordinate_tolerance ||
                gain <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(f_start);
    }
    converged = settled;

    // Newton polish on the analytic score resolves the optimum below the
    // sqrt(eps) floor of a derivative-free line search.
    for (int it = 0; it < 8 && converged; ++it) {
      const auto c = curvature(best);
      if (!c.finite) break;
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(c.info);
      if (!(eig.eigenvalues()[0] > 0.0)) break;
      const Eigen::VectorXd delta = c.info.ldlt().solve(c.score);
      if (!(delta.cwiseAbs().maxCoeff() < step)) break;
      auto next = best;
      bool inside = true;
      for (int a = 0; a < dim; ++a) {
        next[a] += delta[a];
        inside = inside && next[a] >= 0.0 && next[a] <= std::numbers::pi;
      }
      if (!inside) break;
      best = std::move(next);
      if (delta.cwiseAbs().maxCoeff() < 1e-15) break;
    }
  }

  report.theta_hat = PhaseParameters{dim, best};
  report.log_likelihood = loglik(best);
  report.converged = converged;
  report.omega_hat = recover_omegas(report.theta_hat, config.t);

  const double nan = std::numeric_limits<double>::quiet_NaN();
  report.se_observed.assign(dim, nan);
  report.se_expected.assign(dim, nan);

  if (const auto c = curvature(best); c.finite) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(c.info);
    if (eig.eigenvalues()[0] > 0.0) {
      const Eigen::MatrixXd cov = c.info.inverse();
      for (int a = 0; a < dim; ++a) report.se_observed[a] = std::sqrt(cov(a, a));
    }
  }

  try {
    const auto fr = fisher_matrix(config, report.theta_hat, DerivativeMethod::analytic, total);
    for (int a = 0; a < dim; ++a) report.se_expected[a] = std::sqrt(fr.crb_diag[a]);
  } catch (const UnidentifiableDirection&) {
  } catch (const SingularFisherTerm&) {
  }
  return report;
}

}  // namespace anonsense
