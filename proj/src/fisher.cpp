#include "anonsense/fisher.hpp"

#include <cmath>
#include <limits>

#include "anonsense/analytic.hpp"
#include "anonsense/parallel.hpp"

namespace anonsense {

namespace {

// Outcomes below this probability are treated as exact zeros of p.
constexpr double kZeroProbability = 1e-14;
// |grad p| allowed at such a zero before the term is declared singular.
constexpr double kZeroGradient = 1e-7;

void check_params(const PhaseParameters& params) {
  if (params.m_est != 1 && params.m_est != 2)
    throw std::invalid_argument("phase parameters: m_est must be 1 or 2");
  if (static_cast<int>(params.theta.size()) != params.m_est)
    throw std::invalid_argument("phase parameters: expected " + std::to_string(params.m_est) +
                                " components");
}

// Contribution of an outcome whose probability vanishes at the evaluation
// point. With p ~ (v.d)^2 near the zero (rank-one Hessian H), the summand
// tends to 2H in every direction; for a rank-two zero the limit depends on
// the direction and the outcome is dropped.
void add_zero_outcome(Eigen::MatrixXd& J, const Eigen::VectorXd& grad, const Eigen::MatrixXd& hess,
                      const std::string& label) {
  if (grad.cwiseAbs().maxCoeff() >= kZeroGradient)
    throw SingularFisherTerm("outcome " + label +
                             " has zero probability but non-zero derivative");
  const int dim = static_cast<int>(hess.rows());
  if (dim == 1) {
    J += 2.0 * hess;
    return;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (hess + hess.transpose()));
  const auto& ev = eig.eigenvalues();
  const double top = ev.cwiseAbs().maxCoeff();
  if (top == 0.0) return;
  int nonzero = 0;
  for (int i = 0; i < dim; ++i)
    if (std::abs(ev[i]) > 1e-9 * top) ++nonzero;
  if (nonzero <= 1) J += 2.0 * hess;
}

Eigen::MatrixXd analytic_fisher(const AnalyticModel& model, const PhaseParameters& params) {
  const int dim = params.m_est;
  const auto map = phase_map_for(dim);
  const auto d = model.derivatives(params.theta, map, dim);
  const auto& labels = model.labels();
  const auto& cfg = model.config();

  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(dim, dim);
  for (std::size_t x = 0; x < labels.size(); ++x) {
    if (labels[x].is_fail) {
      const auto& p = d.probability[x];
      Eigen::VectorXd g(dim);
      for (int a = 0; a < dim; ++a) g[a] = p.grad[a];
      if (p.value >= kZeroProbability) {
        J += g * g.transpose() / p.value;
      } else {
        Eigen::MatrixXd h(dim, dim);
        for (int a = 0; a < dim; ++a)
          for (int b = 0; b < dim; ++b) h(a, b) = p.hess[a * dim + b];
        add_zero_outcome(J, g, h, "f");
      }
      continue;
    }
    // p = q |gamma|^2 with gamma of fixed phase, so the summand is
    // 4 q Re(conj(d_a gamma) d_b gamma) everywhere, including where p = 0.
    const double q = cfg.q[labels[x].index];
    const auto& amp = d.amplitude[x];
    for (int a = 0; a < dim; ++a)
      for (int b = 0; b < dim; ++b)
        J(a, b) += 4.0 * q * (std::conj(amp.grad[a]) * amp.grad[b]).real();
  }
  return J;
}

Eigen::MatrixXd finite_difference_fisher(const AnalyticModel& model,
                                         const PhaseParameters& params) {
  const int dim = params.m_est;
  const double h = kFiniteDifferenceStep;
  const auto eval = [&](const std::vector<double>& theta) {
    return model.probabilities(PhaseParameters{dim, theta}.sender_phases());
  };
  const auto shifted = [&](int a, double da, int b, double db) {
    auto theta = params.theta;
    theta[a] += da;
    theta[b] += db;
    return eval(theta);
  };

  const auto center = eval(params.theta);
  const std::size_t outcomes = center.size();
  std::vector<std::vector<double>> plus(dim), minus(dim);
  for (int a = 0; a < dim; ++a) {
    plus[a] = shifted(a, h, a, 0.0);
    minus[a] = shifted(a, -h, a, 0.0);
  }

  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(dim, dim);
  const auto& labels = model.labels();
  for (std::size_t x = 0; x < outcomes; ++x) {
    Eigen::VectorXd g(dim);
    for (int a = 0; a < dim; ++a) g[a] = (plus[a][x] - minus[a][x]) / (2.0 * h);
    if (center[x] >= kZeroProbability) {
      J += g * g.transpose() / center[x];
      continue;
    }
    Eigen::MatrixXd H(dim, dim);
    for (int a = 0; a < dim; ++a) {
      H(a, a) = (plus[a][x] - 2.0 * center[x] + minus[a][x]) / (h * h);
      for (int b = a + 1; b < dim; ++b) {
        const double v = (shifted(a, h, b, h)[x] - shifted(a, h, b, -h)[x] -
                          shifted(a, -h, b, h)[x] + shifted(a, -h, b, -h)[x]) /
                         (4.0 * h * h);
        H(a, b) = H(b, a) = v;
      }
    }
    add_zero_outcome(J, g, H, labels[x].to_string());
  }
  return J;
}

}  // namespace

PhaseParameters PhaseParameters::from_fields(const FieldVector& fields) {
  const auto ph = fields.phases();
  if (ph.size() == 1) return single(ph[0]);
  if (ph.size() == 2) return pair(ph[0] + ph[1], ph[0] - ph[1]);
  throw std::invalid_argument("phase parameters exist for one or two senders only");
}

std::vector<double> PhaseParameters::sender_phases() const {
  check_params(*this);
  if (m_est == 1) return {theta[0]};
  return {0.5 * (theta[0] + theta[1]), 0.5 * (theta[0] - theta[1])};
}

std::string to_string(DerivativeMethod method) {
  return method == DerivativeMethod::analytic ? "analytic-derivative" : "finite-difference";
}

UnidentifiableDirection::UnidentifiableDirection(const std::string& what,
                                                 std::vector<double> null_vector,
                                                 double condition_number)
    : std::runtime_error(what), null_vector_(std::move(null_vector)), condition_(condition_number) {}

Eigen::MatrixXd fisher_information(const ProtocolConfig& config, const PhaseParameters& params,
                                   DerivativeMethod method) {
  check_params(params);
  const AnalyticModel model(config, params.m_est);
  Eigen::MatrixXd J = method == DerivativeMethod::analytic ? analytic_fisher(model, params)
                                                           : finite_difference_fisher(model, params);
  return 0.5 * (J + J.transpose());
}

FisherResult fisher_matrix(const ProtocolConfig& config, const PhaseParameters& params,
                           DerivativeMethod method, std::int64_t shots) {
  if (shots < 1) throw std::invalid_argument("fisher_matrix: shot count must be >= 1");
  FisherResult result;
  result.J = fisher_information(config, params, method);
  result.N = shots;
  result.method = method;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(result.J);
  const auto& ev = eig.eigenvalues();  // ascending
  const double lo = ev[0];
  const double hi = ev[ev.size() - 1];
  const double cond = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  if (!(lo > 0.0) || cond > kFisherConditionLimit) {
    std::vector<double> null(eig.eigenvectors().col(0).data(),
                             eig.eigenvectors().col(0).data() + ev.size());
    // Sign convention: largest-magnitude component positive.
    std::size_t big = 0;
    for (std::size_t i = 1; i < null.size(); ++i)
      if (std::abs(null[i]) > std::abs(null[big])) big = i;
    if (null[big] < 0)
      for (auto& v : null) v = -v;
    std::string dir = "(";
    for (std::size_t i = 0; i < null.size(); ++i)
      dir += (i ? ", " : "") + std::to_string(null[i]);
    dir += ")";
    throw UnidentifiableDirection("Fisher matrix is singular (condition number " +
                                      std::to_string(cond) + "); unidentifiable direction " + dir,
                                  std::move(null), cond);
  }
  result.J_inv = result.J.inverse();
  for (Eigen::Index i = 0; i < result.J_inv.rows(); ++i)
    result.crb_diag.push_back(result.J_inv(i, i) / static_cast<double>(shots));
  return result;
}

Eigen::MatrixXd omega_covariance_bound(const FisherResult& result, double t) {
  if (!(t > 0.0)) throw std::invalid_argument("omega_covariance_bound: t must be > 0");
  const auto dim = result.J_inv.rows();
  Eigen::MatrixXd inv_map(dim, dim);  // omega = inv_map * theta / t
  if (dim == 1) {
    inv_map << 1.0;
  } else if (dim == 2) {
    inv_map << 0.5, 0.5, 0.5, -0.5;
  } else {
    throw std::invalid_argument("omega_covariance_bound: one or two parameters only");
  }
  return inv_map * result.J_inv * inv_map.transpose() /
         (t * t * static_cast<double>(result.N));
}

double dilution(std::int64_t n, std::int64_t a) {
  const double nd = static_cast<double>(n);
  const double ad = static_cast<double>(a);
  return 2.0 * ad * (nd - ad) / (nd * (nd - 1.0));
}

namespace {

// Common shape of the finite-n and limiting bounds with r = (1 - l)/l for
// dilution l (r = 1 in the limit).
double j22_from_ratio(double r, double q0, double theta1, double theta2) {
  if (!(q0 > 0.0 && q0 < 1.0)) throw std::invalid_argument("q0 must lie in (0, 1)");
  const double s1 = std::sin(0.5 * theta1);
  const double s2 = std::sin(0.5 * theta2);
  if (s2 == 0.0) throw DivergentBound("(J^-1)_{2,2} diverges at theta2 = 0");
  const double cc = std::cos(0.5 * theta1) * std::cos(0.5 * theta2);
  const double bracket = r * r * s1 * s1 / q0 + 2.0 * r * (1.0 - cc) + s2 * s2;
  return bracket / ((1.0 - q0) * s2 * s2);
}

}  // namespace

double closed_form_j22(std::int64_t n, std::int64_t a, double q0, double theta1, double theta2) {
  if (n < 5) throw std::invalid_argument("closed_form_j22: n >= 5 required");
  if (a < 2 || a > n / 2) throw std::invalid_argument("closed_form_j22: 2 <= a <= floor(n/2) required");
  const double l = dilution(n, a);
  return j22_from_ratio((1.0 - l) / l, q0, theta1, theta2);
}

std::int64_t optimal_a(std::int64_t n) {
  if (n < 5) throw std::invalid_argument("optimal_a: n >= 5 required");
  return n / 2;
}

double limit_j22(double q0, double theta1, double theta2) {
  return j22_from_ratio(1.0, q0, theta1, theta2);
}

std::vector<ScanRow> scan_j22(const ScanSpec& spec, int threads) {
  const std::size_t nq = spec.q0s.size();
  const std::size_t n1 = spec.theta1s.size();
  const std::size_t n2 = spec.theta2s.size();
  const std::size_t total = spec.ns.size() * nq * n1 * n2;
  std::vector<ScanRow> rows(total);
  parallel_for(total, threads, [&](std::size_t idx) {
    std::size_t rest = idx;
    const std::size_t i2 = rest % n2;
    rest /= n2;
    const std::size_t i1 = rest % n1;
    rest /= n1;
    const std::size_t iq = rest % nq;
    const std::size_t in = rest / nq;

    ScanRow row;
    row.n = spec.ns[in];
    row.q0 = spec.q0s[iq];
    row.theta1 = spec.theta1s[i1];
    row.theta2 = spec.theta2s[i2];
    const double nan = std::numeric_limits<double>::quiet_NaN();
    try {
      if (row.n == 0) {
        row.j22 = limit_j22(row.q0, row.theta1, row.theta2);
      } else {
        row.a = spec.a ? *spec.a : (row.n >= 5 ? optimal_a(row.n) : 0);
        row.j22 = closed_form_j22(row.n, row.a, row.q0, row.theta1, row.theta2);
      }
      row.log10_j22 = std::log10(row.j22);
      row.flag = "ok";
    } catch (const DivergentBound&) {
      row.j22 = row.log10_j22 = std::numeric_limits<double>::infinity();
      row.flag = "divergent";
    } catch (const std::invalid_argument&) {
      row.j22 = row.log10_j22 = nan;
      row.flag = "invalid";
    }
    rows[idx] = row;
  });
  return rows;
}

}  // namespace anonsense
