#include "spsim/mutation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "spsim/error.hpp"
#include "spsim/parallel.hpp"
#include "spsim/reduce.hpp"

namespace spsim {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kRelativeJitter = 1e-10;
}  // namespace

StepsizeState adapt_stepsize(StepsizeState state, double acceptance_rate) {
  const double next = acceptance_rate > kTargetAcceptance ? state.h + kStepsizeIncrement
                                                          : state.h - kStepsizeIncrement;
  // Round to the 0.1 grid so repeated +/- steps cannot drift out of the bounds.
  state.h = std::clamp(std::round(next * 10.0) / 10.0, kMinStepsize, kMaxStepsize);
  return state;
}

std::string_view to_string(MPhaseRuleKind kind) {
  return kind == MPhaseRuleKind::deterministic ? "deterministic" : "rne";
}

MPhaseRuleKind parse_mphase_rule(std::string_view name) {
  if (name == "deterministic") return MPhaseRuleKind::deterministic;
  if (name == "rne" || name == "rne_based") return MPhaseRuleKind::rne_based;
  throw UsageError("unknown M-phase rule '" + std::string(name) + "' (deterministic|rne)");
}

std::string_view to_string(ProposalKind kind) {
  return kind == ProposalKind::random_walk ? "random_walk" : "independence";
}

ProposalKind parse_proposal_kind(std::string_view name) {
  if (name == "random_walk") return ProposalKind::random_walk;
  if (name == "independence") return ProposalKind::independence;
  throw UsageError("unknown proposal '" + std::string(name) + "' (random_walk|independence)");
}

void MPhaseRule::validate() const {
  if (rbar < 1) throw UsageError("rbar must be at least 1");
  if (kappa < 1) throw UsageError("kappa must be at least 1");
  if (!(d2 > 0.0 && d2 <= d1 && d1 < 1.0)) throw UsageError("need 0 < d2 <= d1 < 1");
  if (!(e1 > 0.0 && e1 <= e2 && e2 <= 1.0)) throw UsageError("need 0 < e1 <= e2 <= 1");
  if (rmax < 1) throw UsageError("rmax must be at least 1");
}

std::size_t MPhaseRule::deterministic_sweeps(double rss_at_entry) const {
  return rss_at_entry < d2 ? kappa * rbar : rbar;
}

Eigen::VectorXd sample_mean(const ParticleSystem& system) {
  const std::size_t k = system.dim;
  const std::size_t n = system.size();
  Eigen::VectorXd mean(k);
  std::vector<double> column(n);
  for (std::size_t d = 0; d < k; ++d) {
    for (std::size_t i = 0; i < n; ++i) column[i] = system.theta[i * k + d];
    mean[static_cast<Eigen::Index>(d)] = tree_sum(column) / static_cast<double>(n);
  }
  return mean;
}

Eigen::MatrixXd sample_covariance(const ParticleSystem& system) {
  const std::size_t k = system.dim;
  const std::size_t n = system.size();
  for (double v : system.theta) {
    if (!std::isfinite(v)) throw NumericalError("proposal covariance: non-finite particle value");
  }
  const Eigen::VectorXd mean = sample_mean(system);
  Eigen::MatrixXd cov(k, k);
  std::vector<double> products(n);
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = 0; b <= a; ++b) {
      for (std::size_t i = 0; i < n; ++i) {
        products[i] = (system.theta[i * k + a] - mean[a]) * (system.theta[i * k + b] - mean[b]);
      }
      const double c = tree_sum(products) / static_cast<double>(n - 1);
      cov(a, b) = c;
      cov(b, a) = c;
    }
  }
  return cov;
}

Eigen::MatrixXd proposal_covariance(const ParticleSystem& system, double h) {
  Eigen::MatrixXd v = sample_covariance(system);
  const auto k = static_cast<double>(system.dim);
  const double scale = v.trace() / k;
  const double jitter = kRelativeJitter * (scale > 0.0 ? scale : 1.0);
  v.diagonal().array() += jitter;
  return h * h * v;
}

Eigen::MatrixXd covariance_factor(const Eigen::MatrixXd& sigma) {
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma);
  const Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal();
}

double metropolis_sweep(ParticleSystem& system, const Model& model, std::span<const double> data,
                        const Proposal& proposal, std::uint64_t master_seed,
                        std::size_t iteration) {
  const std::size_t k = system.dim;
  const std::size_t N = system.per_group;
  if (data.size() != system.current_t) {
    throw ContractError("metropolis_sweep: data length must equal current_t");
  }
  const auto ki = static_cast<Eigen::Index>(k);
  if (proposal.covariance.rows() != ki || proposal.covariance.cols() != ki) {
    throw ContractError("metropolis_sweep: covariance has the wrong shape");
  }
  const bool independence = proposal.kind == ProposalKind::independence;
  const Eigen::MatrixXd factor = covariance_factor(proposal.covariance);
  Eigen::MatrixXd precision;
  if (independence) {
    if (proposal.mean.size() != ki) throw ContractError("independence proposal needs a mean");
    precision = proposal.covariance.completeOrthogonalDecomposition().pseudoInverse();
  }
  // log q(x) up to a constant, for the Hastings correction of the independence sampler.
  const auto log_q = [&](const Eigen::VectorXd& x) {
    const Eigen::VectorXd d = x - proposal.mean;
    return -0.5 * d.dot(precision * d);
  };

  std::vector<unsigned char> accepted(system.size(), 0);
  parallel_for(system.size(), [&](std::size_t i) {
    RandomStream stream({master_seed, static_cast<std::uint32_t>(i / N),
                         static_cast<std::uint32_t>(i % N), Phase::M,
                         static_cast<std::uint32_t>(system.cycle), iteration});
    Eigen::VectorXd z(ki);
    for (Eigen::Index d = 0; d < ki; ++d) z[d] = stream.normal();
    const Eigen::Map<const Eigen::VectorXd> current(system.theta_of(i).data(), ki);
    const Eigen::VectorXd candidate =
        (independence ? Eigen::VectorXd(proposal.mean) : Eigen::VectorXd(current)) + factor * z;
    const double u = stream.uniform();

    const std::span<const double> cand{candidate.data(), k};
    double log_target_new = model.log_prior(cand);
    std::vector<double> new_state(system.state_size);
    double loglik_new = kNegInf;
    if (log_target_new > kNegInf) {
      loglik_new = model.log_likelihood(cand, data, new_state);
      if (std::isnan(loglik_new)) loglik_new = kNegInf;
      log_target_new += loglik_new;
    }
    if (!(log_target_new > kNegInf)) return;
    const double log_target_old = model.log_prior(system.theta_of(i)) + system.log_likelihood[i];
    double log_ratio = log_target_new - log_target_old;
    if (independence) log_ratio += log_q(current) - log_q(candidate);
    if (log_ratio >= 0.0 || std::log(u) < log_ratio) {
      std::copy_n(candidate.data(), k, system.theta_of(i).begin());
      std::copy(new_state.begin(), new_state.end(), system.state_of(i).begin());
      system.log_likelihood[i] = loglik_new;
      accepted[i] = 1;
    }
  });
  std::size_t count = 0;
  for (unsigned char a : accepted) count += a;
  return static_cast<double>(count) / static_cast<double>(system.size());
}

MutationRecord m_phase(ParticleSystem& system, const Model& model, std::span<const double> data,
                       const MPhaseRule& rule, double rss_at_entry, bool forced_date,
                       StepsizeState& stepsize, ProposalKind proposal_kind,
                       std::uint64_t master_seed) {
  MutationRecord record;
  record.cycle = system.cycle;
  const std::size_t fixed_sweeps = rule.deterministic_sweeps(rss_at_entry);
  const double rne_target = forced_date ? rule.e2 : rule.e1;

  for (std::size_t r = 1;; ++r) {
    MutationIteration it;
    it.stepsize = stepsize.h;
    it.proposal.kind = proposal_kind;
    if (proposal_kind == ProposalKind::independence) {
      it.proposal.covariance = proposal_covariance(system, 1.0);
      it.proposal.mean = sample_mean(system);
    } else {
      it.proposal.covariance = proposal_covariance(system, stepsize.h);
    }
    it.acceptance_rate = metropolis_sweep(system, model, data, it.proposal, master_seed, r);
    it.rne = test_function_rne(system, model);
    stepsize = adapt_stepsize(stepsize, it.acceptance_rate);
    const bool reached =
        rule.kind == MPhaseRuleKind::deterministic
            ? r >= fixed_sweeps
            : (it.rne.mean && *it.rne.mean >= rne_target) || r >= rule.rmax;
    record.iterations.push_back(std::move(it));
    if (reached) break;
  }
  return record;
}

MutationRecord m_phase_replay(ParticleSystem& system, const Model& model,
                              std::span<const double> data, const MutationRecord& design,
                              std::uint64_t master_seed) {
  MutationRecord record;
  record.cycle = system.cycle;
  for (std::size_t r = 1; r <= design.iterations.size(); ++r) {
    MutationIteration it;
    it.proposal = design.iterations[r - 1].proposal;
    it.stepsize = design.iterations[r - 1].stepsize;
    it.acceptance_rate = metropolis_sweep(system, model, data, it.proposal, master_seed, r);
    it.rne = test_function_rne(system, model);
    record.iterations.push_back(std::move(it));
  }
  return record;
}

}  // namespace spsim
