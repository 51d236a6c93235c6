#include "locomip/convex_solver.hpp"

#include <algorithm>
#include <cmath>

#include "locomip/conic_form.hpp"

namespace locomip {

ConvexSolution IpmBackend::solve(const MicpProblem& problem,
                                 const std::vector<double>* warm_start) const {
  const ConicForm cf = build_conic_form(problem);
  ConvexSolution out;
  if (cf.n == 0 && !cf.trivially_infeasible) {
    // Everything fixed: feasibility was checked row by row.
    out.status = ConvexStatus::kOptimal;
    const Eigen::VectorXd x = cf.expand(Eigen::VectorXd());
    out.x.assign(x.data(), x.data() + x.size());
    out.objective = problem.objective(out.x);
    return out;
  }
  Eigen::VectorXd warm;
  const Eigen::VectorXd* warm_ptr = nullptr;
  if (warm_start != nullptr &&
      static_cast<int>(warm_start->size()) == problem.num_vars()) {
    warm = cf.reduce(*warm_start);
    warm_ptr = &warm;
  }
  const IpmResult r = solve_ipm(cf, settings_, warm_ptr);
  out.status = r.status;
  out.iterations = r.iterations;
  out.primal_residual = r.primal_residual;
  out.dual_residual = r.dual_residual;
  out.certificate_norm = r.certificate_norm;
  const Eigen::VectorXd x =
      cf.expand(r.x.size() == cf.n ? r.x : Eigen::VectorXd::Zero(cf.n));
  out.x.assign(x.data(), x.data() + x.size());
  out.objective = r.status == ConvexStatus::kOptimal ? problem.objective(out.x)
                                                     : r.objective;
  return out;
}

BackendRegistry::BackendRegistry() {
  backends_["reference"] = std::make_shared<IpmBackend>();
  IpmSettings dense;
  dense.kkt = KktBackend::kDenseLdlt;
  backends_["dense"] = std::make_shared<IpmBackend>(dense);
}

BackendRegistry& BackendRegistry::global() {
  static BackendRegistry registry;
  return registry;
}

void BackendRegistry::register_backend(
    const std::string& name, std::shared_ptr<const ConvexBackend> backend) {
  std::lock_guard lock(mu_);
  if (!backend) throw BackendError("null backend '" + name + "'");
  if (!backends_.emplace(name, std::move(backend)).second) {
    throw BackendError("backend '" + name + "' already registered");
  }
}

std::shared_ptr<const ConvexBackend> BackendRegistry::get(
    const std::string& name) const {
  std::lock_guard lock(mu_);
  auto it = backends_.find(name);
  if (it == backends_.end()) {
    std::string avail;
    for (const auto& [k, _] : backends_) {
      if (!avail.empty()) avail += ", ";
      avail += k;
    }
    throw BackendError("unknown backend '" + name + "' (available: " + avail +
                       ")");
  }
  return it->second;
}

std::vector<std::string> BackendRegistry::names() const {
  std::lock_guard lock(mu_);
  std::vector<std::string> out;
  for (const auto& [k, _] : backends_) out.push_back(k);
  return out;
}

ConvexSolution solve_convex(const MicpProblem& problem,
                            const std::vector<double>* warm_start,
                            const std::string& backend) {
  if (problem.num_binaries() > 0) {
    for (int i : problem.binary_indices()) {
      const Variable& v = problem.vars()[i];
      if (v.lower != v.upper) {
        throw ModelError("solve_convex: free binary '" + v.name +
                         "'; relax the problem first");
      }
    }
  }
  return BackendRegistry::global().get(backend)->solve(problem, warm_start);
}

double kkt_residual(const ConicForm& cf, const IpmResult& r) {
  auto inf = [](const Eigen::VectorXd& v) {
    return v.size() ? v.lpNorm<Eigen::Infinity>() : 0.0;
  };
  const Eigen::VectorXd stat = cf.P * r.x + cf.A.transpose() * r.y +
                               cf.G.transpose() * r.z + cf.q;
  const Eigen::VectorXd peq = cf.A * r.x - cf.b;
  const Eigen::VectorXd pin = cf.G * r.x + r.s - cf.h;
  // s, z complementarity and membership
  double comp = 0.0;
  double member = 0.0;
  for (int i = 0; i < cf.n_orthant; ++i) {
    comp = std::max(comp, std::abs(r.s[i] * r.z[i]));
    member = std::max({member, -r.s[i], -r.z[i]});
  }
  for (int k = 0; k < cf.n_soc; ++k) {
    const int o = cf.n_orthant + 3 * k;
    comp = std::max(comp, std::abs(r.s.segment<3>(o).dot(r.z.segment<3>(o))));
    member = std::max(member, r.s.segment<2>(o + 1).norm() - r.s[o]);
    member = std::max(member, r.z.segment<2>(o + 1).norm() - r.z[o]);
  }
  return std::max({inf(stat), inf(peq), inf(pin), comp, member});
}

}  // namespace locomip
