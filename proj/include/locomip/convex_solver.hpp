#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "locomip/ipm.hpp"
#include "locomip/micp.hpp"

namespace locomip {

struct ConvexSolution {
  ConvexStatus status = ConvexStatus::kMaxIter;
  std::vector<double> x;  // original variable space
  double objective = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double certificate_norm = 0.0;  // set when infeasible / unbounded
  int iterations = 0;
};

/// Solves a continuous MicpProblem (no free binaries).
class ConvexBackend {
 public:
  virtual ~ConvexBackend() = default;
  virtual ConvexSolution solve(const MicpProblem& problem,
                               const std::vector<double>* warm_start) const = 0;
};

class IpmBackend final : public ConvexBackend {
 public:
  explicit IpmBackend(IpmSettings settings = {}) : settings_(settings) {}
  ConvexSolution solve(const MicpProblem& problem,
                       const std::vector<double>* warm_start) const override;
  const IpmSettings& settings() const { return settings_; }

 private:
  IpmSettings settings_;
};

class BackendError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Named convex backends. "reference" (sparse LDL') and "dense" are always
/// present.
class BackendRegistry {
 public:
  static BackendRegistry& global();

  void register_backend(const std::string& name,
                        std::shared_ptr<const ConvexBackend> backend);
  std::shared_ptr<const ConvexBackend> get(const std::string& name) const;
  std::vector<std::string> names() const;

 private:
  BackendRegistry();
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<const ConvexBackend>> backends_;
};

inline void backend_register(const std::string& name,
                             std::shared_ptr<const ConvexBackend> backend) {
  BackendRegistry::global().register_backend(name, std::move(backend));
}

ConvexSolution solve_convex(const MicpProblem& problem,
                            const std::vector<double>* warm_start = nullptr,
                            const std::string& backend = "reference");

/// Max KKT residual (stationarity, primal feasibility, complementarity) of an
/// IPM result on its conic form; used by tests.
double kkt_residual(const ConicForm& cf, const IpmResult& r);

}  // namespace locomip
