#pragma once

#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ftvs/rigid_body.hpp"

namespace ftvs {

/// Discrete observability Gramian W = Σ Φ_{k/0}ᵀ Hₖᵀ Hₖ Φ_{k/0}.
class GramianAccumulator {
 public:
  explicit GramianAccumulator(int n);
  /// Φ_{k/0} ← Φₖ Φ_{k/0}; W ← W + Φ_{k/0}ᵀ Hₖᵀ Hₖ Φ_{k/0}.
  void step(const Eigen::MatrixXd& Phi, const Eigen::MatrixXd& H);
  const Eigen::MatrixXd& gramian() const { return W_; }
  const Eigen::MatrixXd& phi_chain() const { return chain_; }
  long epochs() const { return k_; }
  int dim() const { return static_cast<int>(W_.rows()); }

 private:
  Eigen::MatrixXd W_;
  Eigen::MatrixXd chain_;
  long k_ = 0;
};

GramianAccumulator gramian_step(GramianAccumulator acc, const Eigen::MatrixXd& Phi,
                                const Eigen::MatrixXd& H);

/// λ_max / λ_min of a symmetric PSD matrix; +∞ when λ_min < 1e-300.
double condition_number(const Eigen::MatrixXd& W);
/// Condition number after the symmetric diagonal scaling D^{-1/2} W D^{-1/2},
/// D = diag(W). +∞ when any diagonal entry vanishes.
double normalized_condition_number(const Eigen::MatrixXd& W);

/// Error-state model with (σ₁, σ₂, σ₃) as three independent parameters
/// (21 states: σ block at 12..14, ϱ at 15, δμ at 18).
inline constexpr int kNonMinimalDim = 21;
Eigen::MatrixXd jacobian_F_nonminimal(const TargetState& x);
Eigen::MatrixXd observation_matrix_nonminimal(const TargetState& x);

enum class ParameterSet { kMinimal, kNonMinimal };
const char* to_string(ParameterSet p);

struct ObservabilityRow {
  double time = 0.0;
  long epoch = 0;
  double cond_raw = 0.0;
  double cond_normalized = 0.0;
  ParameterSet variant = ParameterSet::kMinimal;
};

struct ObservabilityStudyConfig {
  double duration = 60.0;           // s
  double measurement_period = 0.5;  // s
  double substep = 0.05;            // s, Φ factors per measurement period
};

/// Runs both parameterizations along the noise-free trajectory from `x0`.
/// Rows alternate minimal / non-minimal per epoch.
std::vector<ObservabilityRow> observability_study(const TargetState& x0,
                                                  const ObservabilityStudyConfig& cfg);

/// CSV: time, epoch, cond_raw, cond_normalized, variant.
void write_observability_csv(std::ostream& out, const std::vector<ObservabilityRow>& rows);

}  // namespace ftvs
