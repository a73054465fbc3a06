#pragma once

#include "dstlift/flow_lp.hpp"
#include "dstlift/moments.hpp"

#include <Eigen/Dense>
#include "json.hpp"

#include <cstdint>
#include <stdexcept>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace dstlift {

/// Thrown by assemble when M_{t+1} would exceed the moment-dimension budget.
class BudgetExceeded : public std::runtime_error {
 public:
  BudgetExceeded(std::uint64_t required, std::uint64_t budget)
      : std::runtime_error("moment matrix needs dimension " + std::to_string(required) + ", budget is " +
                           std::to_string(budget) + " (set DSTLIFT_MOMENT_BUDGET to raise it)"),
        required_(required),
        budget_(budget) {}
  std::uint64_t required() const { return required_; }
  std::uint64_t budget() const { return budget_; }

 private:
  std::uint64_t required_;
  std::uint64_t budget_;
};

inline constexpr std::uint64_t kDefaultMomentBudget = 2000;
/// DSTLIFT_MOMENT_BUDGET if set to a positive integer, else kDefaultMomentBudget.
std::uint64_t moment_budget();

struct DimensionReport {
  int num_vars = 0;
  int t = 0;
  int num_rows = 0;
  std::uint64_t moment_dim = 0;   // |P_{t+1}|
  std::uint64_t row_dim = 0;      // |P_t|
  std::uint64_t free_vars = 0;    // |P_{2t+2}|
  std::uint64_t psd_blocks = 0;
  std::uint64_t budget = 0;
  bool within_budget = true;

  nlohmann::json to_json() const;
};

DimensionReport lift_dimensions(const ConstraintSystem& cs, int t);

/// One PSD block: the moment matrix (row == -1) or M_t of one shifted constraint.
/// Entry (I, J) equals Σ_k a_k y_{I∪J∪{k}} - β y_{I∪J}; the moment block has no
/// terms and β = -1.
struct SdpBlock {
  int row = -1;
  int dim = 0;
  std::vector<std::pair<int, Rational>> terms;
  Rational beta;
};

/// Level-t lift of a constraint system: free variables y_I for |I| <= 2t+2
/// (free_vars[0] is ∅, pinned to 1), one moment block and one block per row.
struct SdpProblem {
  ConstraintSystem cs;
  int t = 0;
  std::vector<IndexSet> free_vars;
  std::unordered_map<IndexSet, int, IndexSetHash> free_index;
  std::vector<IndexSet> moment_index;  // P_{t+1}
  std::vector<IndexSet> row_index;     // P_t
  std::vector<SdpBlock> blocks;
  std::vector<Rational> objective;     // per free variable
  DimensionReport dims;

  /// Linear form of slot (i, j) of a block as (free variable, coefficient) pairs.
  std::vector<std::pair<int, Rational>> slot(int block, int i, int j) const;
};

/// Throws BudgetExceeded when |P_{t+1}| exceeds moment_budget().
SdpProblem assemble(const ConstraintSystem& cs, int t);

enum class SolverBackend { builtin, external_file };

struct SolverConfig {
  int max_iters = 20000;
  double tol = 1e-6;
  double rho = 1.0;        // initial penalty
  double alpha = 1.6;      // over-relaxation
  bool adaptive_rho = true;
  int anderson = 10;       // Anderson acceleration memory, 0 for plain ADMM
  std::uint64_t seed = 0;  // 0: start from zero; otherwise a seeded random start
  SolverBackend backend = SolverBackend::builtin;
  std::string external_path;  // moment file for the external backend
  bool presolve = true;
  /// Use the exact atom-basis reduction when t >= number of surviving variables.
  bool full_level_reduction = true;
  /// Project cone blocks serially (reference path for the OpenMP kernel).
  bool serial = false;

  void validate() const;
};

struct SolveDiagnostics {
  std::string method;  // "admm", "atom-basis", "external"
  bool converged = false;
  bool infeasible = false;
  int iterations = 0;
  double objective = 0;
  double dual_objective = 0;
  double gap = 0;
  double primal_residual = 0;  // relative
  double dual_residual = 0;    // relative
  double rho = 0;
  int eliminated_vars = 0;
  int zero_rows = 0;
  int dropped_blocks = 0;
  int psd_blocks = 0;
  std::string witness;  // how the returned optimum was chosen

  nlohmann::json to_json() const;
};

struct SdpSolution {
  FloatMoments y;
  double objective = 0;
  SolveDiagnostics diag;
};

SdpSolution solve(const SdpProblem& p, const SolverConfig& cfg);

/// Euclidean projection of a symmetric matrix onto the PSD cone.
Eigen::MatrixXd project_psd(const Eigen::MatrixXd& m);
/// project_psd on every block in place, one OpenMP task per block when `parallel`.
void project_psd_blocks(std::span<Eigen::MatrixXd> blocks, bool parallel = true);

/// "moments <n> <t>" then "<sorted ordinals> : <value>" per entry, canonical order.
std::string export_moments(const RationalMoments& y);
/// Doubles are written with 17 significant digits so that import reproduces them bit for bit.
std::string export_moments(const FloatMoments& y);
/// Throws ParseError on malformed lines or duplicate index sets and MomentError
/// when the domain |I| <= 2t+2 is incomplete.
RationalMoments import_moments(std::string_view text);
FloatMoments import_moments_float(std::string_view text);

}  // namespace dstlift
