#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "vibgate/eigensolve.hpp"
#include "vibgate/field.hpp"
#include "vibgate/grid.hpp"
#include "vibgate/molsys.hpp"

namespace vibgate {

/// Normalized combination of eigenstates, sum_n w_n |phi_index_n>.
struct Superposition {
  struct Term {
    std::size_t index;
    cplx weight;
  };
  std::vector<Term> terms;

  static Superposition basis(std::size_t index) { return {{{index, 1.0}}}; }
  double norm_squared() const;
  WaveFunction build(std::span<const EigenState> states) const;
  /// Same components up to a global phase.
  bool same_state(const Superposition& other, double tol = 1e-10) const;
};

struct Transition {
  Superposition initial;
  Superposition target;
  /// Weight in the overlap term: 1 for a desired transition, negative for a
  /// suppressed one.
  double weight = 1.0;
  /// Population must move; initial == target is then a specification error.
  bool must_change = false;
};

/// Envelope s(t) in [0, 1] with s(0) = s(T) = 0.
using ShapeFunction = std::function<double(double t_fs, double duration_fs)>;
double sin2_shape(double t_fs, double duration_fs);

struct ControlProblem {
  std::vector<Transition> transitions;
  std::vector<Transition> suppressed;
  double alpha = 0.01;        ///< a.u.
  double duration_fs = 700.0;
  double dt_fs = 0.25;
  ShapeFunction shape = sin2_shape;
  LaserField guess;           ///< empty: default_guess() is used
  std::size_t max_iter = 200;
  double target_fidelity = 0.99;
  Polarization polarization{};
  double stall_tolerance = 1e-8;   ///< |dK| below this counts as stalled
  std::size_t stall_iterations = 10;
  double guess_peak = 5e-4;        ///< a.u.

  std::size_t steps() const;
  /// s(t) at every sample midpoint.
  std::vector<double> shape_samples() const;
  /// Throws SpecError for ill-posed problems.
  void validate(std::size_t n_states) const;
};

/// Overlap and penalty terms. The penalty is alpha * sum eps_j^2 / s_j * dt,
/// the discrete form of the fluence integral weighted by the envelope.
struct FunctionalValue {
  double k = 0.0;
  double overlap = 0.0;     ///< sum_k |<psi_k(T)|phi_k>|^2 over desired transitions
  double suppressed = 0.0;  ///< weighted (negative) terms of suppressed transitions
  double penalty = 0.0;
  std::vector<double> fidelities;            ///< desired transitions
  std::vector<double> suppressed_overlaps;   ///< |<psi(T)|phi>|^2, unweighted
};

/// final_states holds one state per desired transition followed by one per
/// suppressed transition.
FunctionalValue evaluate_functional(const ControlProblem& problem,
                                    std::span<const EigenState> states, const LaserField& field,
                                    std::span<const WaveFunction> final_states);

struct IterationRecord {
  std::size_t iteration = 0;
  double k = 0.0;
  double overlap = 0.0;
  double suppressed = 0.0;
  double penalty = 0.0;
  std::vector<double> fidelities;
  double mean_fidelity = 0.0;
  double fluence = 0.0;  ///< integral of eps^2 dt, a.u.
  double peak = 0.0;
};

struct OptimizationTrace {
  std::vector<IterationRecord> records;
  bool converged = false;
  std::string stop_reason;

  const IterationRecord& last() const { return records.back(); }
  /// Largest decrease of K between consecutive iterations (0 if monotone).
  double worst_decrease() const;
};

struct OptimizationResult {
  LaserField field;
  OptimizationTrace trace;
  std::vector<WaveFunction> final_states;
};

/// Krotov-type immediate-feedback optimization. Each iteration propagates
/// the costates backward with the old field and then sweeps forward,
/// choosing every sample to maximize its own contribution to K. With only
/// non-negative weights K cannot decrease; suppressed transitions add a
/// backtracking safeguard.
OptimizationResult optimize(const ControlProblem& problem, const MolecularSystem& system,
                            std::span<const EigenState> states);

/// Weak Gaussian-enveloped carrier at the mean frequency of the transitions
/// that move population. Zero for a pure identity problem.
LaserField default_guess(const ControlProblem& problem, std::span<const EigenState> states);

/// Pointwise update eps(t) = -(s/alpha) sum_k Im[c_k <psi_fk(t)|mu|psi_ik(t)>].
double update_field(const MolecularSystem& system, std::span<const WaveFunction> forward,
                    std::span<const WaveFunction> backward, std::span<const cplx> overlaps,
                    double alpha, double shape, Polarization pol = {});

/// dF/d eps_j of the weighted overlap term for every sample.
std::vector<double> overlap_gradient(const ControlProblem& problem, const MolecularSystem& system,
                                     std::span<const EigenState> states, const LaserField& field);

/// Weighted overlap term F for a field.
double overlap_term(const ControlProblem& problem, const MolecularSystem& system,
                    std::span<const EigenState> states, const LaserField& field);

/// Relative L2 change of the field when the update is re-derived from its
/// own forward and backward states.
double self_consistency_residual(const ControlProblem& problem, const MolecularSystem& system,
                                 std::span<const EigenState> states, const LaserField& field);

/// Adds negative-weight overlap terms. Throws SpecError when a forbidden
/// pair repeats a desired pair.
ControlProblem suppress_transitions(ControlProblem problem, std::vector<Transition> forbidden,
                                    double weight = 1.0);

/// Final states for every desired and suppressed transition.
std::vector<WaveFunction> propagate_transitions(const ControlProblem& problem,
                                                const MolecularSystem& system,
                                                std::span<const EigenState> states,
                                                const LaserField& field);

// Trace CSV: iter,K,r_1..r_k,mean,fluence,peak
void write_trace_csv(std::ostream& out, const OptimizationTrace& trace);

}  // namespace vibgate
