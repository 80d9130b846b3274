#pragma once

#include <array>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "vibgate/eigensolve.hpp"
#include "vibgate/field.hpp"
#include "vibgate/oct.hpp"

namespace vibgate {

/// Two-qubit register on four eigenstates. Label "ab": qubit 1 (a) is the
/// stretch mode with n_d = a + 1, qubit 2 (b) the bend mode with n_r = b + 1.
struct QubitEncoding {
  std::array<std::size_t, 4> index{};  ///< by label value 00, 01, 10, 11

  /// Locates the four states by their quanta. Throws SpecError if a state
  /// is missing or ambiguously assigned.
  static QubitEncoding from_states(std::span<const EigenState> states);

  std::size_t operator[](const std::string& label) const;
  std::size_t at(int bits) const { return index[static_cast<std::size_t>(bits)]; }
  bool contains(std::size_t state) const;
  /// Throws SpecError unless the indices are distinct and the quanta of the
  /// mapped states (recomputed with assign_quanta) match the pattern.
  void validate(std::span<const EigenState> states, const MolecularSystem& system) const;
};

inline constexpr std::array<const char*, 10> kGateNames = {
    "identity",    "not_q1",      "not_q2",  "pi_q1",     "pi_q2",
    "hadamard_q1", "hadamard_q2", "cnot_c1", "bell_prep", "hadamard_prep"};

struct GateSpec {
  std::string name;
  QubitEncoding encoding;
  std::vector<Transition> transitions;
  /// Intended action on the qubit basis (rows: outputs, columns: inputs),
  /// defined up to a phase per row. Empty for state preparations.
  std::vector<std::array<cplx, 4>> unitary;
};

/// Throws SpecError for unknown names.
GateSpec make_gate_spec(const std::string& name, const QubitEncoding& enc);

/// Parses a qubit label ("01") or an equal-weight signed pair ("00+01",
/// "10-11"). Throws SpecError on malformed input.
Superposition parse_state(const std::string& text, const QubitEncoding& enc);

/// Parses "initial>target" pairs separated by ';'.
std::vector<Transition> parse_transitions(const std::string& text, const QubitEncoding& enc);

/// Control problem for a gate with the given optimizer settings.
ControlProblem make_problem(const GateSpec& spec, ControlProblem settings);

struct TransitionReport {
  double fidelity = 0.0;                 ///< |<psi(T)|phi_f>|^2
  std::array<double, 4> qubit_population{};
  std::vector<double> leakage;           ///< per eigenstate; zero on qubit states
  double residual = 0.0;                 ///< population outside every cached state
  double norm = 0.0;
  cplx overlap;                          ///< <psi(T)|U0(T) phi_f>, U0 the zero-field propagator
};

struct FidelityReport {
  std::string gate;
  std::vector<TransitionReport> transitions;
  double mean = 0.0;

  double total_leakage(std::size_t k) const;
  /// max_k |qubit + leakage + residual - 1|
  double unit_sum_error() const;
};

/// Propagates every initial state and projects onto the target and all
/// cached eigenstates.
FidelityReport gate_fidelity(const LaserField& field, const GateSpec& spec,
                             const MolecularSystem& system, std::span<const EigenState> states,
                             std::span<const WaveFunction> final_states = {});

struct LeakageEntry {
  std::size_t state;
  Quanta quanta;
  double population;  ///< mean over transitions
};

struct LeakageReport {
  std::vector<LeakageEntry> entries;  ///< descending, top_n at most
  double total = 0.0;                 ///< mean population in non-qubit cached states
  double residual = 0.0;              ///< mean population outside every cached state
  double concentration = 0.0;         ///< share of the total in the top three
};

LeakageReport leakage_report(const FidelityReport& report, std::span<const EigenState> states,
                             std::size_t top_n = 10);

struct PhaseReport {
  std::vector<double> phases;       ///< (-pi, pi]
  std::vector<bool> unreliable;     ///< fidelity below 0.5
  std::vector<double> differences;  ///< phases[k] - phases[0] for k >= 1, wrapped
};

/// Phases of <psi_k(T)|U0(T) phi_fk>, i.e. measured against the
/// freely evolved target so that the zero field gives zero phases.
PhaseReport phase_report(const FidelityReport& report);

void write_report_json(std::ostream& out, const FidelityReport& report,
                       const LeakageReport& leakage, const PhaseReport& phases);
// CSV: state,n_r,n_d,population
void write_leakage_csv(std::ostream& out, const LeakageReport& leakage);

}  // namespace vibgate
