#include "vibgate/oct.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>

#include "vibgate/errors.hpp"
#include "vibgate/propagate.hpp"
#include "vibgate/units.hpp"

namespace vibgate {
namespace {

using Vec = std::vector<cplx>;

Vec to_vec(const WaveFunction& w) { return Vec(w.amp().begin(), w.amp().end()); }

void conjugate(Vec& v) {
  for (cplx& a : v) a = std::conj(a);
}

cplx overlap(const Vec& a, const Vec& b, double cell) {
  double re = 0.0, im = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n) {
    re += a[n].real() * b[n].real() + a[n].imag() * b[n].imag();
    im += a[n].real() * b[n].imag() - a[n].imag() * b[n].real();
  }
  return cplx(re, im) * cell;
}

// Fixed pieces of one control problem on one system.
struct Engine {
  const ControlProblem& problem;
  const MolecularSystem& system;
  SplitOperator op;
  std::size_t n_steps;
  double dt_au;
  double cell;
  std::vector<double> shape;
  std::vector<Transition> all;  // desired, then suppressed
  std::vector<Vec> initial, target;

  Engine(const ControlProblem& p, const MolecularSystem& s, std::span<const EigenState> states)
      : problem(p),
        system(s),
        op(s, cplx(units::fs_to_au(p.dt_fs), 0.0), p.polarization),
        n_steps(p.steps()),
        dt_au(units::fs_to_au(p.dt_fs)),
        cell(s.grid().cell()),
        shape(p.shape_samples()) {
    all = p.transitions;
    all.insert(all.end(), p.suppressed.begin(), p.suppressed.end());
    for (const auto& t : all) {
      initial.push_back(to_vec(t.initial.build(states)));
      target.push_back(to_vec(t.target.build(states)));
    }
  }

  std::size_t count() const { return all.size(); }

  std::vector<Vec> forward(const std::vector<double>& field) const {
    std::vector<Vec> out = initial;
    for (auto& v : out) op.steps(v, field);
    return out;
  }

  // chi_k(T) = w_k <phi_k|psi_k(T)> phi_k
  std::vector<Vec> costates_at_end(const std::vector<Vec>& finals) const {
    std::vector<Vec> chi(count());
    for (std::size_t k = 0; k < count(); ++k) {
      const cplx c = all[k].weight * overlap(target[k], finals[k], cell);
      chi[k] = target[k];
      for (cplx& a : chi[k]) a *= c;
    }
    return chi;
  }

  // U^dagger applied through the forward kernel: conj . U(reversed) . conj
  void backward(std::vector<Vec>& chi, const std::vector<double>& field) const {
    std::vector<double> rev(field.rbegin(), field.rend());
    for (auto& v : chi) {
      conjugate(v);
      op.steps(v, rev);
      conjugate(v);
    }
  }

  FunctionalValue evaluate(const std::vector<double>& field, const std::vector<Vec>& finals,
                           std::span<const EigenState> states) const {
    std::vector<WaveFunction> w;
    for (const auto& f : finals) w.emplace_back(system.grid(), f);
    return evaluate_functional(problem, states, LaserField(problem.dt_fs, field), w);
  }

  // W = cell * sum_k conj(chi_k) psi_k
  void correlation(const std::vector<Vec>& psi, const std::vector<Vec>& chi, Vec& w) const {
    std::fill(w.begin(), w.end(), cplx{});
    for (std::size_t k = 0; k < count(); ++k) {
      if (all[k].weight == 0.0) continue;
      const Vec& a = chi[k];
      const Vec& b = psi[k];
      for (std::size_t n = 0; n < w.size(); ++n) w[n] += std::conj(a[n]) * b[n];
    }
    for (cplx& x : w) x *= cell;
  }

  // Sweeps forward with a fixed field, handing the phase sums of the
  // correlation at every step to fn(j, sums).
  template <typename Fn>
  void fixed_field_sweep(const std::vector<double>& field, Fn&& fn) const {
    std::vector<Vec> psi = initial;
    std::vector<Vec> chi = costates_at_end(forward(field));
    backward(chi, field);
    for (auto& v : psi) op.kinetic(v, true);
    for (auto& v : chi) op.kinetic(v, true);
    Vec w(system.grid().size());
    for (std::size_t j = 0; j < n_steps; ++j) {
      correlation(psi, chi, w);
      fn(j, op.phase_sums(w, 0.0));
      if (j + 1 == n_steps) break;
      for (auto* set : {&psi, &chi})
        for (auto& v : *set) {
          op.potential_and_field(v, field[j]);
          op.kinetic(v, false);
        }
    }
  }
};

double mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double fluence(const std::vector<double>& field, double dt_au) {
  double s = 0.0;
  for (double e : field) s += e * e;
  return s * dt_au;
}

double peak(const std::vector<double>& field) {
  double m = 0.0;
  for (double e : field) m = std::max(m, std::abs(e));
  return m;
}

IterationRecord make_record(std::size_t iter, const FunctionalValue& f,
                            const std::vector<double>& field, double dt_au) {
  IterationRecord r;
  r.iteration = iter;
  r.k = f.k;
  r.overlap = f.overlap;
  r.suppressed = f.suppressed;
  r.penalty = f.penalty;
  r.fidelities = f.fidelities;
  r.mean_fidelity = mean(f.fidelities);
  r.fluence = fluence(field, dt_au);
  r.peak = peak(field);
  return r;
}

double expected_energy(const Superposition& s, std::span<const EigenState> states) {
  double e = 0.0, n = 0.0;
  for (const auto& t : s.terms) {
    e += std::norm(t.weight) * states[t.index].energy_hartree;
    n += std::norm(t.weight);
  }
  return e / n;
}

}  // namespace

double Superposition::norm_squared() const {
  double s = 0.0;
  for (const auto& t : terms) s += std::norm(t.weight);
  return s;
}

WaveFunction Superposition::build(std::span<const EigenState> states) const {
  if (states.empty()) throw SpecError("no eigenstates available");
  WaveFunction out(states.front().psi.grid());
  for (const auto& t : terms) {
    if (t.index >= states.size())
      throw SpecError("eigenstate index " + std::to_string(t.index) + " out of range");
    WaveFunction term = states[t.index].psi;
    term *= t.weight;
    out += term;
  }
  return out;
}

bool Superposition::same_state(const Superposition& other, double tol) const {
  // |<a|b>| == 1 for normalized combinations of orthonormal states
  cplx s{};
  for (const auto& a : terms)
    for (const auto& b : other.terms)
      if (a.index == b.index) s += std::conj(a.weight) * b.weight;
  return std::abs(std::abs(s) - 1.0) <= tol;
}

double sin2_shape(double t_fs, double duration_fs) {
  if (t_fs <= 0.0 || t_fs >= duration_fs) return 0.0;
  const double x = std::sin(std::numbers::pi * t_fs / duration_fs);
  return x * x;
}

std::size_t ControlProblem::steps() const {
  return static_cast<std::size_t>(std::llround(duration_fs / dt_fs));
}

std::vector<double> ControlProblem::shape_samples() const {
  const std::size_t n = steps();
  const double t_total = dt_fs * static_cast<double>(n);
  std::vector<double> s(n);
  for (std::size_t j = 0; j < n; ++j) s[j] = shape((static_cast<double>(j) + 0.5) * dt_fs, t_total);
  return s;
}

void ControlProblem::validate(std::size_t n_states) const {
  if (transitions.empty()) throw SpecError("a control problem needs at least one transition");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw SpecError("alpha must be > 0");
  if (!(dt_fs > 0.0) || !(duration_fs > dt_fs)) throw SpecError("need 0 < dt < T");
  if (std::abs(static_cast<double>(steps()) * dt_fs - duration_fs) > 1e-9 * duration_fs)
    throw SpecError("T must be a whole number of time steps");
  if (!shape) throw SpecError("missing shape function");
  if (shape(0.0, duration_fs) != 0.0 || shape(duration_fs, duration_fs) != 0.0)
    throw SpecError("shape must vanish at t = 0 and t = T");
  for (double s : shape_samples())
    if (!(s > 0.0 && s <= 1.0)) throw SpecError("shape must lie in (0, 1] inside the interval");
  if (!(target_fidelity >= 0.0 && target_fidelity <= 1.0))
    throw SpecError("target fidelity must lie in [0, 1]");
  auto check = [&](const Transition& t, bool desired) {
    for (const auto* s : {&t.initial, &t.target}) {
      if (s->terms.empty()) throw SpecError("empty superposition");
      for (const auto& term : s->terms)
        if (term.index >= n_states)
          throw SpecError("eigenstate index " + std::to_string(term.index) + " out of range");
      if (std::abs(s->norm_squared() - 1.0) > 1e-10) throw SpecError("superposition is not normalized");
    }
    if (desired && !(t.weight > 0.0)) throw SpecError("desired transitions need positive weight");
    if (t.must_change && t.initial.same_state(t.target))
      throw SpecError("degenerate transition: initial and target states coincide");
  };
  for (const auto& t : transitions) check(t, true);
  for (const auto& t : suppressed) check(t, false);
  if (!guess.samples.empty()) {
    if (guess.steps() != steps() || std::abs(guess.dt_fs - dt_fs) > 1e-12)
      throw SpecError("guess field does not match T and dt");
    guess.validate();
  }
}

FunctionalValue evaluate_functional(const ControlProblem& problem,
                                    std::span<const EigenState> states, const LaserField& field,
                                    std::span<const WaveFunction> final_states) {
  const std::size_t nd = problem.transitions.size();
  if (final_states.size() != nd + problem.suppressed.size())
    throw DimensionError("one final state per transition required");
  FunctionalValue f;
  for (std::size_t k = 0; k < final_states.size(); ++k) {
    const bool desired = k < nd;
    const Transition& t = desired ? problem.transitions[k] : problem.suppressed[k - nd];
    const double r = std::norm(inner_product(final_states[k], t.target.build(states)));
    if (desired) {
      f.fidelities.push_back(r);
      f.overlap += t.weight * r;
    } else {
      f.suppressed_overlaps.push_back(r);
      f.suppressed += t.weight * r;
    }
  }
  const double t_total = field.duration_fs();
  const double dt_au = units::fs_to_au(field.dt_fs);
  for (std::size_t j = 0; j < field.steps(); ++j) {
    const double e = field.samples[j];
    if (e == 0.0) continue;
    const double s = problem.shape(field.time_fs(j), t_total);
    f.penalty += problem.alpha * e * e / s * dt_au;
  }
  f.k = f.overlap + f.suppressed - f.penalty;
  return f;
}

double OptimizationTrace::worst_decrease() const {
  double w = 0.0;
  for (std::size_t i = 1; i < records.size(); ++i)
    w = std::max(w, records[i - 1].k - records[i].k);
  return w;
}

LaserField default_guess(const ControlProblem& problem, std::span<const EigenState> states) {
  const std::size_t n = problem.steps();
  std::vector<double> moving, gaps;
  for (const auto& t : problem.transitions) {
    const double de = std::abs(expected_energy(t.target, states) - expected_energy(t.initial, states));
    if (de > 1e-9) moving.push_back(de);
    std::vector<std::size_t> support;
    for (const auto* s : {&t.initial, &t.target})
      for (const auto& term : s->terms) support.push_back(term.index);
    std::sort(support.begin(), support.end());
    support.erase(std::unique(support.begin(), support.end()), support.end());
    for (std::size_t a = 0; a < support.size(); ++a)
      for (std::size_t b = a + 1; b < support.size(); ++b)
        gaps.push_back(std::abs(states[support[b]].energy_hartree - states[support[a]].energy_hartree));
  }
  const double omega = !moving.empty() ? mean(moving) : mean(gaps);
  LaserField f = LaserField::zeros(problem.dt_fs, problem.dt_fs * static_cast<double>(n));
  if (!(omega > 0.0)) return f;

  const double t_total = units::fs_to_au(f.duration_fs());
  const double fwhm = t_total / 4.0;
  const auto s = problem.shape_samples();
  double m = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double t = units::fs_to_au(f.time_fs(j));
    const double x = (t - 0.5 * t_total) / fwhm;
    f.samples[j] = std::exp(-4.0 * std::numbers::ln2 * x * x) * s[j] * std::cos(omega * t);
    m = std::max(m, std::abs(f.samples[j]));
  }
  for (double& e : f.samples) e *= problem.guess_peak / m;
  return f;
}

double update_field(const MolecularSystem& system, std::span<const WaveFunction> forward,
                    std::span<const WaveFunction> backward, std::span<const cplx> overlaps,
                    double alpha, double shape, Polarization pol) {
  if (forward.size() != backward.size() || forward.size() != overlaps.size())
    throw DimensionError("one forward state, backward state and overlap per transition");
  if (!(alpha > 0.0)) throw ParameterError("alpha must be > 0");
  double s = 0.0;
  for (std::size_t k = 0; k < forward.size(); ++k)
    s += std::imag(overlaps[k] * dipole_matrix_element(system, backward[k], forward[k], pol));
  return -(shape / alpha) * s;
}

std::vector<WaveFunction> propagate_transitions(const ControlProblem& problem,
                                                const MolecularSystem& system,
                                                std::span<const EigenState> states,
                                                const LaserField& field) {
  problem.validate(states.size());
  if (field.steps() != problem.steps()) throw DimensionError("field does not match the problem");
  const Engine eng(problem, system, states);
  std::vector<WaveFunction> out;
  for (auto& v : eng.forward(field.samples)) out.emplace_back(system.grid(), std::move(v));
  return out;
}

double overlap_term(const ControlProblem& problem, const MolecularSystem& system,
                    std::span<const EigenState> states, const LaserField& field) {
  const auto finals = propagate_transitions(problem, system, states, field);
  const auto f = evaluate_functional(problem, states, field, finals);
  return f.overlap + f.suppressed;
}

std::vector<double> overlap_gradient(const ControlProblem& problem, const MolecularSystem& system,
                                     std::span<const EigenState> states, const LaserField& field) {
  problem.validate(states.size());
  if (field.steps() != problem.steps()) throw DimensionError("field does not match the problem");
  const Engine eng(problem, system, states);
  std::vector<double> g(eng.n_steps);
  // F(eps_j) enters through exp(i theta eps_j): dF/d eps_j = 2 Re(i S1).
  eng.fixed_field_sweep(field.samples,
                        [&](std::size_t j, const SplitOperator::PhaseSums& s) { g[j] = -2.0 * s.s1.imag(); });
  return g;
}

double self_consistency_residual(const ControlProblem& problem, const MolecularSystem& system,
                                 std::span<const EigenState> states, const LaserField& field) {
  problem.validate(states.size());
  if (field.steps() != problem.steps()) throw DimensionError("field does not match the problem");
  const Engine eng(problem, system, states);
  double diff = 0.0, ref = 0.0;
  eng.fixed_field_sweep(field.samples, [&](std::size_t j, const SplitOperator::PhaseSums& s) {
    const double lambda = problem.alpha / eng.shape[j];
    const double e = -s.s1.imag() / (lambda * eng.dt_au);
    diff += (e - field.samples[j]) * (e - field.samples[j]);
    ref += field.samples[j] * field.samples[j];
  });
  if (ref == 0.0) return diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return std::sqrt(diff / ref);
}

ControlProblem suppress_transitions(ControlProblem problem, std::vector<Transition> forbidden,
                                    double weight) {
  if (!(weight >= 0.0)) throw SpecError("suppression weight must be >= 0");
  for (auto& f : forbidden) {
    for (const auto& d : problem.transitions)
      if (d.initial.same_state(f.initial) && d.target.same_state(f.target))
        throw SpecError("forbidden transition duplicates a desired transition");
    f.weight = -weight;
    f.must_change = false;
    problem.suppressed.push_back(std::move(f));
  }
  return problem;
}

OptimizationResult optimize(const ControlProblem& problem, const MolecularSystem& system,
                            std::span<const EigenState> states) {
  problem.validate(states.size());
  const Engine eng(problem, system, states);
  const std::size_t n = eng.n_steps;
  const double dt = eng.dt_au;
  const double guard = kIonizationGuard;
  bool any_negative = false;
  for (const auto& t : eng.all) any_negative |= t.weight < 0.0;

  std::vector<double> field =
      problem.guess.samples.empty() ? default_guess(problem, states).samples : problem.guess.samples;
  std::vector<Vec> finals = eng.forward(field);
  FunctionalValue value = eng.evaluate(field, finals, states);

  OptimizationResult result;
  result.trace.records.push_back(make_record(0, value, field, dt));
  std::size_t stalled = 0;
  Vec w(system.grid().size());

  auto finish = [&](bool converged, std::string reason) {
    result.trace.converged = converged;
    result.trace.stop_reason = std::move(reason);
    result.field = LaserField(problem.dt_fs, field);
    for (auto& v : finals) result.final_states.emplace_back(system.grid(), std::move(v));
    return result;
  };

  for (std::size_t iter = 1;; ++iter) {
    if (result.trace.last().mean_fidelity >= problem.target_fidelity)
      return finish(true, "target fidelity reached");
    if (stalled >= problem.stall_iterations) return finish(false, "objective stalled");
    if (iter > problem.max_iter) return finish(false, "iteration limit reached");

    std::vector<Vec> chi = eng.costates_at_end(finals);
    eng.backward(chi, field);
    std::vector<Vec> psi = eng.initial;
    for (auto& v : psi) eng.op.kinetic(v, true);
    for (auto& v : chi) eng.op.kinetic(v, true);

    std::vector<double> next(n);
    for (std::size_t j = 0; j < n; ++j) {
      const double old = field[j];
      const double lambda_dt = problem.alpha / eng.shape[j] * dt;
      eng.correlation(psi, chi, w);
      // Per-step gain g(e) = 2 Re[S0(e - old) - S0(0)] - lambda dt (e^2 - old^2).
      const auto base = eng.op.phase_sums(w, 0.0);
      auto gain = [&](double e, const SplitOperator::PhaseSums& s) {
        return 2.0 * (s.s0 - base.s0).real() - lambda_dt * (e * e - old * old);
      };
      double e = -base.s1.imag() / lambda_dt;
      for (int it = 0; it < 30; ++it) {
        const auto s = eng.op.phase_sums(w, e - old);
        const double g1 = -2.0 * s.s1.imag() - 2.0 * lambda_dt * e;
        const double g2 = -2.0 * s.s2.real() - 2.0 * lambda_dt;
        if (!(g2 < 0.0)) break;
        const double step = -g1 / g2;
        e += step;
        if (std::abs(step) <= 1e-15 * std::max(1e-3, std::abs(e))) break;
      }
      e = std::clamp(e, -guard, guard);
      if (!std::isfinite(e) || gain(e, eng.op.phase_sums(w, e - old)) < 0.0) e = old;
      next[j] = e;

      const bool last = j + 1 == n;
      for (auto& v : psi) {
        eng.op.potential_and_field(v, e);
        eng.op.kinetic(v, last);
      }
      if (!last)
        for (auto& v : chi) {
          eng.op.potential_and_field(v, old);
          eng.op.kinetic(v, false);
        }
    }

    FunctionalValue next_value = eng.evaluate(next, psi, states);
    if (any_negative && next_value.k < value.k) {
      // Negative weights break the convexity bound; back off toward the
      // previous field until K does not decrease.
      bool accepted = false;
      for (double beta = 0.5; beta > 1.0 / 256.0; beta *= 0.5) {
        std::vector<double> trial(n);
        for (std::size_t j = 0; j < n; ++j) trial[j] = field[j] + beta * (next[j] - field[j]);
        auto trial_finals = eng.forward(trial);
        auto trial_value = eng.evaluate(trial, trial_finals, states);
        if (trial_value.k >= value.k) {
          next = std::move(trial);
          psi = std::move(trial_finals);
          next_value = std::move(trial_value);
          accepted = true;
          break;
        }
      }
      if (!accepted) return finish(false, "no ascent direction for the suppressed objective");
    }

    const double dk = next_value.k - value.k;
    stalled = std::abs(dk) < problem.stall_tolerance ? stalled + 1 : 0;
    field = std::move(next);
    finals = std::move(psi);
    value = std::move(next_value);
    result.trace.records.push_back(make_record(iter, value, field, dt));
  }
}

void write_trace_csv(std::ostream& out, const OptimizationTrace& trace) {
  const std::size_t k = trace.records.empty() ? 0 : trace.records.front().fidelities.size();
  out << "iter,K";
  for (std::size_t i = 1; i <= k; ++i) out << ",r_" << i;
  out << ",mean,fluence,peak\n";
  char buf[64];
  auto put = [&](double x) {
    std::snprintf(buf, sizeof buf, ",%.17g", x);
    out << buf;
  };
  for (const auto& r : trace.records) {
    out << r.iteration;
    put(r.k);
    for (double f : r.fidelities) put(f);
    put(r.mean_fidelity);
    put(r.fluence);
    put(r.peak);
    out << '\n';
  }
}

}  // namespace vibgate
