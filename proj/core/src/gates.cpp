#include "vibgate/gates.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <optional>
#include <ostream>

#include <json.hpp>

#include "vibgate/errors.hpp"
#include "vibgate/propagate.hpp"
#include "vibgate/units.hpp"

namespace vibgate {
namespace {

constexpr double kMinConfidence = 0.5;
const double kInvSqrt2 = 1.0 / std::numbers::sqrt2;

// bits = 2 a + b for label "ab"
Quanta quanta_of(int bits) { return {(bits & 1) + 1, (bits >> 1) + 1}; }

std::string label_of(int bits) {
  return std::string{static_cast<char>('0' + (bits >> 1)), static_cast<char>('0' + (bits & 1))};
}

Transition flip(const QubitEncoding& enc, int from, int to) {
  return {Superposition::basis(enc.at(from)), Superposition::basis(enc.at(to)), 1.0, from != to};
}

Superposition pair(const QubitEncoding& enc, int a, int b, double sign) {
  return {{{enc.at(a), kInvSqrt2}, {enc.at(b), sign * kInvSqrt2}}};
}

// Bits of the 0 and 1 settings of the target qubit for each spectator value.
std::array<std::array<int, 2>, 2> settings(int qubit) {
  if (qubit == 1) return {{{0b00, 0b10}, {0b01, 0b11}}};
  return {{{0b00, 0b01}, {0b10, 0b11}}};
}

using Matrix = std::vector<std::array<cplx, 4>>;

Matrix from_permutation(const std::array<int, 4>& out_of) {
  Matrix m(4, std::array<cplx, 4>{});
  for (int in = 0; in < 4; ++in) m[static_cast<std::size_t>(out_of[in])][in] = 1.0;
  return m;
}

Matrix single_qubit(int qubit, std::array<cplx, 4> u) {
  Matrix m(4, std::array<cplx, 4>{});
  for (const auto& s : settings(qubit))
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c) m[s[r]][s[c]] = u[2 * r + c];
  return m;
}

double wrap_phase(double p) {
  constexpr double pi = std::numbers::pi;
  p = std::remainder(p, 2.0 * pi);
  if (p <= -pi) p += 2.0 * pi;
  return p;
}

}  // namespace

QubitEncoding QubitEncoding::from_states(std::span<const EigenState> states) {
  QubitEncoding enc;
  for (int bits = 0; bits < 4; ++bits) {
    const Quanta q = quanta_of(bits);
    std::optional<std::size_t> found;
    for (std::size_t i = 0; i < states.size(); ++i) {
      if (!(states[i].quanta == q)) continue;
      if (states[i].confidence < kMinConfidence) continue;
      if (found)
        throw SpecError("qubit state |" + label_of(bits) + "> is assigned to two eigenstates");
      found = i;
    }
    if (!found)
      throw SpecError("no eigenstate with n_r = " + std::to_string(q.n_r) +
                      ", n_d = " + std::to_string(q.n_d) + " for |" + label_of(bits) + ">");
    enc.index[static_cast<std::size_t>(bits)] = *found;
  }
  return enc;
}

std::size_t QubitEncoding::operator[](const std::string& label) const {
  if (label.size() != 2 || (label[0] != '0' && label[0] != '1') ||
      (label[1] != '0' && label[1] != '1'))
    throw SpecError("invalid qubit label '" + label + "'");
  return at(2 * (label[0] - '0') + (label[1] - '0'));
}

bool QubitEncoding::contains(std::size_t state) const {
  return std::find(index.begin(), index.end(), state) != index.end();
}

void QubitEncoding::validate(std::span<const EigenState> states,
                             const MolecularSystem& system) const {
  for (int a = 0; a < 4; ++a) {
    const std::size_t i = index[static_cast<std::size_t>(a)];
    if (i >= states.size()) throw SpecError("qubit state index out of range");
    for (int b = 0; b < a; ++b)
      if (index[static_cast<std::size_t>(b)] == i) throw SpecError("qubit states not distinct");
    const Assignment got = try_assign_quanta(states[i].psi, system);
    if (got.confidence < kMinConfidence || !(got.quanta == quanta_of(a)))
      throw SpecError("eigenstate " + std::to_string(i) + " does not carry the quanta of |" +
                      label_of(a) + ">");
  }
}

GateSpec make_gate_spec(const std::string& name, const QubitEncoding& enc) {
  GateSpec spec{name, enc, {}, {}};
  auto& tr = spec.transitions;
  const double s = kInvSqrt2;

  if (name == "identity") {
    for (int b = 0; b < 4; ++b) tr.push_back(flip(enc, b, b));
    spec.unitary = from_permutation({0, 1, 2, 3});
  } else if (name == "not_q1" || name == "not_q2") {
    const int q = name == "not_q1" ? 1 : 2;
    for (const auto& st : settings(q)) {
      tr.push_back(flip(enc, st[0], st[1]));
      tr.push_back(flip(enc, st[1], st[0]));
    }
    spec.unitary = single_qubit(q, {0.0, 1.0, 1.0, 0.0});
  } else if (name == "pi_q1" || name == "pi_q2") {
    const int q = name == "pi_q1" ? 1 : 2;
    for (const auto& st : settings(q)) {
      tr.push_back({pair(enc, st[0], st[1], 1.0), pair(enc, st[0], st[1], -1.0), 1.0, true});
      tr.push_back({pair(enc, st[0], st[1], -1.0), pair(enc, st[0], st[1], 1.0), 1.0, true});
    }
    spec.unitary = single_qubit(q, {1.0, 0.0, 0.0, -1.0});
  } else if (name == "hadamard_q1" || name == "hadamard_q2") {
    const int q = name == "hadamard_q1" ? 1 : 2;
    for (const auto& st : settings(q)) {
      tr.push_back({Superposition::basis(enc.at(st[0])), pair(enc, st[0], st[1], 1.0), 1.0, true});
      tr.push_back({Superposition::basis(enc.at(st[1])), pair(enc, st[0], st[1], -1.0), 1.0, true});
    }
    spec.unitary = single_qubit(q, {s, s, s, -s});
  } else if (name == "cnot_c1") {
    tr.push_back(flip(enc, 0b00, 0b00));
    tr.push_back(flip(enc, 0b01, 0b01));
    tr.push_back(flip(enc, 0b10, 0b11));
    tr.push_back(flip(enc, 0b11, 0b10));
    spec.unitary = from_permutation({0, 1, 3, 2});
  } else if (name == "bell_prep") {
    tr.push_back({pair(enc, 0b00, 0b10, 1.0), pair(enc, 0b00, 0b11, 1.0), 1.0, true});
  } else if (name == "hadamard_prep") {
    tr.push_back({Superposition::basis(enc.at(0b00)), pair(enc, 0b00, 0b01, 1.0), 1.0, true});
  } else {
    throw SpecError("unknown gate '" + name + "'");
  }
  return spec;
}

Superposition parse_state(const std::string& text, const QubitEncoding& enc) {
  std::string s;
  for (char ch : text)
    if (!std::isspace(static_cast<unsigned char>(ch))) s += ch;
  auto label = [&](std::size_t pos) {
    if (pos + 2 > s.size() || (s[pos] != '0' && s[pos] != '1') ||
        (s[pos + 1] != '0' && s[pos + 1] != '1'))
      throw SpecError("expected a qubit label in '" + text + "'");
    return 2 * (s[pos] - '0') + (s[pos + 1] - '0');
  };
  const int a = label(0);
  if (s.size() == 2) return Superposition::basis(enc.at(a));
  if (s.size() != 5 || (s[2] != '+' && s[2] != '-'))
    throw SpecError("malformed state '" + text + "'");
  const int b = label(3);
  if (a == b) throw SpecError("pair repeats a label in '" + text + "'");
  return pair(enc, a, b, s[2] == '+' ? 1.0 : -1.0);
}

std::vector<Transition> parse_transitions(const std::string& text, const QubitEncoding& enc) {
  std::string clean;
  for (char ch : text)
    if (!std::isspace(static_cast<unsigned char>(ch))) clean += ch;

  std::vector<Transition> out;
  std::size_t start = 0;
  while (start <= clean.size()) {
    std::size_t end = clean.find(';', start);
    if (end == std::string::npos) end = clean.size();
    const std::string item = clean.substr(start, end - start);
    start = end + 1;
    if (item.empty()) continue;
    const std::size_t arrow = item.find('>');
    if (arrow == std::string::npos) throw SpecError("missing '>' in '" + item + "'");
    Transition t{parse_state(item.substr(0, arrow), enc), parse_state(item.substr(arrow + 1), enc),
                 1.0, false};
    t.must_change = !t.initial.same_state(t.target);
    out.push_back(std::move(t));
  }
  if (out.empty()) throw SpecError("no transitions given");
  return out;
}

ControlProblem make_problem(const GateSpec& spec, ControlProblem settings) {
  settings.transitions = spec.transitions;
  return settings;
}

double FidelityReport::total_leakage(std::size_t k) const {
  double sum = 0.0;
  for (double p : transitions.at(k).leakage) sum += p;
  return sum;
}

double FidelityReport::unit_sum_error() const {
  double worst = 0.0;
  for (std::size_t k = 0; k < transitions.size(); ++k) {
    const auto& t = transitions[k];
    double qubit = 0.0;
    for (double p : t.qubit_population) qubit += p;
    worst = std::max(worst, std::abs(qubit + total_leakage(k) + t.residual - 1.0));
  }
  return worst;
}

FidelityReport gate_fidelity(const LaserField& field, const GateSpec& spec,
                             const MolecularSystem& system, std::span<const EigenState> states,
                             std::span<const WaveFunction> final_states) {
  if (!final_states.empty() && final_states.size() < spec.transitions.size())
    throw DimensionError("fewer final states than transitions");
  // free phase per eigenstate from one zero-field step of the same
  // propagator, so the zero field gives zero phases at any dt
  const SplitOperator free_op(system, cplx(units::fs_to_au(field.dt_fs), 0.0));
  std::vector<std::optional<cplx>> free_phase(states.size());
  const auto rotation = [&](std::size_t n) {
    if (!free_phase[n]) {
      WaveFunction u = states[n].psi;
      free_op.step(u.amp(), 0.0);
      const double per_step = std::arg(inner_product(states[n].psi, u));
      free_phase[n] = std::polar(1.0, per_step * static_cast<double>(field.steps()));
    }
    return *free_phase[n];
  };

  FidelityReport report;
  report.gate = spec.name;
  for (std::size_t k = 0; k < spec.transitions.size(); ++k) {
    const Transition& tr = spec.transitions[k];
    WaveFunction psi = final_states.empty()
                           ? propagate(tr.initial.build(states), system, field).final_state
                           : final_states[k];
    if (!(psi.grid() == system.grid())) throw DimensionError("final state on a different grid");

    TransitionReport t;
    t.norm = psi.norm_squared();
    t.leakage.assign(states.size(), 0.0);
    std::vector<cplx> c(states.size());
    double projected = 0.0;
    for (std::size_t n = 0; n < states.size(); ++n) {
      c[n] = inner_product(states[n].psi, psi);
      const double p = std::norm(c[n]);
      projected += p;
      bool in_qubit = false;
      for (int b = 0; b < 4; ++b)
        if (spec.encoding.at(b) == n) {
          t.qubit_population[static_cast<std::size_t>(b)] = p;
          in_qubit = true;
        }
      if (!in_qubit) t.leakage[n] = p;
    }
    t.residual = t.norm - projected;

    cplx lab = 0.0;
    cplx rotating = 0.0;
    for (const auto& term : tr.target.terms) {
      const cplx bra = std::conj(c.at(term.index));
      lab += term.weight * bra;
      rotating += term.weight * bra * rotation(term.index);
    }
    t.fidelity = std::norm(lab);
    t.overlap = rotating;
    report.transitions.push_back(std::move(t));
  }
  double sum = 0.0;
  for (const auto& t : report.transitions) sum += t.fidelity;
  report.mean = report.transitions.empty() ? 0.0 : sum / static_cast<double>(report.transitions.size());
  return report;
}

LeakageReport leakage_report(const FidelityReport& report, std::span<const EigenState> states,
                             std::size_t top_n) {
  LeakageReport out;
  if (report.transitions.empty()) return out;
  const double inv = 1.0 / static_cast<double>(report.transitions.size());
  std::vector<double> mean(states.size(), 0.0);
  for (std::size_t k = 0; k < report.transitions.size(); ++k) {
    const auto& t = report.transitions[k];
    if (t.leakage.size() != states.size())
      throw DimensionError("report and eigenstate list differ in size");
    for (std::size_t n = 0; n < mean.size(); ++n) mean[n] += t.leakage[n] * inv;
    out.residual += t.residual * inv;
  }
  std::vector<LeakageEntry> all;
  for (std::size_t n = 0; n < mean.size(); ++n) {
    out.total += mean[n];
    if (mean[n] > 1e-12) all.push_back({n, states[n].quanta, mean[n]});
  }
  std::stable_sort(all.begin(), all.end(),
                   [](const LeakageEntry& a, const LeakageEntry& b) { return a.population > b.population; });
  double top3 = 0.0;
  for (std::size_t i = 0; i < std::min<std::size_t>(3, all.size()); ++i) top3 += all[i].population;
  out.concentration = out.total > 0.0 ? top3 / out.total : 0.0;
  if (all.size() > top_n) all.resize(top_n);
  out.entries = std::move(all);
  return out;
}

PhaseReport phase_report(const FidelityReport& report) {
  PhaseReport out;
  for (const auto& t : report.transitions) {
    out.phases.push_back(std::abs(t.overlap) > 0.0 ? wrap_phase(std::arg(t.overlap)) : 0.0);
    out.unreliable.push_back(t.fidelity < 0.5);
  }
  for (std::size_t k = 1; k < out.phases.size(); ++k)
    out.differences.push_back(wrap_phase(out.phases[k] - out.phases[0]));
  return out;
}

void write_report_json(std::ostream& out, const FidelityReport& report,
                       const LeakageReport& leakage, const PhaseReport& phases) {
  nlohmann::json j;
  j["gate"] = report.gate;
  j["mean_fidelity"] = report.mean;
  j["unit_sum_error"] = report.unit_sum_error();
  nlohmann::json tr = nlohmann::json::array();
  for (std::size_t k = 0; k < report.transitions.size(); ++k) {
    const auto& t = report.transitions[k];
    tr.push_back({{"fidelity", t.fidelity},
                  {"qubit_population", t.qubit_population},
                  {"leakage", report.total_leakage(k)},
                  {"residual", t.residual},
                  {"norm", t.norm},
                  {"phase", k < phases.phases.size() ? phases.phases[k] : 0.0},
                  {"phase_unreliable", k < phases.unreliable.size() && phases.unreliable[k]}});
  }
  j["transitions"] = tr;
  j["phase_differences"] = phases.differences;
  nlohmann::json lk = nlohmann::json::array();
  for (const auto& e : leakage.entries)
    lk.push_back({{"state", e.state}, {"n_r", e.quanta.n_r}, {"n_d", e.quanta.n_d},
                  {"population", e.population}});
  j["leakage"] = {{"total", leakage.total},
                  {"residual", leakage.residual},
                  {"top3_concentration", leakage.concentration},
                  {"states", lk}};
  out << j.dump(2) << '\n';
}

void write_leakage_csv(std::ostream& out, const LeakageReport& leakage) {
  char buf[128];
  out << "state,n_r,n_d,population\n";
  for (const auto& e : leakage.entries) {
    std::snprintf(buf, sizeof buf, "%zu,%d,%d,%.17g\n", e.state, e.quanta.n_r, e.quanta.n_d,
                  e.population);
    out << buf;
  }
}

}  // namespace vibgate
