#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "support.hpp"
#include "vibgate/errors.hpp"
#include "vibgate/gates.hpp"
#include "vibgate/oct.hpp"
#include "vibgate/propagate.hpp"

using namespace vibgate;

namespace {

const QubitEncoding& encoding() {
  static const QubitEncoding enc = QubitEncoding::from_states(test::default_states());
  return enc;
}

bool is_basis(const Superposition& s, std::size_t index) {
  return s.terms.size() == 1 && s.terms[0].index == index && std::abs(s.terms[0].weight - 1.0) < 1e-15;
}

bool moves(const Transition& t, std::size_t from, std::size_t to) {
  return is_basis(t.initial, from) && is_basis(t.target, to);
}

LaserField zeros(double duration, double dt = 0.25) { return LaserField::zeros(dt, duration); }

}  // namespace

TEST_CASE("qubit encoding follows the quanta pattern") {
  const auto& st = test::default_states();
  const auto& enc = encoding();
  const std::array<Quanta, 4> expected = {Quanta{1, 1}, Quanta{2, 1}, Quanta{1, 2}, Quanta{2, 2}};
  for (int b = 0; b < 4; ++b) {
    CHECK(st[enc.at(b)].quanta == expected[static_cast<std::size_t>(b)]);
    CHECK(st[enc.at(b)].confidence > 0.5);
  }
  CHECK(enc["00"] == enc.at(0));
  CHECK(enc["01"] == enc.at(1));
  CHECK(enc["10"] == enc.at(2));
  CHECK(enc["11"] == enc.at(3));
  CHECK(enc.contains(enc.at(3)));
  CHECK_FALSE(enc.contains(0));
  CHECK_THROWS_AS(enc["2"], SpecError);
  CHECK_NOTHROW(enc.validate(st, test::default_system()));

  QubitEncoding dup = enc;
  dup.index[1] = dup.index[0];
  CHECK_THROWS_AS(dup.validate(st, test::default_system()), SpecError);
  QubitEncoding wrong = enc;
  wrong.index[0] = 0;
  CHECK_THROWS_AS(wrong.validate(st, test::default_system()), SpecError);

  const std::vector<EigenState> few(st.begin(), st.begin() + 8);
  CHECK_THROWS_AS(QubitEncoding::from_states(few), SpecError);
}

TEST_CASE("gate transition lists") {
  const auto& enc = encoding();
  const auto q = [&](int b) { return enc.at(b); };

  const auto id = make_gate_spec("identity", enc);
  REQUIRE(id.transitions.size() == 4);
  for (int b = 0; b < 4; ++b) CHECK(moves(id.transitions[static_cast<std::size_t>(b)], q(b), q(b)));

  const auto n2 = make_gate_spec("not_q2", enc);
  REQUIRE(n2.transitions.size() == 4);
  CHECK(moves(n2.transitions[0], q(0b00), q(0b01)));
  CHECK(moves(n2.transitions[1], q(0b01), q(0b00)));
  CHECK(moves(n2.transitions[2], q(0b10), q(0b11)));
  CHECK(moves(n2.transitions[3], q(0b11), q(0b10)));
  for (const auto& t : n2.transitions) CHECK(t.must_change);

  const auto n1 = make_gate_spec("not_q1", enc);
  REQUIRE(n1.transitions.size() == 4);
  CHECK(moves(n1.transitions[0], q(0b00), q(0b10)));
  CHECK(moves(n1.transitions[2], q(0b01), q(0b11)));

  const auto cnot = make_gate_spec("cnot_c1", enc);
  REQUIRE(cnot.transitions.size() == 4);
  CHECK(moves(cnot.transitions[0], q(0b00), q(0b00)));
  CHECK(moves(cnot.transitions[1], q(0b01), q(0b01)));
  CHECK(moves(cnot.transitions[2], q(0b10), q(0b11)));
  CHECK(moves(cnot.transitions[3], q(0b11), q(0b10)));
  REQUIRE(cnot.unitary.size() == 4);
  CHECK(std::abs(cnot.unitary[3][2] - 1.0) < 1e-15);
  CHECK(std::abs(cnot.unitary[2][2]) < 1e-15);

  const double h = std::sqrt(0.5);
  const auto pi = make_gate_spec("pi_q2", enc);
  REQUIRE(pi.transitions.size() == 4);
  const Superposition plus{{{q(0b00), h}, {q(0b01), h}}};
  const Superposition minus{{{q(0b00), h}, {q(0b01), -h}}};
  CHECK(pi.transitions[0].initial.same_state(plus));
  CHECK(pi.transitions[0].target.same_state(minus));
  CHECK(pi.transitions[1].initial.same_state(minus));
  CHECK(pi.transitions[1].target.same_state(plus));

  const auto had = make_gate_spec("hadamard_q2", enc);
  REQUIRE(had.transitions.size() == 4);
  CHECK(is_basis(had.transitions[0].initial, q(0b00)));
  CHECK(had.transitions[0].target.same_state(plus));
  CHECK(is_basis(had.transitions[1].initial, q(0b01)));
  CHECK(had.transitions[1].target.same_state(minus));

  const auto bell = make_gate_spec("bell_prep", enc);
  REQUIRE(bell.transitions.size() == 1);
  CHECK(bell.transitions[0].initial.same_state(Superposition{{{q(0b00), h}, {q(0b10), h}}}));
  CHECK(bell.transitions[0].target.same_state(Superposition{{{q(0b00), h}, {q(0b11), h}}}));
  CHECK(bell.unitary.empty());

  const auto hprep = make_gate_spec("hadamard_prep", enc);
  REQUIRE(hprep.transitions.size() == 1);
  CHECK(is_basis(hprep.transitions[0].initial, q(0b00)));
  CHECK(hprep.transitions[0].target.same_state(plus));

  for (const char* name : kGateNames) CHECK_NOTHROW(make_gate_spec(name, enc));
  CHECK_THROWS_AS(make_gate_spec("toffoli", enc), SpecError);
}

TEST_CASE("state and transition parsing") {
  const auto& enc = encoding();
  CHECK(is_basis(parse_state("01", enc), enc.at(0b01)));
  const auto p = parse_state("00+01", enc);
  REQUIRE(p.terms.size() == 2);
  CHECK(p.norm_squared() == doctest::Approx(1.0));
  const auto m = parse_state("10-11", enc);
  CHECK(m.terms[1].weight.real() == doctest::Approx(-std::sqrt(0.5)));
  CHECK_THROWS_AS(parse_state("0", enc), SpecError);
  CHECK_THROWS_AS(parse_state("00+00", enc), SpecError);
  CHECK_THROWS_AS(parse_state("00*01", enc), SpecError);

  const auto tr = parse_transitions("00>01; 10>11", enc);
  REQUIRE(tr.size() == 2);
  CHECK(moves(tr[0], enc.at(0), enc.at(1)));
  CHECK(moves(tr[1], enc.at(2), enc.at(3)));
  CHECK_THROWS_AS(parse_transitions("00-01", enc), SpecError);
}

TEST_CASE("gate problems carry the optimizer settings") {
  ControlProblem settings;
  settings.alpha = 0.02;
  settings.duration_fs = 500.0;
  const auto prob = make_problem(make_gate_spec("cnot_c1", encoding()), settings);
  CHECK(prob.alpha == 0.02);
  CHECK(prob.duration_fs == 500.0);
  CHECK(prob.transitions.size() == 4);
}

TEST_CASE("zero field on the identity gate") {
  const auto& st = test::default_states();
  const auto spec = make_gate_spec("identity", encoding());
  // fine step: the split-step eigenvectors differ from the cached ones at O(dt^2)
  const auto rep = gate_fidelity(zeros(100.0, 0.05), spec, test::default_system(), st);
  REQUIRE(rep.transitions.size() == 4);
  for (const auto& t : rep.transitions) {
    CHECK(t.fidelity == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(t.residual <= 1e-6);
  }
  CHECK(rep.mean == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(rep.unit_sum_error() <= 1e-6);
  CHECK(leakage_report(rep, st).total <= 1e-6);

  const auto ph = phase_report(rep);
  REQUIRE(ph.phases.size() == 4);
  for (double x : ph.phases) CHECK(std::abs(x) <= 1e-4);
  for (bool u : ph.unreliable) CHECK_FALSE(u);
  CHECK(ph.differences.size() == 3);
}

TEST_CASE("a perfect gate reports no leakage") {
  const auto& st = test::default_states();
  const auto& enc = encoding();
  const auto spec = make_gate_spec("cnot_c1", enc);
  std::vector<WaveFunction> finals;
  for (const auto& t : spec.transitions) finals.push_back(t.target.build(st));
  const auto rep = gate_fidelity(zeros(1.0), spec, test::default_system(), st, finals);
  for (const auto& t : rep.transitions) CHECK(t.fidelity == doctest::Approx(1.0).epsilon(1e-12));
  const auto leak = leakage_report(rep, st);
  CHECK(leak.entries.empty());
  CHECK(leak.total <= 1e-12);
  CHECK(leak.concentration == 0.0);
  CHECK(rep.unit_sum_error() <= 1e-6);
}

TEST_CASE("populations, leakage and phases under a driving field") {
  const auto& st = test::default_states();
  const auto& sys = test::default_system();
  const auto& enc = encoding();
  // strong carrier on the bend fundamental spreads population along the ladder
  LaserField f = zeros(200.0);
  const double w = st[enc.at(1)].energy_hartree - st[enc.at(0)].energy_hartree;
  for (std::size_t j = 0; j < f.steps(); ++j) {
    const double t = f.time_fs(j);
    f.samples[j] = 0.03 * std::pow(std::sin(std::numbers::pi * t / 200.0), 2) *
                   std::cos(w * units::fs_to_au(t));
  }
  const auto spec = make_gate_spec("not_q2", enc);
  const auto rep = gate_fidelity(f, spec, sys, st);
  CHECK(rep.unit_sum_error() <= 1e-6);
  for (std::size_t k = 0; k < 4; ++k) {
    const auto& t = rep.transitions[k];
    double q = 0.0;
    for (double x : t.qubit_population) q += x;
    CHECK(rep.total_leakage(k) == doctest::Approx(1.0 - q - t.residual).epsilon(1e-6));
    for (int b = 0; b < 4; ++b) CHECK(t.leakage[enc.at(b)] == 0.0);
  }

  const auto leak = leakage_report(rep, st, 5);
  CHECK(leak.total > 1e-3);
  REQUIRE_FALSE(leak.entries.empty());
  CHECK(leak.entries.size() <= 5);
  for (std::size_t i = 1; i < leak.entries.size(); ++i)
    CHECK(leak.entries[i].population <= leak.entries[i - 1].population);
  for (const auto& e : leak.entries) CHECK_FALSE(enc.contains(e.state));
  double top3 = 0.0;
  for (std::size_t i = 0; i < std::min<std::size_t>(3, leak.entries.size()); ++i) top3 += leak.entries[i].population;
  CHECK(leak.concentration == doctest::Approx(top3 / leak.total));

  const auto ph = phase_report(rep);
  for (std::size_t k = 0; k < 4; ++k) {
    CHECK(ph.phases[k] > -std::numbers::pi);
    CHECK(ph.phases[k] <= std::numbers::pi);
    CHECK(ph.unreliable[k] == (rep.transitions[k].fidelity < 0.5));
  }

  std::ostringstream js, csv;
  write_report_json(js, rep, leak, ph);
  const auto doc = nlohmann::json::parse(js.str());
  CHECK(doc["gate"] == "not_q2");
  CHECK(doc["transitions"].size() == 4);
  CHECK(doc.contains("leakage"));
  CHECK(doc["phase_differences"].size() == 3);
  write_leakage_csv(csv, leak);
  CHECK(csv.str().rfind("state,n_r,n_d,population\n", 0) == 0);
}

TEST_CASE("zero field on a NOT spec flags unreliable phases") {
  const auto spec = make_gate_spec("not_q2", encoding());
  const auto rep = gate_fidelity(zeros(50.0), spec, test::default_system(), test::default_states());
  CHECK(rep.mean <= 1e-6);
  const auto ph = phase_report(rep);
  for (bool u : ph.unreliable) CHECK(u);
}

TEST_CASE("single transition gives one phase and no differences") {
  const auto spec = make_gate_spec("hadamard_prep", encoding());
  const auto rep = gate_fidelity(zeros(50.0), spec, test::default_system(), test::default_states());
  REQUIRE(rep.transitions.size() == 1);
  // cross amplitude <01|U 00> of order dt^2 enters linearly
  CHECK(rep.transitions[0].fidelity == doctest::Approx(0.5).epsilon(1e-3));
  const auto ph = phase_report(rep);
  CHECK(ph.phases.size() == 1);
  CHECK(ph.differences.empty());
}

TEST_CASE("Bell and Hadamard superpositions revive at the gap period") {
  const auto& st = test::default_states();
  const auto energies = energies_hartree(st);
  const auto& enc = encoding();
  for (const char* name : {"bell_prep", "hadamard_prep"}) {
    const auto spec = make_gate_spec(name, enc);
    std::vector<cplx> c(st.size(), 0.0);
    for (const auto& t : spec.transitions[0].target.terms) c[t.index] = t.weight;
    const double dt = 0.1;
    const auto predicted = predicted_revivals(c, energies);
    REQUIRE(predicted.size() == 1);
    const auto a = autocorrelation(c, energies, 3.0 * predicted[0], dt);
    const auto seen = first_revival(a, dt);
    REQUIRE(seen.has_value());
    CAPTURE(name);
    CHECK(std::abs(*seen - predicted[0]) <= dt);
  }
}

TEST_CASE("suppressed 00 to 10 stays empty during a NOT on qubit 2") {
  const auto& sys = test::default_system();
  const auto& st = test::default_states();
  const auto& enc = encoding();
  ControlProblem settings;
  settings.duration_fs = 700.0;
  settings.dt_fs = 0.25;
  settings.alpha = 0.01;
  settings.max_iter = 80;
  settings.target_fidelity = 0.95;
  settings.guess_peak = 5e-4;
  const Transition forbidden{Superposition::basis(enc["00"]), Superposition::basis(enc["10"]), 1.0, true};
  const auto prob = suppress_transitions(make_problem(make_gate_spec("not_q2", enc), settings), {forbidden});
  const auto res = optimize(prob, sys, st);
  CHECK(res.trace.converged);
  CHECK(res.trace.worst_decrease() <= 1e-9);
  const auto finals = propagate_transitions(prob, sys, st, res.field);
  REQUIRE(finals.size() == 5);
  const double leaked = std::norm(inner_product(st[enc["10"]].psi, finals.back()));
  MESSAGE("mean fidelity " << res.trace.last().mean_fidelity << " after " << res.trace.records.size() - 1
                           << " iterations, 00 -> 10 population " << leaked);
  CHECK(leaked <= 0.01);
}
