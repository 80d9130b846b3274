#include <cmath>
#include <vector>

#include <benchmark/benchmark.h>

#include "vibgate/fft.hpp"
#include "vibgate/molsys.hpp"
#include "vibgate/oct.hpp"
#include "vibgate/propagate.hpp"
#include "vibgate/pulsetools.hpp"

using namespace vibgate;

namespace {

const MolecularSystem& system() {
  static const MolecularSystem sys = build_model(ModelParams{}, default_grid());
  return sys;
}

WaveFunction packet() {
  const MolecularSystem& sys = system();
  WaveFunction psi = WaveFunction::sample(sys.grid(), [&](double r, double d) {
    const double x = (r - sys.r0()) / 0.2, y = (d - sys.d0()) / 0.1;
    return cplx(std::exp(-0.5 * (x * x + y * y)), 0.0);
  });
  psi.normalize();
  return psi;
}

LaserField carrier(std::size_t n) {
  LaserField f(0.25, std::vector<double>(n));
  const double w = units::wavenumber_to_angular_per_fs(727.0);
  for (std::size_t j = 0; j < n; ++j) f.samples[j] = 0.01 * std::cos(w * f.time_fs(j));
  return f;
}

void BM_Fft2D(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Fft2D fft(n, n);
  std::vector<cplx> data(n * n, cplx(1.0, 0.5));
  for (auto _ : state) {
    fft.forward(data);
    fft.backward(data);
    benchmark::DoNotOptimize(data.data());
  }
}
BENCHMARK(BM_Fft2D)->Arg(32)->Arg(64)->Arg(128);

void BM_SplitStep(benchmark::State& state) {
  const SplitOperator op(system(), cplx(units::fs_to_au(0.25), 0.0));
  WaveFunction psi = packet();
  for (auto _ : state) {
    op.step(psi.amp(), 0.01);
    benchmark::DoNotOptimize(psi.amp().data());
  }
}
BENCHMARK(BM_SplitStep);

void BM_Propagate700fs(benchmark::State& state) {
  const WaveFunction psi = packet();
  const LaserField f = carrier(2800);
  for (auto _ : state) benchmark::DoNotOptimize(propagate(psi, system(), f).final_state.norm());
  state.SetItemsProcessed(state.iterations() * 2800);
}
BENCHMARK(BM_Propagate700fs)->Unit(benchmark::kMillisecond);

void BM_PhaseSums(benchmark::State& state) {
  const SplitOperator op(system(), cplx(units::fs_to_au(0.25), 0.0));
  const WaveFunction psi = packet();
  for (auto _ : state) benchmark::DoNotOptimize(op.phase_sums(psi.amp(), 0.01));
}
BENCHMARK(BM_PhaseSums);

void BM_Spectrum(benchmark::State& state) {
  const LaserField f = carrier(2800);
  for (auto _ : state) benchmark::DoNotOptimize(spectrum(f).fwhm());
}
BENCHMARK(BM_Spectrum);

}  // namespace

BENCHMARK_MAIN();
