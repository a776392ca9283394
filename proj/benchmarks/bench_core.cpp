#include <benchmark/benchmark.h>

#include "spinres/dyson_polymer.hpp"
#include "spinres/fcs_entanglement.hpp"
#include "spinres/gibbs_engine.hpp"
#include "spinres/ising_exact.hpp"
#include "spinres/mobius_potential.hpp"
#include "spinres/quadrature.hpp"
#include "spinres/spin_algebra.hpp"

using namespace spinres;

static void BM_GibbsState(benchmark::State& state) {
  Interaction chain = transverse_ising(1.0, 1.0, static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(gibbs_state(chain, 0.5));
  }
}

BENCHMARK(BM_GibbsState)->Arg(6)->Arg(8)->Arg(10);

static void BM_GroundIterative(benchmark::State& state) {
  Interaction chain = transverse_ising(1.0, 2.0, static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(ground_state(chain, GroundMethod::iterative, 1));
  }
}

BENCHMARK(BM_GroundIterative)->Arg(10)->Arg(12);

static void BM_SubsetWeightFullMask(benchmark::State& state) {
  Interaction chain = transverse_ising(1.0, 1.0, static_cast<int>(state.range(0)));
  for (auto _ : state) {
    SubsetWeights sw(chain, pauli_z(), 0.5);
    benchmark::DoNotOptimize(sw.weight(sw.full_mask()));
  }
}

BENCHMARK(BM_SubsetWeightFullMask)->Arg(4)->Arg(6);

static void BM_ToeplitzLogDet(benchmark::State& state) {
  QuadratureRule quad = periodic_trapezoid(8 * static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        toeplitz_log_determinant(2.0, 0.5, static_cast<int>(state.range(0)), quad));
  }
}

BENCHMARK(BM_ToeplitzLogDet)->Arg(16)->Arg(64)->Arg(256);

static void BM_DiagramDensity(benchmark::State& state) {
  PerturbationModel model = weak_exchange_model(0.5, 6);
  LocalMeasurement mb = local_measurement(pauli_x());
  DiagramSpec spec;
  spec.beta = 1.0;
  spec.times = {0.2, 0.5, 0.8};
  spec.s_sets = {{}, {0, 1}, {0, 2}, {1, 2}};
  spec.b_sets = {{0, 1}, {1, 2}, {0, 1}};
  const std::vector<int> labels(6, 0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(diagram_density(model, mb, spec, labels));
  }
}

BENCHMARK(BM_DiagramDensity);

static void BM_TruncatedDyson(benchmark::State& state) {
  Interaction h0 = polarized_field(4);
  Interaction v = ising_exchange(-0.2, 4);
  for (auto _ : state) {
    benchmark::DoNotOptimize(truncated_dyson(h0, v, 0.5, static_cast<int>(state.range(0))));
  }
}

BENCHMARK(BM_TruncatedDyson)->Arg(1)->Arg(2)->Arg(3);

static void BM_KpCertificate(benchmark::State& state) {
  PerturbationModel model = weak_exchange_model(6.0, 12);
  LocalMeasurement mb = local_measurement(pauli_x());
  KPParams params;
  params.beta = 20.0;
  params.gamma = observable_gamma(mb, model.site_projector);
  for (auto _ : state) {
    benchmark::DoNotOptimize(kp_certificate(params, model.upsilon, 12));
  }
}

BENCHMARK(BM_KpCertificate);

static void BM_ConditionedCorrelation(benchmark::State& state) {
  FcsModel model = aklt_model();
  MatX weight = MatX::Zero(3, 3);
  weight(0, 0) = 1.0;
  weight(2, 2) = -1.0;
  std::vector<MatX> basis = hermitian_basis(3);
  const std::vector<int> labels(8, 0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        conditioned_correlation(model, weight, 5, basis[1], basis[2], labels));
  }
}

BENCHMARK(BM_ConditionedCorrelation);

BENCHMARK_MAIN();
