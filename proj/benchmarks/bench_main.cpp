/*
 * Copyright 2026 The menkf Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "menkf/ensemble.hpp"
#include "menkf/experiment.hpp"
#include "menkf/kriging.hpp"
#include "menkf/letkf.hpp"

#include <benchmark/benchmark.h>

using namespace menkf;

namespace {

void BM_EnsembleGain(benchmark::State& state, GainForm form) {
  const Index dy = state.range(0);
  const Index n = 40;
  Rng rng(1);
  const EnsembleMoments mx = moments(Ensemble(rng.standard_normal(200, n)));
  const EnsembleMoments my = moments(Ensemble(rng.standard_normal(dy, n)));
  EnkfConfig cfg;
  cfg.rho = 0.2;
  for (auto _ : state) {
    benchmark::DoNotOptimize(ensemble_gain(mx, my, cfg, form));
  }
}

void BM_GpFit(benchmark::State& state) {
  ExperimentConfig cfg;
  cfg.d = 800;
  cfg.m = state.range(0);
  cfg.methods = {Method::gp};
  cfg.draws = 0;
  const Instance inst = make_instance(cfg);
  for (auto _ : state) {
    GpRegressor gp;
    gp.fit(inst.problem);
    benchmark::ClobberMemory();
  }
}

void BM_Letkf(benchmark::State& state) {
  ExperimentConfig cfg;
  cfg.d = 800;
  cfg.m = state.range(0);
  cfg.n_ens = 40;
  cfg.methods = {Method::letkf};
  cfg.draws = 0;
  const Instance inst = make_instance(cfg);
  LocalizationConfig loc;
  loc.radius = cfg.localization_radius();
  const Ensemble ens(inst.prior_ensemble);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        letkf_analysis(ens, inst.problem.grid, inst.problem.y_star, inst.problem.tau, loc));
  }
}

void BM_Enkf(benchmark::State& state) {
  ExperimentConfig cfg;
  cfg.d = 800;
  cfg.m = state.range(0);
  cfg.n_ens = 40;
  cfg.methods = {Method::enkf};
  cfg.draws = 0;
  const Instance inst = make_instance(cfg);
  EnkfConfig enkf;
  enkf.rho = inst.problem.tau;
  const LinearObservation obs = inst.problem.observation();
  const Ensemble ens(inst.prior_ensemble);
  for (auto _ : state) {
    benchmark::DoNotOptimize(enkf_analysis(ens, obs, enkf));
  }
}

}  // namespace

BENCHMARK_CAPTURE(BM_EnsembleGain, primal, GainForm::primal)->RangeMultiplier(2)->Range(20, 640);
BENCHMARK_CAPTURE(BM_EnsembleGain, dual, GainForm::dual)->RangeMultiplier(2)->Range(20, 640);
BENCHMARK(BM_GpFit)->RangeMultiplier(2)->Range(100, 800)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Enkf)->RangeMultiplier(2)->Range(100, 800)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Letkf)->RangeMultiplier(2)->Range(100, 800)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
