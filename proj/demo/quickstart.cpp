//
// Copyright 2026 The dpmargin Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

// Trains a private classifier on a planted-margin dataset with 1% label noise.

#include <iostream>

#include "dpmargin/dpmargin.hpp"

int main() {
  using namespace dpmargin;
  const SyntheticData synth = SynthMarginDataset(2000, 10, 0.3, 20, /*seed=*/7);

  MasterConfig cfg;
  cfg.epsilon = 1.0;
  cfg.delta = 1e-6;
  cfg.seed = 42;
  const MasterResult result = DpAdaptiveMargin(synth.data, cfg);

  std::cout << "selected gamma " << result.gamma_out << " (k = " << result.k
            << ")\n"
            << "training zero-one risk "
            << EmpiricalRisk(result.model.weights, synth.data, LossSpec::ZeroOne(),
                             RiskMode::kAveraged)
            << "\n"
            << "guarantee " << result.ledger.statement << "\n";
  return 0;
}
