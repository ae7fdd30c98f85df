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

// JSON documents for trained models and privacy ledgers.

#ifndef DPMARGIN_MODEL_IO_HPP_
#define DPMARGIN_MODEL_IO_HPP_

#include <fstream>
#include <optional>
#include <string>

#include "dpmargin/error.hpp"
#include "dpmargin/master.hpp"
#include "json.hpp"

namespace dpmargin {

using Json = nlohmann::ordered_json;

inline Json LedgerToJson(const PrivacyLedger& ledger) {
  Json j;
  j["tuner"] = ToString(ledger.tuner);
  j["grid_size"] = ledger.grid_size;
  j["mu"] = ledger.mu;
  j["base_mu"] = ledger.base_mu;
  j["score_sigma"] = ledger.score_sigma;
  j["composed_mu"] = ledger.composed_mu;
  j["r"] = ledger.r ? Json(*ledger.r) : Json(nullptr);
  j["epsilon_granted"] = ledger.epsilon_granted;
  j["delta_granted"] = ledger.delta_granted;
  j["round_trip_ok"] = ledger.round_trip_ok;
  j["statement"] = ledger.statement;
  return j;
}

// `timestamp` is written verbatim under "timestamps.created"; pass nullopt to
// leave it null.
inline Json ModelToJson(const MasterResult& result, const MasterConfig& cfg,
                        const std::optional<std::string>& timestamp) {
  Json j;
  Json weights = Json::array();
  for (Eigen::Index i = 0; i < result.model.weights.size(); ++i) {
    weights.push_back(result.model.weights(i));
  }
  j["weights"] = std::move(weights);
  j["d"] = result.model.ambient_dim;
  j["gamma_out"] = result.gamma_out;
  j["hinge_c"] = result.model.provenance.confidence_margin;
  j["k"] = result.k;
  j["k_formula"] = result.formula_k;
  j["identity_projection"] = result.identity_projection;
  j["jl_seed"] = result.jl_seed;
  j["epsilon"] = cfg.epsilon;
  j["delta"] = cfg.delta;
  j["tuner"] = ToString(cfg.tuner);
  j["score_kind"] = ToString(cfg.score);
  j["output_mode"] = ToString(cfg.ResolvedOutputMode());
  j["seed"] = cfg.seed;
  j["iterations"] = result.model.provenance.iterations;
  j["sigma"] = result.model.provenance.sigma;
  j["step_size"] = result.model.provenance.step_size;
  j["base_mu"] = result.model.provenance.mu;
  j["ledger"] = LedgerToJson(result.ledger);
  j["timestamps"] = {{"created", timestamp ? Json(*timestamp) : Json(nullptr)}};
  return j;
}

struct StoredModel {
  Vector weights;
  Eigen::Index d = 0;
  double gamma_out = 0.0;
  double hinge_c = 0.0;
};

inline StoredModel ModelFromJson(const Json& j) {
  try {
    StoredModel model;
    const auto& w = j.at("weights");
    model.d = j.at("d").get<Eigen::Index>();
    model.weights.resize(static_cast<Eigen::Index>(w.size()));
    for (std::size_t i = 0; i < w.size(); ++i) {
      model.weights(static_cast<Eigen::Index>(i)) = w[i].get<double>();
    }
    if (model.weights.size() != model.d) {
      throw DimensionError("model weights have length " +
                           std::to_string(model.weights.size()) +
                           " but d = " + std::to_string(model.d));
    }
    model.gamma_out = j.at("gamma_out").get<double>();
    model.hinge_c = j.contains("hinge_c") ? j.at("hinge_c").get<double>()
                                          : model.gamma_out / 3.0;
    return model;
  } catch (const Json::exception& e) {
    throw Error("model_error", std::string("malformed model document: ") + e.what());
  }
}

inline StoredModel LoadModel(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open model '" + path + "'");
  Json j;
  try {
    in >> j;
  } catch (const Json::exception& e) {
    throw Error("model_error", std::string("model is not valid JSON: ") + e.what());
  }
  return ModelFromJson(j);
}

}  // namespace dpmargin

#endif  // DPMARGIN_MODEL_IO_HPP_
