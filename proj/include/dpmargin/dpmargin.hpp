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

// Umbrella header for the core library (everything except JSON model I/O).

#ifndef DPMARGIN_DPMARGIN_HPP_
#define DPMARGIN_DPMARGIN_HPP_

#include "dpmargin/data.hpp"
#include "dpmargin/error.hpp"
#include "dpmargin/loss.hpp"
#include "dpmargin/master.hpp"
#include "dpmargin/optimizer.hpp"
#include "dpmargin/oracle.hpp"
#include "dpmargin/parallel.hpp"
#include "dpmargin/privacy.hpp"
#include "dpmargin/projection.hpp"
#include "dpmargin/random.hpp"
#include "dpmargin/tnb.hpp"
#include "dpmargin/tuning.hpp"

#endif  // DPMARGIN_DPMARGIN_HPP_
