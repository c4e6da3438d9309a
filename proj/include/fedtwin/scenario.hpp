// Copyright 2026 The fedtwin Authors
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
// World construction. A world is (a) a concrete ScenarioConfig — counts and
// scalars from the template, interval-valued parameters drawn once per
// scenario — and (b) per-frame draws (importance weights, sensor data
// volumes, channel gains) addressed by (seed, frame) so any frame can be
// regenerated independently and identically across policies.

#ifndef FEDTWIN_SCENARIO_HPP_
#define FEDTWIN_SCENARIO_HPP_

#include <cstdint>

#include "fedtwin/types.hpp"

namespace fedtwin {

// How interval-valued parameters are instantiated: one draw per device
// (default) or one draw shared by the whole device class.
enum class SamplingMode { kPerDevice, kPerScenario };

// Template with reference defaults; interval-valued vector fields left empty
// for the generator to fill.
ScenarioConfig default_template();

// Fills every interval-valued field of the template deterministically from
// the seed: device positions in the square, subcarrier bandwidth (1-5 MHz),
// transmit powers (5-33 dBm), total in-band noise from the -104 dBm/Hz
// density, minimum rates (1-5 kbps), fiber rates (1-3 Mbps), required
// qualities (0.6-0.9), model sizes (1-5 Mbit), cloud integration instruction
// counts (1e6-5e6) and cloud power triple (1-60 W, ordered max >= idle >=
// leak). Fields already sized correctly in the template are kept as-is, so
// hand-pinned fixtures pass through untouched. Throws on an invalid result.
ScenarioConfig generate_scenario(std::uint64_t seed, const ScenarioConfig& tmpl,
                                 SamplingMode mode = SamplingMode::kPerDevice);

// Frame-t draws: I_c(t) uniform on [0,1], d_{n,c}(t) uniform on the config
// data range, channel gains uniform over the config gain levels for every
// (receiver, sensor, subcarrier) triple including the cloud receiver row.
FrameDraws frame_draws(const ScenarioConfig& cfg, std::uint64_t seed, int frame);

}  // namespace fedtwin

#endif  // FEDTWIN_SCENARIO_HPP_
