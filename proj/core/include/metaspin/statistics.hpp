/*
 * Copyright 2026 Metaspin Contributors
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

#ifndef METASPIN_STATISTICS_HPP
#define METASPIN_STATISTICS_HPP

#include <string>
#include <string_view>

namespace metaspin {

/// Particle statistics. Selects the kinematic invariant (symplectic form for
/// bosons, metric for fermions) and the sign conventions downstream.
enum class Statistics { Boson, Fermion };

inline constexpr std::string_view to_string(Statistics s) {
    return s == Statistics::Boson ? "boson" : "fermion";
}

Statistics statistics_from_string(std::string_view name);

}  // namespace metaspin

#endif
