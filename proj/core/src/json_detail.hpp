// Copyright 2026 The qdopt Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Internal nlohmann::json bridges shared between translation units. Not
// installed; public headers expose string-level APIs only.

#ifndef QDOPT_SRC_JSON_DETAIL_HPP_
#define QDOPT_SRC_JSON_DETAIL_HPP_

#include <json.hpp>

#include "qdopt/archive.hpp"
#include "qdopt/space.hpp"

namespace qdopt::detail {

nlohmann::json config_to_json(const Configuration& config,
                              const SearchSpace& space);
Configuration config_from_json(const nlohmann::json& j,
                               const SearchSpace& space);

nlohmann::json space_to_json_obj(const SearchSpace& space);
SearchSpace space_from_json_obj(const nlohmann::json& j);

nlohmann::json niche_set_to_json_obj(const NicheSet& niches);
NicheSet niche_set_from_json_obj(const nlohmann::json& j);

}  // namespace qdopt::detail

#endif  // QDOPT_SRC_JSON_DETAIL_HPP_
