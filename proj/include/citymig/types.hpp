// Copyright 2026 The citymig Authors
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

#ifndef CITYMIG_TYPES_HPP_
#define CITYMIG_TYPES_HPP_

#include <cstdint>
#include <string>

namespace citymig {

using AuthorId = std::string;
using PaperId = std::string;
using CityId = std::string;

// Dense index of an author-paper node.
using NodeId = std::uint32_t;

}  // namespace citymig

#endif  // CITYMIG_TYPES_HPP_
