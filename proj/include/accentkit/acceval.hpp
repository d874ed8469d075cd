// include/accentkit/acceval.hpp
//
// Copyright 2026 The accentkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

// Umbrella header for the evaluation suite.

#ifndef ACCENTKIT_ACCEVAL_HPP_
#define ACCENTKIT_ACCEVAL_HPP_

#include "accentkit/eval/backend.hpp"
#include "accentkit/eval/cluster.hpp"
#include "accentkit/eval/embeddings.hpp"
#include "accentkit/eval/scores.hpp"

#endif  // ACCENTKIT_ACCEVAL_HPP_
