// Copyright 2026 The ldpshift Authors
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

#ifndef LDPSHIFT_LDPSHIFT_HPP_
#define LDPSHIFT_LDPSHIFT_HPP_

#include "ldpshift/core.hpp"
#include "ldpshift/oracles.hpp"
#include "ldpshift/postprocess.hpp"
#include "ldpshift/sw.hpp"
#include "ldpshift/mechanism.hpp"
#include "ldpshift/metrics.hpp"
#include "ldpshift/attacks.hpp"
#include "ldpshift/detect.hpp"
#include "ldpshift/theory.hpp"
#include "ldpshift/io.hpp"
#include "ldpshift/harness.hpp"

#endif  // LDPSHIFT_LDPSHIFT_HPP_
