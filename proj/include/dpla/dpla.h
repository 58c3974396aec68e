// Copyright 2026 The dp-la Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DPLA_DPLA_H_
#define DPLA_DPLA_H_

#include "dpla/audit.h"
#include "dpla/data.h"
#include "dpla/dp_pipelines.h"
#include "dpla/experiment.h"
#include "dpla/matrix.h"
#include "dpla/mechanisms.h"
#include "dpla/model.h"
#include "dpla/rng.h"

#endif  // DPLA_DPLA_H_
