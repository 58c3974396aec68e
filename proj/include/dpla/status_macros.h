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

#ifndef DPLA_STATUS_MACROS_H_
#define DPLA_STATUS_MACROS_H_

#include "absl/status/status.h"
#include "absl/status/statusor.h"

#define DPLA_STATUS_CONCAT_INNER_(x, y) x##y
#define DPLA_STATUS_CONCAT_(x, y) DPLA_STATUS_CONCAT_INNER_(x, y)

#define DPLA_RETURN_IF_ERROR(expr)            \
  do {                                        \
    ::absl::Status _dpla_status = (expr);     \
    if (!_dpla_status.ok()) return _dpla_status; \
  } while (0)

#define DPLA_ASSIGN_OR_RETURN_IMPL_(statusor, lhs, rexpr) \
  auto statusor = (rexpr);                                \
  if (!statusor.ok()) return statusor.status();           \
  lhs = std::move(statusor).value()

// Usage: DPLA_ASSIGN_OR_RETURN(auto x, FunctionReturningStatusOr());
#define DPLA_ASSIGN_OR_RETURN(lhs, rexpr) \
  DPLA_ASSIGN_OR_RETURN_IMPL_(            \
      DPLA_STATUS_CONCAT_(_dpla_statusor_, __LINE__), lhs, rexpr)

#endif  // DPLA_STATUS_MACROS_H_
