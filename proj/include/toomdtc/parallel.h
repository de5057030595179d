// Copyright 2026 The toomdtc Authors
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

#ifndef TOOMDTC_PARALLEL_H
#define TOOMDTC_PARALLEL_H

#include <cstddef>
#include <functional>

namespace toomdtc {

/// 0 means "one per hardware thread".
unsigned resolve_threads(unsigned requested);

/// Calls fn(i) for i in [0, count) on up to `threads` workers pulling
/// indices from a shared counter. Callers write results into per-index
/// slots, so the outcome never depends on scheduling. The first exception
/// thrown by any call is rethrown after all workers stop.
void parallel_for(size_t count, unsigned threads, const std::function<void(size_t)> &fn);

}  // namespace toomdtc

#endif
