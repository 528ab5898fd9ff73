// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>

namespace lrs {

/// threads == 0: LRSLAB_THREADS if set, else the hardware concurrency.
int resolve_threads(int threads);

/// Calls f(i) for i in [0, n) on up to `threads` workers. Each index runs
/// exactly once; the first exception is rethrown after all workers stop.
void parallel_for(std::size_t n, int threads,
                  const std::function<void(std::size_t)>& f);

}  // namespace lrs
