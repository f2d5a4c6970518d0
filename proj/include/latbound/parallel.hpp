#pragma once

#include <cstddef>
#include <functional>

namespace latbound {

/// Runs task(i) for i in [0, count) on up to `jobs` worker threads. Each
/// index runs exactly once; callers write results into slot i so the outcome
/// does not depend on scheduling. The first exception is rethrown after all
/// workers finish.
void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& task);

}  // namespace latbound
