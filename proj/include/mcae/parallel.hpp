#ifndef MCAE_PARALLEL_HPP
#define MCAE_PARALLEL_HPP

#include <functional>

namespace mcae {

/// Runs fn(i) for i in [0, n). Work items must be independent; results are
/// identical for any thread count. num_threads <= 0 selects the hardware
/// default (capped by MCAE_THREADS when set).
void parallel_for(int n, const std::function<void(int)>& fn,
                  int num_threads = 0);

int default_thread_count();

}  // namespace mcae

#endif
