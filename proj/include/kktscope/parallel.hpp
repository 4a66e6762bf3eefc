#pragma once

#include <cstddef>
#include <functional>

namespace kktscope {

/// Worker count: KKT_SCOPE_THREADS when set to a positive integer, otherwise
/// the hardware concurrency.
std::size_t thread_limit();

/// Runs body(0..count-1) across up to thread_limit() threads. Every index is
/// visited; if any throw, the exception from the lowest index is rethrown so
/// failures do not depend on scheduling.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace kktscope
