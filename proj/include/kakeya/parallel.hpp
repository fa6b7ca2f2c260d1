#pragma once

#include <cstddef>
#include <functional>

namespace kakeya {

// Worker count used by parallel_for; 0 means one per hardware thread.
void set_thread_count(int n);
int thread_count();

// Runs body(i) for i in [0, n); exceptions from workers are rethrown.
void parallel_for(size_t n, const std::function<void(size_t)>& body);

}
