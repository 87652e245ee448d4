#pragma once

#include <cstddef>
#include <cstdlib>
#include <memory>
#include <string>

#include <tbb/blocked_range.h>
#include <tbb/global_control.h>
#include <tbb/parallel_for.h>

namespace crossproj {

// Index-parallel loop. Every kernel in the library is written so that its
// output does not depend on how the range is split or scheduled.
template <typename Body>
void parallel_for(std::size_t count, Body&& body, std::size_t grain = 4096) {
    if (count == 0) return;
    if (count <= grain) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    tbb::parallel_for(tbb::blocked_range<std::size_t>(0, count, grain),
                      [&](const tbb::blocked_range<std::size_t>& r) {
                          for (std::size_t i = r.begin(); i != r.end(); ++i) body(i);
                      });
}

/// Caps worker threads for as long as the object is alive. A value of 0
/// leaves the scheduler default (all available cores).
class ThreadLimit {
public:
    explicit ThreadLimit(std::size_t threads) {
        if (threads > 0) {
            control_ = std::make_unique<tbb::global_control>(
                tbb::global_control::max_allowed_parallelism, threads);
        }
    }

private:
    std::unique_ptr<tbb::global_control> control_;
};

/// Reads CROSSPROJ_THREADS; returns 0 when unset or unparsable.
inline std::size_t threads_from_env() {
    const char* raw = std::getenv("CROSSPROJ_THREADS");
    if (raw == nullptr) return 0;
    try {
        const long v = std::stol(raw);
        return v > 0 ? static_cast<std::size_t>(v) : 0;
    } catch (...) {
        return 0;
    }
}

}  // namespace crossproj
