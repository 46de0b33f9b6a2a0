#include "cltrack/core/fault.hpp"

#include <atomic>

namespace cltrack::fault {

namespace {
std::atomic<Fault> g_active{Fault::None};
}

void inject(Fault f) { g_active.store(f, std::memory_order_relaxed); }

void clear() { g_active.store(Fault::None, std::memory_order_relaxed); }

bool active(Fault f) { return f != Fault::None && g_active.load(std::memory_order_relaxed) == f; }

}  // namespace cltrack::fault
