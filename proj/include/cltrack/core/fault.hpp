#pragma once

namespace cltrack::fault {

/// Deliberate defects that the `verify --mutate` harness can switch on to prove the
/// suites detect them. Never enabled in normal operation.
enum class Fault {
    None,
    GateWindowOffByOne,  // gate fires once n_w - 1 entries qualify
    DiversityArgmax,     // select_diverse picks the most similar candidate
    ScanSkipsDecay,      // selective scan drops the state-transition factor
};

void inject(Fault f);
void clear();
bool active(Fault f);

/// Enables a fault for the lifetime of the guard.
class ScopedFault {
public:
    explicit ScopedFault(Fault f) { inject(f); }
    ~ScopedFault() { clear(); }
    ScopedFault(const ScopedFault&) = delete;
    ScopedFault& operator=(const ScopedFault&) = delete;
};

}  // namespace cltrack::fault
