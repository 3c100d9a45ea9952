#pragma once

// Runtime instruction-set selection for the hot numeric kernels.
//
// Every kernel has a scalar reference implementation and, on x86-64, an AVX2
// variant. The active variant is resolved once, at first use, from the CPU
// feature flags; the TACTOSHAPE_SIMD environment variable ("scalar" or
// "avx2") overrides the automatic choice. Tests may also force a level
// programmatically to compare the two paths on identical inputs.

namespace tact::kern {

enum class Isa {
    scalar,
    avx2,
};

// True when the running CPU supports AVX2 (always false on non-x86 builds).
bool cpu_has_avx2();

// Level currently used by the dispatched kernels.
Isa active_isa();

// Force a level. Throws std::runtime_error if the CPU lacks the requested
// instructions. Not thread-safe; intended for tests and benchmarks only.
void set_isa(Isa level);

// Re-run the automatic resolution (CPU probe + environment override).
void reset_isa();

const char* isa_name(Isa level);

} // namespace tact::kern
