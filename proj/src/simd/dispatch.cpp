#include "ddqkd/simd/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace ddqkd::simd {
namespace {

bool cpu_has_avx2() {
#if defined(DDQKD_HAVE_AVX2) && (defined(__x86_64__) || defined(__i386__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

Isa detect() {
    if (const char* env = std::getenv("DDQKD_SIMD")) {
        const std::string want(env);
        if (want == "scalar") return Isa::scalar;
        if (want == "avx2" && cpu_has_avx2()) return Isa::avx2;
    }
    return cpu_has_avx2() ? Isa::avx2 : Isa::scalar;
}

std::atomic<const KernelTable*>& active_table() {
    static std::atomic<const KernelTable*> table{&kernels(detect())};
    return table;
}

}  // namespace

bool isa_available(Isa isa) {
    switch (isa) {
        case Isa::scalar:
            return true;
        case Isa::avx2:
            return cpu_has_avx2();
    }
    return false;
}

const KernelTable& kernels(Isa isa) {
    switch (isa) {
        case Isa::scalar:
            return scalar::table;
        case Isa::avx2:
#if defined(DDQKD_HAVE_AVX2)
            if (cpu_has_avx2()) return avx2::table;
#endif
            break;
    }
    throw std::runtime_error("SIMD kernel set not available: " + std::string(isa_name(isa)));
}

const KernelTable& kernels() { return *active_table().load(std::memory_order_acquire); }

Isa active_isa() { return kernels().isa; }

void force_isa(Isa isa) { active_table().store(&kernels(isa), std::memory_order_release); }

void reset_isa() { active_table().store(&kernels(detect()), std::memory_order_release); }

std::string_view isa_name(Isa isa) {
    switch (isa) {
        case Isa::scalar:
            return "scalar";
        case Isa::avx2:
            return "avx2";
    }
    return "unknown";
}

}  // namespace ddqkd::simd
