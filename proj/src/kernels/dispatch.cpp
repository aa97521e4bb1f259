#include "invcone/kernels.hpp"

#include <atomic>
#include <stdexcept>

namespace invcone::kernels {

namespace {

constexpr Table kScalar{scalar::axpy, scalar::dot, scalar::scale, scalar::max_entry, scalar::max_abs};
#if defined(__x86_64__) || defined(_M_X64)
constexpr Table kAvx2{avx2::axpy, avx2::dot, avx2::scale, avx2::max_entry, avx2::max_abs};
#endif
#if defined(__aarch64__)
constexpr Table kNeon{neon::axpy, neon::dot, neon::scale, neon::max_entry, neon::max_abs};
#endif

std::atomic<Isa>& current() {
    static std::atomic<Isa> isa{best_isa()};
    return isa;
}

}  // namespace

bool isa_supported(Isa isa) noexcept {
    switch (isa) {
        case Isa::scalar:
            return true;
        case Isa::avx2:
#if defined(__x86_64__) || defined(_M_X64)
            return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
            return false;
#endif
        case Isa::neon:
#if defined(__aarch64__)
            return true;
#else
            return false;
#endif
    }
    return false;
}

Isa best_isa() noexcept {
    if (isa_supported(Isa::avx2)) return Isa::avx2;
    if (isa_supported(Isa::neon)) return Isa::neon;
    return Isa::scalar;
}

Isa active_isa() noexcept { return current().load(std::memory_order_relaxed); }

bool set_isa(Isa isa) noexcept {
    if (!isa_supported(isa)) return false;
    current().store(isa, std::memory_order_relaxed);
    return true;
}

const Table& table_for(Isa isa) {
    if (!isa_supported(isa)) throw std::invalid_argument("kernel ISA not supported on this CPU");
    switch (isa) {
#if defined(__x86_64__) || defined(_M_X64)
        case Isa::avx2:
            return kAvx2;
#endif
#if defined(__aarch64__)
        case Isa::neon:
            return kNeon;
#endif
        default:
            return kScalar;
    }
}

const Table& active() noexcept {
    switch (active_isa()) {
#if defined(__x86_64__) || defined(_M_X64)
        case Isa::avx2:
            return kAvx2;
#endif
#if defined(__aarch64__)
        case Isa::neon:
            return kNeon;
#endif
        default:
            return kScalar;
    }
}

std::string_view to_string(Isa isa) noexcept {
    switch (isa) {
        case Isa::scalar:
            return "scalar";
        case Isa::avx2:
            return "avx2";
        case Isa::neon:
            return "neon";
    }
    return "unknown";
}

}  // namespace invcone::kernels
