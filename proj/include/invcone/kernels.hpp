#pragma once
// Data-parallel inner loops used by the dense and banded solvers and by the
// sign-pattern scans of the discrete certificates.
//
// Each kernel has a scalar reference implementation and vectorized variants.
// The active variant is selected once at startup from the CPU capabilities
// and can be overridden (tests use this to check equivalence).

#include <cstddef>
#include <span>
#include <string_view>

namespace invcone::kernels {

enum class Isa { scalar, avx2, neon };

struct MaxResult {
    double value;
    std::size_t index;  // first index attaining `value`
};

/// Kernel table. All entries operate on equally sized spans.
struct Table {
    void (*axpy)(double a, const double* x, double* y, std::size_t n);
    double (*dot)(const double* x, const double* y, std::size_t n);
    void (*scale)(double a, double* x, std::size_t n);
    MaxResult (*max_entry)(const double* x, std::size_t n);
    double (*max_abs)(const double* x, std::size_t n);
};

namespace scalar {
void axpy(double a, const double* x, double* y, std::size_t n);
double dot(const double* x, const double* y, std::size_t n);
void scale(double a, double* x, std::size_t n);
MaxResult max_entry(const double* x, std::size_t n);
double max_abs(const double* x, std::size_t n);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
void axpy(double a, const double* x, double* y, std::size_t n);
double dot(const double* x, const double* y, std::size_t n);
void scale(double a, double* x, std::size_t n);
MaxResult max_entry(const double* x, std::size_t n);
double max_abs(const double* x, std::size_t n);
}  // namespace avx2
#endif

#if defined(__aarch64__)
namespace neon {
void axpy(double a, const double* x, double* y, std::size_t n);
double dot(const double* x, const double* y, std::size_t n);
void scale(double a, double* x, std::size_t n);
MaxResult max_entry(const double* x, std::size_t n);
double max_abs(const double* x, std::size_t n);
}  // namespace neon
#endif

bool isa_supported(Isa isa) noexcept;
Isa best_isa() noexcept;
Isa active_isa() noexcept;

/// Switches the process-wide kernel table. Returns false (and leaves the
/// table unchanged) when the CPU does not support `isa`. Not thread-safe
/// against concurrent kernel use; call it before starting work.
bool set_isa(Isa isa) noexcept;

const Table& table_for(Isa isa);
std::string_view to_string(Isa isa) noexcept;

const Table& active() noexcept;

// Span front ends over the active table.

inline void axpy(double a, std::span<const double> x, std::span<double> y) {
    active().axpy(a, x.data(), y.data(), x.size());
}
inline double dot(std::span<const double> x, std::span<const double> y) {
    return active().dot(x.data(), y.data(), x.size());
}
inline void scale(double a, std::span<double> x) { active().scale(a, x.data(), x.size()); }
inline MaxResult max_entry(std::span<const double> x) {
    return active().max_entry(x.data(), x.size());
}
inline double max_abs(std::span<const double> x) { return active().max_abs(x.data(), x.size()); }

}  // namespace invcone::kernels
