#pragma once

// Dense double-precision inner loops used by the matrix layer and the online
// solvers. Each instruction set provides a table with the same contract; the
// scalar table is the reference the SIMD tables are tested against.
//
// All matrices are row-major with a leading dimension equal to their column
// count.

#include <cstddef>
#include <optional>
#include <string_view>

namespace opium::kernels {

enum class Isa {
    scalar,
    avx2,
    neon,
};

struct KernelTable {
    Isa isa;
    const char* name;

    // sum_i x[i] * y[i]
    double (*dot)(const double* x, const double* y, std::size_t n);
    // y += alpha * x
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
    // x *= alpha
    void (*scale)(double alpha, double* x, std::size_t n);
    // y = A x, A is rows x cols
    void (*gemv)(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y);
    // A += alpha * x y^T, A is rows x cols, x has rows entries, y has cols entries
    void (*ger)(double* a, std::size_t rows, std::size_t cols, double alpha, const double* x, const double* y);
    // C = A B, A is m x k, B is k x n, C is m x n
    void (*gemm)(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t n);
};

const KernelTable& scalar_table() noexcept;

/// Table for `isa`, or nullptr if it was not compiled in or the CPU lacks it.
const KernelTable* table_for(Isa isa) noexcept;

/// The table currently used by the library. Chosen on first use: the best
/// supported instruction set, unless OPIUM_ISA names another one.
const KernelTable& active() noexcept;

/// Forces the active table. Returns false if `isa` is unavailable.
bool set_active(Isa isa) noexcept;

std::optional<Isa> parse_isa(std::string_view name) noexcept;
const char* isa_name(Isa isa) noexcept;

// Per-ISA entry points, defined in the ISA-specific translation units.
const KernelTable* avx2_table() noexcept;
const KernelTable* neon_table() noexcept;

} // namespace opium::kernels
