#pragma once

// Dense double-precision kernels used by every arithmetic inner loop in the
// library. Each kernel has a scalar reference implementation and optional
// AVX2/NEON variants; the active variant is chosen once at runtime.

#include <cstddef>
#include <string_view>

namespace kgprompt::kernels {

enum class Isa { Scalar, Avx2, Neon };

struct KernelTable {
    Isa isa;
    // sum_i x[i] * y[i]
    double (*dot)(const double* x, const double* y, std::size_t n);
    // y[i] += a * x[i]
    void (*axpy)(double a, const double* x, double* y, std::size_t n);
    // y = A x, A row-major rows x cols
    void (*gemv)(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y);
    // y += A^T x, A row-major rows x cols, x has `rows` entries, y has `cols`
    void (*gemv_t_acc)(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y);
    // A += alpha * x y^T
    void (*ger)(double alpha, const double* x, std::size_t rows, const double* y, std::size_t cols, double* a);
};

namespace scalar {
double dot(const double* x, const double* y, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
void gemv(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y);
void gemv_t_acc(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y);
void ger(double alpha, const double* x, std::size_t rows, const double* y, std::size_t cols, double* a);
}  // namespace scalar

#if defined(KGPROMPT_HAVE_AVX2)
namespace avx2 {
double dot(const double* x, const double* y, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
void gemv(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y);
void gemv_t_acc(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y);
void ger(double alpha, const double* x, std::size_t rows, const double* y, std::size_t cols, double* a);
}  // namespace avx2
#endif

#if defined(KGPROMPT_HAVE_NEON)
namespace neon {
double dot(const double* x, const double* y, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
void gemv(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y);
void gemv_t_acc(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y);
void ger(double alpha, const double* x, std::size_t rows, const double* y, std::size_t cols, double* a);
}  // namespace neon
#endif

const KernelTable& scalar_table();

// Tables for the variants compiled into this build and supported by the CPU.
// Always contains the scalar table first.
std::size_t available_tables(const KernelTable** out, std::size_t capacity);

// Best supported variant. The environment variable KGPROMPT_KERNELS=scalar
// forces the reference path.
const KernelTable& active();

std::string_view isa_name(Isa isa);

}  // namespace kgprompt::kernels
