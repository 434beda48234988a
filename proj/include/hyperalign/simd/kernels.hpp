#pragma once

// Data-parallel double-precision kernels used by the adapter, cosine
// similarity and optimizer inner loops.
//
// Every kernel has a scalar reference implementation. Vector variants
// (AVX2+FMA on x86-64, NEON on AArch64) are compiled when the target allows
// and selected once at runtime. Vector reductions use a different summation
// order than the scalar reference, so results agree to rounding, not bitwise.
// A process always uses one backend, which keeps training runs reproducible.
//
// Set HYPERALIGN_SIMD=scalar in the environment to force the reference path.

#include <cstddef>
#include <span>
#include <string_view>

#include "hyperalign/simd/adamw_args.hpp"

namespace hyperalign::simd {

enum class Backend { kScalar, kAvx2, kNeon };

std::string_view backend_name(Backend b);

struct KernelTable {
  Backend backend;
  // sum_i x[i] * y[i]
  double (*dot)(const double* x, const double* y, std::size_t n);
  // y[i] += a * x[i]
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  // Decoupled weight decay followed by the Adam moment update, in place.
  void (*adamw)(const AdamWArgs& args, const double* grad, double* param, double* m, double* v,
                std::size_t n);
};

/// Kernel table for a specific backend. Throws InvalidInput when the backend
/// is not compiled in or not supported by the running CPU.
const KernelTable& kernels_for(Backend b);

/// True when the backend is compiled in and the CPU supports it.
bool backend_available(Backend b);

/// The backend selected for this process.
Backend active_backend();

/// Overrides the process-wide backend. Not thread-safe; intended for tests
/// and for pinning a backend before any training starts.
void set_backend(Backend b);

const KernelTable& kernels();

// Span conveniences over the active table. Sizes are checked.

double dot(std::span<const double> x, std::span<const double> y);
double squared_norm(std::span<const double> x);
void axpy(double a, std::span<const double> x, std::span<double> y);

/// y = A x for row-major A (rows x cols).
void gemv(std::span<const double> a, std::size_t rows, std::size_t cols,
          std::span<const double> x, std::span<double> y);

/// y += A^T x for row-major A (rows x cols).
void gemv_t_acc(std::span<const double> a, std::size_t rows, std::size_t cols,
                std::span<const double> x, std::span<double> y);

/// A += alpha * x y^T for row-major A (x.size() x y.size()).
void ger(double alpha, std::span<const double> x, std::span<const double> y,
         std::span<double> a);

}  // namespace hyperalign::simd
