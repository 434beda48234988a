#pragma once

// Internal: raw entry points for each compiled backend. Vector translation
// units must not include standard library headers (they are built with
// extended ISA flags and inline template code would leak into shared symbols).

#include <stddef.h>

#include "hyperalign/simd/adamw_args.hpp"

namespace hyperalign::simd::scalar {
double dot(const double* x, const double* y, size_t n);
void axpy(double a, const double* x, double* y, size_t n);
void adamw(const AdamWArgs& args, const double* grad, double* param, double* m, double* v, size_t n);
}  // namespace hyperalign::simd::scalar

namespace hyperalign::simd::avx2 {
double dot(const double* x, const double* y, size_t n);
void axpy(double a, const double* x, double* y, size_t n);
void adamw(const AdamWArgs& args, const double* grad, double* param, double* m, double* v, size_t n);
}  // namespace hyperalign::simd::avx2

namespace hyperalign::simd::neon {
double dot(const double* x, const double* y, size_t n);
void axpy(double a, const double* x, double* y, size_t n);
void adamw(const AdamWArgs& args, const double* grad, double* param, double* m, double* v, size_t n);
}  // namespace hyperalign::simd::neon
