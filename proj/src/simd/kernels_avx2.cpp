// Built with -mavx2 -mfma. Only reached after a runtime CPU check.

#include <immintrin.h>

#include "backends.hpp"

namespace hyperalign::simd::avx2 {

namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d pair = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(pair, _mm_unpackhi_pd(pair, pair)));
}

}  // namespace

double dot(const double* x, const double* y, size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
  }
  double sum = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) sum += x[i] * y[i];
  return sum;
}

void axpy(double a, const double* x, double* y, size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

// No FMA here: every lane performs the same IEEE operations as the scalar
// reference, so the optimizer step is bitwise identical across backends.
void adamw(const AdamWArgs& args, const double* grad, double* param, double* m, double* v,
           size_t n) {
  const double decay_s = 1.0 - args.lr * args.weight_decay;
  const double step_s = args.lr / args.bias_correction1;
  const double inv_sqrt_bc2_s = 1.0 / _mm_cvtsd_f64(_mm_sqrt_sd(_mm_setzero_pd(), _mm_set_sd(args.bias_correction2)));
  const __m256d decay = _mm256_set1_pd(decay_s);
  const __m256d step = _mm256_set1_pd(step_s);
  const __m256d inv_sqrt_bc2 = _mm256_set1_pd(inv_sqrt_bc2_s);
  const __m256d b1 = _mm256_set1_pd(args.beta1);
  const __m256d b2 = _mm256_set1_pd(args.beta2);
  const __m256d omb1 = _mm256_set1_pd(1.0 - args.beta1);
  const __m256d omb2 = _mm256_set1_pd(1.0 - args.beta2);
  const __m256d eps = _mm256_set1_pd(args.eps);
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d g = _mm256_loadu_pd(grad + i);
    __m256d p = _mm256_mul_pd(_mm256_loadu_pd(param + i), decay);
    const __m256d mi = _mm256_add_pd(_mm256_mul_pd(b1, _mm256_loadu_pd(m + i)), _mm256_mul_pd(omb1, g));
    const __m256d vi = _mm256_add_pd(_mm256_mul_pd(b2, _mm256_loadu_pd(v + i)),
                                     _mm256_mul_pd(omb2, _mm256_mul_pd(g, g)));
    const __m256d denom = _mm256_add_pd(_mm256_mul_pd(_mm256_sqrt_pd(vi), inv_sqrt_bc2), eps);
    p = _mm256_sub_pd(p, _mm256_mul_pd(step, _mm256_div_pd(mi, denom)));
    _mm256_storeu_pd(m + i, mi);
    _mm256_storeu_pd(v + i, vi);
    _mm256_storeu_pd(param + i, p);
  }
  for (; i < n; ++i) {
    const double g = grad[i];
    double p = param[i] * decay_s;
    const double mi = args.beta1 * m[i] + (1.0 - args.beta1) * g;
    const double vi = args.beta2 * v[i] + (1.0 - args.beta2) * (g * g);
    const double denom = _mm_cvtsd_f64(_mm_sqrt_sd(_mm_setzero_pd(), _mm_set_sd(vi))) * inv_sqrt_bc2_s + args.eps;
    p -= step_s * (mi / denom);
    m[i] = mi;
    v[i] = vi;
    param[i] = p;
  }
}

}  // namespace hyperalign::simd::avx2
