// AArch64 Advanced SIMD variant. Compiled only for arm64 targets.

#include <arm_neon.h>

#include "backends.hpp"

namespace hyperalign::simd::neon {

double dot(const double* x, const double* y, size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(x + i), vld1q_f64(y + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(x + i + 2), vld1q_f64(y + i + 2));
  }
  for (; i + 2 <= n; i += 2) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(x + i), vld1q_f64(y + i));
  }
  double sum = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) sum += x[i] * y[i];
  return sum;
}

void axpy(double a, const double* x, double* y, size_t n) {
  const float64x2_t va = vdupq_n_f64(a);
  size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

// Separate multiply and add (no fused ops) to match the scalar reference bitwise.
void adamw(const AdamWArgs& args, const double* grad, double* param, double* m, double* v,
           size_t n) {
  const double decay_s = 1.0 - args.lr * args.weight_decay;
  const double step_s = args.lr / args.bias_correction1;
  const double inv_sqrt_bc2_s = 1.0 / vget_lane_f64(vsqrt_f64(vdup_n_f64(args.bias_correction2)), 0);
  const float64x2_t decay = vdupq_n_f64(decay_s);
  const float64x2_t step = vdupq_n_f64(step_s);
  const float64x2_t inv_sqrt_bc2 = vdupq_n_f64(inv_sqrt_bc2_s);
  const float64x2_t b1 = vdupq_n_f64(args.beta1);
  const float64x2_t b2 = vdupq_n_f64(args.beta2);
  const float64x2_t omb1 = vdupq_n_f64(1.0 - args.beta1);
  const float64x2_t omb2 = vdupq_n_f64(1.0 - args.beta2);
  const float64x2_t eps = vdupq_n_f64(args.eps);
  size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t g = vld1q_f64(grad + i);
    float64x2_t p = vmulq_f64(vld1q_f64(param + i), decay);
    const float64x2_t mi = vaddq_f64(vmulq_f64(b1, vld1q_f64(m + i)), vmulq_f64(omb1, g));
    const float64x2_t vi = vaddq_f64(vmulq_f64(b2, vld1q_f64(v + i)), vmulq_f64(omb2, vmulq_f64(g, g)));
    const float64x2_t denom = vaddq_f64(vmulq_f64(vsqrtq_f64(vi), inv_sqrt_bc2), eps);
    p = vsubq_f64(p, vmulq_f64(step, vdivq_f64(mi, denom)));
    vst1q_f64(m + i, mi);
    vst1q_f64(v + i, vi);
    vst1q_f64(param + i, p);
  }
  for (; i < n; ++i) {
    const double g = grad[i];
    double p = param[i] * decay_s;
    const double mi = args.beta1 * m[i] + (1.0 - args.beta1) * g;
    const double vi = args.beta2 * v[i] + (1.0 - args.beta2) * (g * g);
    const double denom = vget_lane_f64(vsqrt_f64(vdup_n_f64(vi)), 0) * inv_sqrt_bc2_s + args.eps;
    p -= step_s * (mi / denom);
    m[i] = mi;
    v[i] = vi;
    param[i] = p;
  }
}

}  // namespace hyperalign::simd::neon
