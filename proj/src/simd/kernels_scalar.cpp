#include <cmath>

#include "backends.hpp"

namespace hyperalign::simd::scalar {

double dot(const double* x, const double* y, size_t n) {
  double sum = 0.0;
  for (size_t i = 0; i < n; ++i) sum += x[i] * y[i];
  return sum;
}

void axpy(double a, const double* x, double* y, size_t n) {
  for (size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void adamw(const AdamWArgs& args, const double* grad, double* param, double* m, double* v,
           size_t n) {
  const double decay = 1.0 - args.lr * args.weight_decay;
  const double step = args.lr / args.bias_correction1;
  const double inv_sqrt_bc2 = 1.0 / std::sqrt(args.bias_correction2);
  const double one_minus_b1 = 1.0 - args.beta1;
  const double one_minus_b2 = 1.0 - args.beta2;
  for (size_t i = 0; i < n; ++i) {
    const double g = grad[i];
    double p = param[i] * decay;
    const double mi = args.beta1 * m[i] + one_minus_b1 * g;
    const double vi = args.beta2 * v[i] + one_minus_b2 * (g * g);
    const double denom = std::sqrt(vi) * inv_sqrt_bc2 + args.eps;
    p -= step * (mi / denom);
    m[i] = mi;
    v[i] = vi;
    param[i] = p;
  }
}

}  // namespace hyperalign::simd::scalar
