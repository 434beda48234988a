#pragma once

// Kept free of standard library includes: vector kernel translation units
// include this header while compiled with extended ISA flags.

namespace hyperalign::simd {

struct AdamWArgs {
  double lr = 0.0;
  double weight_decay = 0.0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double bias_correction1 = 1.0;  // 1 - beta1^t
  double bias_correction2 = 1.0;  // 1 - beta2^t
};

}  // namespace hyperalign::simd
