#include <cstdlib>
#include <string>

#include "backends.hpp"
#include "hyperalign/error.hpp"
#include "hyperalign/simd/kernels.hpp"

namespace hyperalign::simd {

namespace {

constexpr KernelTable kScalarTable{Backend::kScalar, &scalar::dot, &scalar::axpy, &scalar::adamw};

#if defined(HYPERALIGN_HAVE_AVX2)
constexpr KernelTable kAvx2Table{Backend::kAvx2, &avx2::dot, &avx2::axpy, &avx2::adamw};
#endif

#if defined(HYPERALIGN_HAVE_NEON)
constexpr KernelTable kNeonTable{Backend::kNeon, &neon::dot, &neon::axpy, &neon::adamw};
#endif

bool cpu_supports(Backend b) {
  switch (b) {
    case Backend::kScalar:
      return true;
    case Backend::kAvx2:
#if defined(HYPERALIGN_HAVE_AVX2)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Backend::kNeon:
#if defined(HYPERALIGN_HAVE_NEON)
      return true;  // Advanced SIMD is mandatory on AArch64.
#else
      return false;
#endif
  }
  return false;
}

Backend detect() {
  if (const char* env = std::getenv("HYPERALIGN_SIMD")) {
    const std::string forced(env);
    if (forced == "scalar") return Backend::kScalar;
    if (forced == "avx2" && cpu_supports(Backend::kAvx2)) return Backend::kAvx2;
    if (forced == "neon" && cpu_supports(Backend::kNeon)) return Backend::kNeon;
  }
  if (cpu_supports(Backend::kAvx2)) return Backend::kAvx2;
  if (cpu_supports(Backend::kNeon)) return Backend::kNeon;
  return Backend::kScalar;
}

const KernelTable* table_for(Backend b) {
  if (!cpu_supports(b)) return nullptr;
  switch (b) {
    case Backend::kScalar:
      return &kScalarTable;
    case Backend::kAvx2:
#if defined(HYPERALIGN_HAVE_AVX2)
      return &kAvx2Table;
#else
      return nullptr;
#endif
    case Backend::kNeon:
#if defined(HYPERALIGN_HAVE_NEON)
      return &kNeonTable;
#else
      return nullptr;
#endif
  }
  return nullptr;
}

const KernelTable*& active_table() {
  static const KernelTable* table = table_for(detect());
  return table;
}

void check_size(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw InvalidInput(std::string(what) + ": size mismatch (" + std::to_string(a) + " vs " +
                       std::to_string(b) + ")");
  }
}

}  // namespace

std::string_view backend_name(Backend b) {
  switch (b) {
    case Backend::kScalar:
      return "scalar";
    case Backend::kAvx2:
      return "avx2";
    case Backend::kNeon:
      return "neon";
  }
  return "unknown";
}

bool backend_available(Backend b) { return table_for(b) != nullptr; }

const KernelTable& kernels_for(Backend b) {
  const KernelTable* t = table_for(b);
  if (t == nullptr) {
    throw InvalidInput("SIMD backend '" + std::string(backend_name(b)) + "' is not available");
  }
  return *t;
}

Backend active_backend() { return active_table()->backend; }

void set_backend(Backend b) { active_table() = &kernels_for(b); }

const KernelTable& kernels() { return *active_table(); }

double dot(std::span<const double> x, std::span<const double> y) {
  check_size(x.size(), y.size(), "dot");
  return kernels().dot(x.data(), y.data(), x.size());
}

double squared_norm(std::span<const double> x) { return kernels().dot(x.data(), x.data(), x.size()); }

void axpy(double a, std::span<const double> x, std::span<double> y) {
  check_size(x.size(), y.size(), "axpy");
  kernels().axpy(a, x.data(), y.data(), x.size());
}

void gemv(std::span<const double> a, std::size_t rows, std::size_t cols,
          std::span<const double> x, std::span<double> y) {
  check_size(a.size(), rows * cols, "gemv matrix");
  check_size(x.size(), cols, "gemv x");
  check_size(y.size(), rows, "gemv y");
  const auto& k = kernels();
  for (std::size_t r = 0; r < rows; ++r) y[r] = k.dot(a.data() + r * cols, x.data(), cols);
}

void gemv_t_acc(std::span<const double> a, std::size_t rows, std::size_t cols,
                std::span<const double> x, std::span<double> y) {
  check_size(a.size(), rows * cols, "gemv_t matrix");
  check_size(x.size(), rows, "gemv_t x");
  check_size(y.size(), cols, "gemv_t y");
  const auto& k = kernels();
  for (std::size_t r = 0; r < rows; ++r) {
    if (x[r] != 0.0) k.axpy(x[r], a.data() + r * cols, y.data(), cols);
  }
}

void ger(double alpha, std::span<const double> x, std::span<const double> y,
         std::span<double> a) {
  check_size(a.size(), x.size() * y.size(), "ger");
  const auto& k = kernels();
  const std::size_t cols = y.size();
  for (std::size_t r = 0; r < x.size(); ++r) {
    const double s = alpha * x[r];
    if (s != 0.0) k.axpy(s, y.data(), a.data() + r * cols, cols);
  }
}

}  // namespace hyperalign::simd
