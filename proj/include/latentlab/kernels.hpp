#pragma once

// Dense double-precision inner loops used by every model evaluation.
//
// Each kernel has a scalar reference implementation and, on x86-64, an
// AVX2+FMA variant. The variant is chosen once at startup from CPUID and can
// be overridden with LATENTLAB_KERNELS=scalar|avx2 or set_backend(). Results
// of different backends agree to rounding, not bitwise; a single process
// always uses one backend, so its outputs are reproducible.

#include <cstddef>
#include <string_view>

namespace latentlab::kernels {

enum class Backend { scalar, avx2 };

struct KernelTable {
  double (*dot)(const double* a, const double* b, std::size_t n);
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // y = W x + b, W row-major rows x cols. b may be null.
  void (*gemv)(const double* w, const double* x, const double* b, double* y,
               std::size_t rows, std::size_t cols);
  // y += W^T v, W row-major rows x cols, y has cols entries.
  void (*gemv_t_acc)(const double* w, const double* v, double* y,
                     std::size_t rows, std::size_t cols);
  // W += alpha * u v^T, W row-major rows x cols.
  void (*rank1_acc)(double alpha, const double* u, const double* v, double* w,
                    std::size_t rows, std::size_t cols);
};

const KernelTable& scalar_table();
// Null when the build or the CPU lacks AVX2+FMA.
const KernelTable* avx2_table();

bool backend_available(Backend b);
Backend active_backend();
// Throws std::invalid_argument if the backend is unavailable.
void set_backend(Backend b);
std::string_view backend_name(Backend b);

const KernelTable& active();

inline double dot(const double* a, const double* b, std::size_t n) {
  return active().dot(a, b, n);
}
inline void axpy(double alpha, const double* x, double* y, std::size_t n) {
  active().axpy(alpha, x, y, n);
}
inline void gemv(const double* w, const double* x, const double* b, double* y,
                 std::size_t rows, std::size_t cols) {
  active().gemv(w, x, b, y, rows, cols);
}
inline void gemv_t_acc(const double* w, const double* v, double* y,
                       std::size_t rows, std::size_t cols) {
  active().gemv_t_acc(w, v, y, rows, cols);
}
inline void rank1_acc(double alpha, const double* u, const double* v, double* w,
                      std::size_t rows, std::size_t cols) {
  active().rank1_acc(alpha, u, v, w, rows, cols);
}

}  // namespace latentlab::kernels
