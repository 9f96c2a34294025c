#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "latentlab/kernels.hpp"

namespace latentlab::kernels {

#ifdef LATENTLAB_HAVE_AVX2
const KernelTable& avx2_table_unchecked();
#endif

namespace {

bool cpu_has_avx2() {
#if defined(LATENTLAB_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Backend initial_backend() {
  if (const char* env = std::getenv("LATENTLAB_KERNELS")) {
    std::string v(env);
    if (v == "scalar") return Backend::scalar;
    if (v == "avx2" && cpu_has_avx2()) return Backend::avx2;
  }
  return cpu_has_avx2() ? Backend::avx2 : Backend::scalar;
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> table{
      initial_backend() == Backend::avx2 ? avx2_table() : &scalar_table()};
  return table;
}

}  // namespace

const KernelTable* avx2_table() {
#ifdef LATENTLAB_HAVE_AVX2
  static const bool ok = cpu_has_avx2();
  return ok ? &avx2_table_unchecked() : nullptr;
#else
  return nullptr;
#endif
}

bool backend_available(Backend b) {
  return b == Backend::scalar || avx2_table() != nullptr;
}

Backend active_backend() {
  return current().load() == &scalar_table() ? Backend::scalar : Backend::avx2;
}

void set_backend(Backend b) {
  if (!backend_available(b))
    throw std::invalid_argument("kernel backend not available: " + std::string(backend_name(b)));
  current().store(b == Backend::scalar ? &scalar_table() : avx2_table());
}

std::string_view backend_name(Backend b) {
  return b == Backend::scalar ? "scalar" : "avx2";
}

const KernelTable& active() { return *current().load(std::memory_order_relaxed); }

}  // namespace latentlab::kernels
