#include <cstdlib>
#include <stdexcept>
#include <string>

#include "decoyqkd/pulse_kernel.hpp"

namespace decoyqkd {

#ifndef DECOYQKD_HAVE_AVX2_KERNEL
void run_pulses_avx2(const KernelPlan&, std::uint64_t, std::uint64_t, ClassCounts&) {
  throw std::logic_error("AVX2 kernel not compiled into this build");
}
#endif

bool avx2_kernel_available() {
#if defined(DECOYQKD_HAVE_AVX2_KERNEL) && (defined(__GNUC__) || defined(__clang__))
  static const bool supported = __builtin_cpu_supports("avx2");
  return supported;
#else
  return false;
#endif
}

KernelIsa default_kernel_isa() {
  if (const char* env = std::getenv("DECOYQKD_KERNEL")) {
    const std::string choice(env);
    if (choice == "scalar") return KernelIsa::Scalar;
    if (choice == "avx2" && avx2_kernel_available()) return KernelIsa::Avx2;
  }
  return avx2_kernel_available() ? KernelIsa::Avx2 : KernelIsa::Scalar;
}

std::string_view to_string(KernelIsa isa) {
  return isa == KernelIsa::Avx2 ? "avx2" : "scalar";
}

void run_pulses(KernelIsa isa, const KernelPlan& plan, std::uint64_t begin, std::uint64_t end,
                ClassCounts& counts) {
  if (isa == KernelIsa::Avx2 && avx2_kernel_available()) {
    run_pulses_avx2(plan, begin, end, counts);
  } else {
    run_pulses_scalar(plan, begin, end, counts);
  }
}

}  // namespace decoyqkd
