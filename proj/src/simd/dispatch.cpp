#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "vph/simd/kernels.hpp"

namespace vph::simd {
namespace {

constexpr KernelTable kScalarTable{
    &scalar::dot,           &scalar::axpy,
    &scalar::exp_decay_row, &scalar::exp_decay_sum,
    &scalar::min_sq_distance, &scalar::gaussian_sums,
};

#if defined(VPH_HAVE_AVX2)
constexpr KernelTable kAvx2Table{
    &avx2::dot,           &avx2::axpy,
    &avx2::exp_decay_row, &avx2::exp_decay_sum,
    &avx2::min_sq_distance, &avx2::gaussian_sums,
};
#endif

bool cpu_has_avx2() noexcept {
#if defined(VPH_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa initial_isa() noexcept {
  if (const char* env = std::getenv("VPH_SIMD")) {
    const std::string v(env);
    if (v == "scalar") return Isa::scalar;
    if (v == "avx2" && cpu_has_avx2()) return Isa::avx2;
  }
  return cpu_has_avx2() ? Isa::avx2 : Isa::scalar;
}

std::atomic<Isa>& active() noexcept {
  static std::atomic<Isa> isa{initial_isa()};
  return isa;
}

}  // namespace

bool isa_supported(Isa isa) noexcept {
  return isa == Isa::scalar || (isa == Isa::avx2 && cpu_has_avx2());
}

Isa active_isa() noexcept { return active().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) {
  if (!isa_supported(isa)) {
    throw std::invalid_argument("instruction set not available: " + std::string(isa_name(isa)));
  }
  active().store(isa, std::memory_order_relaxed);
}

const KernelTable& table(Isa isa) {
  if (!isa_supported(isa)) {
    throw std::invalid_argument("instruction set not available: " + std::string(isa_name(isa)));
  }
#if defined(VPH_HAVE_AVX2)
  if (isa == Isa::avx2) return kAvx2Table;
#endif
  return kScalarTable;
}

std::string_view isa_name(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar:
      return "scalar";
    case Isa::avx2:
      return "avx2";
  }
  return "unknown";
}

namespace detail {
const KernelTable& active_table() noexcept {
#if defined(VPH_HAVE_AVX2)
  if (active_isa() == Isa::avx2) return kAvx2Table;
#endif
  return kScalarTable;
}
}  // namespace detail

}  // namespace vph::simd
