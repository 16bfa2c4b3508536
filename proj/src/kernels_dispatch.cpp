#include <atomic>
#include <cstdlib>
#include <cstring>
#include <stdexcept>

#include "imp3d/kernels.hpp"

namespace imp3d::kernels {

namespace {

bool cpu_has_avx2() {
#if IMP3D_HAVE_AVX2_KERNELS && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

Isa initial_isa() {
  if (const char* forced = std::getenv("IMP3D_ISA"); forced && std::strcmp(forced, "scalar") == 0)
    return Isa::scalar;
  return detected_isa();
}

std::atomic<Isa>& current() {
  static std::atomic<Isa> isa{initial_isa()};
  return isa;
}

void check_sizes(std::size_t a, std::size_t b, std::size_t out) {
  if (a != out || b != out) throw std::invalid_argument("kernels: span sizes differ");
}

}  // namespace

Isa detected_isa() { return cpu_has_avx2() ? Isa::avx2 : Isa::scalar; }

Isa active_isa() { return current().load(std::memory_order_relaxed); }

bool set_active_isa(Isa isa) {
  if (isa == Isa::avx2 && !cpu_has_avx2()) {
    current().store(Isa::scalar);
    return false;
  }
  current().store(isa);
  return true;
}

std::string_view to_string(Isa isa) noexcept { return isa == Isa::avx2 ? "avx2" : "scalar"; }

void min_slack(const LinearPair& pair, std::span<const double> v_p,
               std::span<const double> drive, std::span<double> out) {
  check_sizes(v_p.size(), drive.size(), out.size());
#if IMP3D_HAVE_AVX2_KERNELS
  if (active_isa() == Isa::avx2) return min_slack_avx2(pair, v_p, drive, out);
#endif
  min_slack_scalar(pair, v_p, drive, out);
}

void delta_sweep(double ratio, std::span<const double> g_l_over_g_on, std::span<double> out) {
  check_sizes(g_l_over_g_on.size(), out.size(), out.size());
#if IMP3D_HAVE_AVX2_KERNELS
  if (active_isa() == Isa::avx2) return delta_sweep_avx2(ratio, g_l_over_g_on, out);
#endif
  delta_sweep_scalar(ratio, g_l_over_g_on, out);
}

}  // namespace imp3d::kernels
