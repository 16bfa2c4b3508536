#pragma once

#include <span>
#include <string_view>

namespace imp3d::kernels {

// Batched inner loops with a scalar reference and an AVX2 variant. Both
// variants perform the same IEEE operations in the same order, so results are
// bit-identical; the AVX2 path is selected at runtime when the CPU has it.

/// Linear P/Q pair in the output device's frame (Q orientation sign +1).
struct LinearPair {
  double g_p_off = 0.0;
  double g_p_on = 0.0;
  double g_q_off = 0.0;
  double g_q_on = 0.0;
  double g_l = 0.0;           ///< 0 for a current source
  double p_sign = 1.0;        ///< +1 parallel, -1 anti-parallel
  double q_set_min = 0.0;
  double q_set_max = 0.0;
  double p_set_min = 0.0;
  double p_reset_min = 0.0;
};

/// out[i] = minimum of the twelve IMP correctness slacks at bias
/// (v_p[i], drive[i]); `drive` is the injected current for a current source or
/// the load voltage for a resistive load.
using MinSlackFn = void (*)(const LinearPair&, std::span<const double> v_p,
                            std::span<const double> drive, std::span<double> out);

/// out[i] = normalized zero-variation margin (g_on - g_off)/(2 g_l + 3 g_on + g_off)
/// for g_l = g_l_over_g_on[i] * g_on, with g_on = 1 and g_off = 1/ratio.
using DeltaSweepFn = void (*)(double ratio, std::span<const double> g_l_over_g_on,
                              std::span<double> out);

void min_slack_scalar(const LinearPair&, std::span<const double>, std::span<const double>,
                      std::span<double>);
void delta_sweep_scalar(double, std::span<const double>, std::span<double>);

#if defined(__x86_64__) || defined(_M_X64)
#define IMP3D_HAVE_AVX2_KERNELS 1
void min_slack_avx2(const LinearPair&, std::span<const double>, std::span<const double>,
                    std::span<double>);
void delta_sweep_avx2(double, std::span<const double>, std::span<double>);
#else
#define IMP3D_HAVE_AVX2_KERNELS 0
#endif

enum class Isa { scalar, avx2 };

/// Best ISA supported by this CPU and build. IMP3D_ISA=scalar forces scalar.
Isa detected_isa();
Isa active_isa();
/// Overrides the dispatch (tests); requesting avx2 on an unsupported CPU
/// falls back to scalar and returns false.
bool set_active_isa(Isa isa);
std::string_view to_string(Isa isa) noexcept;

void min_slack(const LinearPair& pair, std::span<const double> v_p,
               std::span<const double> drive, std::span<double> out);
void delta_sweep(double ratio, std::span<const double> g_l_over_g_on, std::span<double> out);

}  // namespace imp3d::kernels
