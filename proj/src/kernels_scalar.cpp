#include <algorithm>
#include <cstddef>

#include "imp3d/kernels.hpp"

namespace imp3d::kernels {

void min_slack_scalar(const LinearPair& k, std::span<const double> v_p,
                      std::span<const double> drive, std::span<double> out) {
  const double g_p[2] = {k.g_p_off, k.g_p_on};
  const double g_q[2] = {k.g_q_off, k.g_q_on};
  const bool resistive = k.g_l > 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double vp = v_p[i];
    const double inj = resistive ? k.g_l * drive[i] : drive[i];
    double worst = 0.0;
    bool first = true;
    for (int sp = 0; sp < 2; ++sp) {
      for (int sq = 0; sq < 2; ++sq) {
        const double den = g_p[sp] + g_q[sq] + k.g_l;
        const double u = (g_p[sp] * vp + inj) / den;
        const double dq = -u;
        const double dp = k.p_sign * (vp - u);
        const double q_slack = (sp == 0 && sq == 0) ? dq - k.q_set_max : k.q_set_min - dq;
        const double p_set = k.p_set_min - dp;
        const double p_reset = dp - k.p_reset_min;
        const double m = std::min(std::min(q_slack, p_set), p_reset);
        worst = first ? m : std::min(worst, m);
        first = false;
      }
    }
    out[i] = worst;
  }
}

void delta_sweep_scalar(double ratio, std::span<const double> g_l_over_g_on,
                        std::span<double> out) {
  const double g_off = 1.0 / ratio;
  const double num = 1.0 - g_off;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = num / (2.0 * g_l_over_g_on[i] + 3.0 + g_off);
  }
}

}  // namespace imp3d::kernels
