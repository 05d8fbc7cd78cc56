#include "cavbec/error.hpp"

#include <cstdio>

namespace cavbec {

namespace {
std::string resonance_message(double omega) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "resonance singularity: (-i w I - K) is singular at omega = %.9g rad/s",
                omega);
  return buf;
}
}  // namespace

ResonanceSingularity::ResonanceSingularity(double omega)
    : NumericalError(resonance_message(omega)), omega_(omega) {}

}  // namespace cavbec
