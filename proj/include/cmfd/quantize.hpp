#ifndef CMFD_QUANTIZE_HPP
#define CMFD_QUANTIZE_HPP

#include <cmath>

#include "cmfd/errors.hpp"

namespace cmfd {

// Rounds to a fixed number of decimal places, half away from zero.
// Where the decimal grid is finer than the double ULP (|x|*10^places beyond
// 2^52) quantization cannot be represented and is the identity. The scaled
// rounding runs in long double so the half-away decision stays exact and the
// function is idempotent.
inline double quantize_decimals(double value, int places) {
  if (places < 0 || places > 18)
    throw precondition_error("decimal places out of range");
  if (!std::isfinite(value))
    throw precondition_error("cannot quantize a non-finite value");
  long double scale = 1.0L;
  for (int i = 0; i < places; ++i) scale *= 10.0L;
  const long double scaled = static_cast<long double>(value) * scale;
  if (fabsl(scaled) >= 4503599627370496.0L)  // 2^52
    return value;
  const long double rounded = roundl(scaled);
  const double q = static_cast<double>(rounded / scale);
  return q == 0.0 ? 0.0 : q;  // normalise -0
}

}  // namespace cmfd

#endif  // CMFD_QUANTIZE_HPP
