#include "ilora/lora.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ilora::link {

void LoraParams::validate() const {
  if (spreading_factor < 6 || spreading_factor > 12)
    throw std::invalid_argument("spreading factor must be 6..12");
  if (bandwidth_hz == 0) throw std::invalid_argument("bandwidth must be positive");
  if (coding_rate < 1 || coding_rate > 4) throw std::invalid_argument("coding rate must be 1..4");
  if (preamble_symbols < 0) throw std::invalid_argument("preamble must be non-negative");
}

Duration LoraParams::symbol_time() const {
  const double seconds = std::ldexp(1.0, spreading_factor) / static_cast<double>(bandwidth_hz);
  return from_seconds(seconds);
}

std::int64_t payload_symbols(std::size_t payload_bytes, const LoraParams& p) {
  const std::int64_t sf = p.spreading_factor;
  const std::int64_t numerator = 8 * static_cast<std::int64_t>(payload_bytes) - 4 * sf + 28 +
                                 (p.crc_on ? 16 : 0) - (p.explicit_header ? 0 : 20);
  const std::int64_t denominator = 4 * (sf - (p.low_data_rate_optimize ? 2 : 0));
  // integer ceil for positive numerators; non-positive clamps to zero
  const std::int64_t blocks = numerator > 0 ? (numerator + denominator - 1) / denominator : 0;
  return 8 + blocks * (p.coding_rate + 4);
}

Duration time_on_air(std::size_t payload_bytes, const LoraParams& p) {
  // symbol time = 2^SF / BW; preamble adds 4.25 symbols of sync
  const double t_sym = std::ldexp(1.0, p.spreading_factor) / static_cast<double>(p.bandwidth_hz);
  const double preamble = (p.preamble_symbols + 4.25) * t_sym;
  const double payload = static_cast<double>(payload_symbols(payload_bytes, p)) * t_sym;
  return from_seconds(preamble + payload);
}

}  // namespace ilora::link
