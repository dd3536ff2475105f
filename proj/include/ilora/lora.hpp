#pragma once

#include <cstddef>
#include <cstdint>

#include "ilora/types.hpp"

namespace ilora::link {

/// Radio settings. Defaults are the deployment configuration: 868 MHz, SF7,
/// 500 kHz, CR 4/5, 8-symbol preamble, explicit header, CRC on, LDRO off.
struct LoraParams {
  std::uint32_t frequency_hz{868'000'000};
  int spreading_factor{7};
  std::uint32_t bandwidth_hz{500'000};
  int coding_rate{1};  // 4/(4+cr)
  int preamble_symbols{8};
  bool explicit_header{true};
  bool crc_on{true};
  bool low_data_rate_optimize{false};

  void validate() const;
  Duration symbol_time() const;
};

/// Number of payload symbols (including the 8 fixed symbols) for a frame.
std::int64_t payload_symbols(std::size_t payload_bytes, const LoraParams& p);

/// Airtime of one frame, SX127x formula, rounded to the microsecond.
Duration time_on_air(std::size_t payload_bytes, const LoraParams& p);

}  // namespace ilora::link
