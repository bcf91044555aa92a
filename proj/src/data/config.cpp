#include "armid/data/config.hpp"

#include <cmath>

#include "armid/core/error.hpp"

namespace armid::data {

void DatasetConfig::validate() const {
  auto fail = [](const char* what) { throw Error(ErrorKind::Config, std::string("dataset config: ") + what); };
  if (seq_len < 2) fail("seq_len must be >= 2");
  if (stride < 1) fail("stride must be >= 1");
  if (ssr < 1) fail("ssr must be >= 1");
  if (ssr < stride && stride % ssr != 0) fail("stride must be divisible by ssr");
  if (!(resample_hz >= 0.0) || !std::isfinite(resample_hz)) fail("resample_hz must be >= 0");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) fail("train_fraction must be in (0, 1)");
}

}  // namespace armid::data
