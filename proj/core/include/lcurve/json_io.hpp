#pragma once

#include <string>

#include "lcurve/curve.hpp"
#include "lcurve/kernel.hpp"
#include "lcurve/spectrum.hpp"
#include "lcurve/target.hpp"

namespace lcurve {

// Compact JSON documents; doubles are written in shortest round-trip form.
std::string to_json(const NetworkArch& arch);
std::string to_json(const KernelSeries& ks);
std::string to_json(const Spectrum& sp);
std::string to_json(const SpectralTarget& tgt);

NetworkArch arch_from_json(const std::string& text);
KernelSeries kernel_series_from_json(const std::string& text);
Spectrum spectrum_from_json(const std::string& text);
SpectralTarget target_from_json(const std::string& text);

} // namespace lcurve
