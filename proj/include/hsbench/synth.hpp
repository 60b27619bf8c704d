#pragma once

#include <cstdint>

#include "hsbench/core.hpp"

namespace hsbench::synth {

/// Smooth three-channel sensitivity on `grid`: Gaussian lobes at roughly
/// 600 nm (plus a weak blue lobe), 535 nm and 455 nm, scaled so the largest
/// channel sum is 1.
CameraResponse default_css(const WavelengthGrid& grid = WavelengthGrid::standard());

/// Desk-scale scene: Voronoi patches of smooth material reflectances under
/// smooth shading. Samples are strictly positive and exactly representable
/// as f32, so they survive a BHSC round-trip unchanged.
HsiCube make_scene(std::size_t height, std::size_t width, const WavelengthGrid& grid, std::uint64_t seed,
                   std::size_t materials = 6);

}  // namespace hsbench::synth
