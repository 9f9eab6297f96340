#pragma once

#include "smoe/image.hpp"

namespace smoe {

// Deterministic synthetic evaluation scene: smooth ramps, sharp disk and
// rectangle edges, a diagonal boundary, a soft blob and mild texture.
// Useful wherever a reproducible natural-image stand-in is needed.
GrayImage synthetic_scene(int size);

}  // namespace smoe
