#pragma once

#include <string>

#include "mpiv/mpi.h"

namespace mpiv {

/// MPI directory layout: a `meta` text file (plane count, size, depth range,
/// reference camera) plus one 16-bit RGBA PNG per plane, back-to-front,
/// named plane_000.png, plane_001.png, ...
void save_mpi(const MultiplaneImage<float>& mpi, const std::string& dir);
MultiplaneImage<float> load_mpi(const std::string& dir);

}  // namespace mpiv
